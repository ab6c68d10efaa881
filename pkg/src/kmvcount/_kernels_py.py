"""Pure-Python/numpy fallback for the insertion kernels.

Same state layout and results as the compiled ``_kernels`` module; the
stored set is the k smallest distinct values per bucket, which does not
depend on insertion order, so both paths agree bit for bit.
"""
from __future__ import annotations

import numpy as np

BACKEND = "python"


def _bucket(x: float, m: int) -> int:
    i = int(x * m)
    return m - 1 if i >= m else i


def insert_value(vals: np.ndarray, counts: np.ndarray, x: float) -> bool:
    """Insert one unit value; return True if the store changed."""
    m, k = vals.shape
    i = _bucket(x, m)
    c = int(counts[i])
    row = vals[i]
    if c == k and x >= row[k - 1]:
        return False
    lo = int(np.searchsorted(row[:c], x, side="left"))
    if lo < c and row[lo] == x:
        return False
    if c < k:
        row[lo + 1 : c + 1] = row[lo:c].copy()
        counts[i] = c + 1
    else:
        row[lo + 1 : k] = row[lo : k - 1].copy()
    row[lo] = x
    return True


def insert_values(vals: np.ndarray, counts: np.ndarray, xs: np.ndarray) -> None:
    """Insert a batch of unit values (vectorised merge, order-free)."""
    xs = np.asarray(xs, dtype=np.float64)
    if xs.size == 0:
        return
    m, k = vals.shape
    idx = np.minimum((xs * m).astype(np.int64), m - 1)
    # values at or above a full bucket's maximum can never enter it
    limit = np.where(counts == k, vals[:, k - 1], np.inf)
    xs = xs[xs < limit[idx]]
    if xs.size == 0:
        return
    held = np.arange(k) < counts[:, None]
    pool = np.unique(np.concatenate([vals[held], xs]))
    idx = np.minimum((pool * m).astype(np.int64), m - 1)
    starts = np.searchsorted(idx, np.arange(m), side="left")
    rank = np.arange(pool.size) - starts[idx]
    keep = rank < k
    vals[idx[keep], rank[keep]] = pool[keep]
    counts[:] = np.bincount(idx[keep], minlength=m)
