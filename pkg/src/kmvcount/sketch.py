"""Bucketed k-minimum-values sketch.

The unit interval is cut into ``m`` buckets ``[i/m, (i+1)/m)``.  Each bucket
keeps the ``k`` smallest distinct hashed values routed to it, so the whole
sketch stores at most ``k * m`` floats regardless of stream length.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from . import _backend
from .hashing import HASH_BLAKE2B_64, UnitHash

MAGIC = b"KMVC"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sBBIIQ")
_COUNT = struct.Struct("<I")
_U32_MAX = 2**32 - 1


class SketchFormatError(ValueError):
    """Raised when a serialized sketch cannot be decoded."""


class ConfigMismatchError(ValueError):
    """Raised when combining sketches built with different parameters."""


@dataclass(frozen=True)
class SketchConfig:
    k: int = 8
    m: int = 128
    seed: int = 0
    hash_id: int = HASH_BLAKE2B_64

    def __post_init__(self) -> None:
        if self.k < 1 or self.m < 1:
            raise ValueError(f"k and m must be positive, got k={self.k}, m={self.m}")
        if self.k * self.m < 3:
            raise ValueError(f"k*m must be at least 3, got {self.k * self.m}")
        if self.k > _U32_MAX or self.m > _U32_MAX:
            raise ValueError("k and m must fit in 32 bits")
        # validates seed and hash id
        UnitHash(self.seed, self.hash_id)

    @property
    def memory(self) -> int:
        """Maximum number of stored values, ``k * m``."""
        return self.k * self.m


def bucket_index(x: float, m: int) -> int:
    """Zero-based bucket of a unit value; ``x = 1.0`` goes to the last bucket."""
    i = int(x * m)
    return m - 1 if i >= m else i


@dataclass(frozen=True, eq=False)
class KthValues:
    """Renormalized k-th minimum of every bucket.

    ``values[i]`` is ``m * x - i`` for the k-th smallest value ``x`` of
    bucket i, or exactly 1.0 when the bucket holds fewer than k values.
    ``sum_s`` is their left-to-right sum.
    """

    values: np.ndarray
    k: int
    sum_s: float

    @property
    def m(self) -> int:
        return int(self.values.shape[0])

    @classmethod
    def from_entries(cls, entries: Iterable[float], k: int) -> "KthValues":
        values = np.asarray(list(entries), dtype=np.float64)
        if values.ndim != 1 or values.size == 0:
            raise ValueError("entries must be a non-empty 1-d sequence")
        if k < 1:
            raise ValueError("k must be positive")
        if not np.all(values > 0) or not np.all(np.isfinite(values)):
            raise ValueError("entries must be positive and finite")
        values.setflags(write=False)
        return cls(values, k, left_sum(values))


def left_sum(values: np.ndarray) -> float:
    """Sequential left-to-right sum (bit-reproducible, unlike pairwise sum)."""
    return float(np.cumsum(values)[-1])


class Sketch:
    """One-pass, fixed-memory distinct-element sketch.

    >>> sk = Sketch(SketchConfig(k=3, m=4, seed=7))
    >>> sk.insert(b"apple")
    >>> sk.stored
    1

    Equality compares configuration and stored values only; ``items_seen``
    is a diagnostic counter and is not serialized.
    """

    def __init__(self, config: SketchConfig) -> None:
        self.config = config
        self.hasher = UnitHash(config.seed, config.hash_id)
        self._vals = np.zeros((config.m, config.k), dtype=np.float64)
        self._counts = np.zeros(config.m, dtype=np.int64)
        self.items_seen = 0

    # -- ingestion -------------------------------------------------------
    def insert(self, word: bytes | str) -> None:
        """Hash ``word`` and insert it."""
        self.items_seen += 1
        _backend.insert_value(self._vals, self._counts, self.hasher(word))

    def insert_many(self, words: Iterable[bytes | str]) -> None:
        xs = self.hasher.many(words)
        self.items_seen += int(xs.size)
        _backend.insert_values(self._vals, self._counts, xs)

    def insert_value(self, x: float) -> None:
        """Insert an already-hashed value in (0, 1]."""
        x = float(x)
        if not 0.0 < x <= 1.0:
            raise ValueError(f"unit value must lie in (0, 1], got {x!r}")
        self.items_seen += 1
        _backend.insert_value(self._vals, self._counts, x)

    def insert_values(self, xs: np.ndarray) -> None:
        """Insert a batch of already-hashed values in (0, 1]."""
        xs = np.ascontiguousarray(xs, dtype=np.float64).reshape(-1)
        if not np.all((xs > 0.0) & (xs <= 1.0)):
            raise ValueError("unit values must lie in (0, 1]")
        self.items_seen += int(xs.size)
        _backend.insert_values(self._vals, self._counts, xs)

    # -- queries ---------------------------------------------------------
    @property
    def stored(self) -> int:
        return int(self._counts.sum())

    @property
    def bucket_counts(self) -> np.ndarray:
        out = self._counts.copy()
        out.setflags(write=False)
        return out

    def bucket(self, i: int) -> np.ndarray:
        """Raw stored values of zero-based bucket ``i``, ascending."""
        out = self._vals[i, : self._counts[i]].copy()
        out.setflags(write=False)
        return out

    def buckets(self) -> list[np.ndarray]:
        return [self.bucket(i) for i in range(self.config.m)]

    def is_covered(self) -> bool:
        """True when every bucket holds k values."""
        return bool(np.all(self._counts == self.config.k))

    def kth_values(self) -> KthValues:
        k, m = self.config.k, self.config.m
        full = self._counts == k
        kth = self._vals[:, k - 1]
        entries = np.ones(m, dtype=np.float64)
        renorm = kth[full] * m - np.arange(m, dtype=np.float64)[full]
        # a k-th minimum sitting exactly on its bucket's left edge
        entries[full] = np.maximum(renorm, np.finfo(np.float64).tiny)
        entries.setflags(write=False)
        return KthValues(entries, k, left_sum(entries))

    # -- combination -----------------------------------------------------
    def copy(self) -> "Sketch":
        out = Sketch(self.config)
        out._vals[...] = self._vals
        out._counts[...] = self._counts
        out.items_seen = self.items_seen
        return out

    def merge(self, other: "Sketch") -> "Sketch":
        """Sketch of the union of both streams; neither input is modified."""
        if self.config != other.config:
            raise ConfigMismatchError(f"cannot merge {self.config} with {other.config}")
        out = self.copy()
        held = np.arange(self.config.k) < other._counts[:, None]
        _backend.insert_values(out._vals, out._counts, np.ascontiguousarray(other._vals[held]))
        out.items_seen = self.items_seen + other.items_seen
        return out

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Sketch):
            return NotImplemented
        if self.config != other.config or not np.array_equal(self._counts, other._counts):
            return False
        held = np.arange(self.config.k) < self._counts[:, None]
        a, b = self._vals[held], other._vals[held]
        return a.tobytes() == b.tobytes()

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        c = self.config
        return f"Sketch(k={c.k}, m={c.m}, seed={c.seed}, stored={self.stored}, items_seen={self.items_seen})"

    # -- persistence -----------------------------------------------------
    def to_bytes(self) -> bytes:
        return serialize(self)

    @classmethod
    def from_bytes(cls, data: bytes) -> "Sketch":
        return deserialize(data)


def sketch_new(config: SketchConfig) -> Sketch:
    return Sketch(config)


def merge(a: Sketch, b: Sketch) -> Sketch:
    return a.merge(b)


def serialize(sk: Sketch) -> bytes:
    """Encode as ``KMVC | version | hash id | k | m | seed | buckets`` (little-endian)."""
    c = sk.config
    parts = [_HEADER.pack(MAGIC, FORMAT_VERSION, c.hash_id, c.k, c.m, c.seed)]
    for i in range(c.m):
        n = int(sk._counts[i])
        parts.append(_COUNT.pack(n))
        parts.append(sk._vals[i, :n].astype("<f8").tobytes())
    return b"".join(parts)


def deserialize(data: bytes) -> Sketch:
    data = bytes(data)
    if len(data) < _HEADER.size:
        raise SketchFormatError("truncated header")
    magic, version, hash_id, k, m, seed = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise SketchFormatError(f"bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise SketchFormatError(f"unsupported format version {version}")
    try:
        config = SketchConfig(k=k, m=m, seed=seed, hash_id=hash_id)
    except ValueError as exc:
        raise SketchFormatError(str(exc)) from exc
    sk = Sketch(config)
    pos = _HEADER.size
    for i in range(m):
        if pos + _COUNT.size > len(data):
            raise SketchFormatError(f"truncated at bucket {i}")
        (n,) = _COUNT.unpack_from(data, pos)
        pos += _COUNT.size
        if n > k:
            raise SketchFormatError(f"bucket {i} holds {n} values, more than k={k}")
        end = pos + 8 * n
        if end > len(data):
            raise SketchFormatError(f"truncated in bucket {i}")
        row = np.frombuffer(data, dtype="<f8", count=n, offset=pos).astype(np.float64)
        pos = end
        if n:
            if not np.all((row > 0.0) & (row <= 1.0)):
                raise SketchFormatError(f"bucket {i} holds values outside (0, 1]")
            idx = np.minimum((row * m).astype(np.int64), m - 1)
            if np.any(idx != i):
                raise SketchFormatError(f"bucket {i} holds values outside its interval")
            if np.any(np.diff(row) <= 0):
                raise SketchFormatError(f"bucket {i} values are not strictly ascending")
        sk._vals[i, :n] = row
        sk._counts[i] = n
    if pos != len(data):
        raise SketchFormatError(f"{len(data) - pos} trailing bytes")
    return sk
