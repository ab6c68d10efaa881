"""Both kernel implementations against a brute-force oracle and each other."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import KERNELS

BACKEND_IDS = [mod.BACKEND for mod in KERNELS]


def oracle(xs, k, m):
    out = [[] for _ in range(m)]
    for x in sorted(set(xs)):
        i = min(int(x * m), m - 1)
        if len(out[i]) < k:
            out[i].append(x)
    return out


def state(k, m):
    return np.zeros((m, k)), np.zeros(m, dtype=np.int64)


def rows(vals, counts):
    return [list(vals[i, : counts[i]]) for i in range(len(counts))]


units = st.floats(min_value=2.0**-64, max_value=1.0, allow_nan=False)
# a small pool forces duplicates
pooled = st.lists(st.sampled_from([0.1, 0.2, 0.25, 0.3, 0.5, 0.7, 0.75, 0.9, 1.0]), max_size=40)


@pytest.mark.parametrize("kernels", KERNELS, ids=BACKEND_IDS)
@settings(max_examples=300, deadline=None)
@given(xs=st.lists(units, max_size=120) | pooled, k=st.integers(1, 6), m=st.integers(1, 9))
def test_single_inserts_match_oracle(kernels, xs, k, m):
    vals, counts = state(k, m)
    for x in xs:
        kernels.insert_value(vals, counts, x)
    assert rows(vals, counts) == oracle(xs, k, m)


@pytest.mark.parametrize("kernels", KERNELS, ids=BACKEND_IDS)
@settings(max_examples=300, deadline=None)
@given(xs=st.lists(units, max_size=120) | pooled, split=st.integers(0, 120), k=st.integers(1, 6), m=st.integers(1, 9))
def test_batch_inserts_match_oracle(kernels, xs, split, k, m):
    vals, counts = state(k, m)
    kernels.insert_values(vals, counts, np.array(xs[:split], dtype=np.float64))
    kernels.insert_values(vals, counts, np.array(xs[split:], dtype=np.float64))
    assert rows(vals, counts) == oracle(xs, k, m)


def test_insert_value_reports_change(kernels):
    vals, counts = state(2, 1)
    assert kernels.insert_value(vals, counts, 0.9)
    assert kernels.insert_value(vals, counts, 0.3)
    assert kernels.insert_value(vals, counts, 0.5)
    assert not kernels.insert_value(vals, counts, 0.3)
    assert not kernels.insert_value(vals, counts, 0.95)
    assert rows(vals, counts) == [[0.3, 0.5]]


@pytest.mark.skipif(len(KERNELS) < 2, reason="compiled kernels not built")
def test_backends_agree_bit_for_bit():
    rng = np.random.default_rng(5)
    a, b = KERNELS
    for k, m in [(1, 3), (3, 64), (8, 128), (17, 5)]:
        xs = 1.0 - rng.random(50_000)
        va, ca = state(k, m)
        vb, cb = state(k, m)
        a.insert_values(va, ca, xs)
        b.insert_values(vb, cb, xs)
        assert np.array_equal(ca, cb)
        assert va.tobytes() == vb.tobytes()


def test_env_forces_fallback():
    import os
    import subprocess
    import sys

    env = dict(os.environ, KMVCOUNT_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import kmvcount; print(kmvcount.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
