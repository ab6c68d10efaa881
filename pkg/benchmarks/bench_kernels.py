"""Compare the compiled and numpy insertion kernels.

    python benchmarks/bench_kernels.py [--n 1000000] [--repeat 3]
"""
from __future__ import annotations

import argparse
import importlib
import time

import numpy as np

from kmvcount import _kernels_py
from kmvcount.hashing import UnitHash


def _best(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench(mod, xs: np.ndarray, k: int, m: int, single: int, repeat: int) -> dict[str, float]:
    def bulk():
        vals, counts = np.zeros((m, k)), np.zeros(m, dtype=np.int64)
        mod.insert_values(vals, counts, xs)

    def one_by_one():
        vals, counts = np.zeros((m, k)), np.zeros(m, dtype=np.int64)
        ins = mod.insert_value
        for x in xs[:single]:
            ins(vals, counts, float(x))

    return {
        "bulk ns/value": 1e9 * _best(bulk, repeat) / xs.size,
        "single ns/value": 1e9 * _best(one_by_one, repeat) / single,
    }


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--n", type=int, default=10**6, help="values per bulk run")
    ap.add_argument("--single", type=int, default=10**5, help="values per one-at-a-time run")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    mods = [_kernels_py]
    try:
        mods.insert(0, importlib.import_module("kmvcount._kernels"))
    except ImportError:
        print("compiled kernels not built; benchmarking the fallback only")

    xs = 1.0 - np.random.default_rng(0).random(args.n)
    for k, m in [(3, 64), (8, 128), (64, 16)]:
        print(f"k={k} m={m} n={args.n}")
        rows = {mod.BACKEND: bench(mod, xs, k, m, args.single, args.repeat) for mod in mods}
        for metric in next(iter(rows.values())):
            cells = "  ".join(f"{name}={r[metric]:9.1f}" for name, r in rows.items())
            print(f"  {metric:<16} {cells}")
        if len(rows) == 2:
            c, p = rows["cython"], rows["python"]
            print(f"  speedup          bulk x{p['bulk ns/value'] / c['bulk ns/value']:.1f}, "
                  f"single x{p['single ns/value'] / c['single ns/value']:.1f}")

    words = [b"w%d" % i for i in range(min(args.n, 2 * 10**5))]
    t = _best(lambda: UnitHash(0).many(words), args.repeat)
    print(f"hashing: {1e9 * t / len(words):.1f} ns/word (shared by both backends)")


if __name__ == "__main__":
    main()
