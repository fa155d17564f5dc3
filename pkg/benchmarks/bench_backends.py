"""Timing comparison of the JIT shooting kernel against the pure-numpy path.

Run:  python benchmarks/bench_backends.py
The numpy path is the one selected by MEMSFOLD_DISABLE_NUMBA=1.
"""
import time

import numpy as np

from memsfold import backend
from memsfold.model import ModelParams
from memsfold.shooting import find_solutions, residual


def time_call(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    p = ModelParams(eps=0.05, lam=0.07)
    cases = [("residual lower branch", lambda be: residual(p, -0.1, backend_override=be), 20),
             ("residual middle branch", lambda be: residual(p, -1.09, backend_override=be), 20),
             ("residual near-critical", lambda be: residual(p, -1.3141, backend_override=be), 5)]

    if not backend.HAVE_NUMBA:
        print("numba not installed; only the numpy path is available")
        return

    t0 = time.perf_counter()
    residual(p, -1.0, backend_override="numba")
    print(f"kernel warm-up (JIT/cache load): {time.perf_counter() - t0:.2f} s\n")
    print(f"{'case':28s} {'numba':>10s} {'numpy':>10s} {'speedup':>9s}")
    for name, fn, rep in cases:
        ta = time_call(lambda: fn("numba"), rep)
        tb = time_call(lambda: fn("numpy"), max(rep // 4, 2))
        print(f"{name:28s} {ta * 1e3:9.3f}ms {tb * 1e3:9.3f}ms {tb / ta:8.1f}x")

    for be in ("numba", "numpy"):
        t0 = time.perf_counter()
        sols = find_solutions(p, backend_override=be)
        dt = time.perf_counter() - t0
        print(f"find_solutions(eps=0.05, lam=0.07) [{be:5s}]: "
              f"{dt:6.2f} s, {len(sols)} solutions")

    ra = residual(p, -1.09, backend_override="numba")
    rb = residual(p, -1.09, backend_override="numpy")
    print(f"\nbackend agreement on the residual: |diff| = {abs(ra - rb):.2e}")


if __name__ == "__main__":
    main()
