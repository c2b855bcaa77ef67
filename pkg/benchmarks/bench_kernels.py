"""Compiled kernels against the numpy fallback, plus one end-to-end search.

    python3 benchmarks/bench_kernels.py [--size N] [--repeat R]
"""
import argparse
import time
from fractions import Fraction

import numpy as np

from homcantor import _kernels_py as py
from homcantor import kernels
from homcantor.ifs import ConstantsConfig, middle_alpha
from homcantor.pipeline import RunConfig, build_candidate
from homcantor.search import SearchEngine, search_omega


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    lo = np.sort(rng.integers(0, 10**12, args.size))
    hi = lo + rng.integers(0, 10**7, args.size)
    pts = np.sort(rng.integers(0, 10**12, args.size))
    m_lo, m_hi = kernels.merge_sorted(lo, hi)

    print(f"backend at import: {kernels.BACKEND}")
    print(f"{'kernel':<16}{'compiled':>12}{'numpy':>12}{'speedup':>10}")
    c = getattr(kernels, "_c", None)
    cases = {
        "merge_sorted": lambda m: m.merge_sorted(lo, hi),
        "covered_mask": lambda m: m.covered_mask(pts, m_lo, m_hi),
        "reach_witness": lambda m: m.reach_witness(pts, m_lo, m_hi),
    }
    for name, fn in cases.items():
        tp = best_of(lambda: fn(py), args.repeat)
        if c is None:
            print(f"{name:<16}{'-':>12}{tp:>11.4f}s{'-':>10}")
            continue
        tc = best_of(lambda: fn(c), args.repeat)
        print(f"{name:<16}{tc:>11.4f}s{tp:>11.4f}s{tp / tc:>9.1f}x")

    cfg = RunConfig(middle_alpha(Fraction(2, 5)), refine=3,
                    constants=ConstantsConfig(), seed=0, workers=1)
    cand = build_candidate(cfg)[-1]
    engine = SearchEngine(cand, 3 + 2 * cand.s0)
    t = time.perf_counter()
    res = search_omega(cand, 50, 0, 3 + 2 * cand.s0, 1, engine)
    print(f"search_omega 2/5 refined x3: {engine.n_points} net points, "
          f"{res.stats.trials} draws, {time.perf_counter() - t:.2f}s")


if __name__ == "__main__":
    main()
