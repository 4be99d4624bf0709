"""Compare the compiled scoring kernels against the pure-Python reference.

Run as: python3 benchmarks/bench_kernels.py
"""

from __future__ import annotations

import timeit

import numpy as np

from heliocast.kernels import BACKEND, _ref

try:
    from heliocast.kernels import _fast
except ImportError:
    _fast = None


def bench(label, func, *args, repeat=5, number=20):
    best = min(timeit.repeat(lambda: func(*args), repeat=repeat, number=number)) / number
    print(f"  {label:<12} {best * 1e3:8.3f} ms")
    return best


def main():
    rng = np.random.default_rng(0)
    print(f"active backend: {BACKEND}")

    m = 5000
    values = np.sort(rng.gamma(2.0, 100.0, size=m))
    print(f"\nmean_pairwise_abs, m={m}")
    t_ref = bench("reference", _ref.mean_pairwise_abs, values)
    if _fast is not None:
        t_fast = bench("compiled", _fast.mean_pairwise_abs, values)
        assert np.isclose(_ref.mean_pairwise_abs(values), _fast.mean_pairwise_abs(values))
        print(f"  speedup      {t_ref / t_fast:8.1f}x")

    n, horizon = 1001, 24
    curves = rng.gamma(2.0, 100.0, size=(n, horizon))
    print(f"\nband_depth, {n} curves x {horizon} points")
    t_ref = bench("reference", _ref.band_depth, curves, number=3)
    if _fast is not None:
        t_fast = bench("compiled", _fast.band_depth, curves, number=3)
        assert np.allclose(_ref.band_depth(curves), _fast.band_depth(curves))
        print(f"  speedup      {t_ref / t_fast:8.1f}x")

    if _fast is None:
        print("\ncompiled backend unavailable; reference timings only")


if __name__ == "__main__":
    main()
