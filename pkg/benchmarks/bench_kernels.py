#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-NumPy fallback.

Covers the three hot paths: the entry-wise posterior denoiser (inner loop of
message-passing equalization), the MSE-function quadratures driving the
fixed-point solver and rate searches, and the mutual-information quadrature.

Run from the repository root after building the extension:

    python benchmarks/bench_kernels.py
"""

import os
import sys
import time

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), os.pardir, "src"))

from dbp import _kernels_py, kernels, make_constellation  # noqa: E402

try:
    from dbp import _kernels as _compiled
except ImportError:
    _compiled = None


def timeit(fn, *args, min_seconds=0.4):
    fn(*args)  # warm up
    n, elapsed = 0, 0.0
    while elapsed < min_seconds:
        t0 = time.perf_counter()
        fn(*args)
        elapsed += time.perf_counter() - t0
        n += 1
    return elapsed / n


def main():
    if _compiled is None:
        print("compiled extension not available; build it with "
              "`python setup.py build_ext --inplace` (or pip install -e .)")
        return 1

    qam16 = make_constellation("qam16")
    qam64 = make_constellation("qam64")
    rng = np.random.default_rng(0)
    z = np.ascontiguousarray(rng.standard_normal(100_000)
                             + 1j * rng.standard_normal(100_000))
    nodes32, weights32 = kernels.gauss_hermite(32)
    nodes2k, weights2k = kernels.gauss_hermite(2048)

    cases = [
        ("posterior mean/var, 1e5 entries, 16-QAM",
         lambda impl: impl.posterior_mean_var(z, 0.1, qam16.symbols)),
        ("posterior mean/var, 1e5 entries, 64-QAM",
         lambda impl: impl.posterior_mean_var(z, 0.1, qam64.symbols)),
        ("denoiser MSE, 2-D order 32, 16-QAM",
         lambda impl: impl.lama_mse(0.1, qam16.symbols, nodes32, weights32)),
        ("denoiser MSE, factorized order 2048, 64-QAM",
         lambda impl: impl.lama_mse_pam(0.1, qam64.pam_levels, nodes2k, weights2k)),
        ("mutual information, order 32, 16-QAM",
         lambda impl: impl.mi_awgn(0.1, qam16.symbols, nodes32, weights32)),
    ]

    print(f"{'kernel':<46}{'python':>12}{'compiled':>12}{'speedup':>10}")
    for name, call in cases:
        t_py = timeit(call, _kernels_py)
        t_c = timeit(call, _compiled)
        print(f"{name:<46}{t_py * 1e3:>10.2f}ms{t_c * 1e3:>10.2f}ms"
              f"{t_py / t_c:>9.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
