"""Timing comparison of the compiled kernels against the pure-numpy fallbacks.

Run:  python benchmarks/bench_kernels.py
The numpy path can also be forced package-wide with LINKGCN_PURE_NUMPY=1.
"""

import time

import numpy as np

from linkgcn import kernels


def timeit(fn, *args, repeat: int = 5) -> float:
    fn(*args)  # warm up (JIT compile / cache load)
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def main() -> None:
    rng = np.random.default_rng(0)
    print(f"numba path enabled: {kernels.NUMBA_ENABLED}")
    print()
    print(f"{'kernel':<16} {'size':<14} {'numpy (ms)':>12} {'numba (ms)':>12} {'speedup':>9}")

    for n, d in [(1_000, 16), (10_000, 64), (50_000, 256)]:
        x = rng.normal(size=(n, d))
        t_np = timeit(kernels.sq_dists_numpy, x, 0)
        row = f"{'sq_dists':<16} {f'{n}x{d}':<14} {t_np * 1e3:>12.3f}"
        if kernels.NUMBA_ENABLED:
            t_nb = timeit(kernels.sq_dists, x, 0)
            row += f" {t_nb * 1e3:>12.3f} {t_np / t_nb:>8.1f}x"
        print(row)

    for n, r in [(60, 10), (200, 10), (500, 20)]:
        x = rng.normal(size=(n, 16))
        t_np = timeit(kernels.rnn_adjacency_numpy, x, r)
        row = f"{'rnn_adjacency':<16} {f'{n} nodes r={r}':<14} {t_np * 1e3:>12.3f}"
        if kernels.NUMBA_ENABLED:
            t_nb = timeit(kernels.rnn_adjacency, x, r)
            row += f" {t_nb * 1e3:>12.3f} {t_np / t_nb:>8.1f}x"
        print(row)

    if kernels.NUMBA_ENABLED:
        # both paths must agree exactly
        x = rng.normal(size=(300, 8))
        assert np.array_equal(kernels.rnn_adjacency(x, 7), kernels.rnn_adjacency_numpy(x, 7))
        np.testing.assert_allclose(
            kernels.sq_dists(x, 3), kernels.sq_dists_numpy(x, 3), atol=1e-12, rtol=0
        )
        print("\npath agreement check: OK")


if __name__ == "__main__":
    main()
