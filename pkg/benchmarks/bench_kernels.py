#!/usr/bin/env python3
"""Time the numba-jitted kernels against their pure-NumPy fallbacks.

Run from the repository root:

    python3 benchmarks/bench_kernels.py

(GRAPHONLAB_NO_NUMBA only affects which backend the library *uses*; this
script always times both when numba is importable.)
"""

import time

import numpy as np

from graphonlab import _kernels

CASES = [
    ("uniforms 1e6", "uniforms_at", lambda: (np.uint64(7), np.arange(1_000_000, dtype=np.uint64))),
    ("uniforms 1e7", "uniforms_at", lambda: (np.uint64(7), np.arange(10_000_000, dtype=np.uint64))),
    ("cut enum n=16", "enum_best_mask", lambda: (_signed(16),)),
    ("cut enum n=20", "enum_best_mask", lambda: (_signed(20),)),
    ("altmax n=64 r=50", "altmax_best_rows", lambda: (_signed(64), 50, np.uint64(7))),
    ("altmax n=200 r=50", "altmax_best_rows", lambda: (_signed(200), 50, np.uint64(7))),
]


def _signed(n):
    u = _kernels._uniforms_at_np(np.uint64(n), np.arange(n * n, dtype=np.uint64))
    m = 2.0 * u.reshape(n, n) - 1.0
    return np.ascontiguousarray(0.5 * (m + m.T))


def _time(fn, args, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    backends = list(_kernels.BACKENDS)
    print(f"available backends: {', '.join(backends)}")
    if "numba" in backends:  # compile before timing
        for name, kernel, make in CASES:
            args = make()
            small = tuple(a[:4] if isinstance(a, np.ndarray) and a.ndim == 1 and "uniform" in name
                          else a for a in args)
            _kernels.BACKENDS["numba"][kernel](*small)
    header = f"{'case':<20}" + "".join(f"{b:>12}" for b in backends)
    if len(backends) > 1:
        header += f"{'speedup':>10}"
    print(header)
    for name, kernel, make in CASES:
        args = make()
        times = [_time(_kernels.BACKENDS[b][kernel], args) for b in backends]
        row = f"{name:<20}" + "".join(f"{t * 1e3:>10.2f}ms" for t in times)
        if len(times) > 1 and times[-1] > 0:
            row += f"{times[0] / times[-1]:>9.1f}x" if backends[0] == "numpy" else ""
        print(row)


if __name__ == "__main__":
    main()
