"""Compare the compiled kernel loops with the numpy fallback.

Run with ``python3 benchmarks/bench_kernels.py [--repeat N]``.  Both
implementations are imported directly, so the selected backend does not
matter.  Each row reports the best of ``repeat`` timings and the max
relative difference between the two results.
"""

import argparse
import time

import numpy as np

from tpflow import _kernels_np
from tpflow.kernels import _param_nodes, sqrt_nnr

try:
    from tpflow import _ext
except ImportError:  # extension not built
    _ext = None


def best_of(fn, repeat):
    best, out = np.inf, None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def rel(a, b):
    return float(np.abs(a - b).max() / np.abs(b).max())


def cases(rng):
    u, w = _param_nodes()
    X = rng.uniform(-8, 8, size=(2000, 3))
    om, lam = 2.0, 1.0
    yield "param_mode_kernel  2000 pts", lambda m: m.param_mode_kernel(X, lam, om, u, w, False)[0]
    yield "param_mode_kernel  2000 pts +grad", lambda m: m.param_mode_kernel(X, lam, om, u, w, True)[1]
    Y = rng.uniform(-6, 6, size=(100_000, 3))
    W = rng.uniform(0, 1, size=100_000)
    kap = complex(sqrt_nnr(1j * om + 0.25 * lam**2))
    x = np.array([1.5, -0.7, 0.4])
    yield "conv_accumulate  100k nodes", lambda m: m.conv_accumulate(x, Y, W, kap, 0.5 * lam, 6, False)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    if _ext is None:
        print("compiled extension not available; numpy timings only")
    print(f"{'case':36s} {'cython [s]':>11s} {'numpy [s]':>10s} {'speedup':>8s} {'rel diff':>9s}")
    for name, fn in cases(rng):
        tn, rn = best_of(lambda: fn(_kernels_np), args.repeat)
        if _ext is None:
            print(f"{name:36s} {'-':>11s} {tn:10.4f}")
            continue
        tc, rc = best_of(lambda: fn(_ext), args.repeat)
        print(f"{name:36s} {tc:11.4f} {tn:10.4f} {tn / tc:8.2f} {rel(rc, rn):9.1e}")


if __name__ == "__main__":
    main()
