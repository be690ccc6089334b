"""Compiled vs. pure-Python kernel timings.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Prints one line per kernel and problem size with the best wall time of each
backend and the speedup. Results of both backends are checked for agreement
first.
"""
import argparse
import time

import numpy as np

from layerhom import _kernels_py

try:
    from layerhom import _kernels as _compiled
except ImportError:
    _compiled = None


def _best(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _cases(rng):
    for nc in (1_000, 20_000, 200_000):
        args = (rng.uniform(0.01, 0.1, nc), rng.uniform(0.01, 0.1, nc), rng.uniform(0, 2, nc),
                rng.uniform(0.1, 2, nc), rng.uniform(0, 2, nc))
        yield "q1_element_stiffness", nc, args
        yield "q1_element_mass", nc, args[:2] + (rng.uniform(0.5, 2, nc),)
    for batch, n in ((64, 16), (1024, 32), (8192, 64)):
        lower = rng.uniform(-1, 0, n)
        upper = np.roll(lower, -1)
        diag = 2.5 + rng.uniform(0, 1, n)
        yield "tridiag_solve", batch * n, (lower, diag, upper, rng.normal(size=(batch, n)))
        lo = rng.uniform(-1, 0, (batch, n))
        yield "tridiag_solve_batched", batch * n, (lo, 2.5 + rng.uniform(0, 1, (batch, n)),
                                                   np.roll(lo, -1, axis=1), rng.normal(size=(batch, n)))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if _compiled is None:
        print("compiled extension not built; only the Python backend is available")
    rng = np.random.default_rng(0)
    print(f"{'kernel':22s} {'size':>9s} {'python[s]':>11s} {'compiled[s]':>12s} {'speedup':>8s}")
    for name, size, kargs in _cases(rng):
        py = getattr(_kernels_py, name)
        t_py = _best(lambda: py(*kargs), args.repeat)
        if _compiled is None:
            print(f"{name:22s} {size:9d} {t_py:11.2e} {'-':>12s} {'-':>8s}")
            continue
        cf = getattr(_compiled, name)
        ref = py(*kargs)
        got = cf(*kargs)
        err = np.max(np.abs(ref - got)) / max(np.max(np.abs(ref)), 1e-300)
        if err > 1e-12:
            raise SystemExit(f"{name}: backends disagree (rel. diff {err:.1e})")
        t_c = _best(lambda: cf(*kargs), args.repeat)
        print(f"{name:22s} {size:9d} {t_py:11.2e} {t_c:12.2e} {t_py / t_c:8.2f}")


if __name__ == "__main__":
    main()
