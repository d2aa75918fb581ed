"""Time the compiled and pure-Python Dormand-Prince kernels on the same runs.

    python3 benchmarks/bench_kernels.py [--repeat N]

Both kernels take identical steps, so the script also checks that the
accepted step sequences agree to the last bit.
"""

import argparse
import math
import time

import numpy as np

from fieldline import _kernels_py

try:
    from fieldline import _kernels
except ImportError:  # extension not built
    _kernels = None

CASES = {
    # name: (code, p0, p1, axis, state0, t_end)
    "uniform circle": (0, 1.0, 0.0, 0, (0.0, 1.0, 1.0, 0.0), 50.0),
    "decaying field": (1, 0.1, 0.0, 0, (0.0, -0.80444531, 0.89445438, 0.44715921), 50.0),
    "radial exp": (3, 1.0, 0.0, 2, (1.0, 0.0, 0.0, 0.7), 50.0),
}


def _run(fn, case, rtol, atol, repeat):
    code, p0, p1, axis, state0, t_end = case
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(code, p0, p1, axis, 1.0, state0, t_end, rtol, atol, 0.0, 10_000_000)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--rtol", type=float, default=1e-12)
    ap.add_argument("--atol", type=float, default=1e-14)
    args = ap.parse_args(argv)
    if _kernels is None:
        print("compiled kernel not built; only the Python kernel is available")
    print(f"{'case':<16} {'steps':>7} {'python [s]':>11} {'cython [s]':>11} {'speedup':>8}  identical")
    for name, case in CASES.items():
        tp, (ts, ys, _, st) = _run(_kernels_py.dopri5, case, args.rtol, args.atol, args.repeat)
        if _kernels is None:
            print(f"{name:<16} {len(ts) - 1:>7} {tp:>11.4f} {'-':>11} {'-':>8}  -")
            continue
        tc, (ts2, ys2, _, st2) = _run(_kernels.dopri5, case, args.rtol, args.atol, args.repeat)
        same = st == st2 and np.array_equal(ts, ts2) and np.array_equal(ys, ys2)
        print(f"{name:<16} {len(ts) - 1:>7} {tp:>11.4f} {tc:>11.4f} {tp / tc:>7.1f}x  {same}")


if __name__ == "__main__":
    main()
