"""Compiled vs pure-Python kernels: reduced-form enumeration, short vectors and
theta counts.  Checks that both backends agree before timing them.

    python3 benchmarks/bench_kernels.py [--repeat 3]
"""

import argparse
import time

from arborp import _kernels_py as pure
from arborp import kernels

try:
    from arborp import _kernels as compiled
except ImportError:  # extension not built
    compiled = None

GROSS_11 = [[6, -2, -2], [-2, 30, -14], [-2, -14, 30]]
HURWITZ = [[2, 0, 0, 1], [0, 2, 0, 1], [0, 0, 2, 1], [1, 1, 1, 2]]

CASES = [
    ("reduced_forms d=-1000003", "reduced_forms", (-1000003,)),
    ("reduced_forms d=-10000019", "reduced_forms", (-10000019,)),
    ("short_vectors Hurwitz <= 200", "short_vectors", (HURWITZ, 200)),
    ("theta_counts Gross(11) <= 20000", "theta_counts", (GROSS_11, 20000)),
]


def best_of(fn, args, repeat):
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    print(f"selected backend: {kernels.BACKEND}")
    if compiled is None:
        print("compiled extension unavailable; timing the pure path only")
    print(f"{'case':36s} {'pure (s)':>10s} {'compiled (s)':>13s} {'speedup':>8s}")
    for label, name, fargs in CASES:
        tp, op = best_of(getattr(pure, name), fargs, args.repeat)
        if compiled is None:
            print(f"{label:36s} {tp:10.4f} {'-':>13s} {'-':>8s}")
            continue
        tc, oc = best_of(getattr(compiled, name), fargs, args.repeat)
        if list(op) != list(oc):
            raise SystemExit(f"backends disagree on {label}")
        print(f"{label:36s} {tp:10.4f} {tc:13.4f} {tp / tc:7.1f}x")


if __name__ == "__main__":
    main()
