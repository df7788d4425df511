"""Compare the compiled kernels against the numpy fallback.

Run with ``python benchmarks/bench_kernels.py``.  Prints the best-of-N wall
time of each kernel on both backends, the speed-up, and the largest
relative disagreement between the two outputs.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from chiral_skyrmion import _fallback
from chiral_skyrmion._backend import I1E, J1, K1E

try:
    from chiral_skyrmion import _kernels
except ImportError:
    _kernels = None


def cases(n: int):
    rng = np.random.default_rng(0)
    x = np.geomspace(1e-4, 60.0, n)
    r = np.geomspace(1e-4, 2e3, n)
    ds = float(np.log(r[1] / r[0]))
    beta = 0.05
    g = r * r * np.exp(-r)
    diag = 2.0 + rng.random(n)
    off = -np.ones(n)
    rho = np.linspace(0.01, 10.0, 256)
    return {
        "bessel J1": lambda k: k.bessel_array(J1, x),
        "bessel K1e": lambda k: k.bessel_array(K1E, x),
        "thomas": lambda k: k.thomas(off, diag, off, g)[0],
        "separable_sweep": lambda k: k.separable_sweep(
            k.bessel_array(I1E, beta * r), k.bessel_array(K1E, beta * r), beta * r, g, ds, True),
        "hankel_matvec": lambda k: k.hankel_matvec(r, g, rho),
    }


def best(fn, repeat: int) -> float:
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=4000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _kernels is None:
        print("compiled extension not built; only the fallback is available")
    print(f"{'kernel':<18} {'python [ms]':>12} {'compiled [ms]':>14} {'speed-up':>9} {'max rel diff':>13}")
    for name, fn in cases(args.n).items():
        tp = best(lambda: fn(_fallback), args.repeat) * 1e3
        if _kernels is None:
            print(f"{name:<18} {tp:>12.3f} {'-':>14} {'-':>9} {'-':>13}")
            continue
        tc = best(lambda: fn(_kernels), args.repeat) * 1e3
        a, b = np.asarray(fn(_fallback)), np.asarray(fn(_kernels))
        diff = float(np.max(np.abs(a - b) / np.maximum(np.abs(a), 1e-300)))
        print(f"{name:<18} {tp:>12.3f} {tc:>14.3f} {tp / tc:>9.1f} {diff:>13.2e}")


if __name__ == "__main__":
    main()
