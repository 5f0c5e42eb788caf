"""Time the compiled kernels against the NumPy fallback.

Usage::

    python benchmarks/bench_kernels.py [--repeat 20]
"""

import argparse
import timeit

import numpy as np

from weaklight import kernels
from weaklight.fisher import numeric_fisher
from weaklight.povm_catalog import HeterodyneGrid


def _cases():
    r, wr, th, wt = HeterodyneGrid().axes()
    masses = (r, wr, np.cos(th), np.sin(th), np.full(len(th), wt), 0.9, 0.05, 0.05, 0.03, 0.01)
    n = 201 * 201 * 64
    rng = np.random.default_rng(0)
    p = rng.uniform(1e-6, 1.0, n)
    d = rng.normal(size=(2, n)) * 1e-9
    stencil = (p, p + d[0], p - d[0], p + d[1], p - d[1], 1e-5, 1e-15, 1e-12)
    return {
        "heterodyne_masses": lambda b: kernels.heterodyne_masses(*masses, backend=b),
        "fisher_stencil": lambda b: kernels.fisher_stencil(*stencil, backend=b),
        "numeric_fisher(heterodyne)": lambda b: numeric_fisher("heterodyne", 0.01, 0.3, backend=b),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=10)
    args = ap.parse_args(argv)
    backends = kernels.available_backends()
    print(f"{'kernel':30s}" + "".join(f"{b:>14s}" for b in backends) + "   speedup")
    for name, fn in _cases().items():
        times = {}
        for b in backends:
            fn(b)
            times[b] = min(timeit.repeat(lambda: fn(b), number=1, repeat=args.repeat))
        cells = "".join(f"{times[b] * 1e3:11.2f} ms" for b in backends)
        speed = times["python"] / times["cython"] if "cython" in times else float("nan")
        print(f"{name:30s}{cells}   {speed:6.2f}x")


if __name__ == "__main__":
    main()
