"""Sweep timings for the numba and numpy backends.

Usage::

    python benchmarks/bench_sweep.py [--repeat 3] [--skip-numpy]

Prints one row per (backend, system size, kernel) with the median wall time
of a single full sweep. The headline row is the 64 x 64 Ising system with the
isotropic kernel truncated on the full (2R+1)^2 square at R = 32.
"""
from __future__ import annotations

import argparse
import statistics
import time

from decimation_mc import BoundarySpec, Box, CouplingModel, LatticeSystem, Site, SiteSet, build_kernel, homogeneous


def square_system(side: int, model: CouplingModel, kernel, backend: str) -> LatticeSystem:
    """``side x side`` free block inside a plus exterior."""
    box = Box(side // 2)
    lo = -(side // 2)
    region = SiteSet.from_sites(box, [Site(a, b) for a in range(lo, lo + side) for b in range(lo, lo + side)])
    return LatticeSystem(homogeneous(box, model.kind, "plus"), BoundarySpec("plus"), model, kernel, region, backend)


def time_sweep(system: LatticeSystem, beta: float, repeat: int) -> float:
    system.sweep(beta, 1, 0)  # compile / warm caches
    times = []
    for r in range(repeat):
        t0 = time.perf_counter()
        system.sweep(beta, 1, (r + 1) * system.draws_per_sweep)
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--skip-numpy", action="store_true")
    args = p.parse_args(argv)

    backends = ["numba"] if args.skip_numpy else ["numba", "numpy"]
    iso = CouplingModel("IsoLRIsing", alpha1=3.0)
    nn = CouplingModel("NNIsing")
    cases = [
        ("nn", nn, build_kernel(nn, 1), [16, 32, 64, 128]),
        ("iso R=8", iso, build_kernel(iso, 8, "square"), [16, 32, 64]),
        ("iso R=16", iso, build_kernel(iso, 16, "square"), [16, 32, 64]),
        ("iso R=32", iso, build_kernel(iso, 32, "square"), [16, 32, 64]),
    ]
    print(f"{'backend':8} {'kernel':10} {'entries':>7} {'side':>5} {'sites':>6} {'ms/sweep':>10} {'ns/site/entry':>14}")
    for backend in backends:
        for name, model, kernel, sides in cases:
            for side in sides:
                sysm = square_system(side, model, kernel, backend)
                t = time_sweep(sysm, 0.3, args.repeat)
                per = 1e9 * t / (sysm.n_free * len(kernel))
                print(f"{backend:8} {name:10} {len(kernel):7d} {side:5d} {sysm.n_free:6d} {1e3 * t:10.2f} {per:14.3f}")


if __name__ == "__main__":
    main()
