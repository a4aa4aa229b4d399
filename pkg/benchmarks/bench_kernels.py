"""Compare the numba and numpy integration kernels on a Poincare-map workload.

Usage::

    python benchmarks/bench_kernels.py --repeats 5 --periods 4

Each backend integrates the same quaternionic system from the same start
values; the script reports the best wall time per call, the speedup and the
largest endpoint disagreement between the two backends.
"""
import argparse
import time

import numpy as np

from qriccati import kernels
from qriccati.coefficients import QuaternionCoefficient, RealFourierSeries, RiccatiSystem


def bench_system(T=1.0):
    def c(const, sin1=0.0):
        return RealFourierSeries.from_harmonics(T, const, [(1, 0.0, sin1)] if sin1 else [])

    zero = QuaternionCoefficient.zero(T)
    a = QuaternionCoefficient([c(1.0), c(1.0), c(0.0), c(0.0)])
    d = QuaternionCoefficient([c(-0.8), c(0.5, 0.3), c(0.2), c(0.0)])
    return RiccatiSystem(a, zero, zero, d)


def time_backend(name, sys, starts, periods, repeats, rtol, atol):
    impl = kernels.get_backend(name)
    consts, cos, sin = sys.packed
    args = (consts, cos, sin, sys.T)
    # first call compiles under numba; keep it out of the timing
    impl.integrate(*args, starts[0], 0.0, sys.T, rtol, atol, sys.T / 64, 1e8, 10_000_000, False)
    best = np.inf
    ends = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = [impl.integrate(*args, q0, 0.0, periods * sys.T, rtol, atol, sys.T / 64, 1e8, 10_000_000, False) for q0 in starts]
        best = min(best, time.perf_counter() - t0)
        ends = np.array([o[1][-1] for o in out])
    return best / len(starts), ends


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--periods", type=int, default=2)
    p.add_argument("--starts", type=int, default=20, help="number of start values per repeat")
    p.add_argument("--rtol", type=float, default=1e-10)
    p.add_argument("--atol", type=float, default=1e-12)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)

    sys = bench_system()
    starts = np.random.default_rng(args.seed).uniform(0.0, 1.0, size=(args.starts, 4))
    results = {}
    for name in ("numba", "numpy"):
        try:
            results[name] = time_backend(name, sys, starts, args.periods, args.repeats, args.rtol, args.atol)
        except ImportError as exc:
            print(f"{name:6s} unavailable: {exc}")
    for name, (per_call, _) in results.items():
        print(f"{name:6s} {1e3 * per_call:10.3f} ms per integration over {args.periods} periods")
    if len(results) == 2:
        speedup = results["numpy"][0] / results["numba"][0]
        gap = float(np.max(np.abs(results["numba"][1] - results["numpy"][1])))
        print(f"speedup {speedup:.1f}x, max endpoint disagreement {gap:.2e}")


if __name__ == "__main__":
    main()
