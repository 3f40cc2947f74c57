"""Compare the compiled and pure-numpy path kernels on the ball Green oracle.

    python benchmarks/bench_mc.py --n-paths 20000 --dt 1e-3

Both backends consume the same random streams, so the estimates should agree
to within rare last-bit exit decisions; the timing ratio is the point.
"""

import argparse
import os
import time

from sbm.bernstein import parse_phi
from sbm.geometry import ball
from sbm.montecarlo import PathParams, green_mc
from sbm.montecarlo._accel import HAVE_NUMBA


def run(backend, spec, params, repeats):
    os.environ["SBM_NUMBA"] = "1" if backend == "numba" else "0"
    # the first call compiles (or loads the cache); time it separately
    t0 = time.perf_counter()
    green_mc(spec, ball(1.0), [0.0, 0.0], [0.5, 0.0], 0.05, PathParams(params.dt, 16, params.seed))
    warm = time.perf_counter() - t0
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        est = green_mc(spec, ball(1.0), [0.0, 0.0], [0.5, 0.0], 0.05, params)
        best = min(best, time.perf_counter() - t0)
    return est, best, warm


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--phi", default="stable:alpha=1")
    p.add_argument("--n-paths", type=int, default=20000)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--repeats", type=int, default=3)
    args = p.parse_args()
    spec = parse_phi(args.phi)
    params = PathParams(args.dt, args.n_paths, seed=1)
    backends = ["numba", "numpy"] if HAVE_NUMBA else ["numpy"]
    times = {}
    for b in backends:
        est, secs, warm = run(b, spec, params, args.repeats)
        times[b] = secs
        print(f"{b:6s} {secs:8.3f} s  (first call {warm:.2f} s)  G = {est.mean:.6f} +- {est.stderr:.6f}  "
              f"mean steps {est.flags['mean_steps']:.0f}")
    if len(times) == 2:
        print(f"speedup numba/numpy: {times['numpy'] / times['numba']:.1f}x")


if __name__ == "__main__":
    main()
