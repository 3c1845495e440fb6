"""Benchmark the velocity-Verlet hold kernel: compiled vs pure Python.

Runs the identical washboard workload through both backends and reports
steps/second and the speedup.  The end states are compared exactly: both
kernels execute the same operation order, so any difference is a bug.

Usage: python benchmarks/bench_verlet.py [--duration S] [--repeats N]
"""

import argparse
import time

from blochclock import _verlet_py
from blochclock.dsl import load_spec
from blochclock.kernels import integrate_washboard
from blochclock.lattice import calibrate

try:
    from blochclock import _verlet
except ImportError:
    _verlet = None


def run(backend, well, z0, duration, h, repeats):
    best = float("inf")
    traj = None
    for _ in range(repeats):
        start = time.perf_counter()
        traj = integrate_washboard(
            z0, 0.0, duration, h, well.g, well.m, well.two_k, well.depth,
            z_off=well.z_off, backend=backend)
        best = min(best, time.perf_counter() - start)
    return traj, best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sequence", default="sequences/reduced_demo.seq")
    parser.add_argument("--duration", type=float, default=None,
                        help="integration time, s (default: the hold T_B)")
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    spec = load_spec(args.sequence)
    calib = calibrate(spec)
    well = calib.well
    duration = args.duration if args.duration else spec.timing.T_B
    h = 3e-5 / well.omega
    z0 = calib.orbit.z_upper

    backends = [("python", _verlet_py)]
    if _verlet is not None:
        backends.insert(0, ("cython", _verlet))

    print(f"workload: {duration / h:.3g} steps "
          f"(duration {duration!r} s, h {h:.3e} s)")
    results = {}
    for name, impl in backends:
        traj, elapsed = run(impl, well, z0, duration, h, args.repeats)
        results[name] = (traj, elapsed)
        print(f"{name:>8}: {elapsed:8.3f} s   "
              f"{traj.n_steps / elapsed / 1e6:8.2f} Msteps/s   "
              f"energy drift {traj.energy_drift:.3e}")

    if len(results) == 2:
        fast, slow = results["cython"][1], results["python"][1]
        print(f" speedup: {slow / fast:.1f}x")
        a, b = results["cython"][0], results["python"][0]
        same = (a.z_end == b.z_end and a.v_end == b.v_end
                and a.mean_z == b.mean_z
                and a.mean_square_velocity == b.mean_square_velocity)
        print(f"backends agree exactly: {same}")
        if not same:
            raise SystemExit(1)


if __name__ == "__main__":
    main()
