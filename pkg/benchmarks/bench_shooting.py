#!/usr/bin/env python3
"""Benchmark the compiled shooting kernel against its pure-Python twin.

Times ``integrate_profile`` on identical inputs (a full bisection-depth
trajectory of the (N, p) = (3, 4) profile) and a complete ``shoot_ground``
profile build through each backend.

Run from the repository root:

    python3 benchmarks/bench_shooting.py
"""

import importlib
import statistics
import time

import numpy as np


def time_kernel(impl, n_max=40001, repeats=5):
    """Median wall time of one full-range trajectory integration."""
    h = 1e-3
    w0 = 4.337
    times = []
    for _ in range(repeats):
        w = np.zeros(n_max)
        s = np.zeros(n_max)
        w[0] = w0
        t0 = time.perf_counter()
        impl.integrate_profile(3, 4.0, w0, h, 0, n_max, w, s)
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def time_profile_build(backend_env):
    """Wall time of a cold profile build via a given backend."""
    import os
    import subprocess
    import sys

    code = (
        "import time, nlscouple.oracle as o;"
        "t0 = time.perf_counter();"
        "p = o._build_profile(3, 4.0);"
        "print(time.perf_counter() - t0, p.w0)"
    )
    env = dict(os.environ)
    env.pop("NLSCOUPLE_PURE_PYTHON", None)
    env.update(backend_env)
    out = subprocess.run([sys.executable, "-c", code], env=env,
                         capture_output=True, text=True, check=True)
    wall, w0 = out.stdout.split()
    return float(wall), float(w0)


def main():
    from nlscouple._kernels import shoot_py

    results = {"python": time_kernel(shoot_py)}
    try:
        from nlscouple._kernels import shoot_cy
    except ImportError:
        shoot_cy = None
    if shoot_cy is not None:
        results["compiled"] = time_kernel(shoot_cy)

    print("single trajectory (40001 RK4 steps, median of 5):")
    for name, t in results.items():
        print(f"  {name:9s} {t * 1e3:8.2f} ms")
    if "compiled" in results:
        print(f"  speedup   {results['python'] / results['compiled']:8.1f}x")

    print("\nfull profile build (bisection + refinement, cold cache):")
    wall_py, w0_py = time_profile_build({"NLSCOUPLE_PURE_PYTHON": "1"})
    print(f"  python    {wall_py:8.2f} s   (w0 = {w0_py:.9f})")
    if shoot_cy is not None:
        wall_cy, w0_cy = time_profile_build({})
        print(f"  compiled  {wall_cy:8.2f} s   (w0 = {w0_cy:.9f})")
        print(f"  speedup   {wall_py / wall_cy:8.1f}x")
        drift = abs(w0_py - w0_cy)
        print(f"  |w0_python - w0_compiled| = {drift:.3e}")


if __name__ == "__main__":
    main()
