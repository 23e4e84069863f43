#!/usr/bin/env python3
"""Times the compiled ray-cast kernel against the numpy fallback.

Both backends evaluate componentwise-identical expressions, so before any
timing each scene's depth images are compared bit for bit. Reported numbers
are best-of-N per-frame seconds including per-call setup (BVH build and
triangle constants), which is the cost a pipeline run actually pays.

Run from the repository root:

    python3 benchmarks/bench_kernels.py [--frames N] [--repeats N]
"""
import argparse
import time

import numpy as np

from voxflow._kernels import available_backends
from voxflow.geometry.primitives import icosphere, tube
from voxflow.render.depth import render_depth
from voxflow.render.rig import sample_camera_rig


def scenes():
    return [
        ("icosphere-3", icosphere(3, radius=0.4)),
        ("icosphere-5", icosphere(5, radius=0.4)),
        ("tube-120x60", tube(120, 60, radius=0.15, length=1.2)),
    ]


def time_backend(mesh, cameras, backend, repeats):
    best = np.inf
    for _ in range(repeats):
        start = time.perf_counter()
        for camera in cameras:
            render_depth(mesh, camera, backend=backend)
        best = min(best, time.perf_counter() - start)
    return best / len(cameras)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--frames", type=int, default=2,
                        help="cameras rendered per measurement")
    parser.add_argument("--repeats", type=int, default=3,
                        help="measurements per cell, best is kept")
    args = parser.parse_args()

    backends = available_backends()
    cameras = sample_camera_rig(np.zeros(3), 1.4, args.frames)
    print(f"backends: {', '.join(backends)}")
    if "compiled" not in backends:
        print("compiled extension not built; timing the fallback only")

    header = f"{'scene':>12s} {'triangles':>10s}"
    for backend in backends:
        header += f" {backend + ' s/frame':>16s}"
    if len(backends) == 2:
        header += f" {'speedup':>8s}"
    print(header)

    for name, mesh in scenes():
        if len(backends) == 2:
            reference = render_depth(mesh, cameras[0], backend="python")
            candidate = render_depth(mesh, cameras[0], backend="compiled")
            if not np.array_equal(reference.depth, candidate.depth):
                raise SystemExit(f"{name}: backends disagree bit-for-bit")
        row = f"{name:>12s} {mesh.n_triangles:>10d}"
        per_frame = {}
        for backend in backends:
            per_frame[backend] = time_backend(mesh, cameras, backend,
                                              args.repeats)
            row += f" {per_frame[backend]:>16.4f}"
        if len(backends) == 2:
            row += f" {per_frame['python'] / per_frame['compiled']:>7.1f}x"
        print(row)


if __name__ == "__main__":
    main()
