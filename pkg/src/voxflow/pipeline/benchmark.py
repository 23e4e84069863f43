"""Hidden-surface motion benchmark over the classical solvers.

A problem on disk is a directory holding mesh.obj, visible.idx, and
gt_motion.pmsn (full per-vertex ground truth, points = rest vertices).
The solvers only ever see the ground truth at the visible subset; scoring
happens on the hidden complement.
"""
from __future__ import annotations

import os

import numpy as np

from ..errors import InvalidArgumentError
from ..io.formats import read_indices, read_obj, read_point_motion, write_indices, write_obj, write_point_motion
from ..metrics.motion import MotionEvalReport, eval_motion
from ..motion.pointset import PointMotionSet
from ..solvers import ArapConfig, MotionCompletionProblem, arap_complete, arap_post_process, fit_rigid

METHODS = ("rigid", "arap", "arap-pp")

MESH_FILE = "mesh.obj"
VISIBLE_FILE = "visible.idx"
GT_FILE = "gt_motion.pmsn"


def write_problem(path, mesh, visible, gt_motion):
    """Lay a benchmark problem out on disk."""
    os.makedirs(path, exist_ok=True)
    write_obj(os.path.join(path, MESH_FILE), mesh)
    write_indices(os.path.join(path, VISIBLE_FILE), visible)
    write_point_motion(os.path.join(path, GT_FILE),
                       PointMotionSet(mesh.vertices, gt_motion))


def load_problem(path):
    """Read one problem directory -> (MotionCompletionProblem, full gt motion)."""
    mesh = read_obj(os.path.join(path, MESH_FILE))
    visible = read_indices(os.path.join(path, VISIBLE_FILE))
    gt = read_point_motion(os.path.join(path, GT_FILE))
    if len(gt) != mesh.n_vertices:
        raise InvalidArgumentError(
            f"{path}: gt motion covers {len(gt)} of {mesh.n_vertices} vertices"
        )
    problem = MotionCompletionProblem(mesh, visible, gt.motions[visible])
    return problem, gt.motions


def _solve(method, problem, arap_config, lambda_data):
    if method == "rigid":
        return fit_rigid(problem)[1]
    if method == "arap":
        return arap_complete(problem, arap_config)
    if method == "arap-pp":
        completed = arap_complete(problem, arap_config)
        return arap_post_process(problem.mesh, completed, lambda_data, arap_config)
    raise InvalidArgumentError(f"unknown method {method!r}; expected one of {METHODS}")


def run_benchmark(problem_dirs, methods, arap_config: ArapConfig = ArapConfig(),
                  lambda_data: float = 1.0) -> dict:
    """Score each method's hidden-vertex motion on each problem.

    Returns {problem name: {method: MotionEvalReport or error string}}; a
    failing method is recorded and the run continues.
    """
    for method in methods:
        if method not in METHODS:
            raise InvalidArgumentError(
                f"unknown method {method!r}; expected one of {METHODS}"
            )
    results = {}
    for directory in problem_dirs:
        name = os.path.basename(os.path.normpath(directory))
        problem, gt = load_problem(directory)
        hidden = ~problem.visible_mask()
        row = {}
        for method in methods:
            if not hidden.any():
                row[method] = "failed: problem has no hidden vertices"
                continue
            try:
                predicted = _solve(method, problem, arap_config, lambda_data)
                row[method] = eval_motion(
                    PointMotionSet(problem.mesh.vertices[hidden], predicted[hidden]),
                    PointMotionSet(problem.mesh.vertices[hidden], gt[hidden]),
                )
            except Exception as exc:
                row[method] = f"failed: {exc}"
        results[name] = row
    return results


def format_table(results: dict, methods) -> str:
    """Fixed-width text table: one problem per row, epe/acc per method."""
    lines = []
    header = f"{'problem':<24}" + "".join(
        f"{m + ' epe':>15}{m + ' acc5':>15}{m + ' acc10':>15}" for m in methods
    )
    lines.append(header)
    for name in sorted(results):
        cells = [f"{name:<24}"]
        for method in methods:
            outcome = results[name].get(method)
            if isinstance(outcome, MotionEvalReport):
                cells.append(f"{outcome.epe:>15.4f}{outcome.acc5:>15.3f}"
                             f"{outcome.acc10:>15.3f}")
            else:
                cells.append(f"{'error':>15}{'-':>15}{'-':>15}")
        lines.append("".join(cells))
    return "\n".join(lines) + "\n"
