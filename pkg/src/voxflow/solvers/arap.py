"""As-rigid-as-possible motion completion and motion-field post-processing.

Minimizes E(p') = sum_i sum_{j in N(i)} w_ij ||(p'_i - p'_j) - R_i (p_i - p_j)||^2
by local-global alternation: per-vertex rotations from an SVD of the edge
covariance, then one sparse SPD solve for positions. The system matrix is
constant across iterations, so it is factorized once and reused.
"""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix, identity
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import splu

from ..errors import (
    DegenerateGeometryError,
    InvalidArgumentError,
    SolverNumericalError,
    UnconstrainedComponentError,
)
from ..geometry.mesh import TriangleMesh
from .rigid import MotionCompletionProblem, fit_rigid

_WEIGHT_SCHEMES = ("cotangent", "uniform")
_CONSTRAINT_MODES = ("hard", "soft")


@dataclass(frozen=True)
class ArapConfig:
    weights: str = "cotangent"
    max_iterations: int = 100
    tolerance: float = 1e-6
    constraint_mode: str = "hard"
    lambda_c: float = 1e4

    def __post_init__(self):
        if self.weights not in _WEIGHT_SCHEMES:
            raise InvalidArgumentError(f"weights must be one of {_WEIGHT_SCHEMES}")
        if self.max_iterations < 1:
            raise InvalidArgumentError("max_iterations must be >= 1")
        if not self.tolerance > 0:
            raise InvalidArgumentError("tolerance must be positive")
        if self.constraint_mode not in _CONSTRAINT_MODES:
            raise InvalidArgumentError(
                f"constraint_mode must be one of {_CONSTRAINT_MODES}"
            )
        if self.constraint_mode == "soft" and not self.lambda_c > 0:
            raise InvalidArgumentError("lambda_c must be positive in soft mode")


@dataclass
class ArapReport:
    iterations: int
    final_energy: float
    converged: bool
    wall_time: float
    energy_trace: tuple = ()


def edge_weights(mesh: TriangleMesh, scheme: str) -> tuple:
    """Per-undirected-edge weights as (edges (m, 2), weights (m,)).

    Cotangent weights sum the half-cotangents of the angles opposite each
    edge, clamped to >= 0 to keep the Laplacian positive semidefinite;
    degenerate faces contribute nothing.
    """
    if scheme not in _WEIGHT_SCHEMES:
        raise InvalidArgumentError(f"weights must be one of {_WEIGHT_SCHEMES}")
    edges = mesh.edges()
    if scheme == "uniform":
        return edges, np.ones(len(edges))
    verts = mesh.vertices
    tris = mesh.triangles
    # edges are lexicographically sorted, so packed keys are searchable
    packed = edges[:, 0].astype(np.int64) * mesh.n_vertices + edges[:, 1]
    w = np.zeros(len(edges))
    for corner in range(3):
        k = tris[:, corner]
        i = tris[:, (corner + 1) % 3]
        j = tris[:, (corner + 2) % 3]
        u = verts[i] - verts[k]
        v = verts[j] - verts[k]
        cross = np.linalg.norm(np.cross(u, v), axis=1)
        dot = np.einsum("ij,ij->i", u, v)
        good = cross > 1e-15
        cot = np.where(good, dot / np.where(good, cross, 1.0), 0.0)
        lo = np.minimum(i, j).astype(np.int64)
        hi = np.maximum(i, j).astype(np.int64)
        rows = np.searchsorted(packed, lo * mesh.n_vertices + hi)
        np.add.at(w, rows, 0.5 * cot)
    return edges, np.maximum(w, 0.0)


def _check_constrained_connectivity(n_vertices, edges, weights, constrained_mask):
    """Every vertex must reach a constraint through positive-weight edges."""
    live = weights > 0
    e = edges[live]
    graph = coo_matrix(
        (np.ones(len(e)), (e[:, 0], e[:, 1])), shape=(n_vertices, n_vertices)
    )
    n_comp, labels = connected_components(graph, directed=False)
    ok = np.zeros(n_comp, dtype=bool)
    ok[labels[constrained_mask]] = True
    if not ok.all():
        bad = np.nonzero(~ok[labels])[0]
        raise UnconstrainedComponentError(bad)


def _laplacian(n, edges, w):
    i, j = edges[:, 0], edges[:, 1]
    rows = np.concatenate([i, j, i, j])
    cols = np.concatenate([j, i, i, j])
    vals = np.concatenate([-w, -w, w, w])
    return coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()


def _local_rotations(rest_edges, cur_edges, w, edges, n):
    """Best-fit rotation per vertex from its incident edge covariance."""
    outer = np.einsum("e,ei,ej->eij", w, rest_edges, cur_edges)
    cov = np.zeros((n, 3, 3))
    np.add.at(cov, edges[:, 0], outer)
    np.add.at(cov, edges[:, 1], outer)
    u, _, vt = np.linalg.svd(cov)
    r = np.einsum("nji,nkj->nik", vt, u)  # V @ U^T per vertex
    det = np.linalg.det(r)
    flip = det < 0
    if np.any(flip):
        vt_f = vt[flip].copy()
        vt_f[:, -1, :] *= -1.0
        r[flip] = np.einsum("nji,nkj->nik", vt_f, u[flip])
    return r


def _arap_energy(rot, rest_edges, cur_edges, w, edges):
    pred_i = np.einsum("eij,ej->ei", rot[edges[:, 0]], rest_edges)
    pred_j = np.einsum("eij,ej->ei", rot[edges[:, 1]], rest_edges)
    r_i = (w[:, None] * (cur_edges - pred_i) ** 2).sum()
    r_j = (w[:, None] * (cur_edges - pred_j) ** 2).sum()
    return r_i + r_j


def _edge_rhs(rot, rest_edges, w, edges, n):
    pair = rot[edges[:, 0]] + rot[edges[:, 1]]
    contrib = 0.5 * w[:, None] * np.einsum("eij,ej->ei", pair, rest_edges)
    rhs = np.zeros((n, 3))
    np.add.at(rhs, edges[:, 0], contrib)
    np.add.at(rhs, edges[:, 1], -contrib)
    return rhs


class _Factorized:
    def __init__(self, matrix):
        try:
            self._lu = splu(matrix.tocsc())
        except RuntimeError as exc:
            raise SolverNumericalError(f"factorization failed: {exc}") from exc

    def solve(self, b):
        x = self._lu.solve(b)
        if not np.all(np.isfinite(x)):
            raise SolverNumericalError("linear solve produced non-finite values")
        return x


def _iterate(mesh, edges, w, init_positions, config, solve_positions, objective):
    """Shared local-global loop; both steps exactly minimize their subproblem.

    solve_positions(rotations) -> new positions; objective(rot, pos) -> energy.
    Raises if the energy ever increases beyond roundoff, which would mean one
    of the steps stopped being an exact minimizer.
    """
    rest = mesh.vertices[edges[:, 0]] - mesh.vertices[edges[:, 1]]
    pos = init_positions
    energy = np.inf
    trace = []
    for it in range(1, config.max_iterations + 1):
        cur = pos[edges[:, 0]] - pos[edges[:, 1]]
        rot = _local_rotations(rest, cur, w, edges, mesh.n_vertices)
        pos = solve_positions(rot)
        new_energy = objective(rot, pos, edges, w, rest)
        trace.append(new_energy)
        if np.isfinite(energy):
            if new_energy > energy + 1e-9 * max(1.0, energy):
                raise SolverNumericalError(
                    f"energy increased from {energy:.6e} to {new_energy:.6e}"
                )
            if energy - new_energy <= config.tolerance * max(energy, 1e-300):
                return pos, it, new_energy, True, tuple(trace)
        energy = new_energy
    return pos, config.max_iterations, energy, False, tuple(trace)


def arap_complete(problem: MotionCompletionProblem, config: ArapConfig = ArapConfig(),
                  return_report: bool = False):
    """Motion for every vertex given motion at the visible subset.

    Visible vertices are hard equality constraints by default (their rows are
    eliminated from the system); soft mode instead adds lambda_c penalties.
    Initialized from the best rigid fit when one exists.
    """
    mesh = problem.mesh
    n = mesh.n_vertices
    vis_mask = problem.visible_mask()
    targets = mesh.vertices[problem.visible] + problem.visible_motion
    t0 = time.perf_counter()

    edges, w = edge_weights(mesh, config.weights)
    _check_constrained_connectivity(n, edges, w, vis_mask)

    if vis_mask.all():
        motion = np.zeros((n, 3))
        motion[problem.visible] = problem.visible_motion
        if return_report:
            return motion, ArapReport(0, 0.0, True, time.perf_counter() - t0, ())
        return motion

    try:
        _, init_motion = fit_rigid(problem)
    except DegenerateGeometryError:
        init_motion = np.zeros((n, 3))
    init = mesh.vertices + init_motion
    init[problem.visible] = targets

    lap = _laplacian(n, edges, w)
    rest = mesh.vertices[edges[:, 0]] - mesh.vertices[edges[:, 1]]
    free = np.nonzero(~vis_mask)[0]
    if config.constraint_mode == "hard":
        lap_ff = lap[free][:, free]
        lap_fc = lap[free][:, problem.visible]
        factor = _Factorized(lap_ff)

        def solve_positions(rot):
            rhs = _edge_rhs(rot, rest, w, edges, n)
            pos = np.empty((n, 3))
            pos[problem.visible] = targets
            pos[free] = factor.solve(rhs[free] - lap_fc @ targets)
            return pos
    else:
        diag = np.zeros(n)
        diag[problem.visible] = config.lambda_c
        system = 2.0 * lap + coo_matrix((diag[problem.visible],
                                         (problem.visible, problem.visible)),
                                        shape=(n, n)).tocsr()
        factor = _Factorized(system)

        def solve_positions(rot):
            rhs = 2.0 * _edge_rhs(rot, rest, w, edges, n)
            rhs[problem.visible] += config.lambda_c * targets
            return factor.solve(rhs)

    if config.constraint_mode == "hard":
        def objective(rot, pos, e, ww, rest):
            cur = pos[e[:, 0]] - pos[e[:, 1]]
            return _arap_energy(rot, rest, cur, ww, e)
    else:
        def objective(rot, pos, e, ww, rest):
            cur = pos[e[:, 0]] - pos[e[:, 1]]
            data = config.lambda_c * ((pos[problem.visible] - targets) ** 2).sum()
            return _arap_energy(rot, rest, cur, ww, e) + data

    pos, iters, energy, converged, trace = _iterate(mesh, edges, w, init, config,
                                                    solve_positions, objective)
    motion = pos - mesh.vertices
    if config.constraint_mode == "hard":
        motion[problem.visible] = problem.visible_motion
    if return_report:
        return motion, ArapReport(iters, energy, converged,
                                  time.perf_counter() - t0, trace)
    return motion


def arap_post_process(mesh: TriangleMesh, predicted_motion, lambda_data: float,
                      config: ArapConfig = ArapConfig(), return_report: bool = False):
    """Denoise a dense per-vertex motion field with the same deformation prior.

    Minimizes lambda_data * sum ||p'_i - (p_i + m_i)||^2 + E_ARAP(p'). Every
    vertex carries a data term, so no constraint connectivity is required.
    """
    predicted = np.asarray(predicted_motion, dtype=np.float64).reshape(-1, 3)
    if len(predicted) != mesh.n_vertices:
        raise InvalidArgumentError(
            f"{len(predicted)} motion vectors for {mesh.n_vertices} vertices"
        )
    if not np.all(np.isfinite(predicted)):
        raise InvalidArgumentError("predicted motion must be finite")
    if not lambda_data > 0:
        raise InvalidArgumentError("lambda_data must be positive")
    t0 = time.perf_counter()

    n = mesh.n_vertices
    edges, w = edge_weights(mesh, config.weights)
    targets = mesh.vertices + predicted
    lap = _laplacian(n, edges, w)
    rest = mesh.vertices[edges[:, 0]] - mesh.vertices[edges[:, 1]]
    system = 2.0 * lap + lambda_data * identity(n, format="csr")
    factor = _Factorized(system)

    def solve_positions(rot):
        rhs = 2.0 * _edge_rhs(rot, rest, w, edges, n)
        return factor.solve(rhs + lambda_data * targets)

    def objective(rot, pos, e, ww, rest):
        cur = pos[e[:, 0]] - pos[e[:, 1]]
        data = lambda_data * ((pos - targets) ** 2).sum()
        return _arap_energy(rot, rest, cur, ww, e) + data

    pos, iters, energy, converged, trace = _iterate(mesh, edges, w, targets,
                                                    config, solve_positions,
                                                    objective)
    motion = pos - mesh.vertices
    if return_report:
        return motion, ArapReport(iters, energy, converged,
                                  time.perf_counter() - t0, trace)
    return motion
