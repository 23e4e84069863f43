"""Conversions between point motion fields and voxel motion fields.

Point -> voxel uses inverse-distance weighted K nearest neighbors; voxel ->
point uses trilinear interpolation over the 8 voxel-center corners of the
enclosing lattice cell. Both directions preserve constant fields exactly.
"""
from __future__ import annotations

import numpy as np
from scipy.spatial import cKDTree

from ..constants import COINCIDENCE_EPS, DEFAULT_KNN
from ..errors import InvalidArgumentError
from ..volume.grid import KIND_MOTION, SparseVoxelGrid
from .pointset import PointMotionSet


def knn(points: np.ndarray, queries: np.ndarray, k: int):
    """Exact k nearest neighbors; ties broken by lowest point index.

    Returns (distances, indices) of shape (n_queries, k_eff) with rows sorted
    by distance then index; k_eff = min(k, len(points)).

    The tree's own distances can differ from a direct norm in the last bit,
    which would make equal-distance candidates sort arbitrarily, so every
    candidate within the k-th radius is re-measured with the plain formula
    before the final ranking.
    """
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    queries = np.asarray(queries, dtype=np.float64).reshape(-1, 3)
    if len(points) == 0:
        raise InvalidArgumentError("knn needs at least one point")
    if k < 1:
        raise InvalidArgumentError("k must be >= 1")
    n, n_q = len(points), len(queries)
    k_eff = min(k, n)
    tree = cKDTree(points)
    probe = min(k_eff + 1, n)
    d_tree, idx = tree.query(queries, k=probe)
    d_tree = d_tree.reshape(n_q, probe)
    idx = idx.reshape(n_q, probe).astype(np.int64)

    d = np.linalg.norm(points[idx] - queries[:, None, :], axis=2)
    order = np.lexsort((idx, d), axis=-1)
    rows = np.arange(n_q)[:, None]
    d, idx = d[rows, order], idx[rows, order]

    if probe > k_eff:
        # a tie straddling the k-th rank means the candidate set itself is
        # ambiguous; re-gather everything within that radius for those rows
        tol = 1e-12 * (1.0 + d_tree[:, k_eff - 1])
        boundary = d_tree[:, k_eff] - d_tree[:, k_eff - 1] <= tol
        for row in np.nonzero(boundary)[0]:
            cand = np.asarray(
                tree.query_ball_point(queries[row],
                                      d_tree[row, k_eff] * (1.0 + 1e-12) + 1e-300),
                dtype=np.int64,
            )
            dc = np.linalg.norm(points[cand] - queries[row], axis=1)
            pick = np.lexsort((cand, dc))[:k_eff]
            d[row, :k_eff] = dc[pick]
            idx[row, :k_eff] = cand[pick]
    return d[:, :k_eff], idx[:, :k_eff]


def inverse_distance_interpolate(points, values, queries, k: int = DEFAULT_KNN,
                                 eps: float = COINCIDENCE_EPS):
    """Normalized 1/d weighting of the k nearest values at each query.

    A query within eps of a point copies that point's value (the limit of the
    weights); with several coincident points the lowest index wins.
    """
    values = np.asarray(values, dtype=np.float64)
    d, idx = knn(points, queries, k)
    neighbor_vals = values[idx]

    coincident = d < eps
    any_hit = np.any(coincident, axis=1)
    # first True per row is the (distance, index)-smallest coincident point
    hit_col = np.argmax(coincident, axis=1)

    with np.errstate(divide="ignore"):
        w = 1.0 / np.maximum(d, eps * 1e-3)
    w /= w.sum(axis=1, keepdims=True)
    out = np.einsum("qk,qk...->q...", w, neighbor_vals)
    if np.any(any_hit):
        rows = np.nonzero(any_hit)[0]
        out[rows] = neighbor_vals[rows, hit_col[rows]]
    return out


def _grid_coords_for_positions(positions, voxel_size, origin):
    coords = np.rint((positions - origin) / voxel_size)
    snapped = origin + coords * voxel_size
    if len(positions) and np.abs(snapped - positions).max() > 1e-9 + 1e-9 * voxel_size:
        raise InvalidArgumentError(
            "voxel positions must lie on the lattice origin + voxel_size * Z^3"
        )
    return coords.astype(np.int64)


def sff_to_vmf(sff: PointMotionSet, voxels, k: int = DEFAULT_KNN,
               voxel_size: float = 0.01, origin=(0.0, 0.0, 0.0)) -> SparseVoxelGrid:
    """Interpolate point motion onto voxel centers by inverse-distance KNN.

    voxels may be a SparseVoxelGrid (its coordinate set and lattice are
    reused) or an (n, 3) array of voxel-center positions on the lattice
    described by voxel_size and origin.
    """
    if len(sff) == 0:
        raise InvalidArgumentError("sff_to_vmf needs a non-empty point set")
    if isinstance(voxels, SparseVoxelGrid):
        coords = voxels.coords
        voxel_size = voxels.voxel_size
        origin = voxels.origin
        positions = voxels.voxel_positions()
    else:
        positions = np.asarray(voxels, dtype=np.float64).reshape(-1, 3)
        origin = np.asarray(origin, dtype=np.float64).reshape(3)
        coords = _grid_coords_for_positions(positions, voxel_size, origin)
    motion = inverse_distance_interpolate(sff.points, sff.motions, positions, k)
    return SparseVoxelGrid(voxel_size, origin, KIND_MOTION, coords, motion)


def vmf_to_sff(vmf: SparseVoxelGrid, query_points):
    """Trilinear interpolation of voxel motion at arbitrary points.

    Corners missing from the sparse grid are dropped and the remaining
    trilinear weights renormalized. Queries whose cell has no usable corner
    fall back to the nearest stored voxel and are flagged in the returned
    extrapolation mask.

    Returns (PointMotionSet at the query points, extrapolated mask).
    """
    if vmf.kind != KIND_MOTION:
        raise InvalidArgumentError("vmf_to_sff expects a motion grid")
    if len(vmf) == 0:
        raise InvalidArgumentError("vmf_to_sff needs a non-empty grid")
    q = np.asarray(query_points, dtype=np.float64).reshape(-1, 3)
    local = (q - vmf.origin) / vmf.voxel_size
    base = np.floor(local)
    frac = np.clip(local - base, 0.0, 1.0)

    offsets = np.array([(i, j, l) for i in (0, 1) for j in (0, 1) for l in (0, 1)])
    corner_coords = base[:, None, :].astype(np.int64) + offsets[None, :, :]
    idx = vmf.find(corner_coords.reshape(-1, 3)).reshape(len(q), 8)
    present = idx >= 0

    axis_w = np.stack([1.0 - frac, frac], axis=-1)  # (n, 3, 2)
    w = (
        axis_w[:, 0, offsets[:, 0]]
        * axis_w[:, 1, offsets[:, 1]]
        * axis_w[:, 2, offsets[:, 2]]
    )
    w = np.where(present, w, 0.0)
    wsum = w.sum(axis=1)
    usable = wsum > 1e-15

    vals = vmf.values[np.where(present, idx, 0)]
    out = np.einsum("qc,qcd->qd", w, vals)
    out[usable] /= wsum[usable, None]

    extrapolated = ~usable
    if np.any(extrapolated):
        _, nearest = knn(vmf.voxel_positions(), q[extrapolated], 1)
        out[extrapolated] = vmf.values[nearest[:, 0]]
    return PointMotionSet(q, out), extrapolated
