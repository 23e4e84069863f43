"""Surface extraction from sparse TSDF grids (256-case lookup tables).

Cells are unit cubes between 8 neighboring voxel centers; only cells with all
corners stored are polygonized (no extrapolation into missing data). Shared
edge vertices are deduplicated by their canonical (lattice corner, axis) key,
so the output is watertight wherever the grid is.
"""
from __future__ import annotations

import numpy as np

from ..errors import InvalidArgumentError
from ..geometry.mesh import TriangleMesh
from ._mc_tables import CORNER_OFFSETS, EDGE_TABLE, EDGE_VERTICES, TRI_TABLE
from .grid import KIND_TSDF, SparseVoxelGrid

# per edge: canonical lower lattice corner and the axis it runs along
_EDGE_BASE = np.minimum(CORNER_OFFSETS[EDGE_VERTICES[:, 0]], CORNER_OFFSETS[EDGE_VERTICES[:, 1]])
_EDGE_AXIS = np.argmax(
    CORNER_OFFSETS[EDGE_VERTICES[:, 0]] != CORNER_OFFSETS[EDGE_VERTICES[:, 1]], axis=1
)
_CASE_TRI_COUNT = np.sum(TRI_TABLE[:, ::3] >= 0, axis=1)


def marching_cubes(grid: SparseVoxelGrid) -> TriangleMesh:
    """Extract the zero isosurface of a TSDF grid (negative = inside)."""
    if grid.kind != KIND_TSDF:
        raise InvalidArgumentError("marching_cubes expects a tsdf grid")
    empty = TriangleMesh(np.zeros((0, 3)), np.zeros((0, 3), np.int64))
    if len(grid) == 0:
        return empty

    coords = grid.coords.astype(np.int64)
    # corner value indices for every potential cell based at a stored voxel
    corner_idx = np.stack(
        [grid.find(coords + off) for off in CORNER_OFFSETS], axis=1
    )
    complete = np.all(corner_idx >= 0, axis=1)
    base = coords[complete]
    corner_idx = corner_idx[complete]
    if len(base) == 0:
        return empty

    sdf = grid.values[corner_idx]
    case = np.zeros(len(base), dtype=np.int64)
    for i in range(8):
        case |= (sdf[:, i] < 0.0).astype(np.int64) << i
    active = (case != 0) & (case != 255)
    base, corner_idx, sdf, case = base[active], corner_idx[active], sdf[active], case[active]
    if len(base) == 0:
        return empty

    # one record per crossing (cell, edge); canonical key dedups shared edges
    crossing = (EDGE_TABLE[case][:, None] >> np.arange(12)[None, :]) & 1 == 1
    cell_ids, edge_ids = np.nonzero(crossing)
    corner_keys = base[cell_ids] + _EDGE_BASE[edge_ids]
    rec = np.concatenate([corner_keys, _EDGE_AXIS[edge_ids][:, None]], axis=1)
    _, first, inverse = np.unique(rec, axis=0, return_index=True, return_inverse=True)

    sa = sdf[cell_ids[first], EDGE_VERTICES[edge_ids[first], 0]]
    sb = sdf[cell_ids[first], EDGE_VERTICES[edge_ids[first], 1]]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = sa / (sa - sb)
    t[~np.isfinite(t)] = 0.5  # unreachable for a true crossing; belt and braces
    a_off = CORNER_OFFSETS[EDGE_VERTICES[edge_ids[first], 0]]
    b_off = CORNER_OFFSETS[EDGE_VERTICES[edge_ids[first], 1]]
    lattice = base[cell_ids[first]] + a_off + t[:, None] * (b_off - a_off)
    verts = grid.origin + lattice * grid.voxel_size

    # per-cell map from edge number to global vertex id
    vert_of_edge = np.full((len(base), 12), -1, dtype=np.int64)
    vert_of_edge[cell_ids, edge_ids] = inverse

    # expand triangle slots in cell-major order (deterministic)
    n_tri = _CASE_TRI_COUNT[case]
    total = int(n_tri.sum())
    cell_of_tri = np.repeat(np.arange(len(base)), n_tri)
    slot = np.arange(total) - np.repeat(np.cumsum(n_tri) - n_tri, n_tri)
    edge_triples = TRI_TABLE[case[cell_of_tri], 3 * slot + np.arange(3)[:, None]].T
    tris = vert_of_edge[cell_of_tri[:, None], edge_triples]

    keep = (
        (tris[:, 0] != tris[:, 1]) & (tris[:, 1] != tris[:, 2]) & (tris[:, 0] != tris[:, 2])
    )
    return TriangleMesh(verts, tris[keep])
