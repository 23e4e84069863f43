"""Surface and volumetric agreement metrics between two reconstructions.

Distances are reported in centimeters, the SDF error in voxel units. The
voxel overlap score counts a stored voxel as occupied when its value is
negative and treats absent voxels as outside; that rule is this toolkit's
own convention, so overlap numbers are only comparable to other runs of
this code.
"""
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from ..errors import InvalidArgumentError
from ..geometry.mesh import TriangleMesh
from ..volume.grid import KIND_TSDF, SparseVoxelGrid, pack_coords


@dataclass(frozen=True)
class ShapeEvalReport:
    """Paired-surface metrics; seed is the sampling seed that produced them."""

    iou: float
    cd: float
    snc: float
    p2p: float
    l1_sdf: float
    samples: int
    seed: int


def sample_surface(mesh: TriangleMesh, count: int, rng) -> tuple:
    """Area-uniform surface samples as (points (n, 3), unit normals (n, 3)).

    Triangles are chosen with probability proportional to area, positions
    uniformly within each; normals are the face normals, so degenerate
    triangles (zero probability) never contribute.
    """
    if mesh.n_triangles == 0:
        raise InvalidArgumentError("cannot sample an empty mesh")
    areas = mesh.triangle_areas()
    total = areas.sum()
    if not total > 0.0:
        raise InvalidArgumentError("mesh has zero surface area")
    tri = rng.choice(mesh.n_triangles, size=count, p=areas / total)
    corners = mesh.vertices[mesh.triangles[tri]]
    r1 = np.sqrt(rng.random(count))
    r2 = rng.random(count)
    # canonical uniform barycentric map: (1-sqrt(r1), sqrt(r1)(1-r2), sqrt(r1) r2)
    bary = np.stack([1.0 - r1, r1 * (1.0 - r2), r1 * r2], axis=1)
    points = np.einsum("nc,ncj->nj", bary, corners)
    cross = np.cross(corners[:, 1] - corners[:, 0], corners[:, 2] - corners[:, 0])
    normals = cross / np.linalg.norm(cross, axis=1, keepdims=True)
    return points, normals


def _directed(points_a, normals_a, tree_b, points_b, normals_b):
    """Nearest-neighbor stats from side a onto side b."""
    d, idx = tree_b.query(points_a, workers=-1)
    snc = np.abs(np.einsum("nj,nj->n", normals_a, normals_b[idx])).mean()
    p2p = np.abs(np.einsum("nj,nj->n", points_a - points_b[idx], normals_b[idx])).mean()
    return d.mean(), snc, p2p


def _check_grid(grid: SparseVoxelGrid, name: str):
    if grid.kind != KIND_TSDF:
        raise InvalidArgumentError(f"{name} grid holds {grid.kind}, not sdf values")


def eval_shape(pred_mesh: TriangleMesh, gt_mesh: TriangleMesh,
               pred_tsdf: SparseVoxelGrid, gt_tsdf: SparseVoxelGrid,
               samples: int = 30000, seed: int = 0) -> ShapeEvalReport:
    """Compare a predicted surface + field against the ground-truth pair.

    cd: symmetric mean nearest-neighbor distance between area-uniform surface
    samples, cm. snc: mean |n_a . n_b| over nearest pairs, both directions.
    p2p: symmetric mean point-to-plane distance |(p - q) . n_q|, cm. iou:
    negative-value overlap over the union of stored coordinates. l1_sdf: mean
    absolute value difference over coordinates stored in both grids, voxel
    units. Sampling is deterministic for a given seed.
    """
    if pred_mesh.n_triangles == 0:
        raise InvalidArgumentError("prediction mesh is empty")
    if gt_mesh.n_triangles == 0:
        raise InvalidArgumentError("ground-truth mesh is empty")
    _check_grid(pred_tsdf, "prediction")
    _check_grid(gt_tsdf, "ground-truth")
    if pred_tsdf.voxel_size != gt_tsdf.voxel_size:
        raise InvalidArgumentError(
            f"voxel sizes differ: {pred_tsdf.voxel_size} vs {gt_tsdf.voxel_size}"
        )
    if not np.array_equal(pred_tsdf.origin, gt_tsdf.origin):
        raise InvalidArgumentError("grids have different origins")
    if samples < 1:
        raise InvalidArgumentError("samples must be positive")

    # each side gets its own generator seeded identically, so comparing a
    # mesh against itself scores exact zeros instead of sampling noise
    pts_p, nrm_p = sample_surface(pred_mesh, samples, np.random.default_rng(seed))
    pts_g, nrm_g = sample_surface(gt_mesh, samples, np.random.default_rng(seed))
    tree_p = cKDTree(pts_p)
    tree_g = cKDTree(pts_g)
    d_pg, snc_pg, p2p_pg = _directed(pts_p, nrm_p, tree_g, pts_g, nrm_g)
    d_gp, snc_gp, p2p_gp = _directed(pts_g, nrm_g, tree_p, pts_p, nrm_p)

    keys_p = pack_coords(pred_tsdf.coords)
    keys_g = pack_coords(gt_tsdf.coords)
    inside_p = keys_p[pred_tsdf.values < 0.0]
    inside_g = keys_g[gt_tsdf.values < 0.0]
    either = np.union1d(inside_p, inside_g)
    both = np.intersect1d(inside_p, inside_g)
    iou = float(len(both)) / float(len(either)) if len(either) else 1.0

    if len(keys_p) == 0:
        raise InvalidArgumentError("prediction grid is empty")
    if len(keys_g) == 0:
        raise InvalidArgumentError("ground-truth grid is empty")
    _, ip, ig = np.intersect1d(keys_p, keys_g, return_indices=True)
    if len(ip) == 0:
        raise InvalidArgumentError("grids share no stored voxels")
    l1 = float(np.abs(pred_tsdf.values[ip] - gt_tsdf.values[ig]).mean())

    return ShapeEvalReport(
        iou=iou,
        cd=float(100.0 * 0.5 * (d_pg + d_gp)),
        snc=float(0.5 * (snc_pg + snc_gp)),
        p2p=float(100.0 * 0.5 * (p2p_pg + p2p_gp)),
        l1_sdf=l1,
        samples=samples,
        seed=seed,
    )
