"""Volumetric motion fields from animated meshes.

Each voxel blends the rigid motion of its K nearest mesh vertices with dual
quaternion blending under inverse-distance weights. Per-vertex rotations are
identity by default, which makes DQB coincide with inverse-distance averaging
of the displacements; an optional mode estimates rotations from the one-ring
deformation.
"""
from __future__ import annotations

import numpy as np

from ..constants import COINCIDENCE_EPS, DEFAULT_KNN
from ..errors import InvalidArgumentError
from ..geometry.mesh import AnimationClip, vertex_displacements
from ..geometry.transforms import blend_dual_quaternions, quat_from_matrix, quat_mul, quat_conj
from ..volume.grid import KIND_MOTION, ResolutionHierarchy, SparseVoxelGrid
from .convert import knn

_ROTATION_MODES = ("identity", "one-ring")


def _one_ring_rotations(mesh, src_pos: np.ndarray, dst_pos: np.ndarray) -> np.ndarray:
    """Best-fit rotation of each vertex star, batched over vertices."""
    edges = mesh.edges()
    n = len(src_pos)
    degree = np.bincount(edges.ravel(), minlength=n)
    max_deg = int(degree.max()) if len(edges) else 0
    if max_deg == 0:
        return np.tile(np.eye(3), (n, 1, 1))
    # scatter neighbor ids into a padded (n, max_deg) table
    nbr = np.zeros((n, max_deg), dtype=np.int64)
    mask = np.zeros((n, max_deg), dtype=bool)
    slot = np.zeros(n, dtype=np.int64)
    both = np.concatenate([edges, edges[:, ::-1]])
    for a, b in both:
        nbr[a, slot[a]] = b
        mask[a, slot[a]] = True
        slot[a] += 1
    e_src = np.where(mask[..., None], src_pos[nbr] - src_pos[:, None, :], 0.0)
    e_dst = np.where(mask[..., None], dst_pos[nbr] - dst_pos[:, None, :], 0.0)
    h = np.einsum("nkd,nke->nde", e_src, e_dst)
    u, _, vt = np.linalg.svd(h)
    det = np.linalg.det(np.einsum("nde,nef->ndf", np.transpose(vt, (0, 2, 1)), np.transpose(u, (0, 2, 1))))
    flip = np.tile(np.eye(3), (n, 1, 1))
    flip[:, 2, 2] = det
    return np.einsum("nde,nef,nfg->ndg", np.transpose(vt, (0, 2, 1)), flip, np.transpose(u, (0, 2, 1)))


def generate_vmf(clip: AnimationClip, src_frame: int, dst_frame: int, tsdf_voxels,
                 k: int = DEFAULT_KNN, rotation_mode: str = "identity") -> SparseVoxelGrid:
    """Blend nearest-vertex motion onto a voxel set.

    tsdf_voxels is the SparseVoxelGrid whose coordinate set defines where the
    motion field lives (normally the fused TSDF of the source frame).
    rotation_mode "identity" assigns pure-translation transforms per vertex;
    "one-ring" estimates per-vertex rotations from the star deformation.
    """
    if rotation_mode not in _ROTATION_MODES:
        raise InvalidArgumentError(f"rotation_mode must be one of {_ROTATION_MODES}")
    if not isinstance(tsdf_voxels, SparseVoxelGrid):
        raise InvalidArgumentError("tsdf_voxels must be a SparseVoxelGrid")
    disp = vertex_displacements(clip, src_frame, dst_frame)
    verts = clip.frames[src_frame]
    positions = tsdf_voxels.voxel_positions()

    d, idx = knn(verts, positions, k)
    n_q, k_eff = idx.shape

    if rotation_mode == "identity":
        real = np.zeros((n_q, k_eff, 4))
        real[..., 0] = 1.0
        dual = np.zeros((n_q, k_eff, 4))
        dual[..., 1:] = 0.5 * disp[idx]
    else:
        rot = _one_ring_rotations(clip.mesh, verts, verts + disp)
        q_r = quat_from_matrix(rot)
        # translation of the about-the-vertex rigid motion p -> R(p - v) + v + d
        trans = verts + disp - np.einsum("nde,ne->nd", rot, verts)
        t_quat = np.concatenate([np.zeros((len(verts), 1)), trans], axis=1)
        q_d = 0.5 * quat_mul(t_quat, q_r)
        real = q_r[idx]
        dual = q_d[idx]

    with np.errstate(divide="ignore"):
        w = 1.0 / np.maximum(d, COINCIDENCE_EPS * 1e-3)
    coincident = d < COINCIDENCE_EPS
    any_hit = np.any(coincident, axis=1)
    if np.any(any_hit):
        # coincident vertex takes the whole blend (limit of 1/d weights)
        hit_col = np.argmax(coincident, axis=1)
        rows = np.nonzero(any_hit)[0]
        w[rows] = 0.0
        w[rows, hit_col[rows]] = 1.0

    blend_real, blend_dual = blend_dual_quaternions(real, dual, w)
    rotated = _apply_unit_dual(blend_real, blend_dual, positions)
    motion = rotated - positions
    return SparseVoxelGrid(
        tsdf_voxels.voxel_size, tsdf_voxels.origin, KIND_MOTION, tsdf_voxels.coords, motion
    )


def _apply_unit_dual(real: np.ndarray, dual: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Apply batched unit dual quaternions to matching points."""
    t = 2.0 * quat_mul(dual, quat_conj(real))[..., 1:]
    qv = real[..., 1:]
    w = real[..., :1]
    s = 2.0 * np.cross(qv, points)
    return points + w * s + np.cross(qv, s) + t


def vmf_hierarchy(clip: AnimationClip, src_frame: int, dst_frame: int,
                  hierarchy: ResolutionHierarchy, k: int = DEFAULT_KNN,
                  rotation_mode: str = "identity"):
    """generate_vmf per resolution level; returns a tuple of motion grids."""
    return tuple(
        generate_vmf(clip, src_frame, dst_frame, level, k, rotation_mode)
        for level in hierarchy
    )
