"""Analytic deformations shared between test modules.

These are plain functions, not fixtures, so tests can import them and so the
ground-truth motion is always recomputable in closed form.
"""
import numpy as np

from voxflow.geometry.mesh import AnimationClip, TriangleMesh
from voxflow.geometry.primitives import tube
from voxflow.volume.grid import KIND_TSDF, SparseVoxelGrid


def sphere_tsdf(radius: float, voxel_size: float = 0.01,
                center=(0.0, 0.0, 0.0)) -> SparseVoxelGrid:
    """Exact truncated signed distance field of a sphere, origin at zero."""
    center = np.asarray(center, dtype=np.float64)
    m = int(np.ceil((radius + np.abs(center).max() + 3.0 * voxel_size) / voxel_size)) + 1
    axis = np.arange(-m, m + 1)
    coords = np.stack(np.meshgrid(axis, axis, axis, indexing="ij"), axis=-1).reshape(-1, 3)
    sdf = (np.linalg.norm(coords * voxel_size - center, axis=1) - radius) / voxel_size
    keep = np.abs(sdf) < 3.0
    return SparseVoxelGrid(voxel_size, (0.0, 0.0, 0.0), KIND_TSDF,
                           coords[keep], sdf[keep])


def bend_positions(vertices: np.ndarray, bend_radius: float) -> np.ndarray:
    """Circular-arc bend of z-aligned geometry, curling toward +y.

    Arc length along z is preserved on the y = 0 fiber; the map tends to the
    identity as bend_radius grows. Each cross-section (constant z) moves
    rigidly, so the deformation is locally rigid but globally far from it.
    """
    v = np.asarray(vertices, dtype=np.float64)
    phi = v[:, 2] / bend_radius
    r = bend_radius - v[:, 1]
    out = np.empty_like(v)
    out[:, 0] = v[:, 0]
    out[:, 1] = bend_radius - r * np.cos(phi)
    out[:, 2] = r * np.sin(phi)
    return out


def bent_tube_problem(bend_radius: float = 1.0):
    """Tube bent along its axis with the far half hidden.

    Returns (mesh, visible_idx, gt_motion). Visible vertices are the z < 0
    half; the bend angle grows linearly with z, so a single rigid transform
    fitted to the visible half extrapolates poorly onto the hidden half.
    """
    mesh = tube(30, 16, radius=0.1, length=1.0, axis="z")
    gt_motion = bend_positions(mesh.vertices, bend_radius) - mesh.vertices
    visible = np.flatnonzero(mesh.vertices[:, 2] < 0.0)
    return mesh, visible, gt_motion


def bent_tube_clip(bend_radius: float = 1.0, n_frames: int = 2) -> AnimationClip:
    """Animation interpolating rest -> full bend over n_frames."""
    mesh = tube(20, 16, radius=0.1, length=1.0, axis="z")
    frames = np.empty((n_frames, mesh.n_vertices, 3))
    for i in range(n_frames):
        s = i / max(n_frames - 1, 1)
        frames[i] = bend_positions(mesh.vertices, bend_radius / max(s, 1e-12)) \
            if s > 0 else mesh.vertices
    return AnimationClip(mesh, frames)


def translation_clip(mesh: TriangleMesh, step, n_frames: int = 2) -> AnimationClip:
    """Rigid translation by `step` per frame."""
    step = np.asarray(step, dtype=np.float64)
    frames = mesh.vertices[None, :, :] + np.arange(n_frames)[:, None, None] * step
    return AnimationClip(mesh, frames)
