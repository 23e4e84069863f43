"""Triangle meshes and fixed-topology vertex animations."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidArgumentError


@dataclass(frozen=True)
class TriangleMesh:
    """Indexed triangle mesh; vertices in meters, faces as vertex index triples."""

    vertices: np.ndarray
    triangles: np.ndarray

    def __post_init__(self):
        v = np.ascontiguousarray(self.vertices, dtype=np.float64).reshape(-1, 3)
        t = np.ascontiguousarray(self.triangles, dtype=np.int64).reshape(-1, 3)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "triangles", t)
        if t.size and (t.min() < 0 or t.max() >= len(v)):
            raise InvalidArgumentError("triangle indices out of vertex range")
        if not np.all(np.isfinite(v)):
            raise InvalidArgumentError("vertex positions must be finite")

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    def with_vertices(self, vertices) -> "TriangleMesh":
        """Same topology, new vertex positions."""
        return TriangleMesh(vertices, self.triangles)

    def triangle_areas(self) -> np.ndarray:
        a, b, c = (self.vertices[self.triangles[:, k]] for k in range(3))
        return 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)

    def edges(self) -> np.ndarray:
        """Unique undirected edges as (n_edges, 2) sorted index pairs."""
        t = self.triangles
        e = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        e.sort(axis=1)
        return np.unique(e, axis=0)


@dataclass(frozen=True)
class AnimationClip:
    """A mesh with per-frame vertex positions; topology is fixed across frames."""

    mesh: TriangleMesh
    frames: np.ndarray
    frame_rate: float = 25.0

    def __post_init__(self):
        f = np.ascontiguousarray(self.frames, dtype=np.float64)
        if f.ndim != 3 or f.shape[2] != 3:
            raise InvalidArgumentError("frames must have shape (n_frames, n_vertices, 3)")
        if f.shape[1] != self.mesh.n_vertices:
            raise InvalidArgumentError(
                f"frame vertex count {f.shape[1]} != mesh vertex count {self.mesh.n_vertices}"
            )
        if f.shape[0] < 1:
            raise InvalidArgumentError("clip needs at least one frame")
        if not self.frame_rate > 0:
            raise InvalidArgumentError("frame_rate must be positive")
        object.__setattr__(self, "frames", f)

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]

    def frame_mesh(self, index: int) -> TriangleMesh:
        self._check_frame(index)
        return self.mesh.with_vertices(self.frames[index])

    def _check_frame(self, index: int):
        if not 0 <= index < self.n_frames:
            raise InvalidArgumentError(f"frame {index} out of range [0, {self.n_frames})")


def vertex_displacements(clip: AnimationClip, src_frame: int, dst_frame: int) -> np.ndarray:
    """Per-vertex motion frames[dst] - frames[src], in meters."""
    clip._check_frame(src_frame)
    clip._check_frame(dst_frame)
    return clip.frames[dst_frame] - clip.frames[src_frame]


def compute_vertex_normals(mesh: TriangleMesh, return_reliable: bool = False):
    """Area-weighted per-vertex unit normals.

    Vertices whose incident triangles have (near-)zero total area get an
    arbitrary unit vector; pass return_reliable=True to also get the mask of
    vertices with a well-defined normal.
    """
    v, t = mesh.vertices, mesh.triangles
    a, b, c = v[t[:, 0]], v[t[:, 1]], v[t[:, 2]]
    # cross product length = 2*area, so summing unnormalized face normals
    # is exactly the area weighting
    face_n = np.cross(b - a, c - a)
    normals = np.zeros_like(v)
    for k in range(3):
        np.add.at(normals, t[:, k], face_n)
    length = np.linalg.norm(normals, axis=1)
    reliable = length > 1e-12
    normals[reliable] /= length[reliable, None]
    normals[~reliable] = (0.0, 0.0, 1.0)
    if return_reliable:
        return normals, reliable
    return normals


def count_boundary_edges(mesh: TriangleMesh) -> int:
    """Number of undirected edges used by exactly one triangle (0 for watertight)."""
    t = mesh.triangles
    e = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
    e.sort(axis=1)
    _, counts = np.unique(e, axis=0, return_counts=True)
    return int(np.sum(counts == 1))
