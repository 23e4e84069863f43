"""Procedural test meshes: icospheres, tubes, boxes, planar sheets.

All constructions are deterministic: vertex and triangle order depend only on
the arguments, never on dict/hash order.
"""
from __future__ import annotations

import numpy as np

from ..errors import InvalidArgumentError
from .mesh import TriangleMesh


def icosahedron() -> TriangleMesh:
    """Regular icosahedron inscribed in the unit sphere (12 vertices, 20 faces)."""
    phi = (1.0 + np.sqrt(5.0)) / 2.0
    v = np.array(
        [
            (-1, phi, 0), (1, phi, 0), (-1, -phi, 0), (1, -phi, 0),
            (0, -1, phi), (0, 1, phi), (0, -1, -phi), (0, 1, -phi),
            (phi, 0, -1), (phi, 0, 1), (-phi, 0, -1), (-phi, 0, 1),
        ],
        dtype=np.float64,
    )
    v /= np.linalg.norm(v[0])
    t = np.array(
        [
            (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
            (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
            (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
            (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
        ],
        dtype=np.int64,
    )
    return TriangleMesh(v, t)


def icosphere(subdivisions: int = 1, radius: float = 1.0, center=(0.0, 0.0, 0.0)) -> TriangleMesh:
    """Subdivided icosahedron projected onto a sphere.

    One subdivision yields exactly 42 vertices (12 originals + 30 edge
    midpoints). Midpoint vertices are appended in sorted-edge order so the
    layout is reproducible.
    """
    if subdivisions < 0:
        raise InvalidArgumentError("subdivisions must be nonnegative")
    if radius <= 0:
        raise InvalidArgumentError("radius must be positive")
    mesh = icosahedron()
    verts, tris = mesh.vertices, mesh.triangles
    for _ in range(subdivisions):
        e = np.concatenate([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]])
        e.sort(axis=1)
        edges, inverse = np.unique(e, axis=0, return_inverse=True)
        mids = verts[edges[:, 0]] + verts[edges[:, 1]]
        mids /= np.linalg.norm(mids, axis=1, keepdims=True)
        mid_idx = len(verts) + np.arange(len(edges))
        m01, m12, m20 = np.split(mid_idx[inverse], 3)
        a, b, c = tris[:, 0], tris[:, 1], tris[:, 2]
        tris = np.concatenate(
            [
                np.stack([a, m01, m20], axis=1),
                np.stack([b, m12, m01], axis=1),
                np.stack([c, m20, m12], axis=1),
                np.stack([m01, m12, m20], axis=1),
            ]
        )
        verts = np.concatenate([verts, mids])
    v = verts * radius + np.asarray(center, dtype=np.float64)
    return TriangleMesh(v, tris)


def tube(n_rings: int, n_around: int, radius: float = 0.1, length: float = 1.0,
         center=(0.0, 0.0, 0.0), axis: str = "z") -> TriangleMesh:
    """Open-ended cylinder shell with n_rings x n_around vertices.

    Rings are spaced evenly along the axis over [-length/2, +length/2]; the two
    end rings are boundary loops (the tube has no caps).
    """
    if n_rings < 2 or n_around < 3:
        raise InvalidArgumentError("tube needs at least 2 rings and 3 segments")
    h = np.linspace(-length / 2.0, length / 2.0, n_rings)
    theta = np.arange(n_around) * (2.0 * np.pi / n_around)
    cos_t, sin_t = np.cos(theta), np.sin(theta)
    ring = np.stack([radius * cos_t, radius * sin_t], axis=1)
    v = np.empty((n_rings * n_around, 3))
    v[:, 0] = np.tile(ring[:, 0], n_rings)
    v[:, 1] = np.tile(ring[:, 1], n_rings)
    v[:, 2] = np.repeat(h, n_around)
    if axis == "x":
        v = v[:, [2, 0, 1]]
    elif axis == "y":
        v = v[:, [1, 2, 0]]
    elif axis != "z":
        raise InvalidArgumentError("axis must be one of x, y, z")

    r = np.arange(n_rings - 1)[:, None]
    j = np.arange(n_around)[None, :]
    jn = (j + 1) % n_around
    v00 = (r * n_around + j).ravel()
    v01 = (r * n_around + jn).ravel()
    v10 = ((r + 1) * n_around + j).ravel()
    v11 = ((r + 1) * n_around + jn).ravel()
    tris = np.concatenate(
        [np.stack([v00, v01, v11], axis=1), np.stack([v00, v11, v10], axis=1)]
    )
    return TriangleMesh(v + np.asarray(center, dtype=np.float64), tris)


def box(size=(1.0, 1.0, 1.0), center=(0.0, 0.0, 0.0)) -> TriangleMesh:
    """Axis-aligned box, 8 vertices, 12 triangles.

    Face diagonals all pass through the even-parity corners (the inscribed
    tetrahedron), which makes area-weighted corner normals point exactly along
    the corner diagonals.
    """
    sx, sy, sz = (float(s) / 2.0 for s in size)
    corners = np.array(
        [(x, y, z) for x in (-sx, sx) for y in (-sy, sy) for z in (-sz, sz)]
    )
    # index bit layout: x*4 + y*2 + z with 0 = negative side
    faces = np.array(
        [
            (0, 1, 3, 2),  # -x
            (4, 6, 7, 5),  # +x
            (0, 4, 5, 1),  # -y
            (2, 3, 7, 6),  # +y
            (0, 2, 6, 4),  # -z
            (1, 5, 7, 3),  # +z
        ],
        dtype=np.int64,
    )
    tris = []
    for quad in faces:
        bits = [(i >> 2 & 1) + (i >> 1 & 1) + (i & 1) for i in quad]
        # rotate the quad so the split diagonal (corners 0 and 2 of the quad)
        # joins the two even-parity corners
        off = 0 if bits[0] % 2 == 0 else 1
        q = [quad[(off + k) % 4] for k in range(4)]
        tris.append((q[0], q[1], q[2]))
        tris.append((q[0], q[2], q[3]))
    v = corners + np.asarray(center, dtype=np.float64)
    return TriangleMesh(v, np.array(tris, dtype=np.int64))


def plane_sheet(n_x: int, n_y: int, size_x: float = 1.0, size_y: float = 1.0,
                center=(0.0, 0.0, 0.0)) -> TriangleMesh:
    """Regular triangulated grid in the z = center_z plane, normals along +z."""
    if n_x < 2 or n_y < 2:
        raise InvalidArgumentError("sheet needs at least 2 samples per side")
    xs = np.linspace(-size_x / 2.0, size_x / 2.0, n_x)
    ys = np.linspace(-size_y / 2.0, size_y / 2.0, n_y)
    gx, gy = np.meshgrid(xs, ys)
    v = np.stack([gx.ravel(), gy.ravel(), np.zeros(n_x * n_y)], axis=1)
    r = np.arange(n_y - 1)[:, None]
    c = np.arange(n_x - 1)[None, :]
    v00 = (r * n_x + c).ravel()
    v01 = v00 + 1
    v10 = v00 + n_x
    v11 = v10 + 1
    tris = np.concatenate(
        [np.stack([v00, v01, v11], axis=1), np.stack([v00, v11, v10], axis=1)]
    )
    return TriangleMesh(v + np.asarray(center, dtype=np.float64), tris)
