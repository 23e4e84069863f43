"""Flat-array bounding volume hierarchy over triangles.

Built once per (mesh frame), traversed by the compiled ray-cast kernel.
Median split on the longest centroid axis with stable ordering, so the tree
is a pure function of the input geometry.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

LEAF_SIZE = 4


@dataclass(frozen=True)
class FlatBvh:
    node_min: np.ndarray   # (n_nodes, 3) f64
    node_max: np.ndarray   # (n_nodes, 3) f64
    left: np.ndarray       # (n_nodes,) i32, -1 for leaves
    right: np.ndarray      # (n_nodes,) i32
    start: np.ndarray      # (n_nodes,) i32 into order, leaves only
    count: np.ndarray      # (n_nodes,) i32
    order: np.ndarray      # (n_triangles,) i32 permutation into triangle ids


def build_bvh(vertices: np.ndarray, triangles: np.ndarray, leaf_size: int = LEAF_SIZE) -> FlatBvh:
    n = len(triangles)
    tri_v = vertices[triangles]
    tmin = tri_v.min(axis=1)
    tmax = tri_v.max(axis=1)
    cent = 0.5 * (tmin + tmax)
    order = np.arange(n, dtype=np.int64)

    node_min, node_max = [], []
    left, right, start, count = [], [], [], []

    def new_node() -> int:
        node_min.append(None)
        node_max.append(None)
        left.append(-1)
        right.append(-1)
        start.append(0)
        count.append(0)
        return len(left) - 1

    if n == 0:
        root = new_node()
        node_min[root] = np.zeros(3)
        node_max[root] = np.zeros(3)
    else:
        stack = [(0, n, new_node())]
        while stack:
            s, e, ni = stack.pop()
            sel = order[s:e]
            node_min[ni] = tmin[sel].min(axis=0)
            node_max[ni] = tmax[sel].max(axis=0)
            if e - s <= leaf_size:
                start[ni] = s
                count[ni] = e - s
                continue
            c = cent[sel]
            axis = int(np.argmax(c.max(axis=0) - c.min(axis=0)))
            order[s:e] = sel[np.argsort(c[:, axis], kind="stable")]
            mid = (s + e) // 2
            li, ri = new_node(), new_node()
            left[ni], right[ni] = li, ri
            stack.append((s, mid, li))
            stack.append((mid, e, ri))

    return FlatBvh(
        np.ascontiguousarray(node_min, dtype=np.float64),
        np.ascontiguousarray(node_max, dtype=np.float64),
        np.asarray(left, dtype=np.int32),
        np.asarray(right, dtype=np.int32),
        np.asarray(start, dtype=np.int32),
        np.asarray(count, dtype=np.int32),
        order.astype(np.int32),
    )
