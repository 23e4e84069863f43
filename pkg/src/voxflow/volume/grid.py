"""Sparse voxel grids keyed by integer coordinates.

Entries are kept sorted lexicographically by (x, y, z) so lookups are binary
searches over packed keys and serialization order is canonical. Coordinates
must fit in 21 bits per axis (|c| < 2^20), comfortably beyond any scene the
toolkit targets at centimeter voxels.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..constants import HIERARCHY_VOXEL_SIZES, TRUNCATION_VOXELS
from ..errors import InvalidArgumentError

KIND_TSDF = "tsdf"
KIND_MOTION = "motion"

_COORD_LIMIT = 1 << 20


def pack_coords(coords: np.ndarray) -> np.ndarray:
    """Pack integer (x, y, z) triples into order-preserving int64 keys."""
    c = np.asarray(coords, dtype=np.int64)
    if c.size and np.abs(c).max() >= _COORD_LIMIT:
        raise InvalidArgumentError("voxel coordinate magnitude exceeds 2^20")
    x, y, z = c[..., 0], c[..., 1], c[..., 2]
    return ((x + _COORD_LIMIT) << 42) | ((y + _COORD_LIMIT) << 21) | (z + _COORD_LIMIT)


def unpack_keys(keys: np.ndarray) -> np.ndarray:
    """Inverse of pack_coords: int64 keys back to (n, 3) coordinates."""
    k = np.asarray(keys, dtype=np.int64)
    mask = (1 << 21) - 1
    out = np.empty(k.shape + (3,), dtype=np.int64)
    out[..., 0] = (k >> 42) - _COORD_LIMIT
    out[..., 1] = ((k >> 21) & mask) - _COORD_LIMIT
    out[..., 2] = (k & mask) - _COORD_LIMIT
    return out


@dataclass(frozen=True)
class SparseVoxelGrid:
    """Sparse voxel payload map.

    kind "tsdf" stores one scalar per voxel in voxel-distance units, clamped
    to the +-3 truncation band; kind "motion" stores a 3-vector in meters.
    origin is the world position of the (0, 0, 0) voxel center.
    """

    voxel_size: float
    origin: np.ndarray
    kind: str
    coords: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if self.kind not in (KIND_TSDF, KIND_MOTION):
            raise InvalidArgumentError(f"unknown payload kind {self.kind!r}")
        if not self.voxel_size > 0:
            raise InvalidArgumentError("voxel_size must be positive")
        origin = np.asarray(self.origin, dtype=np.float64).reshape(3)
        coords = np.ascontiguousarray(self.coords, dtype=np.int32).reshape(-1, 3)
        if self.kind == KIND_TSDF:
            values = np.ascontiguousarray(self.values, dtype=np.float64).reshape(-1)
        else:
            values = np.ascontiguousarray(self.values, dtype=np.float64).reshape(-1, 3)
        if len(values) != len(coords):
            raise InvalidArgumentError("coords and values length mismatch")
        if not np.all(np.isfinite(values)):
            raise InvalidArgumentError("voxel payloads must be finite")
        if self.kind == KIND_TSDF and values.size and np.abs(values).max() > TRUNCATION_VOXELS:
            raise InvalidArgumentError("tsdf values must lie in the truncation band [-3, 3]")

        keys = pack_coords(coords)
        if not np.all(keys[1:] > keys[:-1]):
            order = np.argsort(keys, kind="stable")
            keys = keys[order]
            if np.any(keys[1:] == keys[:-1]):
                raise InvalidArgumentError("duplicate voxel coordinates")
            coords = coords[order]
            values = values[order]
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "_keys", keys)

    def __len__(self) -> int:
        return len(self.coords)

    @property
    def keys(self) -> np.ndarray:
        """Packed int64 keys, ascending."""
        return self._keys

    def voxel_positions(self) -> np.ndarray:
        """World positions of all stored voxel centers, (n, 3) meters."""
        return self.origin + self.coords.astype(np.float64) * self.voxel_size

    def find(self, coords) -> np.ndarray:
        """Indices of the given integer coordinates, -1 where absent."""
        q = np.asarray(coords, dtype=np.int64).reshape(-1, 3)
        if len(self) == 0:
            return np.full(len(q), -1, dtype=np.int64)
        # out-of-range queries can't be stored; clamp for packing, then reject
        in_range = np.all(np.abs(q) < _COORD_LIMIT, axis=1)
        qk = pack_coords(np.where(in_range[:, None], q, 0))
        idx = np.searchsorted(self._keys, qk)
        idx_c = np.minimum(idx, len(self) - 1)
        hit = (self._keys[idx_c] == qk) & in_range
        return np.where(hit, idx_c, -1)

    def world_to_coord(self, points: np.ndarray) -> np.ndarray:
        """Nearest voxel coordinate for world points (rounding to the center)."""
        p = np.asarray(points, dtype=np.float64)
        return np.rint((p - self.origin) / self.voxel_size).astype(np.int64)


def empty_grid(voxel_size: float, kind: str = KIND_TSDF, origin=(0.0, 0.0, 0.0)) -> SparseVoxelGrid:
    shape = (0,) if kind == KIND_TSDF else (0, 3)
    return SparseVoxelGrid(voxel_size, origin, kind, np.zeros((0, 3), np.int32), np.zeros(shape))


@dataclass(frozen=True)
class WeightedTsdfGrid:
    """Fused TSDF with per-voxel accumulated observation weight."""

    grid: SparseVoxelGrid
    weights: np.ndarray

    def __post_init__(self):
        if self.grid.kind != KIND_TSDF:
            raise InvalidArgumentError("weighted grid requires a tsdf payload")
        w = np.ascontiguousarray(self.weights, dtype=np.float64).reshape(-1)
        if len(w) != len(self.grid):
            raise InvalidArgumentError("weights length mismatch")
        if w.size and w.min() <= 0:
            raise InvalidArgumentError("stored voxels must have positive weight")
        object.__setattr__(self, "weights", w)

    def __len__(self) -> int:
        return len(self.grid)


@dataclass(frozen=True)
class ResolutionHierarchy:
    """Four grids at the canonical 1, 2, 4, 8 cm voxel sizes, finest first."""

    levels: tuple

    def __post_init__(self):
        levels = tuple(self.levels)
        sizes = tuple(g.voxel_size for g in levels)
        if sizes != HIERARCHY_VOXEL_SIZES:
            raise InvalidArgumentError(
                f"hierarchy voxel sizes {sizes} != canonical {HIERARCHY_VOXEL_SIZES}"
            )
        object.__setattr__(self, "levels", levels)

    def __iter__(self):
        return iter(self.levels)

    def __len__(self) -> int:
        return len(self.levels)

    def __getitem__(self, i):
        return self.levels[i]

    @property
    def voxel_sizes(self) -> tuple:
        return tuple(g.voxel_size for g in self.levels)
