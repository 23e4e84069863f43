"""Binary and text artifact formats.

All binary formats are little-endian with an 8-byte ASCII magic. Floating
payloads are 32-bit on disk; readers recover the writer's intended value via
the shortest decimal representation, so canonical sizes like 0.01 survive a
round trip exactly. Writing a just-read file reproduces it byte for byte.
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from ..errors import FormatError, InvalidArgumentError
from ..geometry.camera import PinholeCamera
from ..geometry.mesh import AnimationClip, TriangleMesh
from ..geometry.transforms import RigidTransform
from ..motion.pointset import PointMotionSet
from ..render.images import DepthMap, SceneFlowImage
from ..volume.grid import KIND_MOTION, KIND_TSDF, SparseVoxelGrid, pack_coords

MAGIC_ANIM = b"ANIM0001"
MAGIC_DEPTH = b"DPTH0001"
MAGIC_FLOW = b"SFLW0001"
MAGIC_VOXEL = b"SVOX0001"
MAGIC_MOTION = b"PMSN0001"


def _read_exact(f, n: int, what: str) -> bytes:
    data = f.read(n)
    if len(data) != n:
        raise FormatError(f"truncated file while reading {what}")
    return data


def _check_magic(f, magic: bytes, path):
    got = f.read(len(magic))
    if got != magic:
        raise FormatError(f"{path}: bad magic {got!r}, expected {magic!r}")


def _f32_exact(x: float) -> float:
    """The float64 a reader should infer from an f32: its shortest decimal."""
    return float(np.format_float_positional(np.float32(x), unique=True))


# -- animation (ANIM) -------------------------------------------------------

def write_animation(path, clip: AnimationClip):
    tris = clip.mesh.triangles.astype("<u4")
    frames = clip.frames.astype("<f4")
    with open(path, "wb") as f:
        f.write(MAGIC_ANIM)
        f.write(struct.pack("<III", clip.n_frames, clip.mesh.n_vertices, clip.mesh.n_triangles))
        f.write(tris.tobytes())
        f.write(frames.tobytes())


def read_animation(path, frame_rate: float = 25.0) -> AnimationClip:
    """Frame rate is not part of the format; pass it if not the 25 fps default."""
    with open(path, "rb") as f:
        _check_magic(f, MAGIC_ANIM, path)
        n_frames, n_verts, n_tris = struct.unpack("<III", _read_exact(f, 12, "header"))
        tris = np.frombuffer(_read_exact(f, n_tris * 12, "triangles"), dtype="<u4")
        raw = _read_exact(f, n_frames * n_verts * 12, "frames")
        if f.read(1):
            raise FormatError(f"{path}: trailing bytes after animation payload")
    if n_frames < 1:
        raise FormatError(f"{path}: animation has no frames")
    frames = np.frombuffer(raw, dtype="<f4").astype(np.float64).reshape(n_frames, n_verts, 3)
    mesh = TriangleMesh(frames[0], tris.astype(np.int64).reshape(-1, 3))
    return AnimationClip(mesh, frames, frame_rate)


# -- depth (DPTH) -----------------------------------------------------------

def write_depth(path, depth_map: DepthMap):
    mm = depth_map.to_millimeters().astype("<u2")
    with open(path, "wb") as f:
        f.write(MAGIC_DEPTH)
        f.write(struct.pack("<II", depth_map.width, depth_map.height))
        f.write(mm.tobytes())


def read_depth_millimeters(path) -> np.ndarray:
    """Raw (height, width) u16 millimeter image, 0 = invalid."""
    with open(path, "rb") as f:
        _check_magic(f, MAGIC_DEPTH, path)
        w, h = struct.unpack("<II", _read_exact(f, 8, "header"))
        raw = _read_exact(f, w * h * 2, "pixels")
        if f.read(1):
            raise FormatError(f"{path}: trailing bytes after depth payload")
    return np.frombuffer(raw, dtype="<u2").reshape(h, w).copy()


def read_depth(path, camera: PinholeCamera) -> DepthMap:
    mm = read_depth_millimeters(path)
    if (mm.shape[1], mm.shape[0]) != (camera.width, camera.height):
        raise FormatError(f"{path}: depth size {mm.shape} does not match camera")
    return DepthMap.from_millimeters(camera, mm)


# -- scene flow (SFLW) ------------------------------------------------------

def write_scene_flow(path, flow_image: SceneFlowImage):
    flow = flow_image.flow.astype("<f4")
    flow[~flow_image.valid] = np.nan
    with open(path, "wb") as f:
        f.write(MAGIC_FLOW)
        f.write(struct.pack("<II", flow_image.width, flow_image.height))
        f.write(flow.tobytes())


def read_scene_flow(path) -> SceneFlowImage:
    with open(path, "rb") as f:
        _check_magic(f, MAGIC_FLOW, path)
        w, h = struct.unpack("<II", _read_exact(f, 8, "header"))
        raw = _read_exact(f, w * h * 12, "pixels")
        if f.read(1):
            raise FormatError(f"{path}: trailing bytes after flow payload")
    flow = np.frombuffer(raw, dtype="<f4").astype(np.float64).reshape(h, w, 3)
    valid = ~np.any(np.isnan(flow), axis=2)
    flow = np.where(valid[:, :, None], flow, 0.0)
    return SceneFlowImage(w, h, flow, valid)


# -- sparse voxels (SVOX) ---------------------------------------------------

_KIND_CODE = {KIND_TSDF: 0, KIND_MOTION: 1}
_CODE_KIND = {v: k for k, v in _KIND_CODE.items()}


def write_sparse_voxels(path, grid: SparseVoxelGrid):
    width = 1 if grid.kind == KIND_TSDF else 3
    entry = np.dtype([("c", "<i4", (3,)), ("p", "<f4", (width,))])
    rows = np.empty(len(grid), dtype=entry)
    rows["c"] = grid.coords
    rows["p"] = grid.values.reshape(-1, width)
    with open(path, "wb") as f:
        f.write(MAGIC_VOXEL)
        f.write(struct.pack("<B", _KIND_CODE[grid.kind]))
        f.write(np.asarray([grid.voxel_size], "<f4").tobytes())
        f.write(np.asarray(grid.origin, "<f4").tobytes())
        f.write(struct.pack("<Q", len(grid)))
        f.write(rows.tobytes())


def read_sparse_voxels(path) -> SparseVoxelGrid:
    with open(path, "rb") as f:
        _check_magic(f, MAGIC_VOXEL, path)
        (code,) = struct.unpack("<B", _read_exact(f, 1, "payload kind"))
        if code not in _CODE_KIND:
            raise FormatError(f"{path}: unknown payload kind {code}")
        kind = _CODE_KIND[code]
        head = np.frombuffer(_read_exact(f, 16, "grid header"), dtype="<f4")
        (count,) = struct.unpack("<Q", _read_exact(f, 8, "entry count"))
        width = 1 if kind == KIND_TSDF else 3
        entry = np.dtype([("c", "<i4", (3,)), ("p", "<f4", (width,))])
        rows = np.frombuffer(_read_exact(f, count * entry.itemsize, "entries"), dtype=entry)
        if f.read(1):
            raise FormatError(f"{path}: trailing bytes after voxel payload")
    voxel_size = _f32_exact(head[0])
    origin = np.array([_f32_exact(v) for v in head[1:4]])
    coords = rows["c"].astype(np.int32)
    values = rows["p"].astype(np.float64).reshape(-1) if width == 1 else rows["p"].astype(np.float64)
    try:
        if len(coords) > 1 and not np.all(np.diff(pack_coords(coords)) > 0):
            raise FormatError(f"{path}: voxel entries are not sorted by coordinate")
        return SparseVoxelGrid(voxel_size, origin, kind, coords, values)
    except InvalidArgumentError as e:
        raise FormatError(f"{path}: {e}") from e


# -- point motion (PMSN) ----------------------------------------------------

def write_point_motion(path, pms: PointMotionSet):
    rows = np.empty(len(pms), dtype=np.dtype([("p", "<f4", (3,)), ("m", "<f4", (3,))]))
    rows["p"] = pms.points
    rows["m"] = pms.motions
    with open(path, "wb") as f:
        f.write(MAGIC_MOTION)
        f.write(struct.pack("<Q", len(pms)))
        f.write(rows.tobytes())


def read_point_motion(path) -> PointMotionSet:
    with open(path, "rb") as f:
        _check_magic(f, MAGIC_MOTION, path)
        (count,) = struct.unpack("<Q", _read_exact(f, 8, "record count"))
        entry = np.dtype([("p", "<f4", (3,)), ("m", "<f4", (3,))])
        rows = np.frombuffer(_read_exact(f, count * entry.itemsize, "records"), dtype=entry)
        if f.read(1):
            raise FormatError(f"{path}: trailing bytes after motion payload")
    return PointMotionSet(rows["p"].astype(np.float64), rows["m"].astype(np.float64))


# -- wavefront OBJ (positions + faces only) --------------------------------

def write_obj(path, mesh: TriangleMesh):
    with open(path, "w") as f:
        for v in mesh.vertices:
            f.write(f"v {v[0]:.17g} {v[1]:.17g} {v[2]:.17g}\n")
        for t in mesh.triangles:
            f.write(f"f {t[0] + 1} {t[1] + 1} {t[2] + 1}\n")


def read_obj(path) -> TriangleMesh:
    verts, tris = [], []
    with open(path) as f:
        for ln, line in enumerate(f, 1):
            parts = line.split()
            if not parts or parts[0] in ("#", "vn", "vt", "o", "g", "s", "usemtl", "mtllib"):
                continue
            if parts[0] == "v":
                if len(parts) < 4:
                    raise FormatError(f"{path}:{ln}: vertex needs 3 coordinates")
                verts.append([float(x) for x in parts[1:4]])
            elif parts[0] == "f":
                idx = [int(p.split("/")[0]) for p in parts[1:]]
                idx = [i - 1 if i > 0 else len(verts) + i for i in idx]
                if len(idx) < 3:
                    raise FormatError(f"{path}:{ln}: face needs at least 3 vertices")
                for k in range(1, len(idx) - 1):  # fan-triangulate polygons
                    tris.append([idx[0], idx[k], idx[k + 1]])
    return TriangleMesh(
        np.asarray(verts, dtype=np.float64).reshape(-1, 3),
        np.asarray(tris, dtype=np.int64).reshape(-1, 3),
    )


# -- camera sidecar (text) --------------------------------------------------

def write_camera(path, camera: PinholeCamera):
    m = camera.pose.matrix()
    lines = [
        "format = camera/1",
        f"fx = {camera.fx!r}",
        f"fy = {camera.fy!r}",
        f"cx = {camera.cx!r}",
        f"cy = {camera.cy!r}",
        f"width = {camera.width}",
        f"height = {camera.height}",
    ]
    for i in range(4):
        lines.append("pose_row%d = %s" % (i, " ".join(repr(float(x)) for x in m[i])))
    Path(path).write_text("\n".join(lines) + "\n")


def read_camera(path) -> PinholeCamera:
    fields = {}
    for ln, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise FormatError(f"{path}:{ln}: expected key = value")
        key, _, value = line.partition("=")
        fields[key.strip()] = value.strip()
    if fields.get("format") != "camera/1":
        raise FormatError(f"{path}: not a camera/1 file")
    try:
        m = np.array(
            [[float(x) for x in fields[f"pose_row{i}"].split()] for i in range(4)]
        )
        cam = PinholeCamera(
            float(fields["fx"]), float(fields["fy"]),
            float(fields["cx"]), float(fields["cy"]),
            int(fields["width"]), int(fields["height"]),
            RigidTransform.from_matrix(m),
        )
    except KeyError as e:
        raise FormatError(f"{path}: missing field {e.args[0]}") from e
    except (ValueError, InvalidArgumentError) as e:
        raise FormatError(f"{path}: {e}") from e
    return cam


# -- visible-index list (text, one index per line) --------------------------

def write_indices(path, indices):
    idx = np.asarray(indices, dtype=np.int64).reshape(-1)
    if idx.size and idx.min() < 0:
        raise InvalidArgumentError("vertex indices must be nonnegative")
    Path(path).write_text("".join(f"{i}\n" for i in idx))


def read_indices(path) -> np.ndarray:
    values = []
    for ln, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            values.append(int(line))
        except ValueError:
            raise FormatError(f"{path}:{ln}: expected an integer index") from None
    return np.asarray(values, dtype=np.int64)
