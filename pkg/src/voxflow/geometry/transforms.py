"""Rigid transforms, quaternions, dual quaternions, and uniform rotations.

Quaternions are scalar-first (w, x, y, z) throughout the toolkit, including
every serialized form. Dual quaternion blending sign-aligns all real parts to
the hemisphere of the first input before the weighted sum, so the blend is
stable under per-input sign flips.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidArgumentError

_ORTHO_TOL = 1e-9


# ---------------------------------------------------------------------------
# quaternion helpers (scalar-first, batched over leading axes)

def quat_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Hamilton product a*b; inputs broadcast over leading axes."""
    aw, ax, ay, az = np.moveaxis(np.asarray(a, dtype=np.float64), -1, 0)
    bw, bx, by, bz = np.moveaxis(np.asarray(b, dtype=np.float64), -1, 0)
    return np.stack(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ],
        axis=-1,
    )


def quat_conj(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=np.float64)
    return q * np.array([1.0, -1.0, -1.0, -1.0])


def quat_rotate(q: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Rotate vectors v by unit quaternions q (batched)."""
    q = np.asarray(q, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    qv = q[..., 1:]
    w = q[..., :1]
    t = 2.0 * np.cross(qv, v)
    return v + w * t + np.cross(qv, t)


def quat_from_matrix(m: np.ndarray) -> np.ndarray:
    """Unit quaternion for rotation matrices (batched, shape (..., 3, 3)).

    Uses the largest-pivot branch per element for numerical robustness.
    """
    m = np.asarray(m, dtype=np.float64)
    batch = m.shape[:-2]
    m = m.reshape((-1, 3, 3))
    n = m.shape[0]
    q = np.empty((n, 4))

    t = np.einsum("nii->n", m)
    # candidate pivots: trace, m00, m11, m22
    cand = np.stack([t, m[:, 0, 0], m[:, 1, 1], m[:, 2, 2]], axis=1)
    best = np.argmax(cand, axis=1)

    for case in range(4):
        sel = best == case
        if not np.any(sel):
            continue
        ms = m[sel]
        if case == 0:
            s = np.sqrt(t[sel] + 1.0) * 2.0
            q[sel, 0] = 0.25 * s
            q[sel, 1] = (ms[:, 2, 1] - ms[:, 1, 2]) / s
            q[sel, 2] = (ms[:, 0, 2] - ms[:, 2, 0]) / s
            q[sel, 3] = (ms[:, 1, 0] - ms[:, 0, 1]) / s
        elif case == 1:
            s = np.sqrt(1.0 + ms[:, 0, 0] - ms[:, 1, 1] - ms[:, 2, 2]) * 2.0
            q[sel, 0] = (ms[:, 2, 1] - ms[:, 1, 2]) / s
            q[sel, 1] = 0.25 * s
            q[sel, 2] = (ms[:, 0, 1] + ms[:, 1, 0]) / s
            q[sel, 3] = (ms[:, 0, 2] + ms[:, 2, 0]) / s
        elif case == 2:
            s = np.sqrt(1.0 + ms[:, 1, 1] - ms[:, 0, 0] - ms[:, 2, 2]) * 2.0
            q[sel, 0] = (ms[:, 0, 2] - ms[:, 2, 0]) / s
            q[sel, 1] = (ms[:, 0, 1] + ms[:, 1, 0]) / s
            q[sel, 2] = 0.25 * s
            q[sel, 3] = (ms[:, 1, 2] + ms[:, 2, 1]) / s
        else:
            s = np.sqrt(1.0 + ms[:, 2, 2] - ms[:, 0, 0] - ms[:, 1, 1]) * 2.0
            q[sel, 0] = (ms[:, 1, 0] - ms[:, 0, 1]) / s
            q[sel, 1] = (ms[:, 0, 2] + ms[:, 2, 0]) / s
            q[sel, 2] = (ms[:, 1, 2] + ms[:, 2, 1]) / s
            q[sel, 3] = 0.25 * s

    q /= np.linalg.norm(q, axis=1, keepdims=True)
    # canonical sign: first nonzero component positive
    q *= _canonical_signs(q)[:, None]
    return q.reshape(batch + (4,))


def matrix_from_quat(q: np.ndarray) -> np.ndarray:
    """Rotation matrices for unit quaternions (batched, shape (..., 4))."""
    q = np.asarray(q, dtype=np.float64)
    w, x, y, z = np.moveaxis(q, -1, 0)
    xx, yy, zz = x * x, y * y, z * z
    xy, xz, yz = x * y, x * z, y * z
    wx, wy, wz = w * x, w * y, w * z
    m = np.stack(
        [
            1.0 - 2.0 * (yy + zz), 2.0 * (xy - wz), 2.0 * (xz + wy),
            2.0 * (xy + wz), 1.0 - 2.0 * (xx + zz), 2.0 * (yz - wx),
            2.0 * (xz - wy), 2.0 * (yz + wx), 1.0 - 2.0 * (xx + yy),
        ],
        axis=-1,
    )
    return m.reshape(q.shape[:-1] + (3, 3))


def _canonical_signs(q: np.ndarray) -> np.ndarray:
    """+1/-1 per quaternion so that the first nonzero component comes out positive."""
    q = np.atleast_2d(q)
    nz = q != 0.0
    first = np.argmax(nz, axis=-1)
    vals = np.take_along_axis(q, first[..., None], axis=-1)[..., 0]
    return np.where(vals < 0.0, -1.0, 1.0)


# ---------------------------------------------------------------------------
# rigid transforms

@dataclass(frozen=True)
class RigidTransform:
    """An SE(3) element: orthonormal rotation (det +1) plus translation in meters."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.rotation, dtype=np.float64).reshape(3, 3)
        t = np.asarray(self.translation, dtype=np.float64).reshape(3)
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", t)
        err = np.abs(r.T @ r - np.eye(3)).max()
        if err > _ORTHO_TOL:
            raise InvalidArgumentError(f"rotation is not orthonormal (|R^T R - I| = {err:.3e})")
        det = np.linalg.det(r)
        if abs(det - 1.0) > _ORTHO_TOL:
            raise InvalidArgumentError(f"rotation determinant is {det:.9f}, expected +1")

    @staticmethod
    def identity() -> "RigidTransform":
        return RigidTransform(np.eye(3), np.zeros(3))

    @staticmethod
    def from_translation(t) -> "RigidTransform":
        return RigidTransform(np.eye(3), t)

    def apply(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=np.float64)
        return points @ self.rotation.T + self.translation

    def compose(self, other: "RigidTransform") -> "RigidTransform":
        """self after other: (self @ other).apply(p) == self.apply(other.apply(p))."""
        return RigidTransform(
            self.rotation @ other.rotation,
            self.rotation @ other.translation + self.translation,
        )

    def __matmul__(self, other: "RigidTransform") -> "RigidTransform":
        return self.compose(other)

    def inverse(self) -> "RigidTransform":
        rt = self.rotation.T
        return RigidTransform(rt, -(rt @ self.translation))

    def matrix(self) -> np.ndarray:
        """4x4 homogeneous matrix."""
        m = np.eye(4)
        m[:3, :3] = self.rotation
        m[:3, 3] = self.translation
        return m

    @staticmethod
    def from_matrix(m) -> "RigidTransform":
        m = np.asarray(m, dtype=np.float64).reshape(4, 4)
        return RigidTransform(m[:3, :3], m[:3, 3])


@dataclass(frozen=True)
class DualQuaternion:
    """A unit dual quaternion: real part encodes rotation, dual part translation.

    Invariants (checked on construction): |real| = 1 and <real, dual> = 0,
    both within 1e-9.
    """

    real: np.ndarray
    dual: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.real, dtype=np.float64).reshape(4)
        d = np.asarray(self.dual, dtype=np.float64).reshape(4)
        object.__setattr__(self, "real", r)
        object.__setattr__(self, "dual", d)
        if abs(np.linalg.norm(r) - 1.0) > _ORTHO_TOL:
            raise InvalidArgumentError("dual quaternion real part is not unit length")
        if abs(float(r @ d)) > _ORTHO_TOL:
            raise InvalidArgumentError("dual quaternion parts are not orthogonal")

    @staticmethod
    def from_rigid(t: RigidTransform) -> "DualQuaternion":
        real = quat_from_matrix(t.rotation)
        trans_quat = np.concatenate([[0.0], t.translation])
        dual = 0.5 * quat_mul(trans_quat, real)
        return DualQuaternion(real, dual)

    def to_rigid(self) -> RigidTransform:
        rot = matrix_from_quat(self.real)
        t = 2.0 * quat_mul(self.dual, quat_conj(self.real))[1:]
        return RigidTransform(rot, t)

    def transform_point(self, p) -> np.ndarray:
        return self.to_rigid().apply(p)


def _normalize_dual(real_raw: np.ndarray, dual_raw: np.ndarray):
    """Full dual-number normalization of raw (real, dual) sums.

    Divides by the dual number ||real|| + eps*<real,dual>/||real||, which both
    unit-normalizes the real part and restores <real, dual> = 0 exactly.
    """
    n = np.linalg.norm(real_raw, axis=-1, keepdims=True)
    real = real_raw / n
    dot = np.sum(real_raw * dual_raw, axis=-1, keepdims=True)
    dual = dual_raw / n - real_raw * (dot / (n ** 3))
    return real, dual


def blend_dual_quaternions(real: np.ndarray, dual: np.ndarray, weights: np.ndarray):
    """Weighted dual-quaternion sum with hemisphere alignment, batched.

    real, dual: (..., K, 4); weights: (..., K), nonnegative, not all zero per
    row. Real parts are sign-aligned to the first input of each row (exactly
    orthogonal pairs fall back to the canonical sign of the input itself).
    Returns unit (real, dual) of shape (..., 4).
    """
    real = np.asarray(real, dtype=np.float64)
    dual = np.asarray(dual, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    wsum = weights.sum(axis=-1, keepdims=True)
    if np.any(wsum <= 0.0):
        raise InvalidArgumentError("blend weights must be nonnegative with a positive sum")
    w = weights / wsum

    ref = real[..., :1, :]
    dots = np.sum(real * ref, axis=-1)
    sign = np.where(dots < 0.0, -1.0, 1.0)
    on_boundary = dots == 0.0
    if np.any(on_boundary):
        canon = _canonical_signs(real.reshape(-1, 4)).reshape(real.shape[:-1])
        sign = np.where(on_boundary, canon, sign)

    sw = sign * w
    real_sum = np.sum(real * sw[..., None], axis=-2)
    dual_sum = np.sum(dual * sw[..., None], axis=-2)
    norms = np.linalg.norm(real_sum, axis=-1)
    if np.any(norms < 1e-12):
        raise InvalidArgumentError("blend collapsed to zero (antipodal rotations with equal weight)")
    return _normalize_dual(real_sum, dual_sum)


def dqb_blend(transforms, weights) -> RigidTransform:
    """Dual quaternion blending of rigid transforms with nonnegative weights.

    Weights are normalized internally; each transform is converted to a dual
    quaternion, real parts are sign-aligned to the hemisphere of the first,
    the weighted sum is renormalized, and the result converted back.
    """
    transforms = list(transforms)
    weights = np.asarray(list(weights), dtype=np.float64)
    if len(transforms) == 0:
        raise InvalidArgumentError("dqb_blend needs at least one transform")
    if len(transforms) != len(weights):
        raise InvalidArgumentError("transforms and weights must have equal length")
    if np.any(weights < 0.0):
        raise InvalidArgumentError("weights must be nonnegative")
    if weights.sum() <= 0.0:
        raise InvalidArgumentError("weights must not all be zero")

    dqs = [DualQuaternion.from_rigid(t) for t in transforms]
    real = np.stack([dq.real for dq in dqs])
    dual = np.stack([dq.dual for dq in dqs])
    r, d = blend_dual_quaternions(real, dual, weights)
    return DualQuaternion(r, d).to_rigid()


# ---------------------------------------------------------------------------
# uniform rotations

def random_rotations(rng: np.random.Generator, n: int) -> np.ndarray:
    """n rotation matrices uniform on SO(3), shape (n, 3, 3).

    Normalized 4D Gaussian quaternions are uniform on S^3, and the 2:1 cover
    of SO(3) by S^3 preserves uniformity.
    """
    q = rng.normal(size=(n, 4))
    q /= np.linalg.norm(q, axis=1, keepdims=True)
    return matrix_from_quat(q)


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """One rotation matrix uniform on SO(3); deterministic given the generator state."""
    return random_rotations(rng, 1)[0]
