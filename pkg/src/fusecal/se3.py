"""SE(3) arithmetic for extrinsic transforms and de-calibrations.

Conventions, fixed once for the whole toolkit:
  - Rotations are stored as 3x3 orthonormal matrices, translations as
    3-vectors in meters.
  - The 6-parameter view is intrinsic Z*Y*X Euler: R = Rz(yaw) Ry(pitch) Rx(roll),
    angles in radians. Degrees appear only at reporting boundaries.
  - Transforms act on points as p' = R p + t.
  - The operating regime is small de-calibrations; Euler extraction near
    |pitch| = pi/2 raises GimbalLockError instead of falling back.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from fusecal.errors import GimbalLockError

_ORTHO_TOL = 1e-9
_GIMBAL_MARGIN = 1e-6


@dataclass(frozen=True)
class SixDof:
    """Six transform parameters: rotations in radians, translations in meters."""

    roll: float
    pitch: float
    yaw: float
    tx: float
    ty: float
    tz: float

    def rotation_vector(self) -> np.ndarray:
        return np.array([self.roll, self.pitch, self.yaw], dtype=np.float64)

    def translation_vector(self) -> np.ndarray:
        return np.array([self.tx, self.ty, self.tz], dtype=np.float64)

    def as_array(self) -> np.ndarray:
        """(roll, pitch, yaw, tx, ty, tz) as a float64 vector."""
        return np.array(
            [self.roll, self.pitch, self.yaw, self.tx, self.ty, self.tz],
            dtype=np.float64,
        )

    @staticmethod
    def from_array(params: np.ndarray) -> "SixDof":
        p = np.asarray(params, dtype=np.float64).reshape(6)
        return SixDof(*(float(v) for v in p))


@dataclass(frozen=True)
class DecalRange:
    """Per-axis uniform sampling bounds for de-calibrations."""

    max_rot: float  # radians
    max_trans: float  # meters

    def __post_init__(self) -> None:
        if not (self.max_rot >= 0 and self.max_trans >= 0):
            raise ValueError("de-calibration bounds must be nonnegative")
        if not (math.isfinite(self.max_rot) and math.isfinite(self.max_trans)):
            raise ValueError("de-calibration bounds must be finite")


class RigidTransform:
    """An SE(3) element: orthonormal rotation matrix plus translation vector."""

    __slots__ = ("rotation", "translation")

    def __init__(self, rotation: np.ndarray, translation: np.ndarray, check: bool = True):
        rotation = np.asarray(rotation, dtype=np.float64).reshape(3, 3)
        translation = np.asarray(translation, dtype=np.float64).reshape(3)
        if check:
            _check_rotation(rotation)
            if not np.all(np.isfinite(translation)):
                raise ValueError("translation must be finite")
        self.rotation = rotation
        self.translation = translation

    @staticmethod
    def identity() -> "RigidTransform":
        return RigidTransform(np.eye(3), np.zeros(3), check=False)

    def matrix(self) -> np.ndarray:
        """4x4 homogeneous matrix."""
        m = np.eye(4)
        m[:3, :3] = self.rotation
        m[:3, 3] = self.translation
        return m

    @staticmethod
    def from_matrix(m: np.ndarray) -> "RigidTransform":
        m = np.asarray(m, dtype=np.float64)
        if m.shape != (4, 4):
            raise ValueError("expected a 4x4 homogeneous matrix")
        return RigidTransform(m[:3, :3], m[:3, 3])

    def __repr__(self) -> str:
        return f"RigidTransform(R={self.rotation.tolist()}, t={self.translation.tolist()})"


def _check_rotation(r: np.ndarray) -> None:
    if not np.all(np.isfinite(r)):
        raise ValueError("rotation must be finite")
    if np.abs(r.T @ r - np.eye(3)).max() > 1e-7:
        raise ValueError("rotation matrix is not orthonormal")
    if abs(np.linalg.det(r) - 1.0) > 1e-7:
        raise ValueError("rotation matrix determinant is not +1")


def rot_x(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[1, 0, 0], [0, c, -s], [0, s, c]], dtype=np.float64)


def rot_y(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, 0, s], [0, 1, 0], [-s, 0, c]], dtype=np.float64)


def rot_z(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]], dtype=np.float64)


def from_sixdof(p: SixDof) -> RigidTransform:
    """Build the transform R = Rz(yaw) Ry(pitch) Rx(roll), t = (tx, ty, tz)."""
    values = p.as_array()
    if not np.all(np.isfinite(values)):
        raise ValueError("six-dof parameters must be finite")
    r = rot_z(p.yaw) @ rot_y(p.pitch) @ rot_x(p.roll)
    return RigidTransform(r, values[3:], check=False)


def to_sixdof(t: RigidTransform) -> SixDof:
    """Extract Z*Y*X Euler angles and translation.

    Raises GimbalLockError when |pitch| is within 1e-6 of pi/2; the small
    de-calibration regime never reaches that.
    """
    r = t.rotation
    sp = -r[2, 0]
    sp_clamped = min(1.0, max(-1.0, sp))
    pitch = math.asin(sp_clamped)
    if abs(pitch) > math.pi / 2 - _GIMBAL_MARGIN:
        raise GimbalLockError(f"pitch {pitch:.6f} rad is too close to +/- pi/2")
    roll = math.atan2(r[2, 1], r[2, 2])
    yaw = math.atan2(r[1, 0], r[0, 0])
    tx, ty, tz = t.translation
    return SixDof(roll, pitch, yaw, float(tx), float(ty), float(tz))


def compose(a: RigidTransform, b: RigidTransform) -> RigidTransform:
    """a after b: (a*b) p = a.R (b.R p + b.t) + a.t."""
    return RigidTransform(
        a.rotation @ b.rotation,
        a.rotation @ b.translation + a.translation,
        check=False,
    )


def inverse(t: RigidTransform) -> RigidTransform:
    rt = t.rotation.T
    return RigidTransform(rt, -(rt @ t.translation), check=False)


def apply(t: RigidTransform, points: np.ndarray) -> np.ndarray:
    """Transform an ordered (K, 3) or (K, 4) array of points.

    A 4th (intensity) column passes through untouched; row order is
    preserved, which the point-cloud loss relies on.
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[1] not in (3, 4):
        raise ValueError("points must be (K, 3) or (K, 4)")
    moved = points[:, :3] @ t.rotation.T + t.translation
    if points.shape[1] == 4:
        return np.column_stack([moved, points[:, 3]])
    return moved


def sample_decalibration(decal_range: DecalRange, rng_seed: int) -> SixDof:
    """Draw each parameter independently from Uniform(-bound, +bound).

    Pure function of (range, seed): same inputs give bit-identical output.
    """
    rng = np.random.Generator(np.random.PCG64(rng_seed))
    rot = rng.uniform(-decal_range.max_rot, decal_range.max_rot, size=3)
    trans = rng.uniform(-decal_range.max_trans, decal_range.max_trans, size=3)
    return SixDof(rot[0], rot[1], rot[2], trans[0], trans[1], trans[2])


def recover_gt(t_pred: RigidTransform, t_init: RigidTransform) -> RigidTransform:
    """Undo a predicted de-calibration: returns inverse(t_pred) * t_init."""
    return compose(inverse(t_pred), t_init)


def error_metrics(
    t_a: RigidTransform, t_b: RigidTransform
) -> tuple[np.ndarray, np.ndarray]:
    """Per-axis absolute differences between two transforms.

    Decomposes inverse(t_a) * t_b into six parameters and reports
    (|roll|, |pitch|, |yaw|) in degrees and (|tx|, |ty|, |tz|) in
    centimeters.
    """
    delta = to_sixdof(compose(inverse(t_a), t_b))
    rot_err_deg = np.degrees(np.abs(delta.rotation_vector()))
    trans_err_cm = 100.0 * np.abs(delta.translation_vector())
    return rot_err_deg, trans_err_cm
