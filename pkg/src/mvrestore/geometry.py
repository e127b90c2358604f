"""Rigid camera poses and the distances used to order them."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels
from .errors import ValidationError

ORTHO_TOL = 1e-6
DISTANCE_ORTHO_TOL = 1e-4


def _check_rotation(r, tol, name="rotation"):
    r = np.asarray(r, dtype=np.float64)
    if r.shape != (3, 3):
        raise ValidationError(f"{name} must be 3x3, got shape {r.shape}")
    if not np.all(np.isfinite(r)):
        raise ValidationError(f"{name} has non-finite entries")
    if np.max(np.abs(r.T @ r - np.eye(3))) > tol:
        raise ValidationError(f"{name} is not orthonormal (tol {tol:g})")
    if abs(np.linalg.det(r) - 1.0) > tol:
        raise ValidationError(f"{name} is not a proper rotation (det != +1)")
    return r


def _check_vector(v, name="translation"):
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (3,):
        raise ValidationError(f"{name} must be a 3-vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValidationError(f"{name} has non-finite components")
    return v


@dataclass(frozen=True)
class Pose:
    """Camera pose: world-from-camera rotation and camera center.

    ``index`` identifies the source image and is preserved through sorting.
    """

    rotation: np.ndarray
    translation: np.ndarray
    index: int = 0

    def __post_init__(self):
        rot = _check_rotation(self.rotation, ORTHO_TOL).copy()
        trans = _check_vector(self.translation).copy()
        if int(self.index) != self.index or self.index < 0:
            raise ValidationError(f"pose index must be a non-negative integer, got {self.index!r}")
        rot.setflags(write=False)
        trans.setflags(write=False)
        object.__setattr__(self, "rotation", rot)
        object.__setattr__(self, "translation", trans)
        object.__setattr__(self, "index", int(self.index))


@dataclass(frozen=True)
class PoseSet:
    """Poses plus the normalisation used by :func:`pose_distance`."""

    poses: tuple
    scale_r: float = 1.0
    scale_t: float = 1.0
    weight_r: float = 0.5
    as_written: bool = field(default=False)

    def __post_init__(self):
        poses = tuple(self.poses)
        if not poses:
            raise ValidationError("pose set is empty")
        _check_scales(self.scale_r, self.scale_t, self.weight_r)
        indices = [p.index for p in poses]
        if len(set(indices)) != len(indices):
            raise ValidationError("pose indices must be unique within a pose set")
        object.__setattr__(self, "poses", poses)

    @classmethod
    def from_poses(cls, poses: Sequence[Pose], weight_r: float = 0.5, as_written: bool = False):
        """Build a set whose scales are the max pairwise distances of ``poses``."""
        poses = tuple(poses)
        if len(poses) >= 2:
            s_r, s_t = compute_scales(poses, as_written=as_written)
        else:
            s_r, s_t = 1.0, 1.0
        return cls(poses, s_r, s_t, weight_r, as_written)

    def __len__(self):
        return len(self.poses)

    def rotations(self):
        return np.stack([p.rotation for p in self.poses])

    def centers(self):
        return np.stack([p.translation for p in self.poses])

    def distance_matrix(self):
        """All pairwise pose distances, shape (K, K)."""
        rot, trans = _kernels.pairwise_components(self.rotations(), self.centers(), self.as_written)
        return (self.weight_r / self.scale_r) * rot + ((1.0 - self.weight_r) / self.scale_t) * trans


def _check_scales(scale_r, scale_t, weight_r):
    if not (scale_r > 0 and scale_t > 0) or not (math.isfinite(scale_r) and math.isfinite(scale_t)):
        raise ValidationError(f"scales must be positive and finite, got s_R={scale_r}, s_T={scale_t}")
    if not 0.0 <= weight_r <= 1.0:
        raise ValidationError(f"rotation weight must lie in [0, 1], got {weight_r}")


def rotation_distance(a, b, as_written: bool = False) -> float:
    """Geodesic angle in radians between rotations ``a`` and ``b``.

    The angle of ``a.T @ b``: its cosine ``(trace - 1) / 2`` is clamped to
    [-1, 1] and combined with the sine from the skew part through atan2, so
    identical rotations give exactly 0. ``as_written=True`` measures
    ``a @ b`` instead, which does not vanish for ``a == b``; it is kept only
    for comparison runs.
    """
    a = _check_rotation(a, DISTANCE_ORTHO_TOL, "a")
    b = _check_rotation(b, DISTANCE_ORTHO_TOL, "b")
    c, s = _kernels.relative_terms(a, b, as_written)
    return math.atan2(float(s), float(c))


def translation_distance(a, b) -> float:
    a = _check_vector(a, "a")
    b = _check_vector(b, "b")
    dx = float(a[0] - b[0])
    dy = float(a[1] - b[1])
    dz = float(a[2] - b[2])
    return math.sqrt(dx * dx + dy * dy + dz * dz)


def pose_distance(a: Pose, b: Pose, pose_set: PoseSet) -> float:
    """Weighted rotation + translation distance, each term normalised by its scale."""
    _check_scales(pose_set.scale_r, pose_set.scale_t, pose_set.weight_r)
    w = pose_set.weight_r
    dr = rotation_distance(a.rotation, b.rotation, pose_set.as_written)
    dt = translation_distance(a.translation, b.translation)
    return (w / pose_set.scale_r) * dr + ((1.0 - w) / pose_set.scale_t) * dt


def compute_scales(poses: Sequence[Pose], as_written: bool = False):
    """Return ``(s_R, s_T)``: the largest pairwise rotation and translation distances.

    A zero maximum (all rotations or all centers identical) is replaced by 1.
    """
    if len(poses) < 2:
        raise ValidationError("need at least 2 poses to compute scales")
    rots = np.stack([p.rotation for p in poses])
    centers = np.stack([p.translation for p in poses])
    rot, trans = _kernels.pairwise_components(rots, centers, as_written)
    s_r = float(rot.max())
    s_t = float(trans.max())
    return (s_r if s_r > 0 else 1.0), (s_t if s_t > 0 else 1.0)


def quat_to_rotation(q) -> np.ndarray:
    """Rotation matrix for a (w, x, y, z) quaternion; renormalised first."""
    q = np.asarray(q, dtype=np.float64)
    if q.shape != (4,) or not np.all(np.isfinite(q)):
        raise ValidationError("quaternion must be 4 finite numbers (w, x, y, z)")
    norm = np.linalg.norm(q)
    if norm < 1e-8:
        raise ValidationError("quaternion is near zero")
    w, x, y, z = q / norm
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def rotation_to_quat(r) -> np.ndarray:
    """Inverse of :func:`quat_to_rotation`, returned with ``w >= 0``."""
    r = _check_rotation(r, DISTANCE_ORTHO_TOL)
    tr = np.trace(r)
    if tr > 0:
        s = 2.0 * math.sqrt(tr + 1.0)
        q = [0.25 * s, (r[2, 1] - r[1, 2]) / s, (r[0, 2] - r[2, 0]) / s, (r[1, 0] - r[0, 1]) / s]
    elif r[0, 0] > r[1, 1] and r[0, 0] > r[2, 2]:
        s = 2.0 * math.sqrt(1.0 + r[0, 0] - r[1, 1] - r[2, 2])
        q = [(r[2, 1] - r[1, 2]) / s, 0.25 * s, (r[0, 1] + r[1, 0]) / s, (r[0, 2] + r[2, 0]) / s]
    elif r[1, 1] > r[2, 2]:
        s = 2.0 * math.sqrt(1.0 + r[1, 1] - r[0, 0] - r[2, 2])
        q = [(r[0, 2] - r[2, 0]) / s, (r[0, 1] + r[1, 0]) / s, 0.25 * s, (r[1, 2] + r[2, 1]) / s]
    else:
        s = 2.0 * math.sqrt(1.0 + r[2, 2] - r[0, 0] - r[1, 1])
        q = [(r[1, 0] - r[0, 1]) / s, (r[0, 2] + r[2, 0]) / s, (r[1, 2] + r[2, 1]) / s, 0.25 * s]
    q = np.array(q)
    q /= np.linalg.norm(q)
    return -q if q[0] < 0 else q


def axis_angle(axis, angle) -> np.ndarray:
    """Rotation by ``angle`` radians about ``axis`` (Rodrigues)."""
    axis = np.asarray(axis, dtype=np.float64)
    axis = axis / np.linalg.norm(axis)
    k = np.array([[0, -axis[2], axis[1]], [axis[2], 0, -axis[0]], [-axis[1], axis[0], 0]])
    return np.eye(3) + math.sin(angle) * k + (1 - math.cos(angle)) * (k @ k)
