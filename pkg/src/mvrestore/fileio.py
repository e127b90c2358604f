"""PNG frames and masks, and COLMAP-style ``images.txt`` pose files."""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from PIL import Image

from .errors import ParseError, ValidationError
from .geometry import Pose, PoseSet, quat_to_rotation, rotation_to_quat

IMAGE_EXTS = (".png", ".jpg", ".jpeg")


# --------------------------------------------------------------------------
# images
# --------------------------------------------------------------------------

def read_frame(path) -> np.ndarray:
    """Load an image as (H, W, 3) uint8 RGB."""
    with Image.open(path) as im:
        return np.asarray(im.convert("RGB"), dtype=np.uint8).copy()


def write_frame(path, frame) -> None:
    frame = np.asarray(frame)
    if frame.dtype != np.uint8 or frame.ndim != 3 or frame.shape[-1] != 3:
        raise ValidationError(f"frames must be (H, W, 3) uint8, got {frame.dtype} {frame.shape}")
    Image.fromarray(frame, "RGB").save(path, format="PNG")


def read_mask(path) -> np.ndarray:
    """Load a single-channel mask PNG; 0 -> 0, 255 -> 1, anything else is an error."""
    with Image.open(path) as im:
        if im.mode not in ("L", "1"):
            raise ValidationError(f"{path}: mask must be single-channel, got mode {im.mode}")
        raw = np.asarray(im.convert("L"))
    if not np.all((raw == 0) | (raw == 255)):
        raise ValidationError(f"{path}: mask values must be 0 or 255")
    return (raw == 255).astype(np.uint8)


def write_mask(path, mask) -> None:
    m = np.asarray(mask)
    if m.ndim != 2 or not np.all((m == 0) | (m == 1)):
        raise ValidationError("masks must be 2-D with values 0/1")
    Image.fromarray((m.astype(np.uint8) * 255), "L").save(path, format="PNG")


def read_rgba(path) -> np.ndarray:
    with Image.open(path) as im:
        return np.asarray(im.convert("RGBA"), dtype=np.uint8).copy()


def list_images(directory) -> list:
    """Image files in ``directory``, sorted by name."""
    d = Path(directory)
    return sorted(p for p in d.iterdir() if p.suffix.lower() in IMAGE_EXTS and p.is_file())


# --------------------------------------------------------------------------
# pose files
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PoseFileEntry:
    image_id: int
    qvec: tuple          # (w, x, y, z), world-to-camera
    tvec: tuple          # world-to-camera translation
    camera_id: int
    name: str


def parse_pose_entries(text: str) -> list:
    """Parse ``IMAGE_ID QW QX QY QZ TX TY TZ CAMERA_ID NAME`` records.

    Each record is followed by one 2D-points line, which is skipped (it may
    be blank). Lines starting with ``#`` are comments.
    """
    lines = text.splitlines()
    entries = []
    names = set()
    i = 0
    while i < len(lines):
        line = lines[i].strip()
        lineno = i + 1
        i += 1
        if not line or line.startswith("#"):
            continue
        elems = line.split()
        if len(elems) < 10:
            raise ParseError(f"expected 10 fields, got {len(elems)}", lineno)
        try:
            image_id = int(elems[0])
            q = tuple(float(x) for x in elems[1:5])
            t = tuple(float(x) for x in elems[5:8])
            camera_id = int(elems[8])
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from None
        name = " ".join(elems[9:])
        if not all(np.isfinite(q)) or not all(np.isfinite(t)):
            raise ParseError("non-finite pose value", lineno)
        if abs(float(np.linalg.norm(q)) - 1.0) > 1e-3:
            raise ParseError(f"quaternion norm {np.linalg.norm(q):.6f} is not within 1e-3 of 1", lineno)
        if name in names:
            raise ValidationError(f"line {lineno}: duplicate image name {name!r}")
        names.add(name)
        entries.append(PoseFileEntry(image_id, q, t, camera_id, name))
        # points line
        while i < len(lines) and lines[i].strip().startswith("#"):
            i += 1
        i += 1
    if not entries:
        raise ValidationError("pose file contains no image entries")
    return entries


def entry_to_pose(entry: PoseFileEntry, index: int) -> Pose:
    r_wc = quat_to_rotation(entry.qvec)           # world-to-camera
    center = -r_wc.T @ np.asarray(entry.tvec)
    return Pose(r_wc.T, center, index)


def parse_pose_file(text: str, weight_r: float = 0.5):
    """Return ``(PoseSet, names)`` where ``names[i]`` is the image of pose ``i``."""
    entries = parse_pose_entries(text)
    poses = [entry_to_pose(e, i) for i, e in enumerate(entries)]
    return PoseSet.from_poses(poses, weight_r=weight_r), [e.name for e in entries]


def read_pose_file(path, weight_r: float = 0.5):
    return parse_pose_file(Path(path).read_text(), weight_r=weight_r)


_POSE_HEADER = [
    "# Image list with two lines of data per image:",
    "#   IMAGE_ID, QW, QX, QY, QZ, TX, TY, TZ, CAMERA_ID, NAME",
    "#   POINTS2D[] as (X, Y, POINT3D_ID)",
]


def format_pose_entries(entries: Sequence[PoseFileEntry]) -> str:
    """Serialise entries so that :func:`parse_pose_entries` returns them unchanged."""
    out = list(_POSE_HEADER)
    for e in entries:
        vals = " ".join(repr(float(x)) for x in (*e.qvec, *e.tvec))
        out.append(f"{e.image_id} {vals} {e.camera_id} {e.name}")
        out.append("")
    return "\n".join(out) + "\n"


def pose_to_entry(pose: Pose, name: str, image_id: int, camera_id: int = 1) -> PoseFileEntry:
    r_wc = pose.rotation.T
    t = -r_wc @ pose.translation
    q = rotation_to_quat(r_wc)
    return PoseFileEntry(image_id, tuple(float(x) for x in q), tuple(float(x) for x in t), camera_id, name)


def format_pose_file(poses: Sequence[Pose], names: Sequence[str], camera_id: int = 1) -> str:
    """Inverse of :func:`parse_pose_file` up to quaternion round-off (2D-points lines are left empty)."""
    if len(poses) != len(names):
        raise ValidationError("need one name per pose")
    return format_pose_entries([pose_to_entry(p, n, i + 1, camera_id) for i, (p, n) in enumerate(zip(poses, names))])


def write_pose_file(path, poses, names) -> None:
    Path(path).write_text(format_pose_file(poses, names))


def ensure_dir(path) -> Path:
    p = Path(path)
    os.makedirs(p, exist_ok=True)
    return p
