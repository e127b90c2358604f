"""The batch manifest exchanged between the scheduler and a restorer.

On disk a manifest is a directory::

    manifest.json
    frames/frame_000.png ...        initial video, 8-bit RGB
    inpaint/mask_000.png ...        inpainting masks, 0/255
    style/mask_000.png ...          style masks, 0/255

``manifest.json`` carries an explicit ``version``; readers reject other
versions and unknown keys. Paths inside the JSON are relative to the
manifest directory.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import ManifestError, ValidationError
from .fileio import ensure_dir, read_frame, read_mask, write_frame, write_mask

MANIFEST_VERSION = 1
MANIFEST_NAME = "manifest.json"
RESTORED_DIR = "restored"
RESTORED_PATTERN = "frame_%03d.png"

_TOP_KEYS = {"version", "f", "n", "style_slot", "resolution", "slots"}
_IMAGE_KEYS = {"kind", "source_index", "frame_path", "inpaint_mask_path", "style_mask_path"}
_ZERO_KEYS = _IMAGE_KEYS - {"source_index"}


@dataclass
class SlotRecord:
    kind: str                                # "image" or "zero"
    source_index: Optional[int] = None       # for image slots
    frame_path: str = ""
    inpaint_mask_path: str = ""
    style_mask_path: str = ""

    def to_dict(self):
        d = {"kind": self.kind}
        if self.kind == "image":
            d["source_index"] = self.source_index
        d["frame_path"] = self.frame_path
        d["inpaint_mask_path"] = self.inpaint_mask_path
        d["style_mask_path"] = self.style_mask_path
        return d


@dataclass
class BatchManifest:
    """One restorer call: f frames with their inpainting and style masks."""

    f: int
    n: int
    style_slot: int
    resolution: tuple
    slots: list
    frames: list = field(default_factory=list, repr=False)
    inpaint_masks: list = field(default_factory=list, repr=False)
    style_masks: list = field(default_factory=list, repr=False)
    version: int = MANIFEST_VERSION
    directory: Optional[Path] = field(default=None, compare=False)

    @property
    def image_slots(self) -> list:
        return [i for i, s in enumerate(self.slots) if s.kind == "image"]

    def to_dict(self):
        return {
            "version": self.version,
            "f": self.f,
            "n": self.n,
            "style_slot": self.style_slot,
            "resolution": list(self.resolution),
            "slots": [s.to_dict() for s in self.slots],
        }

    def validate(self) -> None:
        """Structural checks on the in-memory record; raises ManifestError."""
        _check_structure(self.to_dict())
        h, w = self.resolution
        if not (len(self.frames) == len(self.inpaint_masks) == len(self.style_masks) == self.f):
            raise ManifestError("frame/mask lists must each hold f entries")
        for i in range(self.f):
            fr = np.asarray(self.frames[i])
            if fr.shape != (h, w, 3) or fr.dtype != np.uint8:
                raise ManifestError(f"slot {i}: frame must be ({h}, {w}, 3) uint8, got {fr.dtype} {fr.shape}")
            for kind, m in (("inpaint", self.inpaint_masks[i]), ("style", self.style_masks[i])):
                m = np.asarray(m)
                if m.shape != (h, w) or not np.all((m == 0) | (m == 1)):
                    raise ManifestError(f"slot {i}: {kind} mask must be binary ({h}, {w})")
            if self.slots[i].kind == "zero" and not np.all(np.asarray(self.inpaint_masks[i]) == 1):
                raise ManifestError(f"slot {i}: zero frames need all-ones inpainting masks")
        for i in range(self.f):
            want = 1 if i == self.style_slot else 0
            if not np.all(np.asarray(self.style_masks[i]) == want):
                raise ManifestError(f"slot {i}: style mask disagrees with style_slot {self.style_slot}")


def _is_int(x):
    return isinstance(x, int) and not isinstance(x, bool)


def _check_structure(doc) -> None:
    if not isinstance(doc, dict):
        raise ManifestError("manifest must be a JSON object")
    if doc.get("version") != MANIFEST_VERSION:
        raise ManifestError(f"unsupported manifest version {doc.get('version')!r}")
    keys = set(doc)
    if keys != _TOP_KEYS:
        missing = _TOP_KEYS - keys
        extra = keys - _TOP_KEYS
        raise ManifestError(f"manifest keys mismatch (missing {sorted(missing)}, unknown {sorted(extra)})")
    f, n, style = doc["f"], doc["n"], doc["style_slot"]
    if not (_is_int(f) and _is_int(n) and _is_int(style)):
        raise ManifestError("f, n and style_slot must be integers")
    res = doc["resolution"]
    if not (isinstance(res, list) and len(res) == 2 and all(_is_int(x) and x > 0 for x in res)):
        raise ManifestError("resolution must be [H, W] with positive integers")
    slots = doc["slots"]
    if not isinstance(slots, list) or len(slots) != f or f < 1:
        raise ManifestError("slots must be a list of f records")
    n_img = 0
    seen_paths = set()
    for i, s in enumerate(slots):
        if not isinstance(s, dict):
            raise ManifestError(f"slot {i}: record must be an object")
        kind = s.get("kind")
        if kind == "image":
            if set(s) != _IMAGE_KEYS:
                raise ManifestError(f"slot {i}: image record keys mismatch")
            if not _is_int(s["source_index"]) or s["source_index"] < 0:
                raise ManifestError(f"slot {i}: source_index must be a non-negative integer")
            n_img += 1
        elif kind == "zero":
            if set(s) != _ZERO_KEYS:
                raise ManifestError(f"slot {i}: zero record keys mismatch")
        else:
            raise ManifestError(f"slot {i}: unknown kind {kind!r}")
        for key in ("frame_path", "inpaint_mask_path", "style_mask_path"):
            p = s[key]
            if not isinstance(p, str) or not p:
                raise ManifestError(f"slot {i}: {key} must be a non-empty string")
            if Path(p).is_absolute() or ".." in Path(p).parts:
                raise ManifestError(f"slot {i}: {key} must be a relative path inside the manifest")
            if p in seen_paths:
                raise ManifestError(f"slot {i}: path {p!r} used twice")
            seen_paths.add(p)
    if n_img != n:
        raise ManifestError(f"n={n} but {n_img} image slots")
    if n < 1 or slots[0]["kind"] != "image" or slots[-1]["kind"] != "image":
        raise ManifestError("first and last slots must be image slots")
    if not 0 <= style < f or slots[style]["kind"] != "image":
        raise ManifestError(f"style_slot {style} must reference an image slot")


def write_manifest(manifest: BatchManifest, directory) -> Path:
    """Write frames, masks and ``manifest.json`` under ``directory``; return the JSON path."""
    d = ensure_dir(directory)
    for sub in ("frames", "inpaint", "style"):
        ensure_dir(d / sub)
    for i, slot in enumerate(manifest.slots):
        slot.frame_path = slot.frame_path or f"frames/frame_{i:03d}.png"
        slot.inpaint_mask_path = slot.inpaint_mask_path or f"inpaint/mask_{i:03d}.png"
        slot.style_mask_path = slot.style_mask_path or f"style/mask_{i:03d}.png"
    manifest.validate()
    for i, slot in enumerate(manifest.slots):
        write_frame(d / slot.frame_path, manifest.frames[i])
        write_mask(d / slot.inpaint_mask_path, manifest.inpaint_masks[i])
        write_mask(d / slot.style_mask_path, manifest.style_masks[i])
    path = d / MANIFEST_NAME
    path.write_text(json.dumps(manifest.to_dict(), indent=2, sort_keys=True) + "\n")
    manifest.directory = d
    return path


def read_manifest(path, load_arrays: bool = True) -> BatchManifest:
    """Parse and fully validate a manifest (a JSON path or its directory)."""
    path = Path(path)
    if path.is_dir():
        path = path / MANIFEST_NAME
    try:
        doc = json.loads(path.read_text())
    except FileNotFoundError:
        raise ManifestError(f"manifest not found: {path}") from None
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ManifestError(f"{path}: malformed JSON ({exc})") from None
    _check_structure(doc)
    d = path.parent
    slots = [SlotRecord(**s) for s in doc["slots"]]
    for s in slots:
        for p in (s.frame_path, s.inpaint_mask_path, s.style_mask_path):
            if not (d / p).is_file():
                raise ManifestError(f"referenced file missing: {d / p}")
    m = BatchManifest(doc["f"], doc["n"], doc["style_slot"], tuple(doc["resolution"]), slots,
                      version=doc["version"], directory=d)
    if load_arrays:
        try:
            m.frames = [read_frame(d / s.frame_path) for s in slots]
            m.inpaint_masks = [read_mask(d / s.inpaint_mask_path) for s in slots]
            m.style_masks = [read_mask(d / s.style_mask_path) for s in slots]
        except (OSError, ValidationError) as exc:
            raise ManifestError(str(exc)) from None
        m.validate()
    return m


def read_restored(directory, f: int, resolution) -> list:
    """Frames an external restorer wrote under ``<directory>/restored/``."""
    d = Path(directory) / RESTORED_DIR
    frames = []
    for i in range(f):
        p = d / (RESTORED_PATTERN % i)
        if not p.is_file():
            raise ManifestError(f"restorer output missing: {p}")
        frames.append(read_frame(p))
    return frames
