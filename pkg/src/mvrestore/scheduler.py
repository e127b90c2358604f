"""Iterative batch restoration with style propagation.

Images are ordered once along the pose trajectory. Each iteration takes the
first N unrestored images, turns them into an f-frame initial video, asks a
restorer to make the video consistent with the current style frame, and
keeps the N restored image frames. The last restored image becomes the
first image and the style reference of the next batch, so the loop runs
``ceil((K - 1) / (N - 1))`` times.
"""

from __future__ import annotations

import logging
import shlex
import subprocess
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from .errors import ContractViolation, ValidationError
from .geometry import Pose, PoseSet
from .maskkit import apply_inpaint, make_inpaint_masks, make_style_masks
from .manifest import BatchManifest, SlotRecord, read_restored, write_manifest
from .threadpose import OrderedTrajectory, sort_poses
from .videoplan import FramePlan, ImageSlot, plan_batch

log = logging.getLogger(__name__)

DEFAULT_F = 25

Restorer = Callable[[BatchManifest], Sequence[np.ndarray]]


@dataclass(frozen=True)
class BatchParams:
    o: int
    n: int
    f: int


def batch_params(k: int, f: int = DEFAULT_F) -> BatchParams:
    """Smallest O with (K - 1) / O < f, and N = floor((K - 1) / O) + 1."""
    if k < 2:
        raise ValidationError(f"need at least 2 images to schedule, got {k}")
    if f < 2:
        raise ValidationError(f"frame capacity must be at least 2, got {f}")
    o = (k - 1) // f + 1
    return BatchParams(o, (k - 1) // o + 1, f)


def expected_iterations(k: int, n: int) -> int:
    return 0 if k < 2 else -(-(k - 1) // (n - 1))


# --------------------------------------------------------------------------
# restorers
# --------------------------------------------------------------------------

def identity_restorer(manifest: BatchManifest) -> list:
    """Return the initial video unchanged."""
    return [np.array(fr, copy=True) for fr in manifest.frames]


def _channel_stats(frame, mask):
    x = frame.astype(np.float64)
    keep = mask == 0
    if not keep.any():
        return None, None
    px = x[keep]
    return px.mean(axis=0), px.std(axis=0)


def affine_style_restorer(manifest: BatchManifest) -> list:
    """Deterministic stand-in restorer that matches every frame's colour statistics to the style frame.

    Image frames are mapped per channel so that their mean and standard
    deviation (over unmasked pixels) equal those of the style frame; masked
    pixels are filled with the style channel mean. A channel with zero
    deviation on either side gets a mean shift only. Zero frames are linear
    blends of the neighbouring restored image frames.
    """
    f = manifest.f
    style = manifest.style_slot
    s_mean, s_std = _channel_stats(manifest.frames[style], np.asarray(manifest.inpaint_masks[style]))
    if s_mean is None:
        raise ValidationError("style frame is fully masked")
    out = [None] * f
    images = manifest.image_slots
    for i in images:
        frame = np.asarray(manifest.frames[i]).astype(np.float64)
        mask = np.asarray(manifest.inpaint_masks[i])
        mean, std = _channel_stats(manifest.frames[i], mask)
        if mean is None:
            res = np.broadcast_to(s_mean, frame.shape).copy()
        else:
            gain = np.where((std > 0) & (s_std > 0), s_std / np.where(std > 0, std, 1.0), 1.0)
            res = (frame - mean) * gain + s_mean
            res[mask.astype(bool)] = s_mean
        out[i] = np.clip(np.rint(res), 0, 255).astype(np.uint8)
    for a, b in zip(images[:-1], images[1:]):
        fa = out[a].astype(np.float64)
        fb = out[b].astype(np.float64)
        for j in range(a + 1, b):
            t = (j - a) / (b - a)
            out[j] = np.clip(np.rint((1 - t) * fa + t * fb), 0, 255).astype(np.uint8)
    return out


class ExternalRestorer:
    """Run ``command <manifest.json>`` and collect ``restored/frame_%03d.png``.

    Each batch is written to a fresh directory under ``workdir`` (a temporary
    directory when not given). A nonzero exit status aborts the pipeline.
    """

    def __init__(self, command: str, workdir=None, timeout: Optional[float] = None):
        self.argv = shlex.split(command)
        if not self.argv:
            raise ValidationError("external restorer command is empty")
        self.workdir = Path(workdir) if workdir is not None else Path(tempfile.mkdtemp(prefix="mvrestore-"))
        self.timeout = timeout
        self.calls = 0

    def __call__(self, manifest: BatchManifest) -> list:
        batch_dir = self.workdir / f"batch_{self.calls:04d}"
        self.calls += 1
        path = write_manifest(manifest, batch_dir)
        log.info("running external restorer on %s", path)
        proc = subprocess.run([*self.argv, str(path)], timeout=self.timeout)
        if proc.returncode != 0:
            raise ContractViolation(f"external restorer exited with status {proc.returncode}")
        try:
            return read_restored(batch_dir, manifest.f, manifest.resolution)
        except ValidationError as exc:
            raise ContractViolation(str(exc)) from exc


def make_restorer(name: str, workdir=None) -> Restorer:
    """``identity``, ``affine-style`` or ``external:<command>``."""
    if name == "identity":
        return identity_restorer
    if name in ("affine-style", "affine_style"):
        return affine_style_restorer
    if name.startswith("external:"):
        return ExternalRestorer(name[len("external:"):], workdir=workdir)
    raise ValidationError(f"unknown restorer {name!r}")


# --------------------------------------------------------------------------
# pipeline
# --------------------------------------------------------------------------

@dataclass
class BatchRecord:
    positions: tuple        # trajectory positions of the batch images
    plan: FramePlan
    style_slot: int


@dataclass
class PipelineResult:
    images: list                              # restored, in trajectory order
    trajectory: Optional[OrderedTrajectory]
    params: Optional[BatchParams]
    batches: list = field(default_factory=list)

    @property
    def order(self):
        return self.trajectory.order if self.trajectory else (0,)


def build_manifest(frames: Sequence[np.ndarray], positions: Sequence[int], source_indices: Sequence[int],
                   distances: Sequence[float], f: int, style_position: int,
                   occlusion: Optional[Mapping[int, np.ndarray]] = None):
    """Assemble the restorer input for one batch of ordered frames.

    ``style_position`` indexes into ``frames``. ``occlusion`` maps source
    indices to masks; occluded pixels are zeroed in the initial video.
    """
    shape = frames[0].shape
    if any(fr.shape != shape for fr in frames):
        raise ValidationError("all frames in a batch must share one resolution")
    h, w = shape[:2]
    plan = plan_batch(list(positions), distances, f)
    slot_of = plan.image_slot_indices
    occ = {}
    if occlusion:
        for k, src in enumerate(source_indices):
            if src in occlusion:
                occ[k + 1] = occlusion[src]
    inpaint = make_inpaint_masks(plan, (h, w), occ)
    style_slot = slot_of[style_position]
    style = make_style_masks(plan, style_slot, (h, w))
    video, slots = [], []
    for i, slot in enumerate(plan.slots):
        if isinstance(slot, ImageSlot):
            k = slot.position - 1
            fr = np.asarray(frames[k], dtype=np.uint8)
            video.append(apply_inpaint(fr, inpaint[i]) if (k + 1) in occ else fr.copy())
            slots.append(SlotRecord("image", int(source_indices[k])))
        else:
            video.append(np.zeros((h, w, 3), np.uint8))
            slots.append(SlotRecord("zero"))
    manifest = BatchManifest(f, len(frames), style_slot, (h, w), slots, video, inpaint, style)
    return manifest, plan


def _check_output(out, manifest: BatchManifest):
    if out is None or len(out) != manifest.f:
        got = None if out is None else len(out)
        raise ContractViolation(f"restorer returned {got} frames, expected {manifest.f}")
    h, w = manifest.resolution
    frames = []
    for i, fr in enumerate(out):
        fr = np.asarray(fr)
        if fr.shape != (h, w, 3):
            raise ContractViolation(f"restored frame {i} has shape {fr.shape}, expected {(h, w, 3)}")
        if fr.dtype != np.uint8:
            raise ContractViolation(f"restored frame {i} has dtype {fr.dtype}, expected uint8")
        frames.append(fr)
    return frames


def run_pipeline(images: Sequence[np.ndarray], poses: Sequence[Pose] | PoseSet, restorer: Restorer,
                 f: int = DEFAULT_F, style_index: int = 0, weight_r: float = 0.5,
                 init=0, seed=None, occlusion: Optional[Mapping[int, np.ndarray]] = None) -> PipelineResult:
    """Restore ``images`` in trajectory order.

    ``poses[i]`` belongs to ``images[i]``. ``style_index`` picks the initial
    style image among the first batch (a position in trajectory order).
    ``occlusion`` maps input indices to occlusion masks. The returned images
    follow ``result.trajectory.order``.
    """
    k = len(images)
    if isinstance(poses, PoseSet):
        pose_set = poses
    else:
        pose_set = PoseSet.from_poses(poses, weight_r=weight_r)
    if len(pose_set) != k:
        raise ValidationError(f"{k} images but {len(pose_set)} poses")
    if k == 0:
        raise ValidationError("no images to restore")
    if k == 1:
        return PipelineResult([np.array(images[0], copy=True)], None, None, [])

    # pose.index is the key for images; positions in the set may differ
    by_index = {p.index: i for i, p in enumerate(pose_set.poses)}
    if sorted(by_index) != list(range(k)):
        raise ValidationError("pose indices must be 0..K-1 to pair them with images")
    traj = sort_poses(pose_set, init=init, seed=seed)
    params = batch_params(k, f)
    n = params.n
    if not 0 <= style_index < n:
        raise ValidationError(f"style index {style_index} must pick one of the first {n} images")

    ordered = [np.asarray(images[src], dtype=np.uint8) for src in traj.order]
    restored = [None] * k
    # (trajectory position, frame) pairs still to restore
    remaining = list(enumerate(ordered))
    style_pos = style_index
    batches = []
    while len(remaining) > 1:
        batch = remaining[:n]
        positions = [p for p, _ in batch]
        dists = [traj.neighbor_distances[p] for p in positions[:-1]]
        sources = [traj.order[p] for p in positions]
        occ = None
        if occlusion:
            # the carried-over anchor is already restored; only fresh images get masked
            fresh = sources if not batches else sources[1:]
            occ = {s: occlusion[s] for s in fresh if s in occlusion}
        manifest, plan = build_manifest([fr for _, fr in batch], positions, sources, dists, f,
                                        style_pos, occ)
        out = _check_output(restorer(manifest), manifest)
        batches.append(BatchRecord(tuple(positions), plan, manifest.style_slot))
        for slot, pos in zip(plan.image_slot_indices, positions):
            # the anchor carried over from the previous batch keeps its first restoration
            if restored[pos] is None:
                restored[pos] = out[slot]
        last_pos = positions[-1]
        remaining = [(last_pos, out[plan.image_slot_indices[-1]])] + remaining[len(batch):]
        style_pos = 0
        log.debug("batch %d restored positions %s..%s", len(batches), positions[0], last_pos)
    return PipelineResult(restored, traj, params, batches)
