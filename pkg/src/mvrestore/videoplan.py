"""Lay out N ordered images and f - N zero frames as an f-slot initial video."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .errors import ValidationError


@dataclass(frozen=True)
class ImageSlot:
    position: int           # 1-based position among the N input images
    handle: object = field(default=None, compare=False, repr=False)

    kind = "image"


@dataclass(frozen=True)
class ZeroSlot:
    kind = "zero"


@dataclass(frozen=True)
class FramePlan:
    total_frames: int
    slots: tuple
    zero_counts: tuple

    def __post_init__(self):
        slots = tuple(self.slots)
        object.__setattr__(self, "slots", slots)
        object.__setattr__(self, "zero_counts", tuple(int(n) for n in self.zero_counts))
        if len(slots) != self.total_frames:
            raise ValidationError("slot count does not match total_frames")
        img = self.image_slot_indices
        if len(img) < 1 or img[0] != 0 or img[-1] != len(slots) - 1:
            raise ValidationError("first and last slots must hold input images")
        if [slots[i].position for i in img] != list(range(1, len(img) + 1)):
            raise ValidationError("image slots must appear in input order")
        gaps = tuple(b - a - 1 for a, b in zip(img[:-1], img[1:]))
        if gaps != self.zero_counts:
            raise ValidationError("zero_counts disagree with the slot layout")

    @property
    def n_images(self) -> int:
        return len(self.image_slot_indices)

    @property
    def image_slot_indices(self) -> tuple:
        """Frame index occupied by each input image, in input order."""
        return tuple(i for i, s in enumerate(self.slots) if isinstance(s, ImageSlot))

    def is_image(self, slot: int) -> bool:
        return isinstance(self.slots[slot], ImageSlot)


def allocate_zero_frames(d: Sequence[float], n_images: int, f: int) -> list:
    """Split ``f - n_images`` zero frames over the ``n_images - 1`` gaps.

    Each gap gets the floor of its proportional share of the total distance.
    The remainder goes one frame at a time to the gaps with the largest
    distances; equal distances favour the earlier gap. If every distance is
    zero the frames are dealt round-robin from the first gap.
    """
    if n_images < 2:
        raise ValidationError(f"need at least 2 images, got {n_images}")
    if n_images > f:
        raise ValidationError(f"{n_images} images do not fit in {f} frames")
    d = [float(x) for x in d]
    if len(d) != n_images - 1:
        raise ValidationError(f"expected {n_images - 1} distances, got {len(d)}")
    if any(not math.isfinite(x) or x < 0 for x in d):
        raise ValidationError("distances must be finite and non-negative")

    m = f - n_images
    gaps = n_images - 1
    total = sum(d)
    if total == 0:
        return [m // gaps + (1 if i < m % gaps else 0) for i in range(gaps)]

    n = [math.floor(x * m / total) for x in d]
    rank = sorted(range(gaps), key=lambda i: (-d[i], i))
    r = m - sum(n)
    # rounding in the shares can leave r outside [0, gaps); fix up so the
    # total is always exact
    while r < 0:
        for i in reversed(rank):
            if n[i] > 0:
                n[i] -= 1
                r += 1
                break
    while r > 0:
        for i in rank[:r]:
            n[i] += 1
        r = m - sum(n)
    return n


def build_frame_plan(images: Sequence, zero_counts: Sequence[int], f: int | None = None) -> FramePlan:
    """Interleave ``images`` with ``zero_counts[i]`` zero slots after image i."""
    zero_counts = [int(n) for n in zero_counts]
    if len(images) < 1:
        raise ValidationError("need at least one image")
    if len(zero_counts) != len(images) - 1:
        raise ValidationError(
            f"{len(images)} images need {len(images) - 1} zero counts, got {len(zero_counts)}")
    if any(n < 0 for n in zero_counts):
        raise ValidationError("zero counts must be non-negative")
    total = len(images) + sum(zero_counts)
    if f is not None and total != f:
        raise ValidationError(f"allocation fills {total} frames, expected {f}")
    slots = []
    for i, handle in enumerate(images):
        slots.append(ImageSlot(i + 1, handle))
        if i < len(zero_counts):
            slots.extend(ZeroSlot() for _ in range(zero_counts[i]))
    return FramePlan(total, tuple(slots), tuple(zero_counts))


def plan_batch(images: Sequence, distances: Sequence[float], f: int) -> FramePlan:
    """Allocate zero frames from neighbour distances and build the plan."""
    n = allocate_zero_frames(distances, len(images), f)
    return build_frame_plan(images, n, f)
