"""Inpainting and style masks for the frames of an initial video.

Masks are ``uint8`` arrays of shape (H, W) holding only 0 and 1; 1 marks a
pixel the restorer must synthesise (inpainting) or the style reference
frame (style).
"""

from __future__ import annotations

from typing import Mapping, Optional, Sequence

import numpy as np

from . import _kernels
from .errors import ValidationError
from .videoplan import FramePlan, ImageSlot

DEFAULT_LATENT_FACTOR = 8


def as_mask(mask, shape=None) -> np.ndarray:
    """Validate and return ``mask`` as a binary uint8 array."""
    m = np.asarray(mask)
    if m.ndim != 2:
        raise ValidationError(f"mask must be 2-D, got shape {m.shape}")
    if m.dtype == np.bool_:
        m = m.astype(np.uint8)
    elif not np.all((m == 0) | (m == 1)):
        raise ValidationError("mask values must be 0 or 1")
    m = m.astype(np.uint8, copy=False)
    if shape is not None and m.shape != tuple(shape):
        raise ValidationError(f"mask shape {m.shape} does not match frame shape {tuple(shape)}")
    return m


def make_inpaint_masks(plan: FramePlan, shape, occlusion: Optional[Mapping[int, np.ndarray] | Sequence] = None):
    """One mask per slot: all-ones for zero frames, the occlusion mask (or zeros) for images.

    ``occlusion`` maps 1-based image positions to masks, or is a sequence
    aligned with the plan's images (``None`` entries allowed).
    """
    shape = tuple(shape)
    if occlusion is None:
        occlusion = {}
    elif not isinstance(occlusion, Mapping):
        occlusion = {i + 1: m for i, m in enumerate(occlusion)}
    masks = []
    for slot in plan.slots:
        if isinstance(slot, ImageSlot):
            occ = occlusion.get(slot.position)
            if occ is None:
                masks.append(np.zeros(shape, np.uint8))
            else:
                masks.append(as_mask(occ, shape).copy())
        else:
            masks.append(np.ones(shape, np.uint8))
    return masks


def make_style_masks(plan: FramePlan, style_slot: int, shape):
    """All-ones at ``style_slot`` (a frame index), all-zeros elsewhere."""
    if not 0 <= style_slot < plan.total_frames:
        raise ValidationError(f"style slot {style_slot} out of range")
    if not plan.is_image(style_slot):
        raise ValidationError(f"style slot {style_slot} is a zero frame")
    shape = tuple(shape)
    masks = [np.zeros(shape, np.uint8) for _ in range(plan.total_frames)]
    masks[style_slot][:] = 1
    return masks


def apply_inpaint(frame, mask) -> np.ndarray:
    """Zero every channel of ``frame`` where ``mask`` is 1."""
    frame = np.asarray(frame)
    m = as_mask(mask, frame.shape[:2])
    out = frame.copy()
    out[m.astype(bool)] = 0
    return out


def downsample_mask(mask, factor: int = DEFAULT_LATENT_FACTOR) -> np.ndarray:
    """Max-pool ``mask`` over factor x factor blocks.

    Sizes that are not multiples of ``factor`` are zero-padded on the
    bottom/right, so the output is ``ceil(H / factor) x ceil(W / factor)``.
    """
    if int(factor) != factor or factor < 1:
        raise ValidationError(f"downsampling factor must be a positive integer, got {factor}")
    m = as_mask(mask)
    if factor == 1:
        return m.copy()
    return _kernels.block_max_pool(m, int(factor))
