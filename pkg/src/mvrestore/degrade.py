"""Training-pair synthesis: degrade clean clips into initial videos with masks.

A pair is built from 25 clean frames. Some interior frames are blacked out,
every other frame gets an independent photometric jitter, blur, noise and
pasted occluders, and one surviving frame is picked as the style reference.
The target video re-renders every clean frame with only the style frame's
photometric jitter.

Every function that draws random numbers takes a ``numpy.random.Generator``;
:func:`make_training_pair` derives its generator from the seed alone.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np
from PIL import Image
from scipy.ndimage import convolve, correlate1d

from .errors import ValidationError
from .maskkit import apply_inpaint

CLIP_LEN = 25
MAX_ZEROED = 23


@dataclass(frozen=True)
class DegradationRanges:
    """Sampling ranges for :class:`DegradationParams`; all configurable."""

    brightness: tuple = (0.5, 1.5)
    saturation: tuple = (0.5, 1.5)
    hue: tuple = (-18.0, 18.0)
    sharpness: tuple = (0.5, 2.0)
    noise_sigma: tuple = (0.0, 12.0)
    motion_length: tuple = (0, 15)
    gaussian_sigma: tuple = (0.0, 2.5)
    max_occluders: int = 3
    occluder_scale: tuple = (0.5, 1.5)


@dataclass(frozen=True)
class Occluder:
    cutout_id: int
    position: tuple      # (row, col) of the cutout's top-left corner; may be negative
    scale: float


@dataclass(frozen=True)
class DegradationParams:
    brightness_factor: float = 1.0
    saturation_factor: float = 1.0
    hue_shift: float = 0.0
    sharpness_factor: float = 1.0
    noise_sigma: float = 0.0
    motion_length: int = 0
    motion_angle: float = 0.0
    gaussian_blur_sigma: float = 0.0
    occluders: tuple = ()

    def __post_init__(self):
        for name in ("brightness_factor", "saturation_factor", "sharpness_factor"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"{name} must be positive")
        if self.noise_sigma < 0 or self.gaussian_blur_sigma < 0 or self.motion_length < 0:
            raise ValidationError("noise and blur parameters must be non-negative")

    def to_dict(self):
        d = asdict(self)
        d["occluders"] = [
            {"cutout_id": o.cutout_id, "position": list(o.position), "scale": o.scale}
            for o in self.occluders
        ]
        return d


def sample_params(rng: np.random.Generator, ranges: DegradationRanges = DegradationRanges(),
                  n_cutouts: int = 0, frame_shape=None) -> DegradationParams:
    u = rng.uniform
    occluders = ()
    if n_cutouts > 0 and ranges.max_occluders > 0 and frame_shape is not None:
        count = int(rng.integers(0, ranges.max_occluders + 1))
        h, w = frame_shape[:2]
        occluders = tuple(
            Occluder(int(rng.integers(n_cutouts)),
                     (int(rng.integers(-h // 4, h)), int(rng.integers(-w // 4, w))),
                     float(u(*ranges.occluder_scale)))
            for _ in range(count)
        )
    return DegradationParams(
        brightness_factor=float(u(*ranges.brightness)),
        saturation_factor=float(u(*ranges.saturation)),
        hue_shift=float(u(*ranges.hue)),
        sharpness_factor=float(u(*ranges.sharpness)),
        noise_sigma=float(u(*ranges.noise_sigma)),
        motion_length=int(rng.integers(ranges.motion_length[0], ranges.motion_length[1] + 1)),
        motion_angle=float(u(0.0, 180.0)),
        gaussian_blur_sigma=float(u(*ranges.gaussian_sigma)),
        occluders=occluders,
    )


# --------------------------------------------------------------------------
# clip selection
# --------------------------------------------------------------------------

def sample_clean_indices(n_source: int, rng: Optional[np.random.Generator] = None,
                         stride: Optional[int] = None, length: int = CLIP_LEN) -> list:
    """Frame indices ``0, s, 2s, ...`` for a stride ``s`` drawn uniformly from the feasible range."""
    if n_source < length:
        raise ValidationError(f"need at least {length} source frames, got {n_source}")
    max_stride = (n_source - 1) // (length - 1)
    if stride is None:
        if rng is None:
            raise ValidationError("either rng or stride is required")
        stride = int(rng.integers(1, max_stride + 1))
    if not 1 <= stride <= max_stride:
        raise ValidationError(f"stride {stride} outside [1, {max_stride}]")
    return [i * stride for i in range(length)]


def sample_clean_sequence(frames: Sequence, rng: Optional[np.random.Generator] = None,
                          stride: Optional[int] = None) -> list:
    return [frames[i] for i in sample_clean_indices(len(frames), rng, stride)]


def zero_frames(frames: Sequence, rng: np.random.Generator, n: Optional[int] = None):
    """Black out ``n`` (default: uniform in [0, 23]) interior frames.

    The first and last frames are never zeroed. Returns the new frame list
    and the sorted zeroed indices.
    """
    k = len(frames)
    interior = k - 2
    if n is None:
        n = int(rng.integers(0, min(MAX_ZEROED, interior) + 1))
    if not 0 <= n <= interior:
        raise ValidationError(f"cannot zero {n} of {interior} interior frames")
    idx = sorted(int(i) for i in rng.choice(np.arange(1, k - 1), size=n, replace=False)) if n else []
    out = [np.asarray(f).copy() for f in frames]
    for i in idx:
        out[i][:] = 0
    return out, idx


# --------------------------------------------------------------------------
# photometric
# --------------------------------------------------------------------------

def _rgb_to_hsv(rgb):
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    mx = rgb.max(axis=-1)
    mn = rgb.min(axis=-1)
    delta = mx - mn
    v = mx
    s = np.where(mx > 0, delta / np.where(mx > 0, mx, 1.0), 0.0)
    safe = np.where(delta > 0, delta, 1.0)
    h = np.zeros_like(mx)
    h = np.where(mx == r, ((g - b) / safe) % 6.0, h)
    h = np.where((mx == g) & (mx != r), (b - r) / safe + 2.0, h)
    h = np.where((mx == b) & (mx != r) & (mx != g), (r - g) / safe + 4.0, h)
    h = np.where(delta > 0, h, 0.0)
    return h / 6.0, s, v


def _hsv_to_rgb(h, s, v):
    h6 = (h % 1.0) * 6.0
    i = np.floor(h6)
    frac = h6 - i
    p = v * (1.0 - s)
    q = v * (1.0 - s * frac)
    t = v * (1.0 - s * (1.0 - frac))
    i = i.astype(np.int64) % 6
    r = np.choose(i, [v, q, p, p, t, v])
    g = np.choose(i, [t, v, v, q, p, p])
    b = np.choose(i, [p, p, t, v, v, q])
    return np.stack([r, g, b], axis=-1)


def _gray(x):
    return x[..., 0] * 0.299 + x[..., 1] * 0.587 + x[..., 2] * 0.114


def gaussian_kernel1d(sigma: float) -> np.ndarray:
    """Normalised Gaussian taps truncated at 3 sigma."""
    if sigma <= 0:
        return np.ones(1)
    radius = max(1, int(math.ceil(3.0 * sigma)))
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-0.5 * (x / sigma) ** 2)
    return k / k.sum()


def _gaussian_blur(x, sigma):
    if sigma <= 0:
        return x
    k = gaussian_kernel1d(sigma)
    x = correlate1d(x, k, axis=0, mode="reflect")
    return correlate1d(x, k, axis=1, mode="reflect")


def _quantize(x):
    return np.clip(np.rint(x), 0, 255).astype(np.uint8)


def photometric_float(frame, params: DegradationParams) -> np.ndarray:
    """Brightness, saturation, hue, sharpness on a float copy, clamped after each step."""
    x = np.asarray(frame, dtype=np.float64)
    if x.ndim != 3 or x.shape[-1] != 3:
        raise ValidationError(f"expected an (H, W, 3) colour frame, got {x.shape}")
    x = np.clip(x * params.brightness_factor, 0.0, 255.0)
    if params.saturation_factor != 1.0:
        g = _gray(x)[..., None]
        x = np.clip(g + params.saturation_factor * (x - g), 0.0, 255.0)
    if params.hue_shift % 360.0 != 0.0:
        h, s, v = _rgb_to_hsv(x / 255.0)
        x = np.clip(_hsv_to_rgb(h + params.hue_shift / 360.0, s, v) * 255.0, 0.0, 255.0)
    if params.sharpness_factor != 1.0:
        blurred = _gaussian_blur(x, 1.0)
        x = np.clip(blurred + params.sharpness_factor * (x - blurred), 0.0, 255.0)
    return x


def apply_photometric(frame, params: DegradationParams) -> np.ndarray:
    return _quantize(photometric_float(frame, params))


# --------------------------------------------------------------------------
# blur and noise
# --------------------------------------------------------------------------

def motion_kernel(length: int, angle: float) -> np.ndarray:
    """Normalised line kernel of ``length`` pixels at ``angle`` degrees.

    Lengths 0 and 1 give the identity kernel.
    """
    length = int(length)
    if length <= 1:
        return np.ones((1, 1))
    size = length if length % 2 == 1 else length + 1
    c = size // 2
    k = np.zeros((size, size))
    theta = math.radians(angle)
    dx, dy = math.cos(theta), -math.sin(theta)
    half = (length - 1) / 2.0
    for t in np.linspace(-half, half, 4 * length):
        col = int(round(c + t * dx))
        row = int(round(c + t * dy))
        k[row, col] = 1.0
    return k / k.sum()


def noise_blur_float(frame, params: DegradationParams, rng: np.random.Generator) -> np.ndarray:
    """Motion blur, then Gaussian blur, then additive Gaussian noise (float, unclamped)."""
    x = np.asarray(frame, dtype=np.float64)
    if params.motion_length > 1:
        k = motion_kernel(params.motion_length, params.motion_angle)
        x = np.stack([convolve(x[..., c], k, mode="reflect") for c in range(x.shape[-1])], axis=-1)
    x = _gaussian_blur(x, params.gaussian_blur_sigma)
    if params.noise_sigma > 0:
        x = x + rng.normal(0.0, params.noise_sigma, size=x.shape)
    return x


def apply_noise_blur(frame, params: DegradationParams, rng: np.random.Generator) -> np.ndarray:
    return _quantize(noise_blur_float(frame, params, rng))


# --------------------------------------------------------------------------
# occluders
# --------------------------------------------------------------------------

def _as_cutout(c):
    c = np.asarray(c)
    if c.ndim != 3 or c.shape[-1] != 4 or c.dtype != np.uint8:
        raise ValidationError("cutouts must be (h, w, 4) uint8 RGBA arrays")
    return c


def _scaled_cutout(cutout, scale):
    if scale == 1.0:
        return cutout
    h, w = cutout.shape[:2]
    size = (max(1, int(round(w * scale))), max(1, int(round(h * scale))))
    return np.asarray(Image.fromarray(cutout, "RGBA").resize(size, Image.NEAREST))


def paste_occluders(frame, cutouts: Sequence, occluders: Sequence[Occluder]):
    """Alpha-composite the listed cutouts; return (frame, mask of alpha > 0 pixels)."""
    frame = np.asarray(frame)
    h, w = frame.shape[:2]
    out = frame.astype(np.float64)
    mask = np.zeros((h, w), np.uint8)
    if occluders and not cutouts:
        raise ValidationError("occluders requested but the cutout library is empty")
    for occ in occluders:
        cut = _scaled_cutout(_as_cutout(cutouts[occ.cutout_id]), occ.scale)
        ch, cw = cut.shape[:2]
        r0, c0 = occ.position
        fr0, fc0 = max(r0, 0), max(c0, 0)
        fr1, fc1 = min(r0 + ch, h), min(c0 + cw, w)
        if fr0 >= fr1 or fc0 >= fc1:
            continue
        patch = cut[fr0 - r0:fr1 - r0, fc0 - c0:fc1 - c0]
        alpha = patch[..., 3:4].astype(np.float64) / 255.0
        region = out[fr0:fr1, fc0:fc1]
        out[fr0:fr1, fc0:fc1] = alpha * patch[..., :3] + (1.0 - alpha) * region
        mask[fr0:fr1, fc0:fc1] |= (patch[..., 3] > 0).astype(np.uint8)
    return _quantize(out) if occluders else frame.copy(), mask


def composite_occluders(frame, cutouts: Sequence, rng: np.random.Generator,
                        count: Optional[int] = None, ranges: DegradationRanges = DegradationRanges()):
    """Paste ``count`` (default: uniform in [0, max_occluders]) random cutouts."""
    frame = np.asarray(frame)
    h, w = frame.shape[:2]
    if count is None:
        count = int(rng.integers(0, ranges.max_occluders + 1))
    if count > 0 and not cutouts:
        raise ValidationError("occluders requested but the cutout library is empty")
    occ = [
        Occluder(int(rng.integers(len(cutouts))),
                 (int(rng.integers(-h // 4, h)), int(rng.integers(-w // 4, w))),
                 float(rng.uniform(*ranges.occluder_scale)))
        for _ in range(count)
    ]
    return paste_occluders(frame, cutouts, occ)


def degrade_frame(frame, params: DegradationParams, cutouts: Sequence, rng: np.random.Generator):
    """Photometric, motion blur, Gaussian blur, noise, occluders; one quantisation before occluders."""
    x = photometric_float(frame, params)
    x = noise_blur_float(x, params, rng)
    return paste_occluders(_quantize(x), cutouts, params.occluders)


# --------------------------------------------------------------------------
# pairs
# --------------------------------------------------------------------------

@dataclass
class TrainingPair:
    initial_video: list
    inpaint_masks: list
    style_masks: list
    target_video: list
    style_slot: int
    seed: int
    zeroed: list = field(default_factory=list)
    params: list = field(default_factory=list)        # DegradationParams or None for zeroed frames
    degraded_video: list = field(default_factory=list)
    source_indices: list = field(default_factory=list)

    def recipe(self, ranges: DegradationRanges = DegradationRanges()) -> dict:
        return {
            "seed": self.seed,
            "frames": len(self.initial_video),
            "source_indices": list(self.source_indices),
            "zeroed": list(self.zeroed),
            "style_slot": self.style_slot,
            "ranges": asdict(ranges),
            "params": [None if p is None else p.to_dict() for p in self.params],
        }


def make_training_pair(clean_frames: Sequence, cutouts: Sequence, seed: int,
                       ranges: DegradationRanges = DegradationRanges()) -> TrainingPair:
    """Build one deterministic training pair from a clean clip (>= 25 frames)."""
    rng = np.random.default_rng(seed)
    idx = sample_clean_indices(len(clean_frames), rng)
    clean = [np.asarray(clean_frames[i], dtype=np.uint8) for i in idx]
    shape = clean[0].shape
    if any(f.shape != shape for f in clean) or len(shape) != 3 or shape[-1] != 3:
        raise ValidationError("clean frames must share one (H, W, 3) shape")
    _, zeroed = zero_frames(clean, rng)
    zero_set = set(zeroed)

    initial, degraded, inpaint, params = [], [], [], []
    for i, frame in enumerate(clean):
        if i in zero_set:
            black = np.zeros_like(frame)
            initial.append(black)
            degraded.append(black)
            inpaint.append(np.ones(shape[:2], np.uint8))
            params.append(None)
            continue
        p = sample_params(rng, ranges, len(cutouts), shape)
        out, mask = degrade_frame(frame, p, cutouts, rng)
        degraded.append(out)
        initial.append(apply_inpaint(out, mask))
        inpaint.append(mask)
        params.append(p)

    live = [i for i in range(len(clean)) if i not in zero_set]
    style_slot = int(live[int(rng.integers(len(live)))])
    style_masks = [np.zeros(shape[:2], np.uint8) for _ in clean]
    style_masks[style_slot][:] = 1
    style_params = params[style_slot]
    target = [apply_photometric(f, style_params) for f in clean]
    return TrainingPair(initial, inpaint, style_masks, target, style_slot, int(seed),
                        zeroed, params, degraded, idx)
