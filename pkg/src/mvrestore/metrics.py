"""PSNR / SSIM in raw and per-channel affine-aligned colour space.

All functions take images on the 8-bit scale (uint8 or float in [0, 255]),
shaped (H, W) or (H, W, C).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.ndimage import correlate1d

from .errors import ValidationError

PSNR_CAP = 99.0
PEAK = 255.0
SSIM_SIGMA = 1.5
SSIM_RADIUS = 5          # 11-tap window
SSIM_K1 = 0.01
SSIM_K2 = 0.03
LUMA = np.array([0.299, 0.587, 0.114])


def _pair(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValidationError(f"image shapes differ: {a.shape} vs {b.shape}")
    return a, b


def _channels(x):
    return x[..., None] if x.ndim == 2 else x


@dataclass(frozen=True)
class AffineFit:
    gain: np.ndarray
    offset: np.ndarray
    residual: float       # MSE after alignment, before clamping


def affine_align(pred, gt):
    """Least-squares per-channel map ``gain * pred + offset`` onto ``gt``.

    Returns ``(aligned, fit)`` where ``aligned`` is clamped to [0, 255] in
    float. ``fit.residual`` is measured before the clamp. A constant channel
    in ``pred`` maps to the mean of the matching ``gt`` channel.
    """
    pred, gt = _pair(pred, gt)
    p = _channels(pred)
    g = _channels(gt)
    c = p.shape[-1]
    gain = np.zeros(c)
    offset = np.zeros(c)
    for ch in range(c):
        x = p[..., ch].ravel()
        y = g[..., ch].ravel()
        xm = x.mean()
        ym = y.mean()
        dx = x - xm
        var = np.dot(dx, dx)
        if var <= 1e-12 * max(1.0, xm * xm) * x.size:
            gain[ch] = 0.0
            offset[ch] = ym
        else:
            gain[ch] = np.dot(dx, y - ym) / var
            offset[ch] = ym - gain[ch] * xm
    mapped = p * gain + offset
    residual = float(np.mean((mapped - g) ** 2))
    aligned = np.clip(mapped, 0.0, PEAK).reshape(pred.shape)
    return aligned, AffineFit(gain, offset, residual)


def mse(a, b) -> float:
    a, b = _pair(a, b)
    return float(np.mean((a - b) ** 2))


def psnr_from_mse(err: float) -> float:
    if err <= 0:
        return PSNR_CAP
    return min(PSNR_CAP, 10.0 * math.log10(PEAK * PEAK / err))


def psnr(a, b) -> float:
    """PSNR in dB over an 8-bit peak; identical inputs return ``PSNR_CAP``."""
    return psnr_from_mse(mse(a, b))


def _gaussian_taps():
    x = np.arange(-SSIM_RADIUS, SSIM_RADIUS + 1, dtype=np.float64)
    k = np.exp(-0.5 * (x / SSIM_SIGMA) ** 2)
    return k / k.sum()


def _luma(x):
    if x.ndim == 2:
        return x
    if x.shape[-1] == 1:
        return x[..., 0]
    return x[..., :3] @ LUMA


def _blur(x, taps):
    x = correlate1d(x, taps, axis=0, mode="reflect")
    return correlate1d(x, taps, axis=1, mode="reflect")


def ssim(a, b) -> float:
    """Mean structural similarity on the luminance channel.

    Gaussian window (11 taps, sigma 1.5), C1 = (0.01 * 255)^2,
    C2 = (0.03 * 255)^2; a 5-pixel border is excluded from the mean.
    """
    a, b = _pair(a, b)
    x = _luma(a)
    y = _luma(b)
    win = 2 * SSIM_RADIUS + 1
    if min(x.shape) < win:
        raise ValidationError(f"images must be at least {win} pixels on each side")
    taps = _gaussian_taps()
    c1 = (SSIM_K1 * PEAK) ** 2
    c2 = (SSIM_K2 * PEAK) ** 2
    mx = _blur(x, taps)
    my = _blur(y, taps)
    sxx = _blur(x * x, taps) - mx * mx
    syy = _blur(y * y, taps) - my * my
    sxy = _blur(x * y, taps) - mx * my
    num = (2 * mx * my + c1) * (2 * sxy + c2)
    den = (mx * mx + my * my + c1) * (sxx + syy + c2)
    s = num / den
    r = SSIM_RADIUS
    return float(s[r:-r, r:-r].mean())


@dataclass
class EvalReport:
    psnr: list = field(default_factory=list)
    ssim: list = field(default_factory=list)
    aligned_psnr: list = field(default_factory=list)
    aligned_ssim: list = field(default_factory=list)
    names: list = field(default_factory=list)

    @property
    def mean_psnr(self):
        return float(np.mean(self.psnr))

    @property
    def mean_ssim(self):
        return float(np.mean(self.ssim))

    @property
    def mean_aligned_psnr(self):
        return float(np.mean(self.aligned_psnr)) if self.aligned_psnr else None

    @property
    def mean_aligned_ssim(self):
        return float(np.mean(self.aligned_ssim)) if self.aligned_ssim else None

    def to_dict(self):
        per_image = []
        for i, name in enumerate(self.names):
            row = {"name": name, "psnr": self.psnr[i], "ssim": self.ssim[i]}
            if self.aligned_psnr:
                row["aligned_psnr"] = self.aligned_psnr[i]
                row["aligned_ssim"] = self.aligned_ssim[i]
            per_image.append(row)
        out = {"count": len(self.names), "mean_psnr": self.mean_psnr, "mean_ssim": self.mean_ssim}
        if self.aligned_psnr:
            out["mean_aligned_psnr"] = self.mean_aligned_psnr
            out["mean_aligned_ssim"] = self.mean_aligned_ssim
        out["per_image"] = per_image
        return out


def evaluate(preds: Sequence, gts: Sequence, aligned: bool = True, names: Sequence[str] | None = None) -> EvalReport:
    """Per-image and mean PSNR/SSIM, optionally also after affine alignment.

    Aligned PSNR uses the unclamped fit residual; aligned SSIM uses the
    clamped image.
    """
    if len(preds) != len(gts):
        raise ValidationError(f"unpaired sets: {len(preds)} predictions vs {len(gts)} references")
    if len(preds) == 0:
        raise ValidationError("nothing to evaluate")
    if names is None:
        names = [str(i) for i in range(len(preds))]
    report = EvalReport(names=list(names))
    for p, g in zip(preds, gts):
        report.psnr.append(psnr(p, g))
        report.ssim.append(ssim(p, g))
        if aligned:
            al, fit = affine_align(p, g)
            report.aligned_psnr.append(psnr_from_mse(fit.residual))
            report.aligned_ssim.append(ssim(al, g))
    return report
