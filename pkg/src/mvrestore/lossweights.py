"""Per-frame weights for the consistency loss.

Frames holding input images are weighted by ``omega_c`` and zero frames by
``omega_n`` so that input frames carry at least a ``lam : (1 - lam)`` share
of the total loss.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .videoplan import FramePlan

VERBATIM = "verbatim"
SYMMETRIC = "symmetric"


@dataclass(frozen=True)
class LossWeights:
    omega_c: float
    omega_n: float
    lam: float
    f: int
    n: int

    @property
    def conditioned_fraction(self) -> float:
        """Share of the total weight that lands on input-image frames."""
        a = self.n * self.omega_c
        return a / (a + (self.f - self.n) * self.omega_n)


def compute_weights(f: int, n: int, lam: float, variant: str = VERBATIM) -> LossWeights:
    """Weights for an f-frame video with ``n`` conditioned (input) frames.

    ``variant="verbatim"`` caps the zero-frame share with ``(f - n) / n``;
    ``variant="symmetric"`` uses ``(f - n) / f``, mirroring the conditioned
    branch. They differ only where ``(f - n) / n < 1 - lam``.
    """
    if not 2 <= n < f:
        raise ValidationError(f"need 2 <= N < f, got N={n}, f={f}")
    if not 0.0 < lam < 1.0:
        raise ValidationError(f"lambda must lie in (0, 1), got {lam}")
    cond = n / f
    free = (f - n) / f
    omega_c = max(cond, lam) / cond
    if variant == VERBATIM:
        omega_n = min((f - n) / n, 1.0 - lam) / free
    elif variant == SYMMETRIC:
        omega_n = min(free, 1.0 - lam) / free
    else:
        raise ValidationError(f"unknown weight variant {variant!r}")
    return LossWeights(omega_c, omega_n, lam, f, n)


def weight_loss_vector(lv, plan: FramePlan, w: LossWeights) -> np.ndarray:
    """Scale per-frame losses by ``omega_c`` on image slots, ``omega_n`` elsewhere."""
    lv = np.asarray(lv, dtype=np.float64)
    if lv.ndim != 1 or lv.shape[0] != plan.total_frames:
        raise ValidationError(f"expected {plan.total_frames} losses, got shape {lv.shape}")
    if plan.total_frames != w.f or plan.n_images != w.n:
        raise ValidationError("plan does not match the (f, N) the weights were computed for")
    if np.any(lv < 0):
        raise ValidationError("per-frame losses must be non-negative")
    scale = np.array([w.omega_c if plan.is_image(i) else w.omega_n for i in range(plan.total_frames)])
    return lv * scale
