import math

import numpy as np
import pytest
from skimage.metrics import structural_similarity

from mvrestore.errors import ValidationError
from mvrestore.metrics import PSNR_CAP, affine_align, evaluate, mse, psnr, ssim

from conftest import smooth_image


def _luma(x):
    return x.astype(np.float64) @ np.array([0.299, 0.587, 0.114])


def test_affine_self_alignment(rng):
    img = smooth_image(rng)
    _, fit = affine_align(img, img)
    np.testing.assert_allclose(fit.gain, 1.0, atol=1e-12)
    np.testing.assert_allclose(fit.offset, 0.0, atol=1e-9)
    assert fit.residual == pytest.approx(0.0, abs=1e-18)


def test_affine_recovers_inverse_map(rng):
    gt = smooth_image(rng).astype(np.float64)
    pred = 0.5 * gt + 20.0
    _, fit = affine_align(pred, gt)
    np.testing.assert_allclose(fit.gain, 2.0, atol=1e-6)
    np.testing.assert_allclose(fit.offset, -40.0, atol=1e-6)


def test_affine_constant_prediction(rng):
    gt = smooth_image(rng)
    pred = np.full(gt.shape, 77.0)
    aligned, fit = affine_align(pred, gt)
    np.testing.assert_array_equal(fit.gain, 0.0)
    np.testing.assert_allclose(fit.offset, gt.reshape(-1, 3).mean(axis=0), atol=1e-9)


def test_affine_is_least_squares_optimal(rng):
    gt = smooth_image(rng).astype(np.float64)
    pred = np.clip(gt * rng.uniform(0.6, 1.2, 3) + rng.uniform(-20, 20, 3) + rng.normal(0, 4, gt.shape), 0, 255)
    _, fit = affine_align(pred, gt)
    for c in range(3):
        for dg, do in [(1e-3, 0), (-1e-3, 0), (0, 1e-3), (0, -1e-3)]:
            g = fit.gain.copy()
            o = fit.offset.copy()
            g[c] += dg
            o[c] += do
            assert np.mean((pred * g + o - gt) ** 2) >= fit.residual


def test_affine_never_worse_than_identity(rng):
    for _ in range(20):
        gt = smooth_image(rng)
        pred = np.clip(gt * rng.uniform(0.5, 1.5, 3) + rng.normal(0, 10, gt.shape), 0, 255)
        _, fit = affine_align(pred, gt)
        assert fit.residual <= mse(pred, gt) + 1e-9


def test_affine_shape_mismatch():
    with pytest.raises(ValidationError):
        affine_align(np.zeros((4, 4, 3)), np.zeros((4, 5, 3)))


def test_psnr_values():
    a = np.full((16, 16, 3), 100, np.uint8)
    assert psnr(a, a) == PSNR_CAP
    assert psnr(a, a + 1) == pytest.approx(10 * math.log10(255 ** 2), abs=1e-9)
    assert psnr(a, a + 1) == pytest.approx(48.13, abs=0.01)
    assert psnr(a, a + 10) == pytest.approx(28.13, abs=0.01)     # MSE = 100


def test_psnr_monotone_in_mse():
    a = np.full((8, 8), 100.0)
    values = [psnr(a, a + d) for d in (0.5, 1, 2, 5, 20)]
    assert values == sorted(values, reverse=True)


def test_ssim_identity_and_symmetry(rng):
    a = smooth_image(rng)
    b = np.clip(a.astype(int) + rng.integers(-20, 20, a.shape), 0, 255).astype(np.uint8)
    assert ssim(a, a) == pytest.approx(1.0, abs=1e-12)
    assert ssim(a, b) == pytest.approx(ssim(b, a), abs=1e-12)


def test_ssim_negative_is_anticorrelated(rng):
    a = smooth_image(rng, lo=0, hi=255)
    neg = 255 - a
    s = ssim(a, neg)
    assert s < 0
    ref = structural_similarity(_luma(a), _luma(neg), data_range=255, gaussian_weights=True,
                                sigma=1.5, use_sample_covariance=False)
    assert s == pytest.approx(ref, abs=1e-9)


def test_ssim_matches_skimage(rng):
    for _ in range(5):
        a = smooth_image(rng, 40, 52)
        b = np.clip(a.astype(int) + rng.integers(-30, 30, a.shape), 0, 255).astype(np.uint8)
        ref = structural_similarity(_luma(a), _luma(b), data_range=255, gaussian_weights=True,
                                    sigma=1.5, use_sample_covariance=False)
        assert ssim(a, b) == pytest.approx(ref, abs=1e-9)


def test_ssim_too_small():
    with pytest.raises(ValidationError):
        ssim(np.zeros((10, 20)), np.zeros((10, 20)))


def test_evaluate_identical(rng):
    imgs = [smooth_image(rng) for _ in range(3)]
    rep = evaluate(imgs, imgs)
    assert rep.mean_psnr == PSNR_CAP and rep.mean_aligned_psnr == PSNR_CAP


def test_evaluate_tinted(rng):
    gts = [smooth_image(rng) for _ in range(4)]
    preds = [np.clip(np.rint(g * [0.8, 1.1, 0.9] + [10, -5, 20]), 0, 255).astype(np.uint8) for g in gts]
    rep = evaluate(preds, gts)
    for raw, al in zip(rep.psnr, rep.aligned_psnr):
        assert al >= raw
    assert rep.mean_aligned_psnr > rep.mean_psnr + 10


def test_evaluate_single_matches_scalar(rng):
    a = smooth_image(rng)
    b = np.clip(a.astype(int) + 7, 0, 255).astype(np.uint8)
    rep = evaluate([a], [b])
    assert rep.mean_psnr == psnr(a, b)
    assert rep.mean_ssim == ssim(a, b)


def test_evaluate_unpaired():
    with pytest.raises(ValidationError):
        evaluate([np.zeros((16, 16, 3))], [])
