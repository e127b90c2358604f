"""The numba kernels and their numpy fallbacks must agree."""

import numpy as np
import pytest

from mvrestore import _kernels
from mvrestore.geometry import PoseSet, pose_distance

from oracles import random_poses, random_rotation

needs_numba = pytest.mark.skipif(_kernels.numba_impl is None, reason="numba not available")


def _arrays(rng, k):
    rots = np.stack([random_rotation(rng) for _ in range(k)])
    centers = rng.normal(size=(k, 3))
    return rots, centers


@pytest.mark.parametrize("as_written", [False, True])
def test_pairwise_matches_scalar(kernel_impl, rng, as_written):
    poses = random_poses(rng, 9)
    ps = PoseSet.from_poses(poses, weight_r=0.3, as_written=as_written)
    rot, trans = kernel_impl.pairwise_components(ps.rotations(), ps.centers(), as_written)
    d = (ps.weight_r / ps.scale_r) * rot + ((1 - ps.weight_r) / ps.scale_t) * trans
    for i, a in enumerate(poses):
        for j, b in enumerate(poses):
            assert d[i, j] == pytest.approx(pose_distance(a, b, ps), abs=1e-15)


@needs_numba
def test_pairwise_backends_agree(rng):
    rots, centers = _arrays(rng, 30)
    r1, t1 = _kernels.numba_impl.pairwise_components(rots, centers, False)
    r2, t2 = _kernels.numpy_impl.pairwise_components(rots, centers, False)
    np.testing.assert_allclose(r1, r2, rtol=0, atol=1e-15)
    np.testing.assert_array_equal(t1, t2)


@needs_numba
def test_thread_order_backends_agree(rng):
    for k in range(1, 40):
        pts = rng.normal(size=(k, 2))
        dist = np.linalg.norm(pts[:, None] - pts[None], axis=-1)
        init = int(rng.integers(k))
        np.testing.assert_array_equal(
            _kernels.numba_impl.thread_order(dist, init),
            _kernels.numpy_impl.thread_order(dist, init))


def test_thread_order_ties(kernel_impl):
    # all distances equal: smallest index first, always attached at the head
    dist = np.ones((5, 5)) - np.eye(5)
    assert list(kernel_impl.thread_order(dist, 2)) == [4, 3, 1, 0, 2]


@pytest.mark.parametrize("shape,factor", [((16, 16), 8), ((17, 9), 4), ((5, 5), 1), ((3, 7), 8)])
def test_block_max_pool(kernel_impl, rng, shape, factor):
    m = (rng.uniform(size=shape) < 0.05).astype(np.uint8)
    out = kernel_impl.block_max_pool(m, factor)
    oh, ow = -(-shape[0] // factor), -(-shape[1] // factor)
    assert out.shape == (oh, ow)
    for i in range(oh):
        for j in range(ow):
            assert out[i, j] == m[i * factor:(i + 1) * factor, j * factor:(j + 1) * factor].max(initial=0)
