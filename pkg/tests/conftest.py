import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from mvrestore import _kernels  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(params=["numba", "numpy"])
def kernel_impl(request):
    if request.param == "numba":
        if _kernels.numba_impl is None:
            pytest.skip("numba not available")
        return _kernels.numba_impl
    return _kernels.numpy_impl


def smooth_image(rng, h=64, w=64, lo=40.0, hi=200.0):
    """Band-limited colour test image with values inside [lo, hi]."""
    yy, xx = np.mgrid[0:h, 0:w] / max(h, w)
    chans = []
    for c in range(3):
        a, b, p = rng.uniform(1, 4, size=3)
        chans.append(np.sin(2 * np.pi * (a * xx + b * yy) + p) + 0.3 * rng.normal(size=(h, w)))
    img = np.stack(chans, axis=-1)
    img = (img - img.min()) / (img.max() - img.min())
    return np.rint(lo + (hi - lo) * img).astype(np.uint8)
