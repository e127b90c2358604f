"""Hot inner loops, compiled with numba when available.

Each kernel exists twice: a numba ``@njit`` version and a pure-numpy
version with identical arithmetic order. The module-level names resolve to
the numba versions unless ``MVRESTORE_DISABLE_NUMBA=1`` is set in the
environment (or numba cannot be imported). Both implementations stay
importable as ``numba_impl`` / ``numpy_impl`` so tests and benchmarks can
compare them directly.
"""

from __future__ import annotations

import math
import os
import types

import numpy as np

__all__ = [
    "USE_NUMBA",
    "relative_terms",
    "pairwise_components",
    "thread_order",
    "block_max_pool",
    "numpy_impl",
    "numba_impl",
]


# --------------------------------------------------------------------------
# pure numpy
# --------------------------------------------------------------------------

def relative_terms(a, b, as_written):
    """Cosine and sine of the angle of the relative rotation, elementwise.

    ``a`` and ``b`` broadcast over leading axes, shape (..., 3, 3). The
    relative rotation is ``a.T @ b`` (``a @ b`` when ``as_written``); every
    product and sum is spelled out so all backends round identically.
    """
    if not as_written:
        a = np.swapaxes(a, -1, -2)
    m = [[a[..., i, 0] * b[..., 0, j] + a[..., i, 1] * b[..., 1, j] + a[..., i, 2] * b[..., 2, j]
          for j in range(3)] for i in range(3)]
    cos = (m[0][0] + m[1][1] + m[2][2] - 1.0) / 2.0
    cos = np.clip(cos, -1.0, 1.0)
    v0 = m[2][1] - m[1][2]
    v1 = m[0][2] - m[2][0]
    v2 = m[1][0] - m[0][1]
    sin = np.sqrt(v0 * v0 + v1 * v1 + v2 * v2) / 2.0
    return cos, sin


_atan2 = np.frompyfunc(math.atan2, 2, 1)


def _np_pairwise_components(rotations, centers, as_written):
    """Rotation and translation distance matrices for K poses.

    rotations: (K, 3, 3) float64, centers: (K, 3) float64.
    """
    rotations = np.ascontiguousarray(rotations, dtype=np.float64)
    centers = np.ascontiguousarray(centers, dtype=np.float64)
    cos, sin = relative_terms(rotations[:, None], rotations[None, :], as_written)
    # libm atan2 elementwise: numpy's SIMD arctan2 can differ by an ulp from
    # the scalar path and the numba kernel
    rot = _atan2(sin, cos).astype(np.float64)

    diff = centers[:, None, :] - centers[None, :, :]
    trans = np.sqrt(diff[:, :, 0] * diff[:, :, 0] + diff[:, :, 1] * diff[:, :, 1]
                    + diff[:, :, 2] * diff[:, :, 2])
    return rot, trans


def _np_thread_order(dist, init):
    k = dist.shape[0]
    placed = np.zeros(k, dtype=np.bool_)
    placed[init] = True
    buf = np.empty(2 * k, dtype=np.int64)
    left = right = k
    buf[left] = init
    head = tail = init
    for _ in range(k - 1):
        cand = np.flatnonzero(~placed)
        dh = dist[cand, head]
        dt = dist[cand, tail]
        dpl = np.minimum(dh, dt)
        # argmin returns the first occurrence, i.e. the smallest index on ties
        pick = int(np.argmin(dpl))
        c = int(cand[pick])
        placed[c] = True
        if dh[pick] <= dt[pick]:
            left -= 1
            buf[left] = c
            head = c
        else:
            right += 1
            buf[right] = c
            tail = c
    return buf[left:right + 1].copy()


def _np_block_max_pool(mask, factor):
    h, w = mask.shape
    oh = -(-h // factor)
    ow = -(-w // factor)
    padded = np.zeros((oh * factor, ow * factor), dtype=np.uint8)
    padded[:h, :w] = mask
    return padded.reshape(oh, factor, ow, factor).max(axis=(1, 3))


numpy_impl = types.SimpleNamespace(
    pairwise_components=_np_pairwise_components,
    thread_order=_np_thread_order,
    block_max_pool=_np_block_max_pool,
)


# --------------------------------------------------------------------------
# numba
# --------------------------------------------------------------------------

def _build_numba():
    from numba import njit

    @njit(cache=True)
    def pairwise_components(rotations, centers, as_written):
        k = rotations.shape[0]
        rot = np.zeros((k, k))
        trans = np.zeros((k, k))
        m = np.empty((3, 3))
        for p in range(k):
            for q in range(k):
                for i in range(3):
                    for j in range(3):
                        if as_written:
                            m[i, j] = (rotations[p, i, 0] * rotations[q, 0, j]
                                       + rotations[p, i, 1] * rotations[q, 1, j]
                                       + rotations[p, i, 2] * rotations[q, 2, j])
                        else:
                            m[i, j] = (rotations[p, 0, i] * rotations[q, 0, j]
                                       + rotations[p, 1, i] * rotations[q, 1, j]
                                       + rotations[p, 2, i] * rotations[q, 2, j])
                c = (m[0, 0] + m[1, 1] + m[2, 2] - 1.0) / 2.0
                if c > 1.0:
                    c = 1.0
                elif c < -1.0:
                    c = -1.0
                v0 = m[2, 1] - m[1, 2]
                v1 = m[0, 2] - m[2, 0]
                v2 = m[1, 0] - m[0, 1]
                s = math.sqrt(v0 * v0 + v1 * v1 + v2 * v2) / 2.0
                rot[p, q] = math.atan2(s, c)
                dx = centers[p, 0] - centers[q, 0]
                dy = centers[p, 1] - centers[q, 1]
                dz = centers[p, 2] - centers[q, 2]
                trans[p, q] = math.sqrt(dx * dx + dy * dy + dz * dz)
        return rot, trans

    @njit(cache=True)
    def thread_order(dist, init):
        k = dist.shape[0]
        placed = np.zeros(k, dtype=np.bool_)
        placed[init] = True
        buf = np.empty(2 * k, dtype=np.int64)
        left = k
        right = k
        buf[left] = init
        head = init
        tail = init
        for _ in range(k - 1):
            best = -1
            best_d = np.inf
            best_head = True
            for c in range(k):
                if placed[c]:
                    continue
                dh = dist[c, head]
                dt = dist[c, tail]
                d = dh if dh <= dt else dt
                if best < 0 or d < best_d:
                    best = c
                    best_d = d
                    best_head = dh <= dt
            placed[best] = True
            if best_head:
                left -= 1
                buf[left] = best
                head = best
            else:
                right += 1
                buf[right] = best
                tail = best
        return buf[left:right + 1].copy()

    @njit(cache=True)
    def block_max_pool(mask, factor):
        h, w = mask.shape
        oh = (h + factor - 1) // factor
        ow = (w + factor - 1) // factor
        out = np.zeros((oh, ow), dtype=np.uint8)
        for y in range(h):
            by = y // factor
            for x in range(w):
                if mask[y, x] != 0:
                    out[by, x // factor] = 1
        return out

    return types.SimpleNamespace(
        pairwise_components=pairwise_components,
        thread_order=thread_order,
        block_max_pool=block_max_pool,
    )


try:
    numba_impl = _build_numba()
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba_impl = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("MVRESTORE_DISABLE_NUMBA", "") not in ("1", "true", "yes")

_active = numba_impl if USE_NUMBA else numpy_impl


def pairwise_components(rotations, centers, as_written=False):
    rotations = np.ascontiguousarray(rotations, dtype=np.float64)
    centers = np.ascontiguousarray(centers, dtype=np.float64)
    return _active.pairwise_components(rotations, centers, bool(as_written))


def thread_order(dist, init):
    dist = np.ascontiguousarray(dist, dtype=np.float64)
    return _active.thread_order(dist, int(init))


def block_max_pool(mask, factor):
    mask = np.ascontiguousarray(mask, dtype=np.uint8)
    return _active.block_max_pool(mask, int(factor))
