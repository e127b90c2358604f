"""Time the numba kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--sizes 100 400 1000] [--repeat 5]

Both implementations are called directly, so the MVRESTORE_DISABLE_NUMBA
flag has no effect here. Outputs are checked for agreement before timing.
"""

import argparse
import time

import numpy as np
from scipy.spatial.transform import Rotation

from mvrestore import _kernels


def best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def pose_inputs(k, rng):
    rot = Rotation.random(k, random_state=rng.integers(2**31)).as_matrix()
    centers = rng.normal(size=(k, 3))
    return np.ascontiguousarray(rot), centers


def distance(impl, rot, centers):
    r, t = impl.pairwise_components(rot, centers, False)
    sr = r.max() or 1.0
    st = t.max() or 1.0
    return 0.5 * r / sr + 0.5 * t / st


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--sizes", type=int, nargs="+", default=[100, 400, 1000])
    ap.add_argument("--mask-side", type=int, default=1024)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    if _kernels.numba_impl is None:
        raise SystemExit("numba is not importable; nothing to compare")
    nb, npy = _kernels.numba_impl, _kernels.numpy_impl
    rng = np.random.default_rng(args.seed)

    # compile once so timings exclude JIT
    rot, centers = pose_inputs(4, rng)
    nb.thread_order(distance(nb, rot, centers), 0)
    nb.block_max_pool(np.zeros((16, 16), np.uint8), 8)

    rows = []
    for k in args.sizes:
        rot, centers = pose_inputs(k, rng)
        a = nb.pairwise_components(rot, centers, False)
        b = npy.pairwise_components(rot, centers, False)
        assert all(np.array_equal(x, y) for x, y in zip(a, b)), "pairwise kernels disagree"
        rows.append((f"pairwise K={k}",
                     best_of(lambda: nb.pairwise_components(rot, centers, False), args.repeat),
                     best_of(lambda: npy.pairwise_components(rot, centers, False), args.repeat)))

        dist = distance(nb, rot, centers)
        assert np.array_equal(nb.thread_order(dist, 0), npy.thread_order(dist, 0)), "thread_order disagrees"
        rows.append((f"thread_order K={k}",
                     best_of(lambda: nb.thread_order(dist, 0), args.repeat),
                     best_of(lambda: npy.thread_order(dist, 0), args.repeat)))

    side = args.mask_side
    mask = (rng.uniform(size=(side, side)) < 0.01).astype(np.uint8)
    assert np.array_equal(nb.block_max_pool(mask, 8), npy.block_max_pool(mask, 8)), "max pool disagrees"
    rows.append((f"max_pool {side}x{side}/8",
                 best_of(lambda: nb.block_max_pool(mask, 8), args.repeat),
                 best_of(lambda: npy.block_max_pool(mask, 8), args.repeat)))

    print(f"{'kernel':<24}{'numba ms':>12}{'numpy ms':>12}{'speedup':>10}")
    for name, t_nb, t_np in rows:
        print(f"{name:<24}{t_nb * 1e3:>12.3f}{t_np * 1e3:>12.3f}{t_np / t_nb:>9.1f}x")


if __name__ == "__main__":
    main()
