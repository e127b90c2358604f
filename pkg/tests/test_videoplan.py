import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mvrestore.errors import ValidationError
from mvrestore.videoplan import (FramePlan, ImageSlot, ZeroSlot, allocate_zero_frames,
                                 build_frame_plan)

from oracles import fraction_apportion


def test_n_equals_f():
    assert allocate_zero_frames([1.0, 2.0, 3.0], 4, 4) == [0, 0, 0]


def test_single_gap_takes_everything():
    assert allocate_zero_frames([0.37], 2, 25) == [23]


def test_hand_example():
    assert allocate_zero_frames([1, 3], 3, 7) == [1, 3]


def test_remainder_goes_to_largest():
    # shares 5 * [0.2, 0.3, 0.5] = [1, 1.5, 2.5] -> floors [1, 1, 2], r = 1 -> the 0.5 gap
    assert allocate_zero_frames([2, 3, 5], 4, 9) == [1, 1, 3]
    assert allocate_zero_frames([2, 3, 5], 4, 9) == fraction_apportion([2, 3, 5], 4, 9)


def test_equal_distances_favour_earlier_gaps():
    assert allocate_zero_frames([1, 1, 1], 4, 6) == [1, 1, 0]


def test_zero_distances_round_robin():
    assert allocate_zero_frames([0, 0, 0], 4, 11) == [3, 2, 2]


@pytest.mark.parametrize("n,f", [(1, 5), (6, 5)])
def test_invalid_sizes(n, f):
    with pytest.raises(ValidationError):
        allocate_zero_frames([1.0] * max(n - 1, 0), n, f)


def test_negative_distance_rejected():
    with pytest.raises(ValidationError):
        allocate_zero_frames([1.0, -1.0], 3, 10)


def test_random_against_oracle(rng):
    for _ in range(2000):
        f = int(rng.integers(3, 26))
        n = int(rng.integers(2, f + 1))
        d = rng.uniform(size=n - 1) * (rng.uniform(size=n - 1) > 0.2)
        got = allocate_zero_frames(d, n, f)
        assert sum(got) == f - n
        assert got == fraction_apportion(d, n, f)


@settings(max_examples=300, deadline=None)
@given(st.integers(2, 25).flatmap(
    lambda n: st.tuples(st.just(n), st.integers(n, 25),
                        st.lists(st.floats(0, 100, allow_nan=False), min_size=n - 1, max_size=n - 1))))
def test_allocation_properties(case):
    n, f, d = case
    got = allocate_zero_frames(d, n, f)
    m = f - n
    assert sum(got) == m
    total = sum(d)
    for i in range(n - 1):
        if total > 0:
            assert abs(got[i] - d[i] / total * m) <= 1 + 1e-9
        for j in range(n - 1):
            if d[i] > d[j] or (d[i] == d[j] and i < j):
                assert got[i] >= got[j]


def test_build_plan_layout():
    p = build_frame_plan(["a", "b"], [3])
    assert [type(s) for s in p.slots] == [ImageSlot, ZeroSlot, ZeroSlot, ZeroSlot, ImageSlot]
    p = build_frame_plan(["a", "b", "c"], [0, 2])
    assert [s.kind for s in p.slots] == ["image", "image", "zero", "zero", "image"]
    assert p.image_slot_indices == (0, 1, 4)
    assert p.slots[4].handle == "c"


def test_build_plan_mismatch():
    with pytest.raises(ValidationError):
        build_frame_plan(["a", "b"], [1, 1])
    with pytest.raises(ValidationError):
        build_frame_plan(["a", "b"], [1], f=5)


def test_plan_round_trip(rng):
    for _ in range(200):
        f = int(rng.integers(2, 26))
        n = int(rng.integers(2, f + 1))
        alloc = allocate_zero_frames(rng.uniform(size=n - 1), n, f)
        plan = build_frame_plan(list(range(n)), alloc, f)
        idx = plan.image_slot_indices
        assert plan.total_frames == f
        assert idx[0] == 0 and idx[-1] == f - 1
        assert [b - a - 1 for a, b in zip(idx[:-1], idx[1:])] == alloc


def test_plan_invariants_enforced():
    with pytest.raises(ValidationError):
        FramePlan(3, (ZeroSlot(), ImageSlot(1), ImageSlot(2)), (0,))
    with pytest.raises(ValidationError):
        FramePlan(3, (ImageSlot(1), ZeroSlot(), ImageSlot(2)), (0,))
