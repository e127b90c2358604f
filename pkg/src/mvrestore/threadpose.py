"""Greedy double-ended ordering of poses into an implicit camera trajectory.

The list starts from one pose. Every step takes the unplaced pose closest to
either end of the list and attaches it to that end. Ties are broken
deterministically: the smallest input position wins among equally close
candidates, and a candidate equally close to both ends goes to the head.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from . import _kernels
from .errors import ValidationError
from .geometry import Pose, PoseSet, pose_distance

HEAD = "head"
TAIL = "tail"


@dataclass(frozen=True)
class OrderedTrajectory:
    order: tuple            # pose ``index`` values, head to tail
    positions: tuple        # same order, as positions within the input PoseSet
    neighbor_distances: tuple

    def __len__(self):
        return len(self.order)

    def reversed(self) -> "OrderedTrajectory":
        return OrderedTrajectory(self.order[::-1], self.positions[::-1], self.neighbor_distances[::-1])


def list_distance(candidate: Pose, head: Pose, tail: Pose, pose_set: PoseSet):
    """Distance from ``candidate`` to the nearer end of the list, and which end."""
    dh = pose_distance(candidate, head, pose_set)
    dt = pose_distance(candidate, tail, pose_set)
    if dh <= dt:
        return dh, HEAD
    return dt, TAIL


def resolve_init(k: int, init: Union[int, str] = 0, seed=None) -> int:
    """Turn an init policy (a position, or ``"random"``) into a start position."""
    if isinstance(init, str):
        if init != "random":
            raise ValidationError(f"unknown init policy {init!r}")
        return int(np.random.default_rng(seed).integers(k))
    init = int(init)
    if not 0 <= init < k:
        raise ValidationError(f"init position {init} out of range for {k} poses")
    return init


def sort_poses(pose_set: PoseSet, init: Union[int, str] = 0, seed=None) -> OrderedTrajectory:
    """Order ``pose_set`` along an implicit trajectory.

    ``init`` is the start position (default 0) or ``"random"``, in which case
    ``seed`` feeds the generator that picks it.
    """
    k = len(pose_set)
    if k == 0:
        raise ValidationError("cannot sort an empty pose set")
    start = resolve_init(k, init, seed)
    dist = pose_set.distance_matrix()
    positions = [int(p) for p in _kernels.thread_order(dist, start)]
    neighbor = tuple(float(dist[a, b]) for a, b in zip(positions[:-1], positions[1:]))
    order = tuple(pose_set.poses[p].index for p in positions)
    return OrderedTrajectory(order, tuple(positions), neighbor)
