"""Per-lane observation features and the queue-based reward.

Each incoming lane contributes a 7-dimensional feature vector::

    [is_active_phase, num_vehicles, effective_running,
     seg counts for 0-100, 100-200, 200-300, 300-400 m from the stop line]

* is_active_phase is 1 only for the two participating lanes of the active
  phase, and 0 for every lane while red clearance is running;
* effective_running counts moving vehicles close enough to reach the stop
  line within one action duration at free-flow speed;
* segment counts bin all vehicles by distance from the stop line into four
  100 m half-open chunks [k*100, (k+1)*100); chunks starting at or beyond
  the lane length are forced to zero.

The reward of an intersection is the negative sum of stopped-vehicle
counts over all 12 incoming lanes (right-turn lanes included).  Raw counts
are used unscaled throughout.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sim.network import LANE_ORDER, PHASE_LANE_SLOTS, RoadNetwork
from .sim.world import World

N_LANE_FEATURES = 7
N_SEGMENTS = 4
SEGMENT_LEN = 100.0
T_ACTION_S = 15.0
STATE_DIM = len(LANE_ORDER) * N_LANE_FEATURES  # 84


def queue_length(world: World, lane_id: str) -> int:
    """Vehicles that did not move during the last tick."""
    return sum(1 for v in world.lanes[lane_id].vehicles if v.speed == 0.0)


def effective_running(
    world: World, lane_id: str, t_action: float = T_ACTION_S
) -> int:
    """Moving vehicles within v_free * t_action of the stop line."""
    spec = world.network.lanes[lane_id]
    reach = spec.v_free * t_action
    return sum(
        1
        for v in world.lanes[lane_id].vehicles
        if v.speed > 0.0 and spec.length - v.position <= reach
    )


def segment_counts(world: World, lane_id: str) -> tuple[int, ...]:
    """All vehicles binned by distance from the stop line into 100 m chunks."""
    spec = world.network.lanes[lane_id]
    counts = [0] * N_SEGMENTS
    for v in world.lanes[lane_id].vehicles:
        k = int((spec.length - v.position) // SEGMENT_LEN)
        if k < N_SEGMENTS:
            counts[k] += 1
    for k in range(N_SEGMENTS):
        if k * SEGMENT_LEN >= spec.length:
            counts[k] = 0
    return tuple(counts)


def reward(world: World, intersection_id: str) -> float:
    """Negative total queue over the intersection's 12 incoming lanes."""
    return -float(
        sum(queue_length(world, lid) for lid in world.network.incoming[intersection_id])
    )


@dataclass(frozen=True)
class IntersectionObservation:
    """Snapshot of one intersection at a decision boundary."""

    intersection_id: str
    lane_ids: tuple[str, ...]  # 12 lanes in LANE_ORDER
    lane_features: np.ndarray  # (12, 7) float64
    queues: np.ndarray  # (12,) int64 stopped-vehicle counts
    active_phase: int

    def flatten(self) -> np.ndarray:
        """Lane-major (12 * 7,) state vector."""
        return self.lane_features.reshape(-1)

    def phase_queue(self, phase: int) -> int:
        """Total queue over the phase's two participating lanes."""
        i, j = PHASE_LANE_SLOTS[phase]
        return int(self.queues[i] + self.queues[j])

    @property
    def reward(self) -> float:
        return -float(self.queues.sum())


def observe(
    world: World, intersection_id: str, t_action: float = T_ACTION_S
) -> IntersectionObservation:
    """Extract the 12 x 7 feature matrix of an intersection."""
    network: RoadNetwork = world.network
    if intersection_id not in network.incoming:
        from .errors import ConfigError

        raise ConfigError(f"unknown intersection {intersection_id!r}")
    lane_ids = network.incoming[intersection_id]
    sig = world.signals[intersection_id]
    active_slots = PHASE_LANE_SLOTS[sig.phase] if sig.clearance == 0.0 else ()

    feats = np.zeros((len(LANE_ORDER), N_LANE_FEATURES), dtype=np.float64)
    queues = np.zeros(len(LANE_ORDER), dtype=np.int64)
    for slot, lane_id in enumerate(lane_ids):
        q = queue_length(world, lane_id)
        queues[slot] = q
        feats[slot, 0] = 1.0 if slot in active_slots else 0.0
        feats[slot, 1] = float(len(world.lanes[lane_id].vehicles))
        feats[slot, 2] = float(effective_running(world, lane_id, t_action))
        feats[slot, 3:] = segment_counts(world, lane_id)
    return IntersectionObservation(
        intersection_id=intersection_id,
        lane_ids=lane_ids,
        lane_features=feats,
        queues=queues,
        active_phase=sig.phase,
    )
