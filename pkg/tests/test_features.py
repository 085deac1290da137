"""Lane features and queue reward against direct enumeration oracles."""
import numpy as np
import pytest

from greenloop.errors import ConfigError
from greenloop.features import (
    N_LANE_FEATURES,
    STATE_DIM,
    T_ACTION_S,
    effective_running,
    observe,
    queue_length,
    reward,
    segment_counts,
)
from greenloop.sim.network import LANE_ORDER, PHASE_LANE_SLOTS, build_grid
from greenloop.sim.world import Vehicle, World
from sim_invariants import make_recipe

LANE = "N0>x0_0:through"


def place(world, lane_id, *dist_speed):
    """Drop vehicles at given (distance-from-stop-line, speed) pairs."""
    length = world.network.lanes[lane_id].length
    vehicles = [
        Vehicle(vid=i, route=(lane_id,), enter_time=0.0, position=length - d, speed=s)
        for i, (d, s) in enumerate(dist_speed)
    ]
    vehicles.sort(key=lambda v: -v.position)
    world.lanes[lane_id].vehicles = vehicles
    return world


def test_constants():
    assert N_LANE_FEATURES == 7
    assert STATE_DIM == 84
    assert T_ACTION_S == 15.0


def test_queue_length_counts_stopped_only():
    world = place(World(build_grid(1, 1)), LANE, (0, 0.0), (7.5, 0.0), (15, 0.0))
    assert queue_length(world, LANE) == 3
    world = place(
        World(build_grid(1, 1)),
        LANE,
        (0, 0.0), (7.5, 0.0), (15, 0.0), (100, 10.0), (200, 10.0),
    )
    assert queue_length(world, LANE) == 3
    assert queue_length(World(build_grid(1, 1)), LANE) == 0


def test_effective_running_range_boundary():
    # v_free 10 m/s and 15 s actions: the effective range is exactly 150 m.
    world = place(World(build_grid(1, 1)), LANE, (140, 10.0))
    assert effective_running(world, LANE) == 1
    world = place(World(build_grid(1, 1)), LANE, (160, 10.0))
    assert effective_running(world, LANE) == 0
    world = place(World(build_grid(1, 1)), LANE, (150, 10.0))
    assert effective_running(world, LANE) == 1  # inclusive boundary
    world = place(World(build_grid(1, 1)), LANE, (140, 0.0))
    assert effective_running(world, LANE) == 0  # stopped never counts


def test_segment_counts_enumeration():
    net = build_grid(1, 1, lane_length=400.0)
    world = place(World(net), LANE, (10, 0.0), (110, 0.0), (350, 0.0))
    assert segment_counts(world, LANE) == (1, 1, 0, 1)


def test_segment_boundary_is_half_open():
    world = place(World(build_grid(1, 1)), LANE, (100.0, 0.0))
    assert segment_counts(world, LANE) == (0, 1, 0, 0)
    world = place(World(build_grid(1, 1)), LANE, (99.999, 0.0))
    assert segment_counts(world, LANE) == (1, 0, 0, 0)


def test_segments_beyond_lane_length_are_zero():
    # 300 m lane: the 300-400 m chunk must be zero no matter what.
    world = place(World(build_grid(1, 1)), LANE, (0, 0.0), (150, 0.0), (290, 0.0))
    assert segment_counts(world, LANE)[3] == 0
    # 150 m lane: chunks 2 and 3 start at or past the lane end.
    net = build_grid(1, 1, lane_length=150.0)
    lane = "N0>x0_0:through"
    world = place(World(net), lane, (10, 0.0), (149, 0.0))
    counts = segment_counts(world, lane)
    assert counts[2] == counts[3] == 0
    assert sum(counts) == 2


def test_reward_sums_all_incoming_lanes():
    net = build_grid(1, 1)
    world = World(net)
    assert reward(world, "x0_0") == 0.0
    place(world, net.incoming["x0_0"][0], (0, 0.0), (7.5, 0.0))
    place(world, net.incoming["x0_0"][11], (0, 0.0), (7.5, 0.0), (15, 0.0))
    assert reward(world, "x0_0") == -5.0


def test_observe_composes_field_wise():
    """observe() must agree with the single-feature functions everywhere."""
    rng = np.random.default_rng(5)
    for _ in range(10):
        net, schedule, commands, horizon = make_recipe(rng)
        world = World(net, schedule)
        by_time = {}
        for t, x, p in commands:
            by_time.setdefault(t, []).append((x, p))
        for k in range(horizon):
            for x, p in by_time.get(k, ()):
                world.set_phase(x, p)
            world.step()
        for x in net.intersections:
            obs = observe(world, x)
            assert obs.lane_ids == net.incoming[x]
            sig = world.signals[x]
            active = PHASE_LANE_SLOTS[sig.phase] if sig.clearance == 0.0 else ()
            for slot, lane_id in enumerate(obs.lane_ids):
                row = obs.lane_features[slot]
                assert row[0] == (1.0 if slot in active else 0.0)
                assert row[1] == len(world.lanes[lane_id].vehicles)
                assert row[2] == effective_running(world, lane_id)
                assert tuple(row[3:]) == segment_counts(world, lane_id)
                assert obs.queues[slot] == queue_length(world, lane_id)
                # Per-lane consistency bounds.
                assert row[2] + obs.queues[slot] <= row[1]
                assert sum(row[3:]) <= row[1]
            assert obs.reward == reward(world, x)
            assert obs.reward <= 0.0
            assert obs.flatten().shape == (STATE_DIM,)
            assert obs.active_phase == sig.phase


def test_observe_zeroes_phase_bits_during_clearance():
    net = build_grid(1, 1)
    world = World(net)
    obs = observe(world, "x0_0")
    slots = PHASE_LANE_SLOTS[0]
    assert [obs.lane_features[s, 0] for s in slots] == [1.0, 1.0]
    assert obs.lane_features[:, 0].sum() == 2.0
    world.set_phase("x0_0", 2)
    obs = observe(world, "x0_0")
    assert obs.lane_features[:, 0].sum() == 0.0  # all-red clearance
    for _ in range(5):
        world.step()
    obs = observe(world, "x0_0")
    assert [obs.lane_features[s, 0] for s in PHASE_LANE_SLOTS[2]] == [1.0, 1.0]


def test_observe_is_pure():
    net, schedule, commands, horizon = make_recipe(np.random.default_rng(9))
    world = World(net, schedule)
    for _ in range(horizon):
        world.step()
    a = observe(world, net.intersections[0])
    b = observe(world, net.intersections[0])
    assert np.array_equal(a.lane_features, b.lane_features)
    assert np.array_equal(a.queues, b.queues)


def test_phase_queue_uses_participating_lanes():
    net = build_grid(1, 1)
    world = World(net)
    # Phase A participates lanes at slots 1 (N through) and 7 (S through).
    place(world, net.incoming["x0_0"][1], (0, 0.0))
    place(world, net.incoming["x0_0"][7], (0, 0.0), (7.5, 0.0))
    obs = observe(world, "x0_0")
    assert obs.phase_queue(0) == 3
    assert obs.phase_queue(1) == 0


def test_observe_unknown_intersection():
    world = World(build_grid(1, 1))
    with pytest.raises(ConfigError):
        observe(world, "x5_5")


def test_lane_order_constant():
    assert LANE_ORDER[0] == ("N", "left")
    assert LANE_ORDER[1] == ("N", "through")
    assert LANE_ORDER[7] == ("S", "through")
    assert len(LANE_ORDER) == 12
