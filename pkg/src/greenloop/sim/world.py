"""Deterministic point-queue traffic dynamics on a RoadNetwork.

One tick advances simulated time by dt = 1 s and processes, in order:

 1. arrival injection -- scheduled vehicles enter their first lane at
    position 0 when there is entry space, otherwise they wait in a per-lane
    pending queue (schedule order preserved; enter_time stays the scheduled
    time for travel-time accounting);
 2. movement -- front-to-back per lane, each vehicle advances
    min(v_free * dt, gap), where the gap is bounded by the stop line or by
    7.5 m behind its (already moved) leader;
 3. discharge -- a lane whose movement is permitted accrues sat_rate * dt
    of discharge credit (credit resets to zero while not permitted); while
    credit >= 1 the head vehicle crosses the stop line if it stands exactly
    at it, entering the next route lane when that lane has entry space, or
    leaving the network after its final lane.  A head blocked by a full
    downstream lane stays at the stop line and retries next tick;
 4. signal bookkeeping -- red clearance decrements, phase_elapsed grows.

A movement is permitted iff it is a right turn (never signalised) or the
lane belongs to the active phase and no red clearance is running.  Any
phase change inserts a fresh 5 s all-red clearance, restarting the clock if
one is already running.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from ..errors import ConfigError
from .network import N_PHASES, PHASE_MOVEMENTS, RoadNetwork

DT = 1.0
VEHICLE_GAP = 7.5  # metres per stopped vehicle
RED_CLEARANCE_S = 5.0


@dataclass
class Vehicle:
    vid: int
    route: tuple[str, ...]
    enter_time: float
    leg: int = 0  # index of the current lane within route
    position: float = 0.0  # metres from lane entry; stop line = lane length
    speed: float = 0.0  # metres advanced during the last tick / dt
    exit_time: float | None = None


@dataclass
class SignalState:
    phase: int = 0
    clearance: float = 0.0  # remaining all-red time
    elapsed: float = 0.0  # time since the last phase change


@dataclass
class _LaneState:
    vehicles: list[Vehicle] = field(default_factory=list)  # index 0 nearest stop line
    credit: float = 0.0
    crossings: int = 0  # vehicles that crossed this stop line so far


def lane_capacity(length: float) -> int:
    """Maximum stopped vehicles a lane can hold (7.5 m per slot)."""
    return int(length // VEHICLE_GAP)


class World:
    """Mutable simulation state over an immutable RoadNetwork."""

    def __init__(
        self,
        network: RoadNetwork,
        schedule=(),
        record_trajectory: bool = False,
        record_crossings: bool = False,
    ):
        self.network = network
        self.time = 0.0
        self.signals = {x: SignalState() for x in network.intersections}
        self.lanes: dict[str, _LaneState] = {lid: _LaneState() for lid in network.lanes}
        self._lane_order = tuple(network.lanes)
        self._capacity = {
            lid: lane_capacity(spec.length) for lid, spec in network.lanes.items()
        }
        self._permitted_slots = [
            frozenset(PHASE_MOVEMENTS[p]) for p in range(N_PHASES)
        ]
        self.injected = 0
        self.exited = 0
        self.all_vehicles: list[Vehicle] = []
        self._arrivals: deque[Vehicle] = deque()
        self._pending: dict[str, deque[Vehicle]] = {}
        self.phase_log: list[tuple[float, str, int, int]] = []
        self.trajectory: list[tuple[float, int, str, float]] | None = (
            [] if record_trajectory else None
        )
        self.crossing_log: list[tuple[float, str]] | None = (
            [] if record_crossings else None
        )
        self.schedule_arrivals(schedule)

    # -- demand ------------------------------------------------------------

    def schedule_arrivals(self, schedule) -> None:
        """Register (time, route) arrivals; routes are tuples of lane ids.

        Consecutive route lanes must be linked by the network adjacency.
        Arrivals are kept in (time, registration order) and must not
        predate the current simulated time.
        """
        items = list(schedule)
        for t, route in items:
            if not route:
                raise ConfigError("empty route in arrival schedule")
            for lid in route:
                if self.network.lane(lid).to_intersection is None:
                    raise ConfigError(f"route lane {lid!r} is an exit-road lane")
            for a, b in zip(route, route[1:]):
                if self.network.lanes[a].downstream != b:
                    raise ConfigError(f"route hop {a!r} -> {b!r} is not adjacent")
            if t < self.time:
                raise ConfigError(f"arrival at t={t} is in the past")
        base = len(self.all_vehicles)
        vehicles = [
            Vehicle(vid=base + i, route=tuple(route), enter_time=float(t))
            for i, (t, route) in enumerate(items)
        ]
        self.all_vehicles.extend(vehicles)
        merged = sorted(
            list(self._arrivals) + vehicles, key=lambda v: (v.enter_time, v.vid)
        )
        self._arrivals = deque(merged)

    def _has_entry_space(self, lane_id: str) -> bool:
        st = self.lanes[lane_id]
        if len(st.vehicles) >= self._capacity[lane_id]:
            return False
        return not st.vehicles or st.vehicles[-1].position >= VEHICLE_GAP

    def _inject(self) -> None:
        while self._arrivals and self._arrivals[0].enter_time <= self.time:
            v = self._arrivals.popleft()
            self._pending.setdefault(v.route[0], deque()).append(v)
        for lane_id in sorted(self._pending):
            q = self._pending[lane_id]
            while q and self._has_entry_space(lane_id):
                v = q.popleft()
                v.position = 0.0
                self.lanes[lane_id].vehicles.append(v)
                self.injected += 1
            if not q:
                del self._pending[lane_id]

    # -- signals -----------------------------------------------------------

    def set_phase(self, intersection_id: str, phase: int) -> None:
        """Activate a phase; a change inserts (or restarts) 5 s of all-red."""
        if not 0 <= phase < N_PHASES:
            raise ConfigError(f"phase must be in 0..{N_PHASES - 1}, got {phase}")
        try:
            sig = self.signals[intersection_id]
        except KeyError:
            raise ConfigError(f"unknown intersection {intersection_id!r}") from None
        if phase != sig.phase:
            self.phase_log.append((self.time, intersection_id, sig.phase, phase))
            sig.phase = phase
            sig.clearance = RED_CLEARANCE_S
            sig.elapsed = 0.0

    def _is_permitted(self, spec) -> bool:
        if spec.to_intersection is None:
            return False
        if spec.movement == "right":
            return True
        sig = self.signals[spec.to_intersection]
        if sig.clearance > 0.0:
            return False
        return (spec.approach, spec.movement) in self._permitted_slots[sig.phase]

    # -- dynamics ----------------------------------------------------------

    def step(self, dt: float = DT) -> None:
        if dt <= 0:
            raise ConfigError(f"dt must be positive, got {dt}")
        self._inject()

        specs = self.network.lanes
        for lane_id in self._lane_order:
            vehicles = self.lanes[lane_id].vehicles
            if not vehicles:
                continue
            spec = specs[lane_id]
            advance = spec.v_free * dt
            limit = spec.length
            for v in vehicles:
                target = v.position + advance
                if target > limit:
                    target = limit
                v.speed = (target - v.position) / dt
                v.position = target
                limit = target - VEHICLE_GAP

        t_end = self.time + dt
        for lane_id in self._lane_order:
            st = self.lanes[lane_id]
            spec = specs[lane_id]
            if not self._is_permitted(spec):
                st.credit = 0.0
                continue
            st.credit += spec.sat_rate * dt
            while st.credit >= 1.0 and st.vehicles:
                head = st.vehicles[0]
                if head.position < spec.length:
                    break
                if head.leg == len(head.route) - 1:
                    st.vehicles.pop(0)
                    head.exit_time = t_end
                    self.exited += 1
                else:
                    nxt_id = head.route[head.leg + 1]
                    if not self._has_entry_space(nxt_id):
                        break  # retry next tick; credit is kept
                    st.vehicles.pop(0)
                    head.leg += 1
                    head.position = 0.0
                    head.speed = specs[nxt_id].v_free
                    self.lanes[nxt_id].vehicles.append(head)
                st.credit -= 1.0
                st.crossings += 1
                if self.crossing_log is not None:
                    self.crossing_log.append((t_end, lane_id))

        for sig in self.signals.values():
            if sig.clearance > 0.0:
                sig.clearance = max(0.0, sig.clearance - dt)
            sig.elapsed += dt

        self.time = t_end
        if self.trajectory is not None:
            for lane_id in self._lane_order:
                for v in self.lanes[lane_id].vehicles:
                    self.trajectory.append((self.time, v.vid, lane_id, v.position))

    # -- accounting --------------------------------------------------------

    def in_network_count(self) -> int:
        return sum(len(st.vehicles) for st in self.lanes.values())

    def pending_count(self) -> int:
        return len(self._arrivals) + sum(len(q) for q in self._pending.values())


def write_trajectory_csv(path, rows) -> None:
    """Write trajectory samples as `t,vehicle_id,lane_id,position` lines."""
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "vehicle_id", "lane_id", "position"])
        for t, vid, lane_id, pos in rows:
            writer.writerow([repr(float(t)), vid, lane_id, repr(float(pos))])
