"""Scenario files: JSON description of a grid, lane parameters, and demand.

Schema (version 1)::

    {
      "schema": 1,
      "name": "2x2-peak",                    # optional; defaults to file stem
      "grid": {"rows": 2, "cols": 2},
      "lanes": {"length_m": 300.0, "v_free_mps": 10.0, "sat_rate_vps": 0.5},
      "flows": [
        {"start_s": 0, "end_s": 3600, "interval_s": 8.0, "route": "N0:through"},
        ...
      ]
    }

A flow emits one vehicle at start_s, start_s + interval_s, ... while the
arrival time stays strictly below end_s.  The route spec names an entry
road by boundary side and index (N/S sides are indexed by column, E/W by
row) plus the movement lane; the full lane route is then determined by the
network adjacency (a vehicle keeps its movement for the whole trip) and
ends on the last lane before leaving the grid.
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass

from ..errors import ConfigError
from .network import MOVEMENTS, RoadNetwork, build_grid

SCHEMA_VERSION = 1

_ROUTE_RE = re.compile(r"^([NESW])(\d+):(left|through|right)$")


@dataclass(frozen=True)
class Flow:
    start_s: float
    end_s: float
    interval_s: float
    route: str

    def arrival_times(self) -> list[float]:
        if self.interval_s <= 0:
            raise ConfigError(f"interval_s must be positive, got {self.interval_s}")
        n = max(0, math.ceil((self.end_s - self.start_s) / self.interval_s))
        times = [self.start_s + k * self.interval_s for k in range(n)]
        return [t for t in times if t < self.end_s]


@dataclass(frozen=True)
class Scenario:
    name: str
    rows: int
    cols: int
    lane_length: float
    v_free: float
    sat_rate: float
    flows: tuple[Flow, ...]

    def build_network(self) -> RoadNetwork:
        return build_grid(
            self.rows, self.cols, self.lane_length, self.v_free, self.sat_rate
        )


def entry_lane_id(network: RoadNetwork, route_spec: str) -> str:
    """Resolve a 'SIDE<idx>:<movement>' route spec to its entry lane id."""
    m = _ROUTE_RE.match(route_spec)
    if not m:
        raise ConfigError(
            f"bad route spec {route_spec!r} (expected e.g. 'N0:through')"
        )
    side, idx, movement = m.group(1), int(m.group(2)), m.group(3)
    if side in ("N", "S"):
        if idx >= network.cols:
            raise ConfigError(f"route {route_spec!r}: column {idx} out of range")
        row = 0 if side == "N" else network.rows - 1
        target = f"x{row}_{idx}"
    else:
        if idx >= network.rows:
            raise ConfigError(f"route {route_spec!r}: row {idx} out of range")
        col = 0 if side == "W" else network.cols - 1
        target = f"x{idx}_{col}"
    return f"{side}{idx}>{target}:{movement}"


def resolve_route(network: RoadNetwork, route_spec: str) -> tuple[str, ...]:
    """Expand an entry route spec into the full lane sequence until exit."""
    spec = network.lane(entry_lane_id(network, route_spec))
    lanes = []
    cap = 4 * network.rows * network.cols + 4
    while True:
        lanes.append(spec.id)
        if len(lanes) > cap:
            raise ConfigError(f"route {route_spec!r} does not leave the grid")
        nxt = network.lanes[spec.downstream]
        if nxt.to_intersection is None:
            return tuple(lanes)
        spec = nxt


def build_schedule(
    scenario: Scenario, network: RoadNetwork
) -> list[tuple[float, tuple[str, ...]]]:
    """Expand flows into a deterministic (time, route) arrival list.

    Arrivals are ordered by time, ties broken by flow declaration order.
    """
    routes = {f.route: resolve_route(network, f.route) for f in scenario.flows}
    arrivals = []
    for fi, flow in enumerate(scenario.flows):
        route = routes[flow.route]
        for t in flow.arrival_times():
            arrivals.append((t, fi, route))
    arrivals.sort(key=lambda a: (a[0], a[1]))
    return [(t, route) for t, _, route in arrivals]


# -- serialisation ----------------------------------------------------------


def scenario_to_dict(scenario: Scenario) -> dict:
    return {
        "schema": SCHEMA_VERSION,
        "name": scenario.name,
        "grid": {"rows": scenario.rows, "cols": scenario.cols},
        "lanes": {
            "length_m": scenario.lane_length,
            "v_free_mps": scenario.v_free,
            "sat_rate_vps": scenario.sat_rate,
        },
        "flows": [
            {
                "start_s": f.start_s,
                "end_s": f.end_s,
                "interval_s": f.interval_s,
                "route": f.route,
            }
            for f in scenario.flows
        ],
    }


def _require(d: dict, key: str, where: str):
    if key not in d:
        raise ConfigError(f"scenario {where} is missing {key!r}")
    return d[key]


def scenario_from_dict(data: dict, default_name: str = "scenario") -> Scenario:
    if not isinstance(data, dict):
        raise ConfigError("scenario file must contain a JSON object")
    schema = _require(data, "schema", "file")
    if schema != SCHEMA_VERSION:
        raise ConfigError(f"unsupported scenario schema {schema!r}")
    grid = _require(data, "grid", "file")
    lanes = _require(data, "lanes", "file")
    flows_raw = _require(data, "flows", "file")
    flows = tuple(
        Flow(
            start_s=float(_require(f, "start_s", f"flow {i}")),
            end_s=float(_require(f, "end_s", f"flow {i}")),
            interval_s=float(_require(f, "interval_s", f"flow {i}")),
            route=str(_require(f, "route", f"flow {i}")),
        )
        for i, f in enumerate(flows_raw)
    )
    scenario = Scenario(
        name=str(data.get("name", default_name)),
        rows=int(_require(grid, "rows", "grid")),
        cols=int(_require(grid, "cols", "grid")),
        lane_length=float(_require(lanes, "length_m", "lanes")),
        v_free=float(_require(lanes, "v_free_mps", "lanes")),
        sat_rate=float(_require(lanes, "sat_rate_vps", "lanes")),
        flows=flows,
    )
    # Validate grid + route specs eagerly so config errors surface here.
    network = scenario.build_network()
    for f in flows:
        resolve_route(network, f.route)
        if f.end_s < f.start_s:
            raise ConfigError(f"flow {f.route!r}: end_s precedes start_s")
    return scenario


def load_scenario(path) -> Scenario:
    from pathlib import Path

    p = Path(path)
    if not p.exists():
        raise ConfigError(f"scenario file not found: {p}")
    try:
        data = json.loads(p.read_text())
    except json.JSONDecodeError as e:
        raise ConfigError(f"scenario file {p} is not valid JSON: {e}") from None
    return scenario_from_dict(data, default_name=p.stem)


def save_scenario(path, scenario: Scenario) -> None:
    """Write scenario JSON; same scenario always produces identical bytes."""
    from pathlib import Path

    text = json.dumps(scenario_to_dict(scenario), sort_keys=True, indent=2) + "\n"
    Path(path).write_text(text)
