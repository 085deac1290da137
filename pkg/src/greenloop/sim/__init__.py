"""Deterministic point-queue grid traffic simulation."""
from .network import (
    APPROACHES,
    LANE_ORDER,
    MOVEMENTS,
    N_PHASES,
    PHASE_LANE_SLOTS,
    PHASE_MOVEMENTS,
    PHASE_NAMES,
    LaneSpec,
    RoadNetwork,
    build_grid,
)
from .scenario import (
    Flow,
    Scenario,
    build_schedule,
    entry_lane_id,
    load_scenario,
    resolve_route,
    save_scenario,
    scenario_from_dict,
    scenario_to_dict,
)
from .world import (
    DT,
    RED_CLEARANCE_S,
    VEHICLE_GAP,
    SignalState,
    Vehicle,
    World,
    lane_capacity,
    write_trajectory_csv,
)

__all__ = [
    "APPROACHES",
    "DT",
    "LANE_ORDER",
    "MOVEMENTS",
    "N_PHASES",
    "PHASE_LANE_SLOTS",
    "PHASE_MOVEMENTS",
    "PHASE_NAMES",
    "RED_CLEARANCE_S",
    "VEHICLE_GAP",
    "Flow",
    "LaneSpec",
    "RoadNetwork",
    "Scenario",
    "SignalState",
    "Vehicle",
    "World",
    "build_grid",
    "build_schedule",
    "entry_lane_id",
    "lane_capacity",
    "load_scenario",
    "resolve_route",
    "save_scenario",
    "scenario_from_dict",
    "scenario_to_dict",
    "write_trajectory_csv",
]
