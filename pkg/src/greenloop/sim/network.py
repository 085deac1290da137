"""Grid road-network topology.

Intersections sit on a rows x cols lattice; row 0 is the northern edge and
column 0 the western edge.  Every directed road carries three lanes
(left / through / right, named by the turning movement its vehicles perform
at the downstream intersection).  Boundary roads connect the lattice to
virtual edge nodes: inbound boundary roads are the entry lanes where demand
is injected, outbound ones exist only as topology (vehicles leave the
network at the final stop line).

Signal phases (indices 0..3, printed A..D):

    A: north/south through    B: east/west through
    C: north/south left       D: east/west left

Right turns are never signalised.
"""
from __future__ import annotations

from dataclasses import dataclass

from ..errors import ConfigError

APPROACHES = ("N", "E", "S", "W")
MOVEMENTS = ("left", "through", "right")

#: Fixed per-intersection lane ordering used for observations and dataset
#: state vectors: (N, E, S, W) x (left, through, right).
LANE_ORDER = tuple((a, m) for a in APPROACHES for m in MOVEMENTS)

PHASE_NAMES = ("A", "B", "C", "D")
N_PHASES = 4

#: (approach, movement) pairs served by each phase.
PHASE_MOVEMENTS = (
    (("N", "through"), ("S", "through")),
    (("E", "through"), ("W", "through")),
    (("N", "left"), ("S", "left")),
    (("E", "left"), ("W", "left")),
)

#: Indices into LANE_ORDER of the two participating lanes of each phase.
PHASE_LANE_SLOTS = tuple(
    tuple(LANE_ORDER.index(pair) for pair in pairs) for pairs in PHASE_MOVEMENTS
)

# Compass heading of travel -> heading after each movement (right-hand traffic).
_TURN = {
    "S": {"left": "E", "through": "S", "right": "W"},
    "N": {"left": "W", "through": "N", "right": "E"},
    "E": {"left": "N", "through": "E", "right": "S"},
    "W": {"left": "S", "through": "W", "right": "N"},
}
# Heading -> approach side it arrives at (traffic heading south comes from the north).
_ARRIVES_AT = {"S": "N", "N": "S", "E": "W", "W": "E"}
_DELTA = {"S": (1, 0), "N": (-1, 0), "E": (0, 1), "W": (0, -1)}


@dataclass(frozen=True)
class LaneSpec:
    """Immutable description of one directed lane."""

    id: str
    road_id: str
    movement: str
    length: float
    v_free: float
    sat_rate: float
    from_node: str
    to_node: str
    to_intersection: str | None  # None for lanes ending at a boundary node
    approach: str | None  # approach side at to_intersection
    downstream: str | None  # lane fed by this movement; None for exit lanes

    @property
    def is_entry(self) -> bool:
        return not self.from_node.startswith("x")


@dataclass(frozen=True)
class RoadNetwork:
    rows: int
    cols: int
    lanes: dict[str, LaneSpec]
    intersections: tuple[str, ...]
    incoming: dict[str, tuple[str, ...]]  # intersection -> 12 lane ids in LANE_ORDER
    entry_lanes: tuple[str, ...]

    def lane(self, lane_id: str) -> LaneSpec:
        try:
            return self.lanes[lane_id]
        except KeyError:
            raise ConfigError(f"unknown lane {lane_id!r}") from None

    def phase_lanes(self, intersection_id: str, phase: int) -> tuple[str, str]:
        """The two participating incoming lanes of `phase` at an intersection."""
        lanes = self.incoming[intersection_id]
        i, j = PHASE_LANE_SLOTS[phase]
        return lanes[i], lanes[j]


def _node_id(node: tuple) -> str:
    """Interior nodes are (r, c) tuples, boundary nodes ('N'|'E'|'S'|'W', index)."""
    if isinstance(node[0], int):
        return f"x{node[0]}_{node[1]}"
    return f"{node[0]}{node[1]}"


def _neighbour(r: int, c: int, heading: str, rows: int, cols: int) -> tuple:
    dr, dc = _DELTA[heading]
    nr, nc = r + dr, c + dc
    if 0 <= nr < rows and 0 <= nc < cols:
        return (nr, nc)
    # Off-grid: the matching boundary node.
    if heading in ("N", "S"):
        return (heading, c)
    return (heading, r)


def build_grid(
    rows: int,
    cols: int,
    lane_length: float = 300.0,
    v_free: float = 10.0,
    sat_rate: float = 0.5,
) -> RoadNetwork:
    """Build a rows x cols grid network with uniform lane parameters."""
    if rows < 1 or cols < 1:
        raise ConfigError(f"grid must be at least 1x1, got {rows}x{cols}")
    if lane_length <= 0 or v_free <= 0 or sat_rate <= 0:
        raise ConfigError(
            "lane_length, v_free and sat_rate must be positive "
            f"(got {lane_length}, {v_free}, {sat_rate})"
        )

    # Enumerate every directed road as (from_node, to_node, heading of travel).
    roads: list[tuple[tuple, tuple, str]] = []
    for c in range(cols):
        chain = [("N", c)] + [(r, c) for r in range(rows)] + [("S", c)]
        for u, v in zip(chain, chain[1:]):
            roads.append((u, v, "S"))
            roads.append((v, u, "N"))
    for r in range(rows):
        chain = [("W", r)] + [(r, c) for c in range(cols)] + [("E", r)]
        for u, v in zip(chain, chain[1:]):
            roads.append((u, v, "E"))
            roads.append((v, u, "W"))

    lanes: dict[str, LaneSpec] = {}
    road_heading: dict[str, str] = {}
    for u, v, heading in roads:
        u_id, v_id = _node_id(u), _node_id(v)
        road_id = f"{u_id}>{v_id}"
        road_heading[road_id] = heading
        interior = isinstance(v[0], int)
        for movement in MOVEMENTS:
            lane_id = f"{road_id}:{movement}"
            if interior:
                r, c = v
                h2 = _TURN[heading][movement]
                w = _neighbour(r, c, h2, rows, cols)
                downstream = f"{v_id}>{_node_id(w)}:{movement}"
                to_x, approach = v_id, _ARRIVES_AT[heading]
            else:
                downstream, to_x, approach = None, None, None
            lanes[lane_id] = LaneSpec(
                id=lane_id,
                road_id=road_id,
                movement=movement,
                length=float(lane_length),
                v_free=float(v_free),
                sat_rate=float(sat_rate),
                from_node=u_id,
                to_node=v_id,
                to_intersection=to_x,
                approach=approach,
                downstream=downstream,
            )

    lanes = {k: lanes[k] for k in sorted(lanes)}

    intersections = tuple(
        f"x{r}_{c}" for r in range(rows) for c in range(cols)
    )
    by_slot: dict[str, dict[tuple[str, str], str]] = {x: {} for x in intersections}
    for spec in lanes.values():
        if spec.to_intersection is not None:
            by_slot[spec.to_intersection][(spec.approach, spec.movement)] = spec.id
    incoming = {
        x: tuple(slots[key] for key in LANE_ORDER) for x, slots in by_slot.items()
    }

    entry = tuple(sorted(l.id for l in lanes.values() if l.is_entry))
    return RoadNetwork(
        rows=rows,
        cols=cols,
        lanes=lanes,
        intersections=intersections,
        incoming=incoming,
        entry_lanes=entry,
    )
