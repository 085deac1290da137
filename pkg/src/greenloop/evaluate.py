"""Episode runner and average-travel-time evaluation.

A test episode runs 3600 s with one policy decision per intersection every
15 s.  Average travel time is sum(exit - enter) / N over every vehicle
demanded during the episode; vehicles still in the network (or still
waiting to be injected) at the end contribute episode_end - enter_time.
The evaluation protocol runs several identical episodes and reports the
mean over the last five (the simulator is deterministic, so for a
deterministic policy these coincide -- kept for protocol fidelity).
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

from .features import T_ACTION_S, observe
from .policies import Policy
from .sim.network import RoadNetwork
from .sim.scenario import Scenario, build_schedule
from .sim.world import World

EPISODE_S = 3600.0
MEAN_LAST_EPISODES = 5


@dataclass(frozen=True)
class EpisodeResult:
    avg_travel_time: float
    vehicles_total: int
    vehicles_exited: int
    throughput: dict[str, int]  # stop-line crossings per intersection
    phase_log: tuple  # (t, intersection, old, new) phase changes
    trajectory: tuple | None  # (t, vehicle, lane, position) samples if recorded


def run_episode(
    network: RoadNetwork,
    schedule,
    policy: Policy,
    episode_s: float = EPISODE_S,
    t_action: float = T_ACTION_S,
    record_trajectory: bool = False,
) -> EpisodeResult:
    world = World(network, schedule, record_trajectory=record_trajectory)
    policy.reset()
    for t in range(int(episode_s)):
        if t % t_action == 0:
            for x in network.intersections:
                action = policy.decide(x, observe(world, x, t_action))
                world.set_phase(x, action)
        world.step()

    demanded = [v for v in world.all_vehicles if v.enter_time < episode_s]
    total_time = sum(
        (v.exit_time if v.exit_time is not None else episode_s) - v.enter_time
        for v in demanded
    )
    throughput = {
        x: sum(world.lanes[lid].crossings for lid in network.incoming[x])
        for x in network.intersections
    }
    return EpisodeResult(
        avg_travel_time=total_time / len(demanded) if demanded else 0.0,
        vehicles_total=len(demanded),
        vehicles_exited=world.exited,
        throughput=throughput,
        phase_log=tuple(world.phase_log),
        trajectory=tuple(world.trajectory) if record_trajectory else None,
    )


@dataclass(frozen=True)
class EvalReport:
    scenario: str
    policy_spec: str
    seed: int
    episode_results: tuple[EpisodeResult, ...]
    mean_travel_time: float  # over the last <=5 episodes

    @property
    def per_episode(self) -> tuple[float, ...]:
        return tuple(r.avg_travel_time for r in self.episode_results)


def evaluate_policy(
    scenario: Scenario,
    policy: Policy,
    policy_spec: str = "",
    episodes: int = 5,
    seed: int = 0,
    episode_s: float = EPISODE_S,
    t_action: float = T_ACTION_S,
) -> EvalReport:
    """Run the test protocol for one policy on one scenario."""
    network = scenario.build_network()
    schedule = build_schedule(scenario, network)
    results = tuple(
        run_episode(network, schedule, policy, episode_s, t_action)
        for _ in range(episodes)
    )
    tail = results[-MEAN_LAST_EPISODES:]
    mean_tt = sum(r.avg_travel_time for r in tail) / len(tail)
    return EvalReport(
        scenario=scenario.name,
        policy_spec=policy_spec,
        seed=seed,
        episode_results=results,
        mean_travel_time=mean_tt,
    )


def write_eval_csv(path, reports) -> None:
    """Tidy CSV: one row per per-episode metric plus the summary mean."""
    if isinstance(reports, EvalReport):
        reports = [reports]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["scenario", "policy", "seed", "record", "episode", "intersection", "value"]
        )
        for rep in reports:
            base = [rep.scenario, rep.policy_spec, rep.seed]
            for ep, result in enumerate(rep.episode_results):
                writer.writerow(
                    base + ["episode_att", ep, "", repr(result.avg_travel_time)]
                )
                for x in sorted(result.throughput):
                    writer.writerow(
                        base + ["throughput", ep, x, result.throughput[x]]
                    )
            writer.writerow(
                base + ["mean_last5_att", "", "", repr(rep.mean_travel_time)]
            )
