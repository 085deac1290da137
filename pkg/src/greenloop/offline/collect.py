"""Offline data collection with cyclical, random, and expert behaviors.

The collection protocol runs full episodes (default 3600 s) of behavior
control at a 15 s decision cadence, recording one transition per decision
per intersection -- exactly 240 per intersection per episode at the
defaults; any surplus beyond the cap is discarded.

Behaviors:

* ``cycle``  -- fixed rotation A, B, C, D ... in which every 20th decision
  (per intersection, 1-based) is replaced by a uniformly random phase;
  the rotation resumes from the phase actually applied;
* ``expert`` -- greedy max-queue control with the same every-20th random
  replacement;
* ``random`` -- a uniformly random phase at every decision.

Each (scenario, episode, intersection) triple draws its random phases
from its own seeded stream, so a recorded episode can be replayed
exactly from the root seed.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError
from ..features import observe
from ..sim.network import N_PHASES
from ..sim.scenario import Scenario, build_schedule
from ..sim.world import World
from .dataset import OfflineDataset, Transition

BEHAVIORS = ("cycle", "random", "expert")


@dataclass(frozen=True)
class CollectConfig:
    episodes: int = 10
    episode_s: float = 3600.0
    t_action: float = 15.0
    randomize_every: int = 20  # every k-th decision is random (cycle/expert)

    @property
    def decisions_per_episode(self) -> int:
        return int(self.episode_s // self.t_action)


def _max_queue_action(obs) -> int:
    return int(np.argmax([obs.phase_queue(p) for p in range(N_PHASES)]))


def _intersection_rng(seed: int, scenario_idx: int, episode: int, x_idx: int):
    return np.random.default_rng(
        np.random.SeedSequence([seed, scenario_idx, episode, x_idx])
    )


def collect(
    scenarios,
    behavior: str,
    seed: int,
    config: CollectConfig = CollectConfig(),
) -> OfflineDataset:
    """Run behavior episodes over the scenarios and log all transitions."""
    if behavior not in BEHAVIORS:
        raise ConfigError(f"behavior must be one of {BEHAVIORS}, got {behavior!r}")
    if config.episodes < 1:
        raise ConfigError("episodes must be >= 1")
    scenarios = list(scenarios)
    if not scenarios:
        raise ConfigError("at least one scenario is required")

    transitions: list[Transition] = []
    for si, scenario in enumerate(scenarios):
        network = scenario.build_network()
        schedule = build_schedule(scenario, network)
        xs = network.intersections
        for ep in range(config.episodes):
            rngs = {
                x: _intersection_rng(seed, si, ep, xi) for xi, x in enumerate(xs)
            }
            world = World(network, schedule)
            cursor = {x: 0 for x in xs}  # next phase of the fixed rotation
            decisions = {x: 0 for x in xs}
            open_step: dict[str, tuple[np.ndarray, int, int]] = {}
            counts = {x: 0 for x in xs}

            def flush(x: str, obs) -> None:
                if x not in open_step:
                    return
                s, a, k = open_step.pop(x)
                if counts[x] >= config.decisions_per_episode:
                    return  # surplus beyond the per-episode cap is discarded
                transitions.append(
                    Transition(
                        s=s,
                        a=a,
                        r=obs.reward,
                        s_next=obs.flatten(),
                        scenario_id=scenario.name,
                        intersection_id=x,
                        episode=ep,
                        step=k,
                    )
                )
                counts[x] += 1

            for t in range(int(config.episode_s)):
                if t % config.t_action == 0:
                    for x in xs:
                        obs = observe(world, x, config.t_action)
                        flush(x, obs)
                        decisions[x] += 1
                        if behavior == "random":
                            action = int(rngs[x].integers(0, N_PHASES))
                        elif decisions[x] % config.randomize_every == 0:
                            action = int(rngs[x].integers(0, N_PHASES))
                        elif behavior == "cycle":
                            action = cursor[x]
                        else:  # expert
                            action = _max_queue_action(obs)
                        cursor[x] = (action + 1) % N_PHASES
                        open_step[x] = (obs.flatten(), action, decisions[x] - 1)
                        world.set_phase(x, action)
                world.step()
            for x in xs:
                flush(x, observe(world, x, config.t_action))

    return OfflineDataset(transitions, provenance=behavior)


def collect_cycle(scenarios, seed: int, config: CollectConfig = CollectConfig()):
    """Cyclical behavior with every-20th random replacement (the default)."""
    return collect(scenarios, "cycle", seed, config)


def collect_random(scenarios, seed: int, config: CollectConfig = CollectConfig()):
    return collect(scenarios, "random", seed, config)


def collect_expert_proxy(scenarios, seed: int, config: CollectConfig = CollectConfig()):
    """Max-queue greedy behavior standing in for a strong teacher policy."""
    return collect(scenarios, "expert", seed, config)
