"""Signal-control policies queried once per 15 s decision per intersection.

All policies map an IntersectionObservation to a phase index 0..3 and are
reset between episodes.  The cyclical wrapper constrains any base policy
to the fixed rotation A -> B -> C -> D -> A: when the base proposes the
current phase it is kept, otherwise the wrapper advances exactly one step
along the rotation, whatever phase the base asked for.
"""
from __future__ import annotations

from typing import Protocol

import numpy as np

from .errors import ConfigError
from .features import IntersectionObservation, T_ACTION_S
from .neural.network import QNetwork
from .sim.network import N_PHASES


class Policy(Protocol):
    def decide(self, intersection_id: str, obs: IntersectionObservation) -> int:
        ...

    def reset(self) -> None:
        ...


class FixedTimePolicy:
    """Cycle A, B, C, D with per-phase durations (multiples of 15 s)."""

    def __init__(self, split=(15, 15, 15, 15), t_action: float = T_ACTION_S):
        if len(split) != N_PHASES:
            raise ConfigError(f"split needs {N_PHASES} durations, got {len(split)}")
        sequence = []
        for phase, duration in enumerate(split):
            steps = duration / t_action
            if duration <= 0 or steps != int(steps):
                raise ConfigError(
                    f"phase duration {duration} is not a positive multiple "
                    f"of the {t_action} s action duration"
                )
            sequence.extend([phase] * int(steps))
        self.split = tuple(split)
        self._sequence = tuple(sequence)
        self._ticks: dict[str, int] = {}

    def decide(self, intersection_id: str, obs: IntersectionObservation) -> int:
        k = self._ticks.get(intersection_id, 0)
        self._ticks[intersection_id] = k + 1
        return self._sequence[k % len(self._sequence)]

    def reset(self) -> None:
        self._ticks.clear()


class MaxQueuePolicy:
    """Greedy phase with the largest participating-lane queue (ties: lowest)."""

    def decide(self, intersection_id: str, obs: IntersectionObservation) -> int:
        return int(np.argmax([obs.phase_queue(p) for p in range(N_PHASES)]))

    def reset(self) -> None:
        pass


class GreedyQPolicy:
    """Argmax over the Q-network's phase scores (ties: lowest index)."""

    def __init__(self, net: QNetwork):
        self.net = net

    def decide(self, intersection_id: str, obs: IntersectionObservation) -> int:
        return self.net.greedy_action(obs.flatten())

    def reset(self) -> None:
        pass


class CyclicalWrapper:
    """Constrain a base policy to the fixed phase rotation.

    Holds the current phase when the base proposes it; otherwise advances
    exactly one rotation step per decision, so every phase change follows
    the cycle and any phase is reached within at most three changes.
    """

    def __init__(self, base: Policy):
        self.base = base
        self._current: dict[str, int] = {}

    def decide(self, intersection_id: str, obs: IntersectionObservation) -> int:
        proposed = self.base.decide(intersection_id, obs)
        current = self._current.get(intersection_id, 0)
        if proposed != current:
            current = (current + 1) % N_PHASES
        self._current[intersection_id] = current
        return current

    def reset(self) -> None:
        self._current.clear()
        self.base.reset()


def make_policy(spec: str, net: QNetwork | None = None) -> Policy:
    """Build a policy from a CLI spec like 'max_queue' or 'greedy+cyclic'."""
    base_spec, wrapped = spec, False
    if spec.endswith("+cyclic"):
        base_spec, wrapped = spec[: -len("+cyclic")], True
    if base_spec == "fixed_time":
        base: Policy = FixedTimePolicy()
    elif base_spec == "max_queue":
        base = MaxQueuePolicy()
    elif base_spec == "greedy":
        if net is None:
            raise ConfigError(
                "policy 'greedy' needs a trained checkpoint (--checkpoint)"
            )
        base = GreedyQPolicy(net)
    else:
        raise ConfigError(
            f"unknown policy {spec!r} (expected fixed_time, max_queue, "
            f"greedy, optionally with a +cyclic suffix)"
        )
    return CyclicalWrapper(base) if wrapped else base
