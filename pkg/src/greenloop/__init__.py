"""greenloop: desk-scale offline RL for cyclical traffic-signal control.

Pipeline: generate grid scenarios -> run a deterministic point-queue
simulator under cyclical behavior control to collect offline transition
data -> train an attention Q-network with a conservative offline loss ->
deploy the greedy policy, optionally constrained to the fixed phase
rotation -> score everything by average travel time.
"""
from .errors import ConfigError, TrainingDiverged
from .evaluate import EpisodeResult, EvalReport, evaluate_policy, run_episode
from .features import IntersectionObservation, observe, reward
from .neural import Adam, QNetwork, Tensor
from .offline import (
    CollectConfig,
    OfflineDataset,
    TrainerConfig,
    Transition,
    collect,
    collect_cycle,
    collect_expert_proxy,
    collect_random,
    cql_loss,
    train,
)
from .policies import (
    CyclicalWrapper,
    FixedTimePolicy,
    GreedyQPolicy,
    MaxQueuePolicy,
    make_policy,
)
from .scenarios import desk_suite, make_scenario
from .sim import (
    RoadNetwork,
    Scenario,
    World,
    build_grid,
    build_schedule,
    load_scenario,
    save_scenario,
)

__version__ = "0.1.0"

__all__ = [
    "Adam",
    "CollectConfig",
    "ConfigError",
    "CyclicalWrapper",
    "EpisodeResult",
    "EvalReport",
    "FixedTimePolicy",
    "GreedyQPolicy",
    "IntersectionObservation",
    "MaxQueuePolicy",
    "OfflineDataset",
    "QNetwork",
    "RoadNetwork",
    "Scenario",
    "Tensor",
    "TrainerConfig",
    "TrainingDiverged",
    "Transition",
    "World",
    "build_grid",
    "build_schedule",
    "collect",
    "collect_cycle",
    "collect_expert_proxy",
    "collect_random",
    "cql_loss",
    "desk_suite",
    "evaluate_policy",
    "load_scenario",
    "make_policy",
    "make_scenario",
    "observe",
    "reward",
    "run_episode",
    "save_scenario",
    "train",
]
