"""Offline dataset collection, storage, and conservative Q-learning."""
from .collect import (
    BEHAVIORS,
    CollectConfig,
    collect,
    collect_cycle,
    collect_expert_proxy,
    collect_random,
)
from .dataset import OfflineDataset, Transition
from .trainer import (
    LossRecord,
    TrainerConfig,
    cql_loss,
    train,
    write_loss_log,
)

__all__ = [
    "BEHAVIORS",
    "CollectConfig",
    "LossRecord",
    "OfflineDataset",
    "TrainerConfig",
    "Transition",
    "cql_loss",
    "collect",
    "collect_cycle",
    "collect_expert_proxy",
    "collect_random",
    "train",
    "write_loss_log",
]
