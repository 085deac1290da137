"""Conservative offline Q-learning on collected transition datasets.

Loss over a batch B::

    alpha * mean_B[ logsumexp_a Q(s, a) - Q(s, a_data) ]
      + 0.5 * mean_B[ (Q(s, a_data) - (r + gamma * max_a' Q_target(s', a')))^2 ]

with a single shared parameter set across intersections, a hard-copied
target network, Adam updates, and uniform minibatch sampling with
replacement.  Training never touches the simulator.  A non-finite loss
aborts with a diagnostic (the usual fix is a lower learning rate).
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, replace

import numpy as np

from ..errors import ConfigError, TrainingDiverged
from ..neural.adam import Adam
from ..neural.network import QNetwork
from ..neural import tensor as T
from .dataset import OfflineDataset

_INIT_STREAM = 11
_SAMPLE_STREAM = 12


@dataclass(frozen=True)
class TrainerConfig:
    alpha: float = 5e-4  # conservatism weight
    gamma: float = 0.8
    batch_size: int = 256
    gradient_steps: int = 20000
    target_sync: int = 500
    lr: float = 1e-3
    seed: int = 0

    def with_overrides(self, **kwargs) -> "TrainerConfig":
        return replace(self, **kwargs)


@dataclass(frozen=True)
class LossRecord:
    step: int
    loss: float
    td_term: float
    cql_term: float


def cql_loss(
    net: QNetwork,
    target_net: QNetwork,
    batch: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray],
    alpha: float,
    gamma: float,
    *,
    next_value: np.ndarray | None = None,
):
    """Return (loss tensor, td_term float, cql_term float) for one batch.

    `next_value` optionally supplies precomputed max_a' Q_target(s', a') for
    the batch (the trainer caches it per target sync); when omitted it is
    evaluated from `target_net` here.
    """
    s, a, r, s_next = batch
    q = net.forward(s)  # (B, 4) graph
    q_data = T.take_per_row(q, a)
    if next_value is None:
        # Constant: no gradient flows into the target network.
        next_value = target_net.values(s_next).max(axis=1)
    target = r + gamma * next_value
    diff = T.sub(q_data, target)
    td = T.mul(0.5, T.mean(T.mul(diff, diff)))
    gap = T.sub(T.logsumexp(q, axis=1), q_data)
    cql = T.mul(alpha, T.mean(gap))
    loss = T.add(td, cql)
    return loss, float(td.data), float(cql.data)


_VALUE_CHUNK = 2048


def _max_target_values(target_net: QNetwork, states: np.ndarray) -> np.ndarray:
    """max_a Q_target(s, a) over a whole state array, evaluated in chunks."""
    out = np.empty(len(states))
    for lo in range(0, len(states), _VALUE_CHUNK):
        block = states[lo : lo + _VALUE_CHUNK]
        out[lo : lo + _VALUE_CHUNK] = target_net.values(block).max(axis=1)
    return out


def train(
    dataset: OfflineDataset,
    config: TrainerConfig = TrainerConfig(),
) -> tuple[QNetwork, list[LossRecord]]:
    """Optimize a fresh Q-network on the dataset; returns (net, loss log)."""
    if config.batch_size < 1:
        raise ConfigError("batch_size must be >= 1")
    if config.gradient_steps < 0:
        raise ConfigError("gradient_steps must be >= 0")
    if config.target_sync < 1:
        raise ConfigError("target_sync must be >= 1")
    if not 0.0 < config.gamma < 1.0:
        raise ConfigError(f"gamma must be in (0, 1), got {config.gamma}")
    if config.alpha < 0.0:
        raise ConfigError(f"alpha must be >= 0, got {config.alpha}")

    s_all, a_all, r_all, s2_all = dataset.arrays()
    n = len(dataset)
    net = QNetwork.init(np.random.SeedSequence([config.seed, _INIT_STREAM]))
    target = net.copy()
    sampler = np.random.default_rng(
        np.random.SeedSequence([config.seed, _SAMPLE_STREAM])
    )
    optimizer = Adam(net.params, lr=config.lr)

    log: list[LossRecord] = []
    next_value_all: np.ndarray | None = None
    for step in range(1, config.gradient_steps + 1):
        if next_value_all is None:
            # The target net only changes on hard syncs, so its max-values
            # over the whole dataset are computed once per sync.
            next_value_all = _max_target_values(target, s2_all)
        idx = sampler.integers(0, n, size=config.batch_size)
        batch = (s_all[idx], a_all[idx], r_all[idx], s2_all[idx])
        loss, td_term, cql_term = cql_loss(
            net,
            target,
            batch,
            config.alpha,
            config.gamma,
            next_value=next_value_all[idx],
        )
        loss_value = float(loss.data)
        if not np.isfinite(loss_value):
            raise TrainingDiverged(
                f"non-finite loss at step {step} "
                f"(td={td_term!r}, conservatism={cql_term!r}); "
                f"try a lower learning rate than {config.lr}"
            )
        net.zero_grad()
        loss.backward()
        optimizer.step()
        log.append(LossRecord(step, loss_value, td_term, cql_term))
        if step % config.target_sync == 0:
            target = net.copy()
            next_value_all = None
    return net, log


def write_loss_log(path, log: list[LossRecord]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "loss", "td_term", "cql_term"])
        for rec in log:
            writer.writerow(
                [rec.step, repr(rec.loss), repr(rec.td_term), repr(rec.cql_term)]
            )
