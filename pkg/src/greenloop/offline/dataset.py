"""Offline transition datasets and their newline-delimited file format.

A dataset file is one JSON header line::

    {"schema": 1, "provenance": "cycle", "count": 2400}

followed by one JSON record per line with fixed field order
(s, a, r, s_next, ids).  Floats are written with Python's shortest
round-trip repr, so save -> load -> save reproduces identical bytes.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import ConfigError
from ..features import STATE_DIM

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class Transition:
    s: np.ndarray  # (84,) float64 flattened lane features
    a: int  # phase index 0..3
    r: float  # negative total queue at the next decision boundary
    s_next: np.ndarray
    scenario_id: str
    intersection_id: str
    episode: int
    step: int  # decision index within the episode


class OfflineDataset:
    def __init__(self, transitions: list[Transition], provenance: str):
        self.transitions = list(transitions)
        self.provenance = provenance
        self._arrays: tuple | None = None

    def __len__(self) -> int:
        return len(self.transitions)

    def __iter__(self):
        return iter(self.transitions)

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Stacked (S, A, R, S_next) views for batched training."""
        if self._arrays is None:
            if not self.transitions:
                raise ConfigError("dataset is empty")
            s = np.stack([t.s for t in self.transitions])
            a = np.array([t.a for t in self.transitions], dtype=np.intp)
            r = np.array([t.r for t in self.transitions], dtype=np.float64)
            s2 = np.stack([t.s_next for t in self.transitions])
            self._arrays = (s, a, r, s2)
        return self._arrays

    def subsample(self, fraction: float, seed: int) -> "OfflineDataset":
        """Keep ceil(fraction * N) transitions, sampled without replacement."""
        if not 0.0 < fraction <= 1.0:
            raise ConfigError(f"fraction must be in (0, 1], got {fraction}")
        if fraction == 1.0:
            return OfflineDataset(list(self.transitions), self.provenance)
        n = math.ceil(fraction * len(self.transitions))
        rng = np.random.default_rng(np.random.SeedSequence([seed, 7]))
        idx = np.sort(rng.choice(len(self.transitions), size=n, replace=False))
        return OfflineDataset([self.transitions[i] for i in idx], self.provenance)

    # -- file io -------------------------------------------------------------

    def save(self, path) -> None:
        with open(path, "w") as fh:
            header = {
                "schema": SCHEMA_VERSION,
                "provenance": self.provenance,
                "count": len(self.transitions),
            }
            fh.write(json.dumps(header) + "\n")
            for t in self.transitions:
                record = {
                    "s": [float(x) for x in t.s],
                    "a": int(t.a),
                    "r": float(t.r),
                    "s_next": [float(x) for x in t.s_next],
                    "ids": {
                        "scenario": t.scenario_id,
                        "intersection": t.intersection_id,
                        "episode": int(t.episode),
                        "step": int(t.step),
                    },
                }
                fh.write(json.dumps(record) + "\n")

    @classmethod
    def load(cls, path) -> "OfflineDataset":
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"dataset file not found: {p}")
        with open(p) as fh:
            header_line = fh.readline()
            try:
                header = json.loads(header_line)
            except json.JSONDecodeError:
                raise ConfigError(f"{p}: malformed dataset header") from None
            if not isinstance(header, dict) or header.get("schema") != SCHEMA_VERSION:
                raise ConfigError(f"{p}: unsupported dataset schema")
            provenance = header.get("provenance", "unknown")
            transitions = []
            for lineno, line in enumerate(fh, start=2):
                if not line.strip():
                    continue
                try:
                    rec = json.loads(line)
                    ids = rec["ids"]
                    t = Transition(
                        s=np.asarray(rec["s"], dtype=np.float64),
                        a=int(rec["a"]),
                        r=float(rec["r"]),
                        s_next=np.asarray(rec["s_next"], dtype=np.float64),
                        scenario_id=str(ids["scenario"]),
                        intersection_id=str(ids["intersection"]),
                        episode=int(ids["episode"]),
                        step=int(ids["step"]),
                    )
                except (json.JSONDecodeError, KeyError, TypeError, ValueError):
                    raise ConfigError(f"{p}:{lineno}: malformed record") from None
                if t.s.shape != (STATE_DIM,) or t.s_next.shape != (STATE_DIM,):
                    raise ConfigError(
                        f"{p}:{lineno}: state vectors must have {STATE_DIM} entries"
                    )
                transitions.append(t)
        count = header.get("count")
        if count is not None and count != len(transitions):
            raise ConfigError(
                f"{p}: header count {count} != {len(transitions)} records"
            )
        return cls(transitions, provenance)
