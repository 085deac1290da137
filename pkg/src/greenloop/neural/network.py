"""Attention-based Q-network over per-lane traffic features.

Forward path for a batch of flattened intersection states (B, 84):

 1. gather the 4 x 2 participating lanes (through/left pairs per phase) and
    embed each 7-feature lane vector with a shared sigmoid linear layer
    into d = 32 channels;
 2. fuse the two lanes of each phase with 4-head self-attention (head dim
    8, scaled dot-product, separate query/key/value/output projections),
    then average the fused lane representations into one vector per phase;
 3. relate the four phase vectors with a second 4-head self-attention
    block of the same shape;
 4. score each phase with a shared linear head (no activation) -> (B, 4).

Greedy control takes the argmax phase (lowest index on ties).  All
parameters are float64; weights draw from U(-sqrt(1/fan_in),
+sqrt(1/fan_in)) and biases start at zero.
"""
from __future__ import annotations

import struct

import numpy as np

from ..errors import ConfigError
from ..features import N_LANE_FEATURES, STATE_DIM
from ..sim.network import LANE_ORDER, N_PHASES, PHASE_LANE_SLOTS
from . import tensor as T
from .tensor import Tensor

D_MODEL = 32
N_HEADS = 4
HEAD_DIM = D_MODEL // N_HEADS
LANES_PER_PHASE = 2

#: Flat lane slots feeding the network, phase-major: (A0, A1, B0, B1, ...).
PHASE_SLOTS_FLAT = np.array(
    [slot for slots in PHASE_LANE_SLOTS for slot in slots], dtype=np.intp
)

PARAM_SHAPES: dict[str, tuple[int, ...]] = {
    "embed.W": (N_LANE_FEATURES, D_MODEL),
    "embed.b": (D_MODEL,),
    "fusion.Wq": (D_MODEL, D_MODEL),
    "fusion.Wk": (D_MODEL, D_MODEL),
    "fusion.Wv": (D_MODEL, D_MODEL),
    "fusion.Wo": (D_MODEL, D_MODEL),
    "corr.Wq": (D_MODEL, D_MODEL),
    "corr.Wk": (D_MODEL, D_MODEL),
    "corr.Wv": (D_MODEL, D_MODEL),
    "corr.Wo": (D_MODEL, D_MODEL),
    "head.W": (D_MODEL, 1),
    "head.b": (1,),
}

_CKPT_MAGIC = b"GLQN"
_CKPT_VERSION = 1


def self_attention(x, wq, wk, wv, wo, n_heads: int = N_HEADS):
    """Multi-head scaled dot-product self-attention over (..., S, D)."""
    lead = tuple(x.shape[:-2])
    seq, d = x.shape[-2], x.shape[-1]
    dh = d // n_heads

    def split(t):
        t = T.reshape(t, lead + (seq, n_heads, dh))
        return T.swapaxes(t, -3, -2)  # (..., H, S, dh)

    q = split(T.matmul(x, wq))
    k = split(T.matmul(x, wk))
    v = split(T.matmul(x, wv))
    scores = T.mul(T.matmul(q, T.swapaxes(k, -1, -2)), 1.0 / np.sqrt(dh))
    weights = T.softmax(scores, axis=-1)
    mixed = T.swapaxes(T.matmul(weights, v), -3, -2)  # (..., S, H, dh)
    return T.matmul(T.reshape(mixed, lead + (seq, d)), wo)


def _phase_scores(p: dict, states: np.ndarray):
    """Shared forward code; p maps names to Tensors (graph) or arrays."""
    states = np.asarray(states, dtype=np.float64)
    if states.ndim != 2 or states.shape[1] != STATE_DIM:
        raise ValueError(
            f"expected states of shape (B, {STATE_DIM}), got {states.shape}"
        )
    batch = states.shape[0]
    lanes = states.reshape(batch, len(LANE_ORDER), N_LANE_FEATURES)
    part = lanes[:, PHASE_SLOTS_FLAT, :].reshape(
        batch, N_PHASES, LANES_PER_PHASE, N_LANE_FEATURES
    )
    h1 = T.sigmoid(T.add(T.matmul(part, p["embed.W"]), p["embed.b"]))
    fused = self_attention(
        h1, p["fusion.Wq"], p["fusion.Wk"], p["fusion.Wv"], p["fusion.Wo"]
    )
    per_phase = T.mean(fused, axis=2)  # (B, 4, D)
    related = self_attention(
        per_phase, p["corr.Wq"], p["corr.Wk"], p["corr.Wv"], p["corr.Wo"]
    )
    scores = T.add(T.matmul(related, p["head.W"]), p["head.b"])  # (B, 4, 1)
    return T.reshape(scores, (batch, N_PHASES))


class QNetwork:
    """Parameter container plus graph / plain-array forward passes."""

    def __init__(self, params: dict[str, Tensor]):
        if set(params) != set(PARAM_SHAPES):
            raise ConfigError("parameter set does not match the architecture")
        for name, tensor in params.items():
            if tensor.shape != PARAM_SHAPES[name]:
                raise ConfigError(
                    f"parameter {name!r} has shape {tensor.shape}, "
                    f"expected {PARAM_SHAPES[name]}"
                )
        self.params = {name: params[name] for name in PARAM_SHAPES}

    @classmethod
    def init(cls, seed) -> "QNetwork":
        rng = np.random.default_rng(seed)
        params = {}
        for name, shape in PARAM_SHAPES.items():
            if name.endswith(".b"):
                params[name] = Tensor(np.zeros(shape))
            else:
                bound = np.sqrt(1.0 / shape[0])
                params[name] = Tensor(rng.uniform(-bound, bound, size=shape))
        return cls(params)

    def copy(self) -> "QNetwork":
        return QNetwork({k: Tensor(v.data.copy()) for k, v in self.params.items()})

    def forward(self, states: np.ndarray) -> Tensor:
        """Graph-building forward; gradients flow into self.params."""
        return _phase_scores(self.params, states)

    def values(self, states: np.ndarray) -> np.ndarray:
        """Plain-array forward (no graph); same arithmetic as forward()."""
        return _phase_scores({k: v.data for k, v in self.params.items()}, states)

    def greedy_action(self, state: np.ndarray) -> int:
        """Argmax phase for a single flat state (lowest index wins ties)."""
        return int(np.argmax(self.values(np.asarray(state)[None, :])[0]))

    def zero_grad(self) -> None:
        for p in self.params.values():
            p.grad = None

    # -- checkpoint io -------------------------------------------------------

    def save(self, path) -> None:
        """Flat binary: magic, version, then (name, rank, dims, float64 data)."""
        with open(path, "wb") as fh:
            fh.write(struct.pack("<4sI", _CKPT_MAGIC, _CKPT_VERSION))
            for name, p in self.params.items():
                blob = name.encode("utf-8")
                fh.write(struct.pack("<I", len(blob)))
                fh.write(blob)
                fh.write(struct.pack("<I", p.data.ndim))
                fh.write(struct.pack(f"<{p.data.ndim}I", *p.data.shape))
                fh.write(np.ascontiguousarray(p.data, dtype="<f8").tobytes())

    @classmethod
    def load(cls, path) -> "QNetwork":
        try:
            raw = open(path, "rb").read()
        except OSError as e:
            raise ConfigError(f"cannot read checkpoint {path}: {e}") from None
        if len(raw) < 8 or raw[:4] != _CKPT_MAGIC:
            raise ConfigError(f"{path} is not a Q-network checkpoint")
        (version,) = struct.unpack_from("<I", raw, 4)
        if version != _CKPT_VERSION:
            raise ConfigError(f"unsupported checkpoint version {version}")
        off = 8
        params: dict[str, Tensor] = {}
        while off < len(raw):
            try:
                (name_len,) = struct.unpack_from("<I", raw, off)
                off += 4
                name = raw[off : off + name_len].decode("utf-8")
                off += name_len
                (rank,) = struct.unpack_from("<I", raw, off)
                off += 4
                shape = struct.unpack_from(f"<{rank}I", raw, off)
                off += 4 * rank
                count = int(np.prod(shape)) if rank else 1
                data = np.frombuffer(raw, dtype="<f8", count=count, offset=off)
                off += 8 * count
            except (struct.error, UnicodeDecodeError, ValueError) as e:
                raise ConfigError(f"corrupt checkpoint {path}: {e}") from None
            if name in params:
                raise ConfigError(f"duplicate tensor {name!r} in checkpoint")
            params[name] = Tensor(data.astype(np.float64).reshape(shape))
        missing = set(PARAM_SHAPES) - set(params)
        extra = set(params) - set(PARAM_SHAPES)
        if missing or extra:
            raise ConfigError(
                f"checkpoint tensors do not match the architecture "
                f"(missing {sorted(missing)}, unexpected {sorted(extra)})"
            )
        return cls(params)
