"""
Closed-form cost calculators for neuron-per-mote deployments.

All counts are Python ints (exact at any size); wall time is computed in
rational arithmetic and converted to float only at the end, so the worked
scalability numbers come out exact.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

logger = logging.getLogger(__name__)


# Flip bound for integer-weight asynchronous binary networks: 3 sum_{j<i} |w_ij|.
STATE_CHANGE_FACTOR = 3
# Motes reached by one state-change announcement: every mote (broadcast to all).
BROADCAST_FANOUT_PER_UPDATE = "N"
# Convergence episodes a run is expected to need at most.
TYPICAL_MAX_EPISODES = 100


class NonIntegerWeightsError(ValueError):
    """Raised when the flip bound is requested for non-integer weights."""
    pass


@dataclass(frozen=True)
class CostInputs:
    n_neurons: int
    episodes: int = 1
    bytes_per_real: int = 4
    group_size: int = 10
    msg_time: float = 1e-6
    channels: int = 1

    def __post_init__(self) -> None:
        for name in ("n_neurons", "episodes", "bytes_per_real", "group_size", "channels"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int):
                raise TypeError(f"{name} must be an integer, got {value!r}")
            if value <= 0:
                raise ValueError(f"{name} must be positive, got {value}")
        if not self.msg_time > 0:
            raise ValueError(f"msg_time must be positive, got {self.msg_time}")


@dataclass(frozen=True)
class ScalabilityEstimate:
    clusters: int
    remainder: int
    sequential_messages: int
    wall_seconds: float

    def to_dict(self) -> dict:
        return {
            "clusters": self.clusters,
            "remainder": self.remainder,
            "sequential_messages": self.sequential_messages,
            "wall_seconds": self.wall_seconds,
        }


def state_change_bound(W) -> int:
    """3 sum_{j<i} |w_ij| for a symmetric zero-diagonal integer matrix."""
    W = np.asarray(W)
    if W.ndim != 2 or W.shape[0] != W.shape[1]:
        raise ValueError(f"W must be square, got shape {W.shape}")
    if not np.all(np.isfinite(W)) or not np.array_equal(W, np.round(W)):
        raise NonIntegerWeightsError("the flip bound holds for integer weights only")
    if not np.array_equal(W, W.T) or np.any(np.diag(W) != 0):
        raise ValueError("W must be symmetric with a zero diagonal")
    lower = np.tril(W, k=-1)
    return STATE_CHANGE_FACTOR * sum(abs(int(x)) for x in lower[lower != 0].tolist())


def message_complexity(n: int, m: int) -> int:
    """m N^3 messages over m convergence episodes.

    Assumes N^2 state changes per episode, each reaching
    BROADCAST_FANOUT_PER_UPDATE motes.
    """
    if n <= 0 or m <= 0:
        raise ValueError(f"inputs must be positive, got n={n}, m={m}")
    return int(m) * int(n) ** 3


def memory_per_mote(n: int, y: int) -> int:
    """2 y (N - 1) bytes: one weight row and one output cache."""
    if n < 1:
        raise ValueError(f"N must be >= 1, got {n}")
    return 2 * int(y) * (int(n) - 1)


def centralized_weight_matrix_bytes(v: int, y: int) -> int:
    """y v^4 bytes for the N x N-neuron mapping of a v-vertex problem."""
    if v < 1:
        raise ValueError(f"vertex count must be >= 1, got {v}")
    return int(y) * int(v) ** 4


def scalability_estimate(inputs: CostInputs) -> ScalabilityEstimate:
    """
    Clustered execution: groups of group_size motes run sequentially inside a
    cluster and clusters run in parallel.

    clusters = N // group_size (at least 1; the remainder is reported),
    sequential messages = total / clusters (rounded up when not exact),
    wall seconds = sequential messages x msg_time / channels.
    """
    n = inputs.n_neurons
    clusters = max(1, n // inputs.group_size)
    remainder = n - clusters * inputs.group_size if n >= inputs.group_size else 0
    total = message_complexity(n, inputs.episodes)
    sequential = -(-total // clusters)
    wall = Fraction(sequential) * Fraction(repr(inputs.msg_time)) / inputs.channels
    return ScalabilityEstimate(
        clusters=clusters,
        remainder=remainder,
        sequential_messages=sequential,
        wall_seconds=float(wall),
    )


def cost_table(inputs: CostInputs, weights=None) -> list[tuple[str, object]]:
    """Inputs followed by every calculator output, as (quantity, value) rows."""
    estimate = scalability_estimate(inputs)
    rows: list[tuple[str, object]] = [
        ("n_neurons", inputs.n_neurons),
        ("episodes", inputs.episodes),
        ("bytes_per_real", inputs.bytes_per_real),
        ("group_size", inputs.group_size),
        ("msg_time", inputs.msg_time),
        ("channels", inputs.channels),
        ("broadcast_fanout_per_update", BROADCAST_FANOUT_PER_UPDATE),
        ("message_complexity", message_complexity(inputs.n_neurons, inputs.episodes)),
        ("message_complexity_typical_max",
         message_complexity(inputs.n_neurons, TYPICAL_MAX_EPISODES)),
        ("memory_per_mote", memory_per_mote(inputs.n_neurons, inputs.bytes_per_real)),
        ("centralized_weight_matrix_bytes",
         centralized_weight_matrix_bytes(inputs.n_neurons, inputs.bytes_per_real)),
        ("clusters", estimate.clusters),
        ("cluster_remainder", estimate.remainder),
        ("sequential_messages", estimate.sequential_messages),
        ("wall_seconds", estimate.wall_seconds),
    ]
    if weights is not None:
        try:
            rows.append(("state_change_bound", state_change_bound(weights)))
        except NonIntegerWeightsError:
            logger.debug("Weights are not integer; flip bound omitted from cost table")
    return rows


def render_cost_table(rows: list[tuple[str, object]]) -> str:
    lines = ["quantity\tvalue"]
    lines.extend(f"{name}\t{value!r}" if isinstance(value, float) else f"{name}\t{value}" for name, value in rows)
    return "\n".join(lines) + "\n"
