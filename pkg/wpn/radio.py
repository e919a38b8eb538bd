"""
Radio layer of the wireless processor network.

Time is slotted: one transmission occupies one slot, and simulated seconds are
slot x slot_time. Reachability and interference both follow the unit-disk
topology graph.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import networkx as nx
import numpy as np

from wpn.graph_core import Graph

logger = logging.getLogger(__name__)


BROADCAST = -1
MAC_KINDS = ("ideal_tdma", "slotted_aloha")
BACKOFF_MIN_SLOTS = 1
BACKOFF_MAX_SLOTS = 8
DEFAULT_SLOT_TIME = 1e-6


@dataclass(frozen=True)
class MacConfig:
    kind: str = "ideal_tdma"
    slot_time: float = DEFAULT_SLOT_TIME
    channels: int = 1
    p_transmit: float = 0.5

    def __post_init__(self) -> None:
        if self.kind not in MAC_KINDS:
            raise ValueError(f"unknown MAC kind: {self.kind}")
        if not self.slot_time > 0:
            raise ValueError(f"slot_time must be positive, got {self.slot_time}")
        if self.channels < 1:
            raise ValueError(f"channels must be >= 1, got {self.channels}")
        if not 0 < self.p_transmit <= 1:
            raise ValueError(f"p_transmit must lie in (0, 1], got {self.p_transmit}")

    def seconds(self, slot: int) -> float:
        return slot * self.slot_time


@dataclass(frozen=True)
class Payload:
    """A neuron announcement: who, what value, and the sender's update index."""
    neuron: int
    value: float
    k: int


@dataclass
class Message:
    """
    One hop of an announcement.

    dst is BROADCAST for one-hop broadcasts. Multi-hop unicasts carry the
    full path; origin and target are its end points. Timestamps are slots.
    """
    src: int
    dst: int
    payload: Payload
    channel: int = 0
    enqueued: int = 0
    transmitted: int | None = None
    delivered: int | None = None
    path: tuple[int, ...] = ()
    hop: int = 0

    @property
    def origin(self) -> int:
        return self.path[0] if self.path else self.src

    @property
    def target(self) -> int:
        return self.path[-1] if self.path else self.dst

    def timestamps(self, slot_time: float) -> dict:
        """Enqueue/transmit/deliver times in simulated seconds."""
        def seconds(slot):
            return None if slot is None else slot * slot_time
        return {
            "enqueue": seconds(self.enqueued),
            "transmit": seconds(self.transmitted),
            "deliver": seconds(self.delivered),
        }


@dataclass(frozen=True)
class Transmission:
    mote: int
    channel: int
    receivers: frozenset[int] = field(default_factory=frozenset)


@dataclass(frozen=True)
class ArbitrationResult:
    """Indices into the arbitrated transmission list."""
    delivered: tuple[int, ...]
    collided: tuple[int, ...]


def route(topology: Graph, src: int, dst: int) -> list[int]:
    """
    Shortest hop-count path from src to dst; among equal-length paths the
    lowest-id next hop wins at every step. Empty when unreachable.
    """
    for v in (src, dst):
        if not 0 <= v < topology.n:
            raise ValueError(f"mote {v} outside [0, {topology.n})")
    if src == dst:
        return [src]

    distance = nx.single_source_shortest_path_length(topology.to_networkx(), dst)
    if src not in distance:
        return []

    path = [src]
    current = src
    while current != dst:
        current = min(v for v in topology.neighbors[current] if distance.get(v) == distance[current] - 1)
        path.append(current)
    return path


def receivers_of(topology: Graph, mote: int, dst: int) -> frozenset[int]:
    if dst == BROADCAST:
        return frozenset(topology.neighbors[mote])
    return frozenset((dst,))


def mac_arbitrate(
    transmissions: Sequence[Transmission],
    topology: Graph,
    cfg: MacConfig,
) -> ArbitrationResult:
    """
    Partition one slot's transmissions into delivered and collided.

    ideal_tdma delivers everything. slotted_aloha collides a transmission iff
    some other same-channel transmitter in the slot is one of its intended
    receivers or is within radio range of one.
    """
    if cfg.kind == "ideal_tdma":
        return ArbitrationResult(delivered=tuple(range(len(transmissions))), collided=())

    delivered, collided = [], []
    for idx, tx in enumerate(transmissions):
        interferers = [
            other.mote
            for j, other in enumerate(transmissions)
            if j != idx and other.channel == tx.channel
        ]
        hit = any(
            m == r or m in topology.neighbors[r]
            for m in interferers
            for r in tx.receivers
        )
        (collided if hit else delivered).append(idx)
    return ArbitrationResult(delivered=tuple(delivered), collided=tuple(collided))


def backoff_slots(rng: np.random.Generator) -> int:
    """Uniform backoff of 1 to 8 slots."""
    return int(rng.integers(BACKOFF_MIN_SLOTS, BACKOFF_MAX_SLOTS + 1))
