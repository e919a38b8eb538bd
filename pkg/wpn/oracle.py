"""
Brute-force ground truth for small instances.

Subsets and binary states are enumerated exhaustively, so every operation
refuses inputs above its OracleLimit cap.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Iterable

import numpy as np

from wpn.energy_model import HopfieldParams
from wpn.graph_core import Graph, VertexSet, is_connected_in_graph, is_dominating_set

logger = logging.getLogger(__name__)


STATE_CHUNK = 1 << 16


class OracleLimitExceeded(ValueError):
    """Raised when an instance is too large for exhaustive search."""
    pass


class DisconnectedGraphError(ValueError):
    """Raised when a connected dominating set is requested on a disconnected graph."""
    pass


@dataclass(frozen=True)
class OracleLimit:
    max_vertices: int = 16
    max_neurons: int = 20

    def __post_init__(self) -> None:
        if self.max_vertices < 1 or self.max_neurons < 1:
            raise ValueError("oracle caps must be positive")


def step_rule(fields: np.ndarray) -> np.ndarray:
    """Threshold with ties to zero: 1 where the input is strictly positive."""
    return (fields > 0).astype(np.int8)


def _all_states(k: int, start: int, stop: int) -> np.ndarray:
    codes = np.arange(start, stop, dtype=np.int64)
    return ((codes[:, None] >> np.arange(k, dtype=np.int64)) & 1).astype(np.int8)


def brute_force_mcds(g: Graph, limit: OracleLimit = OracleLimit()) -> list[VertexSet]:
    """All minimum-cardinality connected dominating sets, sorted."""
    if g.n > limit.max_vertices:
        raise OracleLimitExceeded(f"{g.n} vertices exceed the cap of {limit.max_vertices}")
    if not g.is_connected():
        raise DisconnectedGraphError("graph is not connected")

    for size in range(1, g.n + 1):
        found = [
            frozenset(subset)
            for subset in combinations(range(g.n), size)
            if is_dominating_set(g, subset) and is_connected_in_graph(g, subset)
        ]
        if found:
            return sorted(found, key=sorted)
    return []


def brute_force_ipds(g: Graph, limit: OracleLimit = OracleLimit()) -> list[VertexSet]:
    """
    All independent perfect dominating sets, sorted.

    A set qualifies when every member has no active neighbor and every
    non-member has exactly one.
    """
    if g.n > limit.max_vertices:
        raise OracleLimitExceeded(f"{g.n} vertices exceed the cap of {limit.max_vertices}")

    a = g.adjacency.astype(np.int16)
    found: list[VertexSet] = []
    total = 1 << g.n
    for start in range(0, total, STATE_CHUNK):
        z = _all_states(g.n, start, min(total, start + STATE_CHUNK))
        s = z.astype(np.int16) @ a
        ok = np.all(np.where(z == 1, s == 0, s == 1), axis=1)
        for row in z[ok]:
            found.append(frozenset(int(i) for i in np.flatnonzero(row)))
    return sorted(found, key=lambda s: (len(s), sorted(s)))


def enumerate_stable_states(
    p: HopfieldParams,
    threshold_rule: Callable[[np.ndarray], np.ndarray] = step_rule,
    limit: OracleLimit = OracleLimit(),
) -> list[tuple[int, ...]]:
    """Every z in {0,1}^K with z = rule(W z + b), sorted lexicographically."""
    if p.size > limit.max_neurons:
        raise OracleLimitExceeded(f"{p.size} neurons exceed the cap of {limit.max_neurons}")

    stable: list[tuple[int, ...]] = []
    total = 1 << p.size
    for start in range(0, total, STATE_CHUNK):
        z = _all_states(p.size, start, min(total, start + STATE_CHUNK))
        fields = z.astype(float) @ p.W.T + p.b
        fixed = np.all(threshold_rule(fields) == z, axis=1)
        stable.extend(tuple(int(x) for x in row) for row in z[fixed])
    return sorted(stable)


def render_sets(sets: Iterable[Iterable[int]]) -> str:
    """One set per line as sorted vertex indices."""
    return "".join(" ".join(str(v) for v in sorted(s)) + "\n" for s in sets)
