"""
Test corpora: small connected graphs, named families, random geometric
graphs and random integer-weight networks.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterable

import networkx as nx
import numpy as np

from wpn.energy_model import HopfieldParams
from wpn.graph_core import Graph, generate_random_geometric, named_graph

logger = logging.getLogger(__name__)


ATLAS_MAX_VERTICES = 7
DEFAULT_FAMILIES = ("P3", "C4", "K1,3", "K1,5")
DEFAULT_MAX_WEIGHT = 3


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    graph: Graph


def connected_atlas_graphs(max_vertices: int) -> list[CorpusEntry]:
    """Every connected graph with 1..max_vertices vertices, up to isomorphism."""
    if max_vertices > ATLAS_MAX_VERTICES:
        raise ValueError(f"the graph atlas covers at most {ATLAS_MAX_VERTICES} vertices, got {max_vertices}")
    entries = []
    for index, g in enumerate(nx.graph_atlas_g()):
        n = g.number_of_nodes()
        if n == 0 or n > max_vertices:
            continue
        if nx.is_connected(g):
            entries.append(CorpusEntry(f"atlas{index}", Graph.from_networkx(g)))
    return entries


def family_graphs(names: Iterable[str]) -> list[CorpusEntry]:
    return [CorpusEntry(name, named_graph(name)) for name in names]


def build_corpus(max_vertices: int, families: Iterable[str] = DEFAULT_FAMILIES) -> list[CorpusEntry]:
    entries = connected_atlas_graphs(max_vertices) if max_vertices > 0 else []
    entries.extend(family_graphs(families))
    logger.debug(f"Corpus built: {len(entries)} graphs (atlas <= {max_vertices} vertices)")
    return entries


def random_geometric_corpus(
    count: int,
    seed: int,
    n_min: int = 4,
    n_max: int = 12,
    radius: float = 0.5,
) -> list[CorpusEntry]:
    """count seeded unit-disk graphs with n_min..n_max points."""
    rng = np.random.default_rng(seed)
    entries = []
    for index in range(count):
        n = int(rng.integers(n_min, n_max + 1))
        graph_seed = int(rng.integers(2**31))
        g = generate_random_geometric(n, radius, graph_seed)
        entries.append(CorpusEntry(f"rgg{index}_n{n}_s{graph_seed}", g))
    return entries


def random_integer_network(k: int, seed: int, max_weight: int = DEFAULT_MAX_WEIGHT) -> HopfieldParams:
    """
    Symmetric zero-diagonal integer weights whose every row has an odd
    absolute sum, with biases b = -W.1 / 2.

    Every threshold input is then half of an odd integer, so no unit ever
    sees an input of exactly zero. k must be even.
    """
    if k < 2 or k % 2:
        raise ValueError(f"k must be a positive even number, got {k}")
    rng = np.random.default_rng(seed)
    W = np.triu(rng.integers(-max_weight, max_weight + 1, size=(k, k)), k=1)
    W = W + W.T

    # Row parities sum to an even number, so with k even the even rows pair up.
    even = np.flatnonzero(np.abs(W).sum(axis=1) % 2 == 0).tolist()
    for a, b in zip(even[0::2], even[1::2]):
        W[a, b] += 1 if W[a, b] >= 0 else -1
        W[b, a] = W[a, b]

    b = -0.5 * W.sum(axis=1)
    return HopfieldParams(W=W.astype(float), b=b, lam=math.inf)
