"""
Graph core for WPN problem instances.

The same Graph type describes two things:
- the problem instance (vertices V_i, edges e_ij) the Hopfield network solves
- the radio topology of the wireless processor network (unit-disk reachability)

Vertex indices are 0-based everywhere (APIs and the edge-list file format).
Graphs are immutable after construction and safe to share across runs.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import networkx as nx
import numpy as np

logger = logging.getLogger(__name__)


class GraphParseError(ValueError):
    """Raised when an edge-list document is malformed."""

    def __init__(self, line_number: int, message: str):
        self.line_number = line_number
        super().__init__(f"line {line_number}: {message}")


class VertexRangeError(ValueError):
    """Raised when a vertex index falls outside [0, n)."""
    pass


VertexSet = frozenset[int]


@dataclass(frozen=True)
class Graph:
    """
    Undirected simple graph with optional planar positions.

    Equality and hashing consider the vertex count and edge set only;
    positions are layout data and do not change the graph.
    """
    n: int
    edges: tuple[tuple[int, int], ...]  # sorted (u, v) with u < v
    positions: tuple[tuple[float, float], ...] | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.n <= 0:
            raise ValueError(f"vertex count must be positive, got {self.n}")
        for u, v in self.edges:
            if u == v:
                raise ValueError(f"self-loop on vertex {u}")
            if not (0 <= u < v < self.n):
                raise VertexRangeError(f"edge ({u}, {v}) outside [0, {self.n})")
        if self.positions is not None and len(self.positions) != self.n:
            raise ValueError(
                f"expected {self.n} positions, got {len(self.positions)}"
            )

    @classmethod
    def from_edges(
        cls,
        n: int,
        edges: Iterable[tuple[int, int]],
        positions: Sequence[Sequence[float]] | None = None,
    ) -> Graph:
        """Build a graph, enforcing symmetry and dropping duplicate edges."""
        canonical = set()
        for u, v in edges:
            u, v = int(u), int(v)
            for idx in (u, v):
                if not 0 <= idx < n:
                    raise VertexRangeError(f"vertex {idx} outside [0, {n})")
            if u == v:
                raise ValueError(f"self-loop on vertex {u}")
            canonical.add((min(u, v), max(u, v)))
        pos = None
        if positions is not None:
            pos = tuple((float(p[0]), float(p[1])) for p in positions)
        return cls(n=n, edges=tuple(sorted(canonical)), positions=pos)

    @classmethod
    def from_networkx(cls, g: nx.Graph) -> Graph:
        """Convert a networkx graph whose nodes are 0..n-1."""
        n = g.number_of_nodes()
        if set(g.nodes) != set(range(n)):
            g = nx.convert_node_labels_to_integers(g, ordering="sorted")
        return cls.from_edges(n, g.edges())

    @cached_property
    def adjacency(self) -> np.ndarray:
        """Indicator matrix e_ij (read-only, int8)."""
        a = np.zeros((self.n, self.n), dtype=np.int8)
        for u, v in self.edges:
            a[u, v] = 1
            a[v, u] = 1
        a.setflags(write=False)
        return a

    @cached_property
    def neighbors(self) -> tuple[tuple[int, ...], ...]:
        """Sorted neighbor lists, one tuple per vertex."""
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        return tuple(tuple(sorted(row)) for row in adj)

    @cached_property
    def degree(self) -> np.ndarray:
        d = np.array([len(row) for row in self.neighbors], dtype=np.int64)
        d.setflags(write=False)
        return d

    def to_networkx(self) -> nx.Graph:
        """Return a frozen networkx view of this graph."""
        g = nx.Graph()
        g.add_nodes_from(range(self.n))
        g.add_edges_from(self.edges)
        return nx.freeze(g)

    def is_connected(self) -> bool:
        return nx.is_connected(self.to_networkx())


# =============================================================================
# Edge-list format
# =============================================================================

_HEADER = re.compile(r"^n\s+(\S+)$")


def parse_edge_list(text: str) -> Graph:
    """
    Parse the edge-list format.

    First non-blank line is "n <count>", every following non-blank line is
    "u v" with 0-based indices. Lines starting with '#' are comments.
    """
    n: int | None = None
    edges: list[tuple[int, int]] = []

    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue

        if n is None:
            match = _HEADER.match(line)
            if not match:
                raise GraphParseError(line_number, f"expected 'n <count>', got {line!r}")
            try:
                n = int(match.group(1))
            except ValueError:
                raise GraphParseError(line_number, f"vertex count is not an integer: {line!r}")
            if n <= 0:
                raise GraphParseError(line_number, f"vertex count must be positive, got {n}")
            continue

        parts = line.split()
        if len(parts) != 2:
            raise GraphParseError(line_number, f"expected 'u v', got {line!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphParseError(line_number, f"non-integer vertex in {line!r}")
        for idx in (u, v):
            if not 0 <= idx < n:
                raise VertexRangeError(f"line {line_number}: vertex {idx} outside [0, {n})")
        if u == v:
            raise GraphParseError(line_number, f"self-loop on vertex {u}")
        edges.append((u, v))

    if n is None:
        raise GraphParseError(0, "missing 'n <count>' header")

    return Graph.from_edges(n, edges)


def render_edge_list(g: Graph) -> str:
    """Canonical renderer: header then sorted "u v" pairs with u < v."""
    lines = [f"n {g.n}"]
    lines.extend(f"{u} {v}" for u, v in g.edges)
    return "\n".join(lines) + "\n"


# =============================================================================
# Generators
# =============================================================================

def generate_unit_disk(positions: Sequence[Sequence[float]], radius: float) -> Graph:
    """Edge iff euclidean distance <= radius (i != j)."""
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius}")
    pts = np.asarray(positions, dtype=float)
    if pts.ndim != 2 or pts.shape[0] == 0 or pts.shape[1] != 2:
        raise ValueError("positions must be a non-empty list of 2D points")

    diff = pts[:, None, :] - pts[None, :, :]
    dist = np.hypot(diff[..., 0], diff[..., 1])
    iu, ju = np.nonzero(np.triu(dist <= radius, k=1))
    return Graph.from_edges(len(pts), zip(iu.tolist(), ju.tolist()), positions=pts.tolist())


def generate_random_geometric(n: int, radius: float, seed: int) -> Graph:
    """n points uniform on the unit square from a seeded generator, then the unit-disk rule."""
    if n <= 0:
        raise ValueError(f"n must be positive, got {n}")
    rng = np.random.default_rng(seed)
    points = rng.uniform(0.0, 1.0, size=(n, 2))
    g = generate_unit_disk(points, radius)
    logger.debug(f"Random geometric graph: n={n}, r={radius}, seed={seed}, edges={len(g.edges)}")
    return g


_NAMED = re.compile(r"^(P|C|K|E|K1,)(\d+)$")


def named_graph(name: str) -> Graph:
    """
    Named families: P<n> path, C<n> cycle, K<n> complete,
    K1,<n> star with n leaves (center 0), E<n> edgeless.
    """
    match = _NAMED.match(name.strip().replace(" ", ""))
    if not match:
        raise ValueError(f"unknown graph family: {name!r}")
    kind, size = match.group(1), int(match.group(2))
    if size <= 0:
        raise ValueError(f"family size must be positive: {name!r}")

    if kind == "P":
        return Graph.from_networkx(nx.path_graph(size))
    if kind == "C":
        if size < 3:
            raise ValueError(f"cycle needs at least 3 vertices: {name!r}")
        return Graph.from_networkx(nx.cycle_graph(size))
    if kind == "K":
        return Graph.from_networkx(nx.complete_graph(size))
    if kind == "K1,":
        return Graph.from_networkx(nx.star_graph(size))
    return Graph.from_edges(size, [])


# =============================================================================
# Set predicates
# =============================================================================

def _check_members(g: Graph, s: Iterable[int]) -> frozenset[int]:
    members = frozenset(int(v) for v in s)
    for v in members:
        if not 0 <= v < g.n:
            raise VertexRangeError(f"vertex {v} outside [0, {g.n})")
    return members


def indicator(g: Graph, s: Iterable[int]) -> np.ndarray:
    """Binary indicator vector of a vertex set."""
    z = np.zeros(g.n, dtype=float)
    for v in _check_members(g, s):
        z[v] = 1.0
    return z


def members(z: Sequence[float]) -> VertexSet:
    """Vertex set of a binary indicator (entries equal to 1)."""
    return frozenset(int(i) for i, value in enumerate(z) if value == 1)


def is_dominating_set(g: Graph, s: Iterable[int]) -> bool:
    """Every vertex outside s has at least one neighbor in s."""
    chosen = _check_members(g, s)
    return all(
        v in chosen or any(u in chosen for u in g.neighbors[v])
        for v in range(g.n)
    )


def is_connected_in_graph(g: Graph, s: Iterable[int]) -> bool:
    """The subgraph induced by s is connected; empty and singleton sets count as connected."""
    chosen = _check_members(g, s)
    if len(chosen) <= 1:
        return True
    return nx.is_connected(g.to_networkx().subgraph(chosen))


def is_independent_perfect_dominating(g: Graph, s: Iterable[int]) -> bool:
    """
    No two members of s are adjacent, and every vertex outside s
    has exactly one neighbor in s.
    """
    chosen = _check_members(g, s)
    for v in range(g.n):
        active = sum(1 for u in g.neighbors[v] if u in chosen)
        if v in chosen:
            if active:
                return False
        elif active != 1:
            return False
    return True


def is_connected_dominating_set(g: Graph, s: Iterable[int]) -> bool:
    chosen = _check_members(g, s)
    return is_dominating_set(g, chosen) and is_connected_in_graph(g, chosen)

