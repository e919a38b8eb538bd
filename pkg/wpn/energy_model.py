"""
Energy model: the dominating-set penalty energy and the Hopfield Liapunov function.

    E(z) = 1/2 g_a sum_i sum_{j!=i} e_ij z_i z_j
         + 1/2 g_b sum_i (1 - sum_{j!=i} e_ij z_j)^2 (1 - z_i)

is zero on a binary configuration exactly when the active vertices form an
independent perfect dominating set. The compiler matches its linear and
quadratic monomials against the Hopfield form

    -1/2 sum_ij w_ij z_i z_j - sum_i b_i z_i

and keeps the cubic (and squared-diagonal) remainder as an exact residual, so
solvers can run either the quadratic truncation or exact gradient dynamics.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property, partial
from typing import Callable, Iterable, Sequence

import numpy as np

from wpn.graph_core import Graph

logger = logging.getLogger(__name__)


DEFAULT_GAIN = 1.0
DEFAULT_LAMBDA = 20.0


class DimensionMismatchError(ValueError):
    """Raised when a state vector does not match the problem dimension."""
    pass


class LiapunovDomainError(ValueError):
    """Raised when a Liapunov argument leaves the open unit interval."""
    pass


class CompiledFormatError(ValueError):
    """Raised when a compiled-problem document cannot be parsed."""
    pass


@dataclass(frozen=True)
class EnergyConfig:
    """Penalty gains g_a (independence) and g_b (exactly-one domination)."""
    g_a: float = DEFAULT_GAIN
    g_b: float = DEFAULT_GAIN

    def __post_init__(self) -> None:
        # Zero gains are admitted so each penalty term can be studied alone.
        if self.g_a < 0 or self.g_b < 0:
            raise ValueError(f"gains must be non-negative, got g_a={self.g_a}, g_b={self.g_b}")
        if self.g_a == 0 and self.g_b == 0:
            raise ValueError("at least one gain must be positive")

    @property
    def strictly_positive(self) -> bool:
        return self.g_a > 0 and self.g_b > 0


@dataclass(frozen=True, eq=False)
class HopfieldParams:
    """Symmetric zero-diagonal weights W, biases b and sigmoid slope lam."""
    W: np.ndarray
    b: np.ndarray
    lam: float = DEFAULT_LAMBDA

    def __post_init__(self) -> None:
        W = np.array(self.W, dtype=float)
        b = np.array(self.b, dtype=float)
        if W.ndim != 2 or W.shape[0] != W.shape[1]:
            raise DimensionMismatchError(f"W must be square, got shape {W.shape}")
        if b.shape != (W.shape[0],):
            raise DimensionMismatchError(f"b has shape {b.shape}, expected ({W.shape[0]},)")
        if not np.array_equal(W, W.T):
            raise ValueError("W must be symmetric")
        if np.any(np.diag(W) != 0):
            raise ValueError("W must have a zero diagonal")
        if not self.lam > 0:
            raise ValueError(f"lambda must be positive, got {self.lam}")
        W.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "b", b)

    @property
    def size(self) -> int:
        return self.b.shape[0]

    @cached_property
    def coupling_rows(self) -> tuple[tuple[np.ndarray, np.ndarray], ...]:
        """Per neuron: sorted indices of nonzero weights and the weights themselves."""
        rows = []
        for i in range(self.size):
            idx = np.flatnonzero(self.W[i])
            rows.append((idx, self.W[i, idx].copy()))
        return tuple(rows)


@dataclass(frozen=True, eq=False)
class CompiledProblem:
    """
    A problem energy compiled onto Hopfield parameters.

    residual_order is 0 when the quadratic part reproduces the energy exactly,
    otherwise the highest order of the remainder (3 for the domination energy).
    """
    quadratic: HopfieldParams
    residual_order: int
    gradient_handle: Callable[[np.ndarray], np.ndarray]
    energy_handle: Callable[[np.ndarray], float]
    offset: float = 0.0
    graph: Graph | None = None
    cfg: EnergyConfig | None = None
    residual_handle: Callable[[np.ndarray], float] | None = field(default=None, repr=False)

    @property
    def size(self) -> int:
        return self.quadratic.size

    def quadratic_energy(self, z: np.ndarray) -> float:
        z = _as_state(z, self.size)
        p = self.quadratic
        return float(-0.5 * z @ p.W @ z - p.b @ z + self.offset)

    def residual(self, z: np.ndarray) -> float:
        if self.residual_handle is None:
            return 0.0
        return self.residual_handle(_as_state(z, self.size))

    def energy(self, z: np.ndarray) -> float:
        return self.energy_handle(_as_state(z, self.size))

    def gradient(self, z: np.ndarray) -> np.ndarray:
        return self.gradient_handle(_as_state(z, self.size))

    @classmethod
    def from_params(cls, params: HopfieldParams) -> CompiledProblem:
        """Wrap raw Hopfield parameters as an exactly quadratic problem."""

        def energy(z: np.ndarray) -> float:
            return float(-0.5 * z @ params.W @ z - params.b @ z)

        def gradient(z: np.ndarray) -> np.ndarray:
            return -np.array([
                math.fsum((weights * z[idx]).tolist()) + float(params.b[i])
                for i, (idx, weights) in enumerate(params.coupling_rows)
            ])

        return cls(
            quadratic=params,
            residual_order=0,
            gradient_handle=gradient,
            energy_handle=energy,
        )


def _as_state(z, size: int) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    if z.shape != (size,):
        raise DimensionMismatchError(f"state has shape {z.shape}, expected ({size},)")
    return z


# =============================================================================
# Domination energy
# =============================================================================

def mcds_energy(g: Graph, z, cfg: EnergyConfig = EnergyConfig()) -> float:
    """Evaluate the penalty energy; non-negative on [0,1]^N."""
    z = _as_state(z, g.n)
    s = g.adjacency @ z
    independence = 0.5 * cfg.g_a * float(z @ s)
    domination = 0.5 * cfg.g_b * float(np.sum((1.0 - s) ** 2 * (1.0 - z)))
    return independence + domination


def neighbor_sum(outputs: Iterable[float]) -> float:
    """Exactly rounded sum of neighbor outputs; independent of summation order."""
    return math.fsum(outputs)


def local_gradient(
    cfg: EnergyConfig,
    s_own: float,
    neighbor_s: Sequence[float],
    neighbor_z: Sequence[float],
) -> float:
    """
    One component of the energy gradient from neighborhood data only.

    s_own is the active-neighbor sum of the vertex itself; neighbor_s and
    neighbor_z hold s_j and z_j for each neighbor j.
    """
    spill = math.fsum((1.0 - s) * (1.0 - z) for s, z in zip(neighbor_s, neighbor_z))
    return cfg.g_a * s_own - 0.5 * cfg.g_b * (1.0 - s_own) ** 2 - cfg.g_b * spill


def mcds_energy_gradient(g: Graph, z, cfg: EnergyConfig = EnergyConfig()) -> np.ndarray:
    """
    Exact partial derivatives:

        dE/dz_k = g_a s_k - 1/2 g_b (1 - s_k)^2 - g_b sum_i e_ik (1 - s_i)(1 - z_i)

    with s = A z. Sums are exactly rounded so that a mote evaluating its own
    component from cached neighbor values gets the same bits.
    """
    z = _as_state(z, g.n)
    values = z.tolist()
    s = [neighbor_sum(values[j] for j in nbrs) for nbrs in g.neighbors]
    return np.array([
        local_gradient(
            cfg,
            s[k],
            [s[j] for j in g.neighbors[k]],
            [values[j] for j in g.neighbors[k]],
        )
        for k in range(g.n)
    ])


def _mcds_residual(g: Graph, cfg: EnergyConfig, z: np.ndarray) -> float:
    # Squared-diagonal terms from s_i^2 plus the cubic -1/2 g_b sum_i s_i^2 z_i.
    s = g.adjacency @ z
    return 0.5 * cfg.g_b * float(g.degree @ (z * z)) - 0.5 * cfg.g_b * float((s * s) @ z)


def compile_mcds(g: Graph, cfg: EnergyConfig = EnergyConfig(), lam: float = DEFAULT_LAMBDA) -> CompiledProblem:
    """
    Expand the penalty energy and match it against the Hopfield form.

        w_ij = -(g_a + 2 g_b) e_ij - g_b (A^2)_ij     (i != j)
        b_i  = 1/2 g_b (1 + 2 deg_i)
        offset = 1/2 g_b N

    Common-neighbor pairs (A^2)_ij couple two-hop neighbors.
    """
    a = g.adjacency.astype(float)
    common = a @ a
    np.fill_diagonal(common, 0.0)

    W = -(cfg.g_a + 2.0 * cfg.g_b) * a - cfg.g_b * common
    b = 0.5 * cfg.g_b * (1.0 + 2.0 * g.degree.astype(float))
    params = HopfieldParams(W=W, b=b, lam=lam)

    residual_order = 3 if (cfg.g_b > 0 and g.edges) else 0
    problem = CompiledProblem(
        quadratic=params,
        residual_order=residual_order,
        gradient_handle=partial(mcds_energy_gradient, g, cfg=cfg),
        energy_handle=partial(mcds_energy, g, cfg=cfg),
        offset=0.5 * cfg.g_b * g.n,
        graph=g,
        cfg=cfg,
        residual_handle=partial(_mcds_residual, g, cfg),
    )
    logger.debug(
        f"Compiled domination energy: K={g.n}, nonzero weights={int(np.count_nonzero(W))}, "
        f"residual_order={residual_order}"
    )
    return problem


def bipolar_parameters(W: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """
    Rewrite unipolar parameters for outputs v = 2z - 1.

    The quadratic form in z equals (up to a constant) the form in v with
    weights W/4 and biases W.1/4 + b/2.
    """
    W = np.asarray(W, dtype=float)
    b = np.asarray(b, dtype=float)
    row_sums = np.array([math.fsum(row) for row in W.tolist()])
    return W / 4.0, row_sums / 4.0 + b / 2.0


# =============================================================================
# Liapunov function
# =============================================================================

def _integral_term(z: np.ndarray) -> np.ndarray:
    # Integral of logit from 0.5 to z; zero at the sigmoid midpoint.
    return z * np.log(z) + (1.0 - z) * np.log1p(-z) + math.log(2.0)


def quadratic_liapunov(p: HopfieldParams, z) -> float:
    """
    -1/2 z'Wz + (1/lam) sum_i L(z_i) - b'z, L the logit integral from 0.5.

    lam = inf is the threshold limit: the integral term is dropped and the
    closed interval [0, 1] is admitted.
    """
    z = _as_state(z, p.size)
    quadratic = float(-0.5 * z @ p.W @ z - p.b @ z)
    if math.isinf(p.lam):
        if np.any((z < 0) | (z > 1)):
            raise LiapunovDomainError("outputs must lie in [0, 1]")
        return quadratic
    if np.any((z <= 0) | (z >= 1)):
        raise LiapunovDomainError("outputs must lie in the open interval (0, 1)")
    return quadratic + float(np.sum(_integral_term(z))) / p.lam


def integral_penalty(z: np.ndarray, lam: float) -> float:
    """(1/lam) sum_i L(z_i); the term gradient dynamics add to the problem energy."""
    if math.isinf(lam):
        return 0.0
    z = np.clip(np.asarray(z, dtype=float), 1e-300, 1.0 - 1e-16)
    return float(np.sum(_integral_term(z))) / lam


# =============================================================================
# Flat text format
# =============================================================================

def render_compiled(problem: CompiledProblem) -> str:
    """Header (K, lambda, gains), the bias vector, sparse W triples and the problem edges."""
    p = problem.quadratic
    cfg = problem.cfg
    lines = [
        f"K {p.size}",
        f"lambda {p.lam!r}",
    ]
    if cfg is not None:
        lines.append(f"g_a {cfg.g_a!r}")
        lines.append(f"g_b {cfg.g_b!r}")
    lines.append(f"offset {problem.offset!r}")
    lines.append(f"residual_order {problem.residual_order}")
    lines.append("b " + " ".join(repr(float(x)) for x in p.b))
    for i in range(p.size):
        for j in range(p.size):
            if p.W[i, j] != 0:
                lines.append(f"w {i} {j} {float(p.W[i, j])!r}")
    if problem.graph is not None:
        lines.extend(f"e {u} {v}" for u, v in problem.graph.edges)
    return "\n".join(lines) + "\n"


def parse_compiled(text: str) -> CompiledProblem:
    """Inverse of render_compiled."""
    header: dict[str, str] = {}
    b: list[float] | None = None
    triples: list[tuple[int, int, float]] = []
    edges: list[tuple[int, int]] = []

    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, _, rest = line.partition(" ")
        try:
            if key == "b":
                b = [float(x) for x in rest.split()]
            elif key == "w":
                i, j, w = rest.split()
                triples.append((int(i), int(j), float(w)))
            elif key == "e":
                u, v = rest.split()
                edges.append((int(u), int(v)))
            elif key in ("K", "lambda", "g_a", "g_b", "offset", "residual_order"):
                header[key] = rest.strip()
            else:
                raise CompiledFormatError(f"line {line_number}: unknown record {key!r}")
        except ValueError as e:
            if isinstance(e, CompiledFormatError):
                raise
            raise CompiledFormatError(f"line {line_number}: {e}") from e

    if "K" not in header or b is None:
        raise CompiledFormatError("missing K header or bias vector")
    k = int(header["K"])
    W = np.zeros((k, k))
    for i, j, w in triples:
        W[i, j] = w
    params = HopfieldParams(W=W, b=np.array(b), lam=float(header.get("lambda", DEFAULT_LAMBDA)))

    if "g_a" in header and "g_b" in header:
        g = Graph.from_edges(k, edges)
        cfg = EnergyConfig(float(header["g_a"]), float(header["g_b"]))
        return CompiledProblem(
            quadratic=params,
            residual_order=int(header.get("residual_order", 0)),
            gradient_handle=partial(mcds_energy_gradient, g, cfg=cfg),
            energy_handle=partial(mcds_energy, g, cfg=cfg),
            offset=float(header.get("offset", 0.0)),
            graph=g,
            cfg=cfg,
            residual_handle=partial(_mcds_residual, g, cfg),
        )
    return CompiledProblem.from_params(params)
