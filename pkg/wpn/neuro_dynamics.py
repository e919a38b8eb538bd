"""
Centralized reference engines for Hopfield and mean-field-annealing dynamics.

Engines:
- gradient: generalized Hopfield dynamics on the exact energy gradient (default)
- hopfield: classic dynamics on the compiled quadratic part (euler_memory or memoryless)
- mfa: mean field annealing on bipolar outputs with a geometric temperature schedule
- threshold: binary memoryless units, the infinite-slope limit

Every neuron update goes through the scalar kernels at the top of this module.
Motes in wpn_sim call the same kernels with their cached neighbor values, so
a lockstep distributed run reproduces a synchronous centralized run bit for bit.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from wpn.energy_model import (
    DEFAULT_LAMBDA,
    CompiledProblem,
    DimensionMismatchError,
    HopfieldParams,
    bipolar_parameters,
    integral_penalty,
    local_gradient,
    neighbor_sum,
)

logger = logging.getLogger(__name__)


ENGINES = ("gradient", "hopfield", "mfa", "threshold")
HOPFIELD_MODES = ("euler_memory", "memoryless")
UPDATE_ORDERS = ("synchronous", "async_seeded")

DEFAULT_DT = 0.01
DEFAULT_TAU = 0.5
DEFAULT_MU = 1.0
INIT_LOW = 0.4
INIT_HIGH = 0.6


class NumericalDivergenceError(ArithmeticError):
    """Raised when a neuron value becomes non-finite."""

    def __init__(self, step: int, message: str = "", episode: int | None = None):
        self.step = step
        self.episode = episode
        self.detail = message
        super().__init__(step, message, episode)

    def __str__(self) -> str:
        where = f"step {self.step}" if self.episode is None else f"episode {self.episode}, step {self.step}"
        return f"non-finite neuron value at {where}" + (f": {self.detail}" if self.detail else "")


# =============================================================================
# Scalar kernels (shared with the distributed simulator)
# =============================================================================

def _logistic(x: float) -> float:
    if x < -700.0:
        return 0.0
    return 1.0 / (1.0 + math.exp(-x))


def sigmoid(u, lam: float):
    """1 / (1 + exp(-lam u)) for a scalar or an array; saturates instead of overflowing."""
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    if np.ndim(u) == 0:
        if math.isinf(lam):
            return threshold(float(u))
        return _logistic(lam * float(u))
    arr = np.asarray(u, dtype=float)
    return np.array([sigmoid(x, lam) for x in arr.ravel().tolist()]).reshape(arr.shape)


def logit(z):
    z = np.asarray(z, dtype=float)
    return np.log(z / (1.0 - z))


def threshold(x: float) -> float:
    """Binary unit: 1 for strictly positive input, 0 otherwise (input exactly 0 gives 0)."""
    return 1.0 if x > 0 else 0.0


def row_field(weights: np.ndarray, outputs: np.ndarray) -> float:
    """Exactly rounded weighted input sum_j w_ij z_j over one coupling row."""
    return math.fsum((weights * outputs).tolist())


def euler_update(u: float, drive: float, dt: float) -> float:
    return u + dt * (-u + drive)


def mfa_update(v: float, step: float, field_value: float, temperature: float) -> float:
    # Convex combination keeps v in [-1, 1]; step = 1 returns the tanh value exactly.
    return (1.0 - step) * v + step * math.tanh(field_value / temperature)


# =============================================================================
# Types
# =============================================================================

@dataclass(frozen=True)
class TemperatureSchedule:
    """Geometric schedule T_k = max(t0 alpha^k, t_min)."""
    t0: float = 10.0
    alpha: float = 0.95
    t_min: float = 0.01

    def __post_init__(self) -> None:
        if not self.t_min > 0:
            raise ValueError(f"t_min must be positive, got {self.t_min}")
        if self.t0 < self.t_min:
            raise ValueError(f"t0 ({self.t0}) must be >= t_min ({self.t_min})")
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")

    def temperature(self, k: int) -> float:
        return max(self.t0 * self.alpha ** k, self.t_min)

    def at_floor(self, k: int) -> bool:
        return self.t0 * self.alpha ** k <= self.t_min


@dataclass(frozen=True, eq=False)
class MfaParams:
    """Bipolar weights W, gains mu, biases theta, step tau and the temperature schedule."""
    W: np.ndarray
    mu: np.ndarray
    theta: np.ndarray
    tau: float = DEFAULT_TAU
    schedule: TemperatureSchedule = field(default_factory=TemperatureSchedule)

    def __post_init__(self) -> None:
        W = np.array(self.W, dtype=float)
        mu = np.array(self.mu, dtype=float)
        theta = np.array(self.theta, dtype=float)
        k = theta.shape[0]
        if W.shape != (k, k) or mu.shape != (k,):
            raise DimensionMismatchError(
                f"inconsistent MFA shapes: W {W.shape}, mu {mu.shape}, theta {theta.shape}"
            )
        if np.any(mu <= 0):
            raise ValueError("all gains mu must be positive")
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "theta", theta)

    @property
    def size(self) -> int:
        return self.theta.shape[0]

    @cached_property
    def coupling_rows(self) -> tuple[tuple[np.ndarray, np.ndarray], ...]:
        rows = []
        for i in range(self.size):
            idx = np.flatnonzero(self.W[i])
            rows.append((idx, self.W[i, idx].copy()))
        return tuple(rows)

    @classmethod
    def from_hopfield(
        cls,
        p: HopfieldParams,
        tau: float = DEFAULT_TAU,
        mu: float = DEFAULT_MU,
        schedule: TemperatureSchedule | None = None,
    ) -> MfaParams:
        """Bipolar rewrite of unipolar Hopfield parameters."""
        W, theta = bipolar_parameters(p.W, p.b)
        return cls(
            W=W,
            mu=np.full(p.size, float(mu)),
            theta=theta,
            tau=tau,
            schedule=schedule or TemperatureSchedule(),
        )


@dataclass(frozen=True, eq=False)
class NeuronState:
    """
    Activations u, outputs z and recursion index k.

    For mfa episodes z holds unipolar outputs and u the bipolar means v = 2z - 1.
    """
    u: np.ndarray
    z: np.ndarray
    k: int = 0

    def __post_init__(self) -> None:
        u = np.asarray(self.u, dtype=float)
        z = np.asarray(self.z, dtype=float)
        if u.shape != z.shape or u.ndim != 1:
            raise DimensionMismatchError(f"u has shape {u.shape}, z has shape {z.shape}")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "z", z)

    @property
    def size(self) -> int:
        return self.z.shape[0]


@dataclass(frozen=True)
class ConvergenceCriterion:
    epsilon: float = 1e-6
    max_steps: int = 10000
    max_episodes: int = 100

    def __post_init__(self) -> None:
        if self.epsilon < 0:
            raise ValueError(f"epsilon must be non-negative, got {self.epsilon}")
        if self.max_steps < 1:
            raise ValueError(f"max_steps must be positive, got {self.max_steps}")
        if self.max_episodes < 1:
            raise ValueError(f"max_episodes must be >= 1, got {self.max_episodes}")


@dataclass
class EnergyTrajectory:
    """
    Per-step values of one run.

    liapunov holds the quantity the engine descends (used for descent checks);
    energy holds the problem energy of the outputs (exported).
    """
    steps: list[int] = field(default_factory=list)
    energy: list[float] = field(default_factory=list)
    liapunov: list[float] = field(default_factory=list)

    def record(self, step: int, energy: float, liapunov: float) -> None:
        self.steps.append(step)
        self.energy.append(energy)
        self.liapunov.append(liapunov)

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def final_energy(self) -> float | None:
        return self.energy[-1] if self.energy else None

    def to_tsv(self) -> str:
        lines = ["step\tenergy"]
        lines.extend(f"{k}\t{e!r}" for k, e in zip(self.steps, self.energy))
        return "\n".join(lines) + "\n"


@dataclass
class EpisodeResult:
    """Outcome of one convergence episode."""
    engine: str
    state: NeuronState
    trajectory: EnergyTrajectory
    converged: bool
    steps: int
    seed: int | None = None
    energy: float = 0.0
    readout: frozenset[int] = frozenset()
    readout_energy: float = 0.0

    def to_dict(self) -> dict:
        return {
            "engine": self.engine,
            "seed": self.seed,
            "converged": self.converged,
            "steps": self.steps,
            "energy": self.energy,
            "readout": sorted(self.readout),
            "readout_energy": self.readout_energy,
        }


@dataclass
class BestResult:
    """Lowest-energy episode of a multistart plus the per-episode summary."""
    best: EpisodeResult
    best_index: int
    episodes: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "best_index": self.best_index,
            "best": self.best.to_dict(),
            "episodes": self.episodes,
        }


@dataclass
class BinaryRun:
    """Discrete asynchronous threshold run."""
    z: np.ndarray
    flips: int
    liapunov: list[float]
    stable: bool
    sweeps: int


# =============================================================================
# Representation helpers
# =============================================================================

def to_unipolar(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if np.any((v < -1.0) | (v > 1.0)):
        raise ValueError("bipolar values must lie in [-1, 1]")
    return (1.0 + v) / 2.0


def to_bipolar(z) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    if np.any((z < 0.0) | (z > 1.0)):
        raise ValueError("unipolar values must lie in [0, 1]")
    return 2.0 * z - 1.0


def binary_readout(z) -> np.ndarray:
    """z > 0.5 is active; exactly 0.5 reads as inactive."""
    return (np.asarray(z, dtype=float) > 0.5).astype(float)


def readout_set(z) -> frozenset[int]:
    return frozenset(int(i) for i in np.flatnonzero(binary_readout(z)))


def random_initial_state(k: int, lam: float = DEFAULT_LAMBDA, seed=None) -> NeuronState:
    """Outputs uniform in (0.4, 0.6) with consistent activations u = logit(z) / lam."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    z = rng.uniform(INIT_LOW, INIT_HIGH, size=k)
    u = np.zeros(k) if math.isinf(lam) else logit(z) / lam
    return NeuronState(u=u, z=z, k=0)


def _check_size(s: NeuronState, size: int) -> None:
    if s.size != size:
        raise DimensionMismatchError(f"state has {s.size} neurons, parameters have {size}")


# =============================================================================
# Single steps
# =============================================================================

def hopfield_continuous_rhs(s: NeuronState, p: HopfieldParams) -> np.ndarray:
    """du/dt = -u + W z + b with z = sigmoid(u, lam)."""
    _check_size(s, p.size)
    z = sigmoid(s.u, p.lam)
    return -s.u + p.W @ z + p.b


def hopfield_drive(p: HopfieldParams, i: int, z: np.ndarray) -> float:
    idx, weights = p.coupling_rows[i]
    return row_field(weights, z[idx]) + float(p.b[i])


def hopfield_step(
    s: NeuronState,
    p: HopfieldParams,
    dt: float = DEFAULT_DT,
    mode: str = "euler_memory",
) -> NeuronState:
    """One synchronous step of the quadratic dynamics."""
    _check_size(s, p.size)
    if mode not in HOPFIELD_MODES:
        raise ValueError(f"unknown hopfield mode: {mode}")
    if mode == "euler_memory" and not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")

    drive = np.array([hopfield_drive(p, i, s.z) for i in range(p.size)])
    u = s.u + dt * (-s.u + drive) if mode == "euler_memory" else drive
    return NeuronState(u=u, z=sigmoid(u, p.lam), k=s.k + 1)


def gradient_drive(prob: CompiledProblem, i: int, z: np.ndarray) -> float:
    """-dE/dz_i at z, from the neighborhood of i only."""
    g = prob.graph
    if g is None or prob.cfg is None:
        return hopfield_drive(prob.quadratic, i, z)
    values = z.tolist()
    s = {j: neighbor_sum(values[l] for l in g.neighbors[j]) for j in (i, *g.neighbors[i])}
    nbrs = g.neighbors[i]
    return -local_gradient(prob.cfg, s[i], [s[j] for j in nbrs], [values[j] for j in nbrs])


def gradient_step(s: NeuronState, prob: CompiledProblem, dt: float = DEFAULT_DT) -> NeuronState:
    """u <- u + dt (-u - dE/dz); exact gradient including the cubic terms."""
    _check_size(s, prob.size)
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    drive = -prob.gradient(s.z)
    u = s.u + dt * (-s.u + drive)
    return NeuronState(u=u, z=sigmoid(u, prob.quadratic.lam), k=s.k + 1)


def mfa_field(p: MfaParams, i: int, v: np.ndarray) -> float:
    idx, weights = p.coupling_rows[i]
    return row_field(weights, v[idx]) + float(p.theta[i])


def mfa_step(v, p: MfaParams, T: float) -> np.ndarray:
    """v_i <- v_i - tau mu_i (v_i - tanh((sum_j w_ij v_j + theta_i) / T))."""
    if not T > 0:
        raise ValueError(f"temperature must be positive, got {T}")
    v = np.asarray(v, dtype=float)
    if v.shape != (p.size,):
        raise DimensionMismatchError(f"state has shape {v.shape}, expected ({p.size},)")
    return np.array([
        mfa_update(float(v[i]), p.tau * float(p.mu[i]), mfa_field(p, i, v), T)
        for i in range(p.size)
    ])


# =============================================================================
# Liapunov bookkeeping
# =============================================================================

def _quadratic_value(p: HopfieldParams, z: np.ndarray) -> float:
    return float(-0.5 * z @ p.W @ z - p.b @ z)


def engine_liapunov(engine: str, prob: CompiledProblem, z: np.ndarray) -> float:
    """The quantity each engine's continuous dynamics descend, evaluated at unipolar z."""
    lam = prob.quadratic.lam
    if engine == "gradient":
        return prob.energy(z) + integral_penalty(z, lam)
    if engine == "hopfield":
        return _quadratic_value(prob.quadratic, z) + integral_penalty(z, lam)
    if engine == "mfa":
        W, theta = bipolar_parameters(prob.quadratic.W, prob.quadratic.b)
        v = 2.0 * z - 1.0
        return float(-0.5 * v @ W @ v - theta @ v)
    return _quadratic_value(prob.quadratic, z)


# =============================================================================
# Episodes
# =============================================================================

def run_episode(
    engine: str,
    prob: CompiledProblem,
    init: NeuronState,
    crit: ConvergenceCriterion = ConvergenceCriterion(),
    sched: TemperatureSchedule = TemperatureSchedule(),
    update_order: str = "synchronous",
    seed: int | None = None,
    dt: float = DEFAULT_DT,
    mode: str = "euler_memory",
    tau: float = DEFAULT_TAU,
    mu: float = DEFAULT_MU,
) -> EpisodeResult:
    """
    Iterate one engine until max |dz| over a full sweep drops below epsilon
    or max_steps sweeps have run.

    async_seeded updates neurons one at a time in a fresh seeded permutation
    per sweep; synchronous updates all neurons from the previous outputs.
    For mfa, convergence also requires the temperature to have reached its floor.
    """
    if engine not in ENGINES:
        raise ValueError(f"unknown engine: {engine}")
    if update_order not in UPDATE_ORDERS:
        raise ValueError(f"unknown update order: {update_order}")
    _check_size(init, prob.size)

    p = prob.quadratic
    rng = np.random.default_rng(seed)
    mfa = MfaParams.from_hopfield(p, tau=tau, mu=mu, schedule=sched) if engine == "mfa" else None

    state = init
    if engine == "mfa":
        state = NeuronState(u=to_bipolar(init.z), z=init.z, k=init.k)
    elif engine == "threshold":
        state = NeuronState(u=init.u, z=binary_readout(init.z), k=init.k)

    trajectory = EnergyTrajectory()
    trajectory.record(0, prob.energy(state.z), engine_liapunov(engine, prob, state.z))

    converged = False
    steps = 0
    for step in range(1, crit.max_steps + 1):
        if update_order == "synchronous":
            new = _synchronous_step(engine, prob, mfa, state, dt, mode, sched)
        else:
            new = _asynchronous_sweep(engine, prob, mfa, state, dt, mode, sched, rng)

        if not (np.all(np.isfinite(new.u)) and np.all(np.isfinite(new.z))):
            raise NumericalDivergenceError(step, f"engine {engine}")

        delta = float(np.max(np.abs(new.z - state.z))) if new.size else 0.0
        state = new
        steps = step
        trajectory.record(step, prob.energy(state.z), engine_liapunov(engine, prob, state.z))

        if delta < crit.epsilon and (engine != "mfa" or sched.at_floor(step - 1)):
            converged = True
            break

    readout = binary_readout(state.z)
    result = EpisodeResult(
        engine=engine,
        state=state,
        trajectory=trajectory,
        converged=converged,
        steps=steps,
        seed=seed,
        energy=prob.energy(state.z),
        readout=readout_set(state.z),
        readout_energy=prob.energy(readout),
    )
    logger.debug(
        f"Episode {engine} seed={seed}: steps={steps}, converged={converged}, "
        f"E={result.energy:.3e}, readout={sorted(result.readout)}"
    )
    return result


def _synchronous_step(engine, prob, mfa, state, dt, mode, sched) -> NeuronState:
    if engine == "gradient":
        return gradient_step(state, prob, dt)
    if engine == "hopfield":
        return hopfield_step(state, prob.quadratic, dt, mode)
    if engine == "mfa":
        v = mfa_step(state.u, mfa, sched.temperature(state.k))
        return NeuronState(u=v, z=(1.0 + v) / 2.0, k=state.k + 1)
    p = prob.quadratic
    drive = np.array([hopfield_drive(p, i, state.z) for i in range(p.size)])
    return NeuronState(u=drive, z=np.array([threshold(x) for x in drive.tolist()]), k=state.k + 1)


def _asynchronous_sweep(engine, prob, mfa, state, dt, mode, sched, rng) -> NeuronState:
    p = prob.quadratic
    u = state.u.copy()
    z = state.z.copy()
    temperature = sched.temperature(state.k)
    for i in rng.permutation(p.size).tolist():
        if engine == "gradient":
            u[i] = euler_update(float(u[i]), gradient_drive(prob, i, z), dt)
            z[i] = sigmoid(float(u[i]), p.lam)
        elif engine == "hopfield":
            drive = hopfield_drive(p, i, z)
            u[i] = euler_update(float(u[i]), drive, dt) if mode == "euler_memory" else drive
            z[i] = sigmoid(float(u[i]), p.lam)
        elif engine == "mfa":
            u[i] = mfa_update(float(u[i]), mfa.tau * float(mfa.mu[i]), mfa_field(mfa, i, u), temperature)
            z[i] = (1.0 + u[i]) / 2.0
        else:
            u[i] = hopfield_drive(p, i, z)
            z[i] = threshold(float(u[i]))
    return NeuronState(u=u, z=z, k=state.k + 1)


def run_multistart(
    prob: CompiledProblem,
    crit: ConvergenceCriterion,
    seeds: Sequence[int],
    engine: str = "gradient",
    **dynamics,
) -> BestResult:
    """
    One episode per seed from a fresh random initial state.

    The best episode has the lowest readout energy; ties go to the lower
    continuous energy, then to the earlier seed.
    """
    if not seeds:
        raise ValueError("at least one seed is required")
    if len(seeds) > crit.max_episodes:
        raise ValueError(f"{len(seeds)} seeds exceed max_episodes={crit.max_episodes}")

    started = time.time()
    best: EpisodeResult | None = None
    best_index = 0
    summary = []
    for index, seed in enumerate(seeds):
        init = random_initial_state(prob.size, prob.quadratic.lam, seed)
        try:
            result = run_episode(engine, prob, init, crit, seed=seed, **dynamics)
        except NumericalDivergenceError as e:
            raise NumericalDivergenceError(e.step, f"seed {seed}", episode=index) from e
        summary.append(result.to_dict())
        if best is None or (result.readout_energy, result.energy) < (best.readout_energy, best.energy):
            best = result
            best_index = index

    logger.info(
        f"Multistart completed: {len(seeds)} episodes, best seed={best.seed}, "
        f"readout energy={best.readout_energy:.3e} ({time.time() - started:.2f}s)"
    )
    return BestResult(best=best, best_index=best_index, episodes=summary)


def run_binary_async(
    params: HopfieldParams,
    z0,
    seed: int | None = None,
    max_sweeps: int = 1000,
) -> BinaryRun:
    """
    Discrete asynchronous threshold network.

    Neurons are visited in a fresh seeded permutation each sweep; the run ends
    after the first sweep without a state change (a stable state) or after
    max_sweeps. The quadratic Liapunov value is recorded initially and after
    every flip.
    """
    z = binary_readout(z0)
    if z.shape != (params.size,):
        raise DimensionMismatchError(f"state has shape {z.shape}, expected ({params.size},)")
    rng = np.random.default_rng(seed)

    liapunov = [_quadratic_value(params, z)]
    flips = 0
    stable = False
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        changed = False
        for i in rng.permutation(params.size).tolist():
            new = threshold(hopfield_drive(params, i, z))
            if new != z[i]:
                z[i] = new
                flips += 1
                changed = True
                liapunov.append(_quadratic_value(params, z))
        if not changed:
            stable = True
            break

    return BinaryRun(z=z, flips=flips, liapunov=liapunov, stable=stable, sweeps=sweeps)
