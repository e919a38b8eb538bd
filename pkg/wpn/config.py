"""
Experiment configuration loaded from a YAML file.

One mapping per section (problem, energy, dynamics, criterion, mac,
simulation) plus top-level `seeds` and `output`. Every key has a documented
default; unknown keys and mistyped values raise ConfigError naming the
dotted key.

Example:
    problem:
      edge_list: p3.edges
    dynamics:
      engine: gradient
      lambda: 20.0
    seeds: [0, 1, 2]
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any

import yaml

from wpn.energy_model import CompiledProblem, EnergyConfig, compile_mcds
from wpn.graph_core import Graph, generate_random_geometric, generate_unit_disk, named_graph, parse_edge_list
from wpn.neuro_dynamics import (
    ENGINES,
    HOPFIELD_MODES,
    UPDATE_ORDERS,
    ConvergenceCriterion,
    TemperatureSchedule,
)
from wpn.radio import MacConfig
from wpn.wpn_sim import SimulationOptions

logger = logging.getLogger(__name__)


class ConfigError(ValueError):
    """Raised for unknown keys, wrong types or invalid values in a config."""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


def _opt(default, kind, doc: str, yaml_key: str | None = None):
    return field(default=default, metadata={"kind": kind, "doc": doc, "yaml_key": yaml_key})


@dataclass
class ProblemSection:
    edge_list: str | None = _opt(None, str, "edge-list file (relative to the config file)")
    family: str | None = _opt(None, str, "named graph: P<n>, C<n>, K<n>, K1,<n>, E<n>")
    generator: str = _opt("random_geometric", str, "generator used when no edge list or family is given")
    n: int = _opt(12, int, "generator vertex count")
    radius: float = _opt(0.4, float, "unit-disk radius on the unit square")
    seed: int = _opt(1, int, "generator seed")


@dataclass
class EnergySection:
    g_a: float = _opt(1.0, float, "independence penalty gain (>= 0)")
    g_b: float = _opt(1.0, float, "exactly-one domination penalty gain (>= 0, not both zero)")


@dataclass
class DynamicsSection:
    engine: str = _opt("gradient", str, "gradient | hopfield | mfa | threshold")
    lam: float = _opt(20.0, float, "sigmoid slope", yaml_key="lambda")
    dt: float = _opt(0.01, float, "Euler step")
    mode: str = _opt("euler_memory", str, "hopfield mode: euler_memory | memoryless")
    update_order: str = _opt("synchronous", str, "synchronous | async_seeded")
    tau: float = _opt(0.5, float, "mfa discretization step")
    mu: float = _opt(1.0, float, "mfa gain for every neuron")
    t0: float = _opt(10.0, float, "mfa initial temperature")
    alpha: float = _opt(0.95, float, "mfa geometric temperature decay")
    t_min: float = _opt(0.01, float, "mfa temperature floor")


@dataclass
class CriterionSection:
    epsilon: float = _opt(1e-6, float, "tolerance on max |dz| over a sweep")
    max_steps: int = _opt(10000, int, "sweep limit per episode")
    max_episodes: int = _opt(100, int, "episode limit (multistart seeds, distributed restarts)")


@dataclass
class MacSection:
    kind: str = _opt("ideal_tdma", str, "ideal_tdma | slotted_aloha")
    slot_time: float = _opt(1e-6, float, "simulated seconds per slot")
    channels: int = _opt(1, int, "radio channels")
    p_transmit: float = _opt(0.5, float, "slotted_aloha per-slot transmit probability")


@dataclass
class SimulationSection:
    enabled: bool = _opt(False, bool, "also run the distributed simulation")
    runs: int = _opt(1, int, "number of seeds (from the front of `seeds`) to simulate")
    trigger: str = _opt("periodic", str, "periodic | on_receive")
    period: int | None = _opt(None, int, "periodic trigger interval in slots (null derives it)")
    delta: float = _opt(1e-4, float, "broadcast threshold on output change")
    max_time: float = _opt(10.0, float, "simulated seconds limit")
    fanout: str = _opt("coupled", str, "coupled | all")
    trace: bool = _opt(False, bool, "write per-transmission trace rows")
    topology_radius: float | None = _opt(
        None, float, "distinct radio topology: unit-disk radius over the problem positions"
    )


SECTIONS: dict[str, type] = {
    "problem": ProblemSection,
    "energy": EnergySection,
    "dynamics": DynamicsSection,
    "criterion": CriterionSection,
    "mac": MacSection,
    "simulation": SimulationSection,
}

DEFAULT_SEEDS = list(range(10))
DEFAULT_OUTPUT = "out"


@dataclass
class ExperimentConfig:
    problem: ProblemSection = field(default_factory=ProblemSection)
    energy: EnergySection = field(default_factory=EnergySection)
    dynamics: DynamicsSection = field(default_factory=DynamicsSection)
    criterion: CriterionSection = field(default_factory=CriterionSection)
    mac: MacSection = field(default_factory=MacSection)
    simulation: SimulationSection = field(default_factory=SimulationSection)
    seeds: list[int] = field(default_factory=lambda: list(DEFAULT_SEEDS))
    output: str = DEFAULT_OUTPUT
    base_dir: Path = field(default_factory=Path)

    # -- domain objects -----------------------------------------------------

    def energy_config(self) -> EnergyConfig:
        return _build("energy", EnergyConfig, g_a=self.energy.g_a, g_b=self.energy.g_b)

    def schedule(self) -> TemperatureSchedule:
        d = self.dynamics
        return _build("dynamics", TemperatureSchedule, t0=d.t0, alpha=d.alpha, t_min=d.t_min)

    def criterion_config(self) -> ConvergenceCriterion:
        c = self.criterion
        return _build(
            "criterion", ConvergenceCriterion,
            epsilon=c.epsilon, max_steps=c.max_steps, max_episodes=c.max_episodes,
        )

    def mac_config(self) -> MacConfig:
        m = self.mac
        return _build(
            "mac", MacConfig,
            kind=m.kind, slot_time=m.slot_time, channels=m.channels, p_transmit=m.p_transmit,
        )

    def dynamics_options(self) -> dict:
        """Keyword arguments for run_episode / run_multistart."""
        d = self.dynamics
        return {
            "sched": self.schedule(),
            "update_order": d.update_order,
            "dt": d.dt,
            "mode": d.mode,
            "tau": d.tau,
            "mu": d.mu,
        }

    def simulation_options(self) -> SimulationOptions:
        d, s = self.dynamics, self.simulation
        return _build(
            "simulation", SimulationOptions,
            engine=d.engine, trigger=s.trigger, period=s.period, delta=s.delta,
            max_time=s.max_time, fanout=s.fanout, trace=s.trace,
            dt=d.dt, mode=d.mode, tau=d.tau, mu=d.mu, schedule=self.schedule(),
        )

    def resolve(self, path: str) -> Path:
        p = Path(path)
        return p if p.is_absolute() else self.base_dir / p

    # -- problem ------------------------------------------------------------

    def problem_graph(self) -> Graph:
        """Edge list first, then a named family, then the seeded generator."""
        p = self.problem
        if p.edge_list is not None:
            path = self.resolve(p.edge_list)
            try:
                text = path.read_text(encoding="utf-8")
            except OSError as e:
                raise ConfigError("problem.edge_list", f"cannot read {path}: {e}") from e
            return parse_edge_list(text)
        if p.family is not None:
            return _build("problem.family", named_graph, name=p.family)
        return _build("problem", generate_random_geometric, n=p.n, radius=p.radius, seed=p.seed)

    def topology(self, g: Graph) -> Graph:
        """The radio topology: the problem graph unless topology_radius is set."""
        radius = self.simulation.topology_radius
        if radius is None:
            return g
        if not g.positions:
            raise ConfigError("simulation.topology_radius", "the problem graph carries no positions")
        return _build("simulation.topology_radius", generate_unit_disk, positions=g.positions, radius=radius)

    def compiled_problem(self, g: Graph) -> CompiledProblem:
        return compile_mcds(g, self.energy_config(), self.dynamics.lam)

    def to_dict(self) -> dict:
        data: dict[str, Any] = {}
        for name, section_type in SECTIONS.items():
            section = getattr(self, name)
            data[name] = {
                f.metadata.get("yaml_key") or f.name: getattr(section, f.name)
                for f in fields(section_type)
            }
        data["seeds"] = list(self.seeds)
        data["output"] = self.output
        return data


def _build(key: str, factory, **kwargs):
    try:
        return factory(**kwargs)
    except (TypeError, ValueError) as e:
        raise ConfigError(key, str(e)) from e


def _coerce(key: str, value: Any, kind: type, nullable: bool) -> Any:
    if value is None:
        if nullable:
            return None
        raise ConfigError(key, "must not be null")
    if kind is bool:
        if not isinstance(value, bool):
            raise ConfigError(key, f"expected true/false, got {value!r}")
        return value
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(key, f"expected an integer, got {value!r}")
        return value
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(key, f"expected a number, got {value!r}")
        return float(value)
    if not isinstance(value, str):
        raise ConfigError(key, f"expected a string, got {value!r}")
    return value


def _load_section(name: str, section_type: type, raw: Any):
    if raw is None:
        return section_type()
    if not isinstance(raw, dict):
        raise ConfigError(name, "section must be a mapping")

    by_yaml_key = {f.metadata.get("yaml_key") or f.name: f for f in fields(section_type)}
    values = {}
    for key, value in raw.items():
        dotted = f"{name}.{key}"
        f = by_yaml_key.get(key)
        if f is None:
            raise ConfigError(dotted, "unknown key")
        values[f.name] = _coerce(dotted, value, f.metadata["kind"], nullable=f.default is None)
    return section_type(**values)


def parse_config(data: Any, base_dir: Path | str = ".") -> ExperimentConfig:
    """Build an ExperimentConfig from an already parsed YAML document."""
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("<root>", "config must be a mapping of sections")

    for key in data:
        if key not in SECTIONS and key not in ("seeds", "output"):
            raise ConfigError(str(key), "unknown section")

    config = ExperimentConfig(base_dir=Path(base_dir))
    for name, section_type in SECTIONS.items():
        setattr(config, name, _load_section(name, section_type, data.get(name)))

    if "seeds" in data:
        seeds = data["seeds"]
        if not isinstance(seeds, list) or not seeds:
            raise ConfigError("seeds", "expected a non-empty list of integers")
        config.seeds = [_coerce("seeds", s, int, nullable=False) for s in seeds]
    if "output" in data:
        config.output = _coerce("output", data["output"], str, nullable=False)

    _validate(config)
    return config


def _validate(config: ExperimentConfig) -> None:
    d = config.dynamics
    if d.engine not in ENGINES:
        raise ConfigError("dynamics.engine", f"expected one of {', '.join(ENGINES)}, got {d.engine!r}")
    if d.mode not in HOPFIELD_MODES:
        raise ConfigError("dynamics.mode", f"expected one of {', '.join(HOPFIELD_MODES)}, got {d.mode!r}")
    if d.update_order not in UPDATE_ORDERS:
        raise ConfigError(
            "dynamics.update_order", f"expected one of {', '.join(UPDATE_ORDERS)}, got {d.update_order!r}"
        )
    for key in ("lam", "dt", "tau", "mu"):
        if not getattr(d, key) > 0:
            raise ConfigError(f"dynamics.{'lambda' if key == 'lam' else key}", "must be positive")
    if config.problem.generator != "random_geometric":
        raise ConfigError("problem.generator", f"unknown generator {config.problem.generator!r}")
    if config.simulation.runs < 1:
        raise ConfigError("simulation.runs", "must be >= 1")
    if len(config.seeds) > config.criterion.max_episodes:
        raise ConfigError("seeds", f"{len(config.seeds)} seeds exceed criterion.max_episodes")

    # Build every domain object once so value errors surface at load time.
    config.energy_config()
    config.criterion_config()
    config.mac_config()
    config.simulation_options()


def load_config(path: Path | str | None) -> ExperimentConfig:
    """Load a YAML config; None gives the defaults."""
    if path is None:
        return parse_config({})
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f)
    except OSError as e:
        raise ConfigError("<file>", f"cannot read {path}: {e}") from e
    except yaml.YAMLError as e:
        raise ConfigError("<file>", f"invalid YAML in {path}: {e}") from e
    logger.debug(f"Loaded config from {path}")
    return parse_config(data, base_dir=path.parent)


def schema_lines() -> list[str]:
    """One `section.key = default` line per configurable key."""
    lines = []
    for name, section_type in SECTIONS.items():
        for f in fields(section_type):
            key = f.metadata.get("yaml_key") or f.name
            default = "null" if f.default is None else yaml.safe_dump(f.default).splitlines()[0]
            lines.append(f"{name}.{key} = {default}")
    lines.append(f"seeds = {DEFAULT_SEEDS}")
    lines.append(f"output = {DEFAULT_OUTPUT}")
    return lines


def describe_schema() -> str:
    """Every key with its default and meaning, for help output."""
    docs = {}
    for name, section_type in SECTIONS.items():
        for f in fields(section_type):
            docs[f"{name}.{f.metadata.get('yaml_key') or f.name}"] = f.metadata["doc"]
    docs["seeds"] = "multistart seeds (one centralized episode each)"
    docs["output"] = "artifact directory"

    out = ["config keys (YAML, one mapping per section):"]
    for line in schema_lines():
        key = line.split(" = ", 1)[0]
        out.append(f"  {line}    # {docs[key]}")
    return "\n".join(out)
