"""
Invariant suite over a corpus.

Checks:
- energy_ipds: the penalty energy of every binary indicator is zero exactly
  when the IPDS predicate accepts the set
- flip_bound: asynchronous threshold runs on random integer networks descend
  the quadratic Liapunov value at every flip, stay within 3 sum |w_ij| flips,
  and stop in a state the oracle lists as stable
- distributed_stable: threshold motes on a slotted ALOHA medium that converge
  stop in a state the oracle lists as stable
- equivalence: a lockstep distributed run on an ideal medium reproduces the
  centralized synchronous episode
"""

from __future__ import annotations

import logging
import time
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from wpn.corpus import CorpusEntry, random_integer_network
from wpn.cost_model import state_change_bound
from wpn.energy_model import CompiledProblem, EnergyConfig, compile_mcds, mcds_energy
from wpn.graph_core import Graph, indicator, is_independent_perfect_dominating, named_graph, render_edge_list
from wpn.neuro_dynamics import (
    ConvergenceCriterion,
    random_initial_state,
    run_binary_async,
    run_episode,
)
from wpn.oracle import OracleLimit, OracleLimitExceeded, enumerate_stable_states
from wpn.radio import MacConfig
from wpn.wpn_sim import SimulationOptions, embed, simulate

logger = logging.getLogger(__name__)


IpdsPredicate = Callable[[Graph, Iterable[int]], bool]

EQUIVALENCE_TOLERANCE = 1e-12
NETWORK_SIZES = (2, 4, 6, 8, 10)
EQUIVALENCE_CRITERION = ConvergenceCriterion(epsilon=1e-6, max_steps=3000, max_episodes=1)
DISTRIBUTED_CRITERION = ConvergenceCriterion(epsilon=1e-6, max_steps=1000, max_episodes=1)


@dataclass
class Violation:
    check: str
    subject: str
    detail: str
    reproducer: str

    def to_dict(self) -> dict:
        return {"check": self.check, "subject": self.subject, "detail": self.detail}


@dataclass
class VerifySummary:
    checks: Counter = field(default_factory=Counter)
    violations: list[Violation] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def total_checks(self) -> int:
        return sum(self.checks.values())

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "total_checks": self.total_checks,
            "checks": dict(sorted(self.checks.items())),
            "violations": [v.to_dict() for v in self.violations],
            "warnings": list(self.warnings),
        }


def _matrix_text(W: np.ndarray) -> str:
    return "\n".join(" ".join(str(int(x)) for x in row) for row in W) + "\n"


def check_energy_ipds(
    entry: CorpusEntry,
    summary: VerifySummary,
    ipds_predicate: IpdsPredicate = is_independent_perfect_dominating,
    cfg: EnergyConfig = EnergyConfig(),
) -> None:
    g = entry.graph
    for code in range(1 << g.n):
        chosen = [v for v in range(g.n) if code >> v & 1]
        zero = mcds_energy(g, indicator(g, chosen), cfg) == 0
        summary.checks["energy_ipds"] += 1
        if zero != ipds_predicate(g, chosen):
            summary.violations.append(Violation(
                check="energy_ipds",
                subject=entry.name,
                detail=f"subset {chosen}: energy zero={zero}, predicate disagrees",
                reproducer=render_edge_list(g) + f"# subset {' '.join(map(str, chosen))}\n",
            ))
            return


def check_flip_bound(k: int, seed: int, summary: VerifySummary, limit: OracleLimit = OracleLimit()) -> None:
    params = random_integer_network(k, seed)
    z0 = random_initial_state(k, seed=seed).z
    run = run_binary_async(params, z0, seed=seed)
    bound = state_change_bound(params.W)
    subject = f"network k={k} seed={seed}"
    reproducer = f"# k {k} seed {seed}\n" + _matrix_text(params.W)

    summary.checks["flip_bound"] += 1
    problems = []
    if any(later > earlier for earlier, later in zip(run.liapunov, run.liapunov[1:])):
        problems.append("Liapunov value increased at a flip")
    if run.flips > bound:
        problems.append(f"{run.flips} flips exceed the bound {bound}")
    if not run.stable:
        problems.append("no stable state reached")
    elif tuple(int(x) for x in run.z) not in set(enumerate_stable_states(params, limit=limit)):
        problems.append("final state is not a fixed point")
    for detail in problems:
        summary.violations.append(Violation("flip_bound", subject, detail, reproducer))


def check_distributed_stable(k: int, seed: int, summary: VerifySummary, limit: OracleLimit = OracleLimit()) -> None:
    """A converged threshold run on a contended medium stops in a stable state."""
    params = random_integer_network(k, seed)
    report = simulate(
        embed(CompiledProblem.from_params(params), named_graph(f"K{k}")),
        MacConfig(kind="slotted_aloha"),
        DISTRIBUTED_CRITERION,
        seed,
        SimulationOptions(engine="threshold", trigger="on_receive", delta=0.0),
    )

    summary.checks["distributed_stable"] += 1
    if not report.converged:
        logger.debug(f"Network k={k} seed={seed}: distributed run stopped ({report.stop_reason})")
        return
    final = tuple(int(x) for x in report.final_z)
    if final not in set(enumerate_stable_states(params, limit=limit)):
        summary.violations.append(Violation(
            check="distributed_stable",
            subject=f"network k={k} seed={seed}",
            detail=f"converged to {list(final)}, which is not a fixed point",
            reproducer=f"# k {k} seed {seed}\n" + _matrix_text(params.W),
        ))


def check_equivalence(entry: CorpusEntry, seed: int, summary: VerifySummary) -> None:
    g = entry.graph
    prob = compile_mcds(g)
    crit = EQUIVALENCE_CRITERION
    init = random_initial_state(g.n, prob.quadratic.lam, seed)
    central = run_episode("gradient", prob, init, crit, seed=seed)
    report = simulate(
        embed(prob, g),
        MacConfig(kind="ideal_tdma"),
        crit,
        seed,
        SimulationOptions(engine="gradient", trigger="periodic", delta=0.0),
    )

    summary.checks["equivalence"] += 1
    gap = float(np.max(np.abs(central.state.z - report.final_z)))
    same_steps = central.trajectory.energy == report.energy_trajectory.energy
    if gap > EQUIVALENCE_TOLERANCE or not same_steps:
        summary.violations.append(Violation(
            check="equivalence",
            subject=entry.name,
            detail=f"seed {seed}: max |dz| = {gap!r}, trajectories identical = {same_steps}",
            reproducer=render_edge_list(g) + f"# seed {seed}\n",
        ))


def verify_corpus(
    entries: Sequence[CorpusEntry],
    ipds_predicate: IpdsPredicate = is_independent_perfect_dominating,
    networks: int = 50,
    equivalence_graphs: int = 3,
    seed: int = 0,
    limit: OracleLimit = OracleLimit(),
) -> VerifySummary:
    """Run every invariant check; an empty corpus passes with a warning."""
    started = time.time()
    summary = VerifySummary()

    for entry in entries:
        if entry.graph.n > limit.max_vertices:
            raise OracleLimitExceeded(f"{entry.name}: {entry.graph.n} vertices exceed the cap of {limit.max_vertices}")
        check_energy_ipds(entry, summary, ipds_predicate)

    for index in range(networks):
        k = NETWORK_SIZES[index % len(NETWORK_SIZES)]
        check_flip_bound(k, seed + index, summary, limit)
        check_distributed_stable(k, seed + index, summary, limit)

    candidates = sorted((e for e in entries if e.graph.edges), key=lambda e: (-e.graph.n, e.name))
    for entry in candidates[:equivalence_graphs]:
        check_equivalence(entry, seed, summary)

    if summary.total_checks == 0:
        summary.warnings.append("empty corpus: zero checks ran")
        logger.warning("Verification ran zero checks (empty corpus)")

    logger.info(
        f"Verification completed: {summary.total_checks} checks, "
        f"{len(summary.violations)} violations ({time.time() - started:.2f}s)"
    )
    return summary
