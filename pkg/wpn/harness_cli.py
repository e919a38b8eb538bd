"""
Command-line entry point.

Subcommands:
    solve   centralized multistart (and optionally distributed runs) for one
            configured problem; writes report.txt, energy.tsv, costs.tsv and
            per-seed runs/seed_<s>/ directories
    costs   the closed-form cost table for given deployment sizes
    verify  the invariant suite over a small-graph corpus

Exit codes: 0 clean, 1 verification violations, 2 configuration or input
errors, 3 numerical divergence. Diagnostics go to stderr only.
"""

from __future__ import annotations

import argparse
import asyncio
import logging
import sys
import time
from functools import partial
from pathlib import Path
from typing import Sequence

from wpn.artifacts import (
    directory_digest,
    write_compiled,
    write_costs,
    write_energy,
    write_oracle,
    write_report,
    write_trace,
)
from wpn.config import ConfigError, ExperimentConfig, describe_schema, load_config
from wpn.corpus import DEFAULT_FAMILIES, build_corpus
from wpn.cost_model import TYPICAL_MAX_EPISODES, CostInputs, cost_table, render_cost_table
from wpn.energy_model import CompiledProblem
from wpn.graph_core import Graph, is_independent_perfect_dominating, render_edge_list
from wpn.neuro_dynamics import NumericalDivergenceError, run_multistart
from wpn.oracle import OracleLimit, OracleLimitExceeded, brute_force_ipds
from wpn.verify import IpdsPredicate, verify_corpus
from wpn.wpn_sim import RunReport, embed, measure_messages, simulate, validity_of

logger = logging.getLogger(__name__)


EXIT_OK = 0
EXIT_VIOLATIONS = 1
EXIT_INPUT = 2
EXIT_NUMERIC = 3


# =============================================================================
# solve
# =============================================================================

def _write_run(directory: Path, report: RunReport) -> None:
    document = report.to_dict()
    document["messages"] = measure_messages(report).to_dict()
    write_report(directory, document)
    write_energy(directory, report.energy_trajectory)
    if report.trace:
        write_trace(directory, report.trace_tsv())


def _simulate_seed(config: ExperimentConfig, prob: CompiledProblem, topology: Graph, seed: int) -> RunReport:
    # Motes are mutable, so every run gets its own embedding.
    wpn = embed(prob, topology)
    return simulate(wpn, config.mac_config(), config.criterion_config(), seed, config.simulation_options())


async def _simulate_seeds(
    config: ExperimentConfig, prob: CompiledProblem, topology: Graph, seeds: Sequence[int]
) -> list[RunReport]:
    """Independent simulations in worker threads; results keep the seed order."""
    loop = asyncio.get_running_loop()
    return await asyncio.gather(*(
        loop.run_in_executor(None, partial(_simulate_seed, config, prob, topology, seed))
        for seed in seeds
    ))


def _problem_summary(g: Graph, prob: CompiledProblem) -> dict:
    return {
        "vertices": g.n,
        "edges": len(g.edges),
        "residual_order": prob.residual_order,
        "offset": prob.offset,
        "edge_list": render_edge_list(g),
    }


def cmd_solve(config: ExperimentConfig) -> int:
    started = time.time()
    out = Path(config.output)

    g = config.problem_graph()
    prob = config.compiled_problem(g)
    crit = config.criterion_config()
    engine = config.dynamics.engine

    best = run_multistart(prob, crit, config.seeds, engine=engine, **config.dynamics_options())
    validity = validity_of(prob, best.best.state.z)

    inputs = CostInputs(
        n_neurons=g.n,
        episodes=len(config.seeds),
        msg_time=config.mac.slot_time,
        channels=config.mac.channels,
    )
    write_costs(out, cost_table(inputs, weights=prob.quadratic.W))
    write_energy(out, best.best.trajectory)
    write_compiled(out, prob)

    report = {
        "config": {key: value for key, value in config.to_dict().items() if key != "output"},
        "problem": _problem_summary(g, prob),
        "centralized": {**best.to_dict(), "validity": validity},
    }
    if g.n <= OracleLimit().max_vertices:
        exact = brute_force_ipds(g)
        write_oracle(out, exact)
        report["oracle"] = {
            "ipds_sets": len(exact),
            "best_readout_listed": best.best.readout in exact,
        }
    else:
        logger.info(f"Oracle skipped: {g.n} vertices exceed the cap of {OracleLimit().max_vertices}")

    if config.simulation.enabled:
        topology = config.topology(g)
        embed(prob, topology)  # unreachable couplings fail here, before any worker starts
        seeds = config.seeds[: config.simulation.runs]
        runs = asyncio.run(_simulate_seeds(config, prob, topology, seeds))
        distributed = []
        for seed, run in zip(seeds, runs):
            _write_run(out / "runs" / f"seed_{seed}", run)
            distributed.append({
                "seed": seed,
                "directory": f"runs/seed_{seed}",
                "total_messages": run.total_messages,
                "episodes_used": run.episodes_used,
                "converged": run.converged,
                "stop_reason": run.stop_reason,
                "validity": dict(run.validity),
            })
        report["distributed"] = distributed

    write_report(out, report)
    logger.info(
        f"Solve completed: {g.n} vertices, {len(config.seeds)} seeds, "
        f"readout={sorted(best.best.readout)}, ipds={validity['ipds']}, "
        f"digest={directory_digest(out)} ({time.time() - started:.2f}s)"
    )
    return EXIT_OK


# =============================================================================
# costs
# =============================================================================

def cmd_costs(inputs: CostInputs, out: Path | None = None) -> int:
    rows = cost_table(inputs)
    if out is not None:
        write_costs(out, rows)
    sys.stdout.write(render_cost_table(rows))
    return EXIT_OK


# =============================================================================
# verify
# =============================================================================

def cmd_verify(
    max_vertices: int,
    families: Sequence[str] = DEFAULT_FAMILIES,
    networks: int = 50,
    equivalence_graphs: int = 3,
    seed: int = 0,
    out: Path | None = None,
    ipds_predicate: IpdsPredicate = is_independent_perfect_dominating,
) -> int:
    entries = build_corpus(max_vertices, families)
    summary = verify_corpus(
        entries,
        ipds_predicate,
        networks=networks,
        equivalence_graphs=equivalence_graphs,
        seed=seed,
    )

    for warning in summary.warnings:
        logger.warning(warning)
    if out is not None:
        write_report(out, summary.to_dict())
        for index, violation in enumerate(summary.violations):
            path = out / "reproducers" / f"{index:03d}_{violation.check}.txt"
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(f"# {violation.subject}: {violation.detail}\n" + violation.reproducer, encoding="utf-8")

    status = "PASS" if summary.passed else "FAIL"
    sys.stdout.write(
        f"{status}: {summary.total_checks} checks, {len(summary.violations)} violations\n"
    )
    for violation in summary.violations[:10]:
        sys.stdout.write(f"  {violation.check} {violation.subject}: {violation.detail}\n")
        sys.stdout.write("".join(f"    {line}\n" for line in violation.reproducer.splitlines()))
    return EXIT_OK if summary.passed else EXIT_VIOLATIONS


# =============================================================================
# Parser
# =============================================================================

class _ArgumentError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse that raises instead of exiting, so usage errors map to exit 2."""

    def error(self, message: str):
        raise _ArgumentError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="wpn_ann", description="Neuron-per-mote optimization experiments")
    parser.add_argument("--verbose", "-v", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    solve = sub.add_parser(
        "solve",
        help="solve a configured problem",
        epilog=describe_schema(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    solve.add_argument("--config", type=Path, default=None, help="YAML experiment config")
    solve.add_argument("--seed", type=int, default=None, help="run this single seed")
    solve.add_argument("--out", type=Path, default=None, help="artifact directory")

    costs = sub.add_parser("costs", help="closed-form cost table", formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    costs.add_argument("--n", type=int, default=100000, help="neurons (one per mote)")
    costs.add_argument(
        "--episodes", type=int, default=1,
        help=f"convergence episodes (typically no more than {TYPICAL_MAX_EPISODES})",
    )
    costs.add_argument("--bytes-per-real", type=int, default=4, help="bytes per stored real")
    costs.add_argument("--group-size", type=int, default=10, help="motes per cluster")
    costs.add_argument("--msg-time", type=float, default=1e-6, help="seconds per message")
    costs.add_argument("--channels", type=int, default=1, help="parallel radio channels")
    costs.add_argument("--out", type=Path, default=None, help="also write costs.tsv here")

    verify = sub.add_parser("verify", help="invariant suite over a graph corpus", formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    verify.add_argument("--max-vertices", type=int, default=6, help="atlas graphs up to this size")
    verify.add_argument("--families", nargs="*", default=list(DEFAULT_FAMILIES), help="named graphs added to the atlas")
    verify.add_argument("--networks", type=int, default=50, help="random integer networks for the flip bound")
    verify.add_argument("--equivalence-graphs", type=int, default=3, help="graphs for the distributed check")
    verify.add_argument("--seed", type=int, default=0)
    verify.add_argument("--out", type=Path, default=None, help="summary and reproducer directory")
    return parser


def _configure_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )


def main(argv: Sequence[str] | None = None, ipds_predicate: IpdsPredicate = is_independent_perfect_dominating) -> int:
    try:
        args = build_parser().parse_args(argv)
    except _ArgumentError as e:
        sys.stderr.write(f"wpn_ann: error: {e}\n")
        return EXIT_INPUT
    _configure_logging(args.verbose)

    try:
        if args.command == "solve":
            config = load_config(args.config)
            if args.seed is not None:
                config.seeds = [args.seed]
            if args.out is not None:
                config.output = str(args.out)
            return cmd_solve(config)

        if args.command == "costs":
            inputs = CostInputs(
                n_neurons=args.n,
                episodes=args.episodes,
                bytes_per_real=args.bytes_per_real,
                group_size=args.group_size,
                msg_time=args.msg_time,
                channels=args.channels,
            )
            return cmd_costs(inputs, args.out)

        return cmd_verify(
            args.max_vertices,
            args.families,
            networks=args.networks,
            equivalence_graphs=args.equivalence_graphs,
            seed=args.seed,
            out=args.out,
            ipds_predicate=ipds_predicate,
        )
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_INPUT
    except NumericalDivergenceError as e:
        logger.error(f"Numerical divergence: {e}")
        return EXIT_NUMERIC
    except OracleLimitExceeded as e:
        logger.error(f"Corpus exceeds oracle limits: {e}")
        return EXIT_INPUT
    except (ValueError, TypeError, OSError) as e:
        logger.error(f"Invalid input: {e}")
        return EXIT_INPUT
