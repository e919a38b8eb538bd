"""
Artifact writers.

Every writer is a pure function of its inputs: no timestamps, no absolute
paths, insertion-ordered YAML, floats printed with repr. Rerunning the same
(config, seed) therefore reproduces every file byte-for-byte.
"""

from __future__ import annotations

import hashlib
import logging
from pathlib import Path
from typing import Iterable

import yaml

from wpn.cost_model import render_cost_table
from wpn.energy_model import CompiledProblem, render_compiled
from wpn.neuro_dynamics import EnergyTrajectory
from wpn.oracle import render_sets

logger = logging.getLogger(__name__)


REPORT_FILE = "report.txt"
ENERGY_FILE = "energy.tsv"
COSTS_FILE = "costs.tsv"
TRACE_FILE = "trace.tsv"
COMPILED_FILE = "compiled.txt"
ORACLE_FILE = "oracle.txt"


def render_report(document: dict) -> str:
    return yaml.safe_dump(document, allow_unicode=True, default_flow_style=False, sort_keys=False)


def _write(directory: Path, name: str, text: str) -> Path:
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / name
    path.write_text(text, encoding="utf-8")
    logger.debug(f"Wrote {path} ({len(text)} bytes)")
    return path


def write_report(directory: Path, document: dict) -> Path:
    return _write(directory, REPORT_FILE, render_report(document))


def write_energy(directory: Path, trajectory: EnergyTrajectory) -> Path:
    return _write(directory, ENERGY_FILE, trajectory.to_tsv())


def write_costs(directory: Path, rows: list[tuple[str, object]]) -> Path:
    return _write(directory, COSTS_FILE, render_cost_table(rows))


def write_trace(directory: Path, trace_tsv: str) -> Path:
    return _write(directory, TRACE_FILE, trace_tsv)


def write_compiled(directory: Path, problem: CompiledProblem) -> Path:
    return _write(directory, COMPILED_FILE, render_compiled(problem))


def write_oracle(directory: Path, sets: Iterable[Iterable[int]]) -> Path:
    """Exact reference sets, one per line."""
    return _write(directory, ORACLE_FILE, render_sets(sets))


def file_digest(path: Path) -> str:
    """SHA256 of the file contents (first 16 hex characters)."""
    return hashlib.sha256(path.read_bytes()).hexdigest()[:16]


def directory_digest(directory: Path) -> str:
    """
    SHA256 over every file below directory, keyed by relative path.

    Two directories with the same digest hold the same files with the same
    contents.
    """
    h = hashlib.sha256()
    for path in sorted(p for p in directory.rglob("*") if p.is_file()):
        h.update(path.relative_to(directory).as_posix().encode("utf-8"))
        h.update(b"\0")
        h.update(path.read_bytes())
        h.update(b"\0")
    return h.hexdigest()[:16]
