"""Hopfield and mean-field neural optimization hosted on a wireless processor network."""

from .graph_core import Graph, parse_edge_list, generate_unit_disk, generate_random_geometric
from .energy_model import EnergyConfig, HopfieldParams, CompiledProblem, mcds_energy, compile_mcds
from .neuro_dynamics import ConvergenceCriterion, TemperatureSchedule, run_episode, run_multistart
from .wpn_sim import SimulationOptions, embed, simulate, measure_messages
from .radio import MacConfig
from .cost_model import CostInputs, cost_table
from .oracle import brute_force_ipds, brute_force_mcds, enumerate_stable_states

__all__ = [
    "Graph",
    "parse_edge_list",
    "generate_unit_disk",
    "generate_random_geometric",
    "EnergyConfig",
    "HopfieldParams",
    "CompiledProblem",
    "mcds_energy",
    "compile_mcds",
    "ConvergenceCriterion",
    "TemperatureSchedule",
    "run_episode",
    "run_multistart",
    "SimulationOptions",
    "embed",
    "simulate",
    "measure_messages",
    "MacConfig",
    "CostInputs",
    "cost_table",
    "brute_force_ipds",
    "brute_force_mcds",
    "enumerate_stable_states",
]
