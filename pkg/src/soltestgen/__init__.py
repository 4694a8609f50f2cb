"""Data-flow test generation for a Solidity subset.

Pipeline: parse and type-check a contract, build its control-flow graph,
compute def-use pairs (flagging those tied to ``require`` guards), then
search for covering inputs with a genetic algorithm.
"""

from .cfg import build_cfg, cfg_to_dot
from .dataflow import analyze, compute_dups, extract_variables, find_requires
from .ga import GaConfig, evolve, fitness, random_baseline
from .interp import TestCase, Value, execute_function
from .program import Program

__version__ = "0.1.0"

__all__ = [
    "GaConfig", "Program", "TestCase", "Value", "analyze", "build_cfg",
    "cfg_to_dot", "compute_dups", "evolve", "execute_function",
    "extract_variables", "find_requires", "fitness", "random_baseline",
]
