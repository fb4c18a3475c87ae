"""CDCL SAT solving with a configurable permanent learned-clause store."""
from .cnf import Formula, PrimalGraph, build_primal_graph, parse_dimacs, read_dimacs, to_dimacs
from .policy import (AuxLearnConfig, AuxMode, DeleteHalfActivity, DeleteHalfLbd, Freeze, Hybrid,
                     LbdAtMost, LbdOrHc, NoLimit, PolicyConfig, SizeAtMost, parse_policy)
from .solver import Budget, SolveResult, Solver, Status, compute_lbd, solve

__all__ = [
    "Formula", "PrimalGraph", "build_primal_graph", "parse_dimacs", "read_dimacs", "to_dimacs",
    "AuxLearnConfig", "AuxMode", "DeleteHalfActivity", "DeleteHalfLbd", "Freeze", "Hybrid",
    "LbdAtMost", "LbdOrHc", "NoLimit", "PolicyConfig", "SizeAtMost", "parse_policy",
    "Budget", "SolveResult", "Solver", "Status", "compute_lbd", "solve",
]
__version__ = "0.1.0"
