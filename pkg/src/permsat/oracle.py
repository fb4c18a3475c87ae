"""Ground-truth deciders that share no code with the CDCL engine."""
from __future__ import annotations

import sys
from typing import Iterable

import numpy as np

from .cnf import Formula
from .solver import Status

ORACLE_MAX_VARS = 30
BRUTE_FORCE_MAX_VARS = 24


class OracleRefused(ValueError):
    pass


def _reduce(clauses: list[frozenset], lit: int) -> list[frozenset]:
    return [c - {-lit} if -lit in c else c for c in clauses if lit not in c]


def _dpll(clauses: list[frozenset]) -> bool:
    while True:
        unit = None
        for c in clauses:
            if not c:
                return False
            if len(c) == 1 and unit is None:
                unit = c
        if unit is None:
            break
        clauses = _reduce(clauses, next(iter(unit)))
    if not clauses:
        return True
    lit = min(min(clauses, key=len), key=abs)
    return _dpll(_reduce(clauses, lit)) or _dpll(_reduce(clauses, -lit))


def oracle_solve(f: Formula, max_vars: int = ORACLE_MAX_VARS) -> Status:
    """Plain recursive DPLL (unit propagation + shortest-clause branching)."""
    if f.num_vars > max_vars:
        raise OracleRefused(f"oracle limited to {max_vars} variables, got {f.num_vars}")
    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 4 * f.num_vars + 100))
    try:
        sat = _dpll([frozenset(c) for c in f.clauses])
    finally:
        sys.setrecursionlimit(limit)
    return Status.SAT if sat else Status.UNSAT


def oracle_entails(f: Formula, clause: Iterable[int], max_vars: int = ORACLE_MAX_VARS) -> bool:
    """True iff f and the negation of ``clause`` have no common model."""
    negated = tuple((-l,) for l in clause)
    g = Formula(f.num_vars, f.clauses + negated)
    return oracle_solve(g, max_vars) is Status.UNSAT


def brute_force_status(f: Formula, max_vars: int = BRUTE_FORCE_MAX_VARS,
                       chunk_bits: int = 16) -> Status:
    """Exhaustive enumeration of all 2^n assignments (vectorized in chunks)."""
    n = f.num_vars
    if n > max_vars:
        raise OracleRefused(f"enumeration limited to {max_vars} variables, got {n}")
    if any(len(c) == 0 for c in f.clauses):
        return Status.UNSAT
    if not f.clauses:
        return Status.SAT
    low = min(n, chunk_bits)
    base = np.arange(1 << low, dtype=np.int64)
    for hi in range(1 << (n - low)):
        x = base | (hi << low)
        ok = np.ones(x.shape, dtype=bool)
        for clause in f.clauses:
            sat = np.zeros(x.shape, dtype=bool)
            for lit in clause:
                bit = (x >> (abs(lit) - 1)) & 1
                sat |= (bit == 1) if lit > 0 else (bit == 0)
            ok &= sat
            if not ok.any():
                break
        if ok.any():
            return Status.SAT
    return Status.UNSAT
