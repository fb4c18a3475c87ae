"""Seeded instance generators: uniform random k-CNF and pigeonhole."""
from __future__ import annotations

import numpy as np

from .cnf import Formula


def random_kcnf(num_vars: int, num_clauses: int, k: int = 3, seed: int = 0) -> Formula:
    """Uniform random k-CNF: k distinct variables per clause, random signs."""
    rng = np.random.default_rng(seed)
    clauses = []
    for _ in range(num_clauses):
        vs = rng.choice(num_vars, size=k, replace=False) + 1
        signs = rng.integers(0, 2, size=k) * 2 - 1
        clauses.append(tuple(int(v * s) for v, s in zip(vs, signs)))
    return Formula(num_vars, tuple(clauses))


def random_3cnf(num_vars: int, ratio: float = 4.26, seed: int = 0) -> Formula:
    return random_kcnf(num_vars, int(round(ratio * num_vars)), 3, seed)


def pigeonhole(holes: int) -> Formula:
    """PHP(holes+1, holes): unsatisfiable for every holes >= 1.

    Variable ``p * holes + h + 1`` means pigeon p sits in hole h.
    """
    pigeons = holes + 1

    def var(p, h):
        return p * holes + h + 1

    clauses = [tuple(var(p, h) for h in range(holes)) for p in range(pigeons)]
    for h in range(holes):
        for p1 in range(pigeons):
            for p2 in range(p1 + 1, pigeons):
                clauses.append((-var(p1, h), -var(p2, h)))
    return Formula(pigeons * holes, tuple(clauses))
