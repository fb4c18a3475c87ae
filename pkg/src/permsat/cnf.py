"""DIMACS CNF parsing, formula representation and the primal variable graph.

Literals are DIMACS integers at the API boundary (``-3`` is the negation of
variable 3).  Inside the solver they are packed as ``2 * var + negated`` so
that negation is ``code ^ 1``; :func:`to_code` / :func:`from_code` convert.
"""
from __future__ import annotations

import gzip
import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np


class DimacsError(ValueError):
    pass


def to_code(lit: int) -> int:
    return 2 * abs(lit) + (lit < 0)


def from_code(code: int) -> int:
    return -(code >> 1) if code & 1 else code >> 1


def normalize_clause(lits: Iterable[int]) -> tuple[int, ...] | None:
    """Drop duplicate literals (keeping first occurrence); None for a tautology."""
    seen: dict[int, None] = {}
    for lit in lits:
        if -lit in seen:
            return None
        seen.setdefault(lit, None)
    return tuple(seen)


@dataclass(frozen=True)
class Formula:
    num_vars: int
    clauses: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        for clause in self.clauses:
            for lit in clause:
                if lit == 0 or abs(lit) > self.num_vars:
                    raise DimacsError(f"literal {lit} out of range 1..{self.num_vars}")

    @classmethod
    def from_clauses(cls, num_vars: int, clauses: Iterable[Iterable[int]]) -> "Formula":
        kept = []
        for c in clauses:
            norm = normalize_clause(c)
            if norm is not None:
                kept.append(norm)
        return cls(num_vars, tuple(kept))

    @property
    def has_empty_clause(self) -> bool:
        return any(len(c) == 0 for c in self.clauses)


def parse_dimacs(text: str | bytes) -> Formula:
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    num_vars = None
    clauses = []
    current: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            if num_vars is not None:
                raise DimacsError(f"line {lineno}: duplicate header")
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise DimacsError(f"line {lineno}: malformed header {line!r}")
            try:
                num_vars, _ = int(parts[2]), int(parts[3])
            except ValueError:
                raise DimacsError(f"line {lineno}: malformed header {line!r}") from None
            if num_vars < 0:
                raise DimacsError(f"line {lineno}: negative variable count")
            continue
        if line.startswith("%"):
            # SATLIB trailer
            break
        if num_vars is None:
            raise DimacsError(f"line {lineno}: clause before header")
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise DimacsError(f"line {lineno}: non-integer token {tok!r}") from None
            if lit == 0:
                norm = normalize_clause(current)
                if norm is not None:
                    clauses.append(norm)
                current = []
            elif abs(lit) > num_vars:
                raise DimacsError(
                    f"line {lineno}: variable {abs(lit)} exceeds declared count {num_vars}")
            else:
                current.append(lit)
    if num_vars is None:
        raise DimacsError("missing 'p cnf' header")
    if current:
        raise DimacsError("missing terminating 0 for last clause")
    return Formula(num_vars, tuple(clauses))


def read_dimacs(path) -> Formula:
    opener = gzip.open if str(path).endswith(".gz") else open
    with opener(path, "rb") as fh:
        return parse_dimacs(fh.read())


def to_dimacs(f: Formula) -> str:
    lines = [f"p cnf {f.num_vars} {len(f.clauses)}"]
    lines.extend(" ".join(map(str, (*c, 0))) for c in f.clauses)
    return "\n".join(lines) + "\n"


@dataclass
class PrimalGraph:
    num_vars: int
    adjacency: list[set[int]] = field(default_factory=list)

    def edges(self) -> set[tuple[int, int]]:
        return {(u, v) for u in range(1, self.num_vars + 1)
                for v in self.adjacency[u] if u < v}

    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        """0-based CSR arrays (indptr, indices) with sorted neighbour lists."""
        n = self.num_vars
        indptr = np.zeros(n + 1, dtype=np.int64)
        for v in range(1, n + 1):
            indptr[v] = indptr[v - 1] + len(self.adjacency[v])
        indices = np.empty(indptr[-1], dtype=np.int64)
        for v in range(1, n + 1):
            indices[indptr[v - 1]:indptr[v]] = sorted(u - 1 for u in self.adjacency[v])
        return indptr, indices


def build_primal_graph(f: Formula) -> PrimalGraph:
    adj: list[set[int]] = [set() for _ in range(f.num_vars + 1)]
    for clause in f.clauses:
        vs = {abs(l) for l in clause}
        for u, v in itertools.combinations(vs, 2):
            adj[u].add(v)
            adj[v].add(u)
    return PrimalGraph(f.num_vars, adj)


def graph_from_edges(n: int, edges: Sequence[tuple[int, int]]) -> PrimalGraph:
    """Build a graph on vertices 1..n directly from an edge list."""
    adj: list[set[int]] = [set() for _ in range(n + 1)]
    for u, v in edges:
        if u != v:
            adj[u].add(v)
            adj[v].add(u)
    return PrimalGraph(n, adj)
