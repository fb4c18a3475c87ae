"""Betweenness centrality of variables and high-centrality (HC) clause admission.

Betweenness is computed with Brandes' algorithm on the primal graph, one
source vertex at a time so a wall-clock budget can abandon the run between
sources.  Raw scores count ordered pairs ``(s, t)``; dividing by
``(n - 1)(n - 2)`` puts every vertex in ``[0, 1]`` with a star centre at 1.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from ._accel import USE_NUMBA, njit
from .cnf import Formula, PrimalGraph, build_primal_graph


@njit(cache=True)
def _source_numba(s, indptr, indices, bc, dist, sigma, delta, order):
    dist[s] = 0
    sigma[s] = 1.0
    order[0] = s
    head = 0
    tail = 1
    while head < tail:
        v = order[head]
        head += 1
        dv = dist[v]
        for e in range(indptr[v], indptr[v + 1]):
            w = indices[e]
            if dist[w] < 0:
                dist[w] = dv + 1
                order[tail] = w
                tail += 1
            if dist[w] == dv + 1:
                sigma[w] += sigma[v]
    for i in range(tail - 1, -1, -1):
        w = order[i]
        dw = dist[w]
        coeff = (1.0 + delta[w]) / sigma[w]
        for e in range(indptr[w], indptr[w + 1]):
            v = indices[e]
            if dist[v] == dw - 1:
                delta[v] += sigma[v] * coeff
        if w != s:
            bc[w] += delta[w]
    # leave the scratch arrays clean for the next source
    for i in range(tail):
        w = order[i]
        dist[w] = -1
        sigma[w] = 0.0
        delta[w] = 0.0


def _source_numpy(s, src, dst, n, bc):
    """Level-synchronous Brandes step over the directed edge list (src, dst)."""
    dist = np.full(n, -1, dtype=np.int64)
    sigma = np.zeros(n)
    dist[s] = 0
    sigma[s] = 1.0
    depth = 0
    while True:
        on = dist[src] == depth
        e_src, e_dst = src[on], dst[on]
        fresh = e_dst[dist[e_dst] < 0]
        if fresh.size == 0:
            break
        dist[fresh] = depth + 1
        tree = dist[e_dst] == depth + 1
        sigma += np.bincount(e_dst[tree], weights=sigma[e_src[tree]], minlength=n)
        depth += 1
    delta = np.zeros(n)
    dsrc, ddst = dist[src], dist[dst]
    tree = (dsrc >= 0) & (ddst == dsrc + 1)
    t_src, t_dst, t_lvl = src[tree], dst[tree], ddst[tree]
    for level in range(depth, 0, -1):
        on = t_lvl == level
        a, b = t_src[on], t_dst[on]
        delta += np.bincount(a, weights=sigma[a] / sigma[b] * (1.0 + delta[b]), minlength=n)
    delta[s] = 0.0
    bc += delta


def brandes_betweenness(g: PrimalGraph, budget_ms: Optional[float] = None,
                        use_numba: Optional[bool] = None) -> Optional[np.ndarray]:
    """Raw betweenness per variable (index 0 unused), or None if over budget."""
    if budget_ms is not None and budget_ms <= 0:
        return None
    if use_numba is None:
        use_numba = USE_NUMBA
    n = g.num_vars
    indptr, indices = g.csr()
    bc = np.zeros(n)
    deadline = None if budget_ms is None else time.perf_counter() + budget_ms / 1000.0
    if use_numba:
        dist = np.full(n, -1, dtype=np.int64)
        sigma = np.zeros(n)
        delta = np.zeros(n)
        order = np.empty(n, dtype=np.int64)
        step = lambda s: _source_numba(s, indptr, indices, bc, dist, sigma, delta, order)
    else:
        src = np.repeat(np.arange(n, dtype=np.int64), np.diff(indptr))
        step = lambda s: _source_numpy(s, src, indices, n, bc)
    for s in range(n):
        if deadline is not None and time.perf_counter() > deadline:
            return None
        if indptr[s + 1] > indptr[s]:
            step(s)
    return np.concatenate(([0.0], bc))


def normalize(raw, n: int):
    """Scale raw betweenness by 1/((n-1)(n-2)) and clamp into [0, 1]."""
    if n < 3:
        return np.zeros_like(np.asarray(raw, dtype=float))
    return np.clip(np.asarray(raw, dtype=float) / ((n - 1) * (n - 2)), 0.0, 1.0)


@dataclass
class CentralityMap:
    values: np.ndarray          # normalized, indexed by variable (0 unused)
    computed_in_ms: float = 0.0

    def __getitem__(self, var: int) -> float:
        return float(self.values[var])

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("var,centrality\n")
            for v in range(1, len(self.values)):
                fh.write(f"{v},{float(self.values[v])!r}\n")


def compute_centrality(f: Formula | PrimalGraph, budget_ms: Optional[float] = None,
                       use_numba: Optional[bool] = None) -> Optional[CentralityMap]:
    t0 = time.perf_counter()
    g = build_primal_graph(f) if isinstance(f, Formula) else f
    raw = brandes_betweenness(g, budget_ms, use_numba)
    if raw is None:
        return None
    values = normalize(raw, g.num_vars)
    values[0] = 0.0
    return CentralityMap(values, (time.perf_counter() - t0) * 1000.0)


def clause_centrality(clause: Iterable[int], m: CentralityMap) -> float:
    vals = m.values
    vs = [abs(l) for l in clause]
    if not vs:
        raise ValueError("centrality of the empty clause is undefined")
    return sum(vals[v] for v in vs) / len(vs)


@dataclass
class HcConfig:
    ct_init: float = 0.008
    ct_step: float = 0.001
    ct_floor: float = 0.001
    target_fraction: float = 0.0002
    review_period: int = 100_000
    max_hc: int = 10_000
    size_limit: Optional[int] = None
    budget_ms: float = 150_000.0

    def __post_init__(self):
        if not self.ct_floor <= self.ct_init:
            raise ValueError("ct_floor must not exceed ct_init")
        if not 0 < self.target_fraction < 1:
            raise ValueError("target_fraction must lie in (0, 1)")


@dataclass
class HcState:
    ct: float = 0.008
    hc_admitted: int = 0
    history: list = field(default_factory=list)

    @classmethod
    def initial(cls, cfg: HcConfig) -> "HcState":
        return cls(ct=cfg.ct_init)


def hc_tick(state: HcState, learned_total: int, cfg: HcConfig) -> HcState:
    """Periodic review: lower CT one step if too few HC clauses were admitted."""
    if state.hc_admitted < cfg.target_fraction * learned_total:
        # rounding keeps the trace on exact decimal steps (0.007, not 0.00700..01)
        state.ct = round(max(state.ct - cfg.ct_step, cfg.ct_floor), 12)
    state.history.append(state.ct)
    return state


def hc_admit(clause: Iterable[int], m: Optional[CentralityMap], state: HcState,
             cfg: HcConfig, centrality: Optional[float] = None) -> bool:
    if m is None:
        return False
    if state.hc_admitted >= cfg.max_hc:
        return False
    clause = list(clause)
    if cfg.size_limit is not None and len(clause) > cfg.size_limit:
        return False
    if centrality is None:
        centrality = clause_centrality(clause, m)
    if centrality < state.ct:
        return False
    state.hc_admitted += 1
    return True
