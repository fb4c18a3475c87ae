"""Run instrumentation: clause usage counting, periodic size snapshots, histograms."""
from __future__ import annotations

import csv
from dataclasses import astuple, dataclass, fields
from typing import Optional, Sequence

import numpy as np


def record_use(c, conflict_no: int = -1, once_per_conflict: bool = False) -> None:
    """Count one participation of ``c`` in conflict analysis."""
    if once_per_conflict and c.use_stamp == conflict_no:
        return
    c.use_stamp = conflict_no
    c.usage += 1


@dataclass
class StatsRow:
    conflict_no: int
    core: int
    tier2: int
    local: int
    learned_total: int
    perm_fraction: float
    hc_admitted: int
    ct: float
    aux_emitted: int

    @classmethod
    def columns(cls) -> list[str]:
        return [f.name for f in fields(cls)]


class Recorder:
    """Collects a StatsRow every ``period`` conflicts and once at termination."""

    def __init__(self, period: int = 1000):
        self.period = period
        self.rows: list[StatsRow] = []

    def snapshot(self, conflict_no: int, store, hc_state=None, aux_emitted: int = 0) -> StatsRow:
        total = store.learned_total
        row = StatsRow(
            conflict_no=conflict_no,
            core=len(store.core),
            tier2=len(store.tier2),
            local=len(store.local),
            learned_total=total,
            perm_fraction=store.sent_to_core / total if total else 0.0,
            hc_admitted=hc_state.hc_admitted if hc_state is not None else 0,
            ct=hc_state.ct if hc_state is not None else 0.0,
            aux_emitted=aux_emitted,
        )
        self.rows.append(row)
        return row

    def due(self, conflict_no: int) -> bool:
        return self.period > 0 and conflict_no % self.period == 0


def emit_stats(rows: Sequence[StatsRow], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(StatsRow.columns())
        for row in rows:
            w.writerow(astuple(row))


def read_stats(path) -> list[StatsRow]:
    types = [f.type for f in fields(StatsRow)]
    out = []
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        next(r)
        for rec in r:
            out.append(StatsRow(*(float(x) if t in ("float", float) else int(x)
                                  for x, t in zip(rec, types))))
    return out


@dataclass
class HistogramSpec:
    axis: str
    edges: np.ndarray
    counts: np.ndarray

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["bin_lo", "bin_hi", "count"])
            for lo, hi, n in zip(self.edges[:-1], self.edges[1:], self.counts):
                w.writerow([lo, hi, int(n)])


def histogram(values, edges, axis: str = "") -> HistogramSpec:
    """Histogram whose last bin is open-ended so every value is counted."""
    values = np.asarray(values, dtype=float)
    edges = np.asarray(edges, dtype=float)
    idx = np.clip(np.searchsorted(edges, values, side="right") - 1, 0, len(edges) - 2)
    counts = np.bincount(idx, minlength=len(edges) - 1)
    return HistogramSpec(axis, edges, counts)


def usage_by_centrality(centralities, usages, bins: int = 20,
                        upper: Optional[float] = None) -> list[tuple[float, float, int, float]]:
    """Mean usage per equal-width centrality bin over [0, max]; empty bins omitted."""
    cent = np.asarray(centralities, dtype=float)
    use = np.asarray(usages, dtype=float)
    if cent.size == 0:
        return []
    top = float(cent.max()) if upper is None else upper
    if top <= 0.0:
        top = 1.0
    width = top / bins
    idx = np.minimum((cent / width).astype(np.int64), bins - 1)
    counts = np.bincount(idx, minlength=bins)
    sums = np.bincount(idx, weights=use, minlength=bins)
    return [(b * width, (b + 1) * width, int(counts[b]), float(sums[b] / counts[b]))
            for b in range(bins) if counts[b]]


class CentralityUnavailable(RuntimeError):
    pass


@dataclass
class UsageProfile:
    bins: list[tuple[float, float, int, float]]    # (lo, hi, clauses, mean usage)
    learned_total: int
    conflicts: int
    aux_emitted: int
    centrality_ms: float

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["bin_lo", "bin_hi", "clauses", "mean_usage"])
            for lo, hi, n, mean in self.bins:
                w.writerow([f"{lo:.6g}", f"{hi:.6g}", n, f"{mean:.6f}"])


def usage_centrality_profile(f, conflicts: int = 50_000, bins: int = 20, policy=None,
                             centrality=None, budget_ms: float = 150_000.0,
                             seed: int = 0) -> UsageProfile:
    """Run with deletion and demotion off, then bin learned clauses by centrality.

    Every learned clause is kept, so each conflict contributes exactly one
    1-UIP clause (plus an auxiliary clause when that is enabled).
    """
    from .centrality import compute_centrality
    from .solver import Budget, Solver
    from .store import StoreConfig

    if centrality is None:
        centrality = compute_centrality(f, budget_ms)
    if centrality is None:
        raise CentralityUnavailable(
            f"centrality did not finish within {budget_ms:g} ms; profile needs it")
    cfg = StoreConfig(allow_deletion=False, allow_demotion=False)
    solver = Solver(f, policy, seed=seed, store_config=cfg, centrality=centrality,
                    keep_history=True)
    res = solver.solve(Budget(conflicts=conflicts))
    history = solver.store.history
    table = usage_by_centrality([c.centrality for c in history], [c.usage for c in history],
                                bins)
    return UsageProfile(table, solver.store.learned_total, res.stats.conflicts,
                        res.stats.aux_emitted, centrality.computed_in_ms)
