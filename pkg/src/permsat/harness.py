"""Suite runner, PAR-2 / cactus aggregation and result analysis.

Results CSV columns: instance, config, status, time, timeout, verified,
message, followed by the terminal StatsRow fields.
"""
from __future__ import annotations

import csv
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .cnf import Formula, read_dimacs
from .policy import PolicyConfig, parse_policy
from .solver import Budget, Solver, Status
from .stats import StatsRow, histogram

log = logging.getLogger(__name__)

RESULT_COLUMNS = ["instance", "config", "status", "time", "timeout", "verified", "message",
                  *StatsRow.columns()]
SOLVED = ("SAT", "UNSAT")
PERM_HIST_EDGES = [0, 100, 500, 1000, 5000, 10_000, 20_000, 50_000, 100_000, 150_000, np.inf]


class SoundnessError(RuntimeError):
    pass


@dataclass
class InstanceResult:
    instance: str
    config: str
    status: str
    time: float
    timeout: float
    verified: bool = False
    message: str = ""
    row: Optional[StatsRow] = None

    def as_record(self) -> list:
        stats = [getattr(self.row, c) for c in StatsRow.columns()] if self.row else \
            [""] * len(StatsRow.columns())
        return [self.instance, self.config, self.status, f"{self.time:.6f}", self.timeout,
                int(self.verified), self.message, *stats]

    @classmethod
    def from_record(cls, rec: dict) -> "InstanceResult":
        row = None
        if rec.get("conflict_no", "") != "":
            row = StatsRow(*(float(rec[c]) if c in ("perm_fraction", "ct") else int(rec[c])
                             for c in StatsRow.columns()))
        return cls(rec["instance"], rec["config"], rec["status"], float(rec["time"]),
                   float(rec["timeout"]), bool(int(rec["verified"])), rec["message"], row)

    @property
    def solved(self) -> bool:
        return self.status in SOLVED


@dataclass
class SuiteConfig:
    instances: Sequence[str]
    configs: Sequence[PolicyConfig]
    timeout: float = 60.0
    jobs: int = 1
    seed: int = 0
    out: Optional[str] = None

    def __post_init__(self):
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")


def verify_model(f: Formula, model) -> bool:
    """True iff ``model`` (DIMACS literals, one per variable) satisfies every clause."""
    true_lits = set(model)
    for v in range(1, f.num_vars + 1):
        if (v in true_lits) == (-v in true_lits):
            raise ValueError(f"model must assign variable {v} exactly once")
    return all(any(l in true_lits for l in c) for c in f.clauses)


def run_instance(path: str, cfg: PolicyConfig, timeout: float, seed: int = 0) -> InstanceResult:
    """Parse, solve and verify one instance; never raises for instance errors."""
    name = os.path.basename(str(path))
    t0 = time.perf_counter()
    try:
        f = read_dimacs(path)
        res = Solver(f, cfg, seed=seed).solve(Budget(seconds=timeout))
    except Exception as exc:  # recorded, suite continues
        return InstanceResult(name, cfg.label, "ERROR", time.perf_counter() - t0, timeout,
                              message=f"{type(exc).__name__}: {exc}")
    elapsed = time.perf_counter() - t0
    status = res.status.value
    verified = False
    message = ""
    if res.status is Status.SAT:
        verified = verify_model(f, res.model)
        if not verified:
            message = "model verification failed"
    elif res.status is Status.UNKNOWN:
        status = "TIMEOUT"
        elapsed = max(elapsed, timeout)
    return InstanceResult(name, cfg.label, status, elapsed, timeout, verified, message,
                          res.final_row)


def _run_task(args):
    path, cfg_line, timeout, seed = args
    return run_instance(path, parse_policy(cfg_line), timeout, seed)


def _check(result: InstanceResult) -> None:
    if result.status == "SAT" and not result.verified:
        raise SoundnessError(f"UNSOUND: {result.config} returned an invalid model for "
                             f"{result.instance}")


def run_suite(sc: SuiteConfig) -> list[InstanceResult]:
    tasks = [(str(p), cfg.to_args(), sc.timeout, sc.seed)
             for p in sc.instances for cfg in sc.configs]
    results: list[InstanceResult] = []
    fh = writer = None
    if sc.out:
        fh = open(sc.out, "w", newline="")
        writer = csv.writer(fh)
        writer.writerow(RESULT_COLUMNS)
        fh.flush()
    try:
        def emit(r):
            results.append(r)
            if writer is not None:
                writer.writerow(r.as_record())
                fh.flush()
            log.info("%s %s %s %.3fs", r.instance, r.config, r.status, r.time)
            _check(r)

        if sc.jobs <= 1:
            for t in tasks:
                emit(_run_task(t))
        else:
            with ProcessPoolExecutor(sc.jobs) as pool:
                futures = [pool.submit(_run_task, t) for t in tasks]
                for fut in as_completed(futures):
                    emit(fut.result())
    finally:
        if fh is not None:
            fh.close()
    return results


def read_results(path) -> list[InstanceResult]:
    with open(path, newline="") as fh:
        return [InstanceResult.from_record(rec) for rec in csv.DictReader(fh)]


def par2(results: Sequence[InstanceResult], timeout: Optional[float] = None) -> float:
    """Mean runtime with every unsolved instance charged twice the timeout."""
    if not results:
        raise ValueError("PAR-2 of an empty result set is undefined")
    total = 0.0
    for r in results:
        t = timeout if timeout is not None else r.timeout
        total += r.time if r.solved else 2.0 * t
    return total / len(results)


def cactus_series(results: Iterable[InstanceResult]) -> list[tuple[int, float]]:
    times = sorted(r.time for r in results if r.solved)
    return list(enumerate(times, 1))


def group_by_config(results: Iterable[InstanceResult]) -> dict[str, list[InstanceResult]]:
    groups: dict[str, list[InstanceResult]] = {}
    for r in results:
        groups.setdefault(r.config, []).append(r)
    return groups


def tag_lc(results: Iterable[InstanceResult], baseline: str,
           threshold: int = 150_000) -> set[str]:
    """Instances whose baseline run ends with more than ``threshold`` PERM clauses."""
    return {r.instance for r in results
            if r.config == baseline and r.row is not None and r.row.core > threshold}


_GNUPLOT = """\
# gnuplot -persist plot.gp
set datafile separator ','
set key left top
set xlabel 'instances solved'
set ylabel 'time (s)'
set title 'cactus'
plot {series}
"""


def analyze(results: Sequence[InstanceResult], out_dir, *, do_par2: bool = True,
            do_cactus: bool = True, do_perm_hist: bool = True,
            lc_baseline: Optional[str] = None) -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    groups = group_by_config(results)
    written: dict[str, Path] = {}
    if do_par2:
        p = out / "par2.csv"
        with open(p, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["config", "instances", "solved", "par2", "mean_perm_fraction",
                        "mean_final_perm", "mean_learned"])
            for name, rs in groups.items():
                rows = [r.row for r in rs if r.row is not None]
                frac = np.mean([x.perm_fraction for x in rows]) if rows else 0.0
                perm = np.mean([x.core for x in rows]) if rows else 0.0
                learned = np.mean([x.learned_total for x in rows]) if rows else 0.0
                w.writerow([name, len(rs), sum(r.solved for r in rs), f"{par2(rs):.6f}",
                            f"{frac:.6f}", f"{perm:.3f}", f"{learned:.3f}"])
        written["par2"] = p
    if do_cactus:
        series = []
        for name, rs in groups.items():
            p = out / f"cactus_{name}.csv"
            with open(p, "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["k", "time"])
                w.writerows(cactus_series(rs))
            written[f"cactus_{name}"] = p
            series.append(f"'{p.name}' using 1:2 every ::1 with steps title '{name}'")
        gp = out / "plot.gp"
        gp.write_text(_GNUPLOT.format(series=", \\\n     ".join(series) or "0 notitle"))
        written["plot"] = gp
    if do_perm_hist:
        p = out / "perm_hist.csv"
        with open(p, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["config", "bin_lo", "bin_hi", "count"])
            for name, rs in groups.items():
                sizes = [r.row.core for r in rs if r.row is not None]
                h = histogram(sizes, PERM_HIST_EDGES, "final_perm_size")
                for lo, hi, n in zip(h.edges[:-1], h.edges[1:], h.counts):
                    w.writerow([name, int(lo), "inf" if np.isinf(hi) else int(hi), int(n)])
        written["perm_hist"] = p
        p = out / "perm_summary.csv"
        with open(p, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["config", "instances", "moderate_le_20k", "very_large_gt_150k"])
            for name, rs in groups.items():
                sizes = [r.row.core for r in rs if r.row is not None]
                w.writerow([name, len(sizes), sum(s <= 20_000 for s in sizes),
                            sum(s > 150_000 for s in sizes)])
        written["perm_summary"] = p
    if lc_baseline is not None:
        p = out / "lc_instances.txt"
        p.write_text("".join(f"{i}\n" for i in sorted(tag_lc(results, lc_baseline))))
        written["lc"] = p
    return written
