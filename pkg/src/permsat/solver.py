"""CDCL search engine.

Two-watched-literal propagation, VSIDS branching with phase saving, first-UIP
conflict analysis with recursive minimization, Luby restarts, and a
three-tier learned clause store whose PERM policy is configurable.

Literals are packed as ``2 * var + negated``; ``val[lit]`` is 1 (true),
-1 (false) or 0 (unassigned).
"""
from __future__ import annotations

import heapq
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Optional, Sequence, Union

from .auxlearn import derive_backjump_clause
from .centrality import CentralityMap, HcState, compute_centrality, hc_admit, hc_tick
from .cnf import Formula, from_code, to_code
from .policy import AuxMode, LbdOrHc, PolicyConfig, resolve_criterion
from .stats import Recorder, StatsRow
from .store import ClauseStore, StoreConfig, StoredClause


class Status(str, Enum):
    SAT = "SAT"
    UNSAT = "UNSAT"
    UNKNOWN = "UNKNOWN"


@dataclass
class Budget:
    conflicts: Optional[int] = None
    seconds: Optional[float] = None


@dataclass
class SolveStats:
    conflicts: int = 0
    decisions: int = 0
    propagations: int = 0
    learned: int = 0
    restarts: int = 0
    wall_time: float = 0.0
    aux_emitted: int = 0
    centrality_ms: Optional[float] = None


@dataclass
class SolveResult:
    status: Status
    model: Optional[list[int]] = None
    stats: SolveStats = field(default_factory=SolveStats)
    rows: list[StatsRow] = field(default_factory=list)

    @property
    def final_row(self) -> Optional[StatsRow]:
        return self.rows[-1] if self.rows else None


@dataclass
class ConflictAnalysisOutcome:
    learned: list[int]          # asserting literal first, then a max-level literal
    asserting_literal: int
    backjump_level: int
    conflict_level: int
    decisions: list[int]        # decision literals of levels 1..backjump_level
    lbd: int


def compute_lbd(lits: Iterable[int], level_of: Union[Mapping[int, int], Sequence]) -> int:
    """Number of distinct decision levels among the (DIMACS) literals' variables."""
    levels = set()
    for lit in lits:
        lvl = level_of[abs(lit)]
        if lvl is None:
            raise ValueError(f"literal {lit} is unassigned")
        levels.add(lvl)
    return len(levels)


def luby(i: int) -> int:
    """i-th element (0-based) of the Luby sequence 1 1 2 1 1 2 4 ..."""
    size, seq = 1, 0
    while size < i + 1:
        seq += 1
        size = 2 * size + 1
    while size - 1 != i:
        size = (size - 1) >> 1
        seq -= 1
        i %= size
    return 1 << seq


class Solver:
    def __init__(self, formula: Formula, policy: Optional[PolicyConfig] = None, *,
                 seed: int = 0, store_config: Optional[StoreConfig] = None,
                 centrality: Union[CentralityMap, None, str] = "auto",
                 restart_base: int = 100, var_decay: float = 0.95,
                 snapshot_period: int = 1000, record_trace: bool = False,
                 record_learned: bool = False, record_aux: bool = False,
                 record_events: bool = False, keep_history: bool = False):
        self.formula = formula
        self.policy = policy or PolicyConfig()
        self.seed = seed
        self.restart_base = restart_base
        self.var_decay = var_decay
        self._centrality_arg = centrality
        self._store_config = store_config
        self._record_events = record_events
        self._keep_history = keep_history
        self.recorder = Recorder(snapshot_period)
        self.trace: Optional[list] = [] if record_trace else None
        self.learned_log: Optional[list[tuple[int, int]]] = [] if record_learned else None
        self.aux_log: Optional[list[tuple[tuple[int, ...], int, int]]] = [] if record_aux else None
        self.stats = SolveStats()

        n = self.n = formula.num_vars
        self.val = [0] * (2 * n + 2)
        self.level = [0] * (n + 1)
        self.reason: list[Optional[StoredClause]] = [None] * (n + 1)
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0
        self.watches: list[list[StoredClause]] = [[] for _ in range(2 * n + 2)]
        self.activity = [0.0] * (n + 1)
        self.var_inc = 1.0
        self.polarity = [1] * (n + 1)
        self.seen = [False] * (n + 1)
        self.heap = [(0.0, v) for v in range(1, n + 1)]
        self.originals: list[StoredClause] = []
        self.ok = True

        self.centrality: Optional[CentralityMap] = None
        self.criterion = None
        self.hc_state: Optional[HcState] = None
        self.store: Optional[ClauseStore] = None

        for clause in formula.clauses:
            if not self.ok:
                break
            self._add_original([to_code(l) for l in clause])

    # ---- setup -----------------------------------------------------------

    def _add_original(self, lits: list[int]) -> None:
        if not lits:
            self.ok = False
        elif len(lits) == 1:
            lit = lits[0]
            if self.val[lit] == -1:
                self.ok = False
            elif self.val[lit] == 0:
                self._assign(lit, None)
        else:
            c = StoredClause(lits, learnt=False)
            self.originals.append(c)
            self.watches[lits[0]].append(c)
            self.watches[lits[1]].append(c)

    def _setup_features(self) -> None:
        """Resolve centrality-dependent policy pieces (HC controller, Hybrid)."""
        cent = self._centrality_arg
        if isinstance(cent, str):
            cent = None
            if self.policy.wants_centrality:
                cent = compute_centrality(self.formula, self.policy.hc.budget_ms)
        self.centrality = cent
        if cent is not None:
            self.stats.centrality_ms = cent.computed_in_ms
        self.criterion = resolve_criterion(self.policy.criterion, cent is not None)
        if isinstance(self.criterion, LbdOrHc):
            self.hc_state = HcState.initial(self.policy.hc)

    def _hc_check(self, c: StoredClause) -> bool:
        return hc_admit(c.lits, self.centrality, self.hc_state, self.policy.hc,
                        centrality=c.centrality)

    def prepare(self) -> None:
        """Build the clause store; solve() calls this, manual stepping must too."""
        self._setup_features()
        hc = self._hc_check if self.hc_state is not None else None
        self.store = ClauseStore(self.criterion, self.policy.limit, self._store_config, hc,
                                 record_events=self._record_events,
                                 keep_history=self._keep_history)
        self.store.is_locked = self._locked

    # ---- assignment ------------------------------------------------------

    def _assign(self, lit: int, reason: Optional[StoredClause]) -> None:
        self.val[lit] = 1
        self.val[lit ^ 1] = -1
        v = lit >> 1
        self.level[v] = len(self.trail_lim)
        self.reason[v] = reason
        self.trail.append(lit)

    def _locked(self, c: StoredClause) -> bool:
        first = c.lits[0]
        return self.reason[first >> 1] is c and self.val[first] == 1

    @property
    def decision_level(self) -> int:
        return len(self.trail_lim)

    def decide(self, lit: int) -> None:
        """Open a new decision level and assign ``lit`` (solver code) true."""
        self.trail_lim.append(len(self.trail))
        self._assign(lit, None)

    def cancel_until(self, lvl: int) -> None:
        if len(self.trail_lim) <= lvl:
            return
        val, reason, polarity, act, heap = self.val, self.reason, self.polarity, self.activity, self.heap
        start = self.trail_lim[lvl]
        trail = self.trail
        for i in range(len(trail) - 1, start - 1, -1):
            lit = trail[i]
            v = lit >> 1
            val[lit] = 0
            val[lit ^ 1] = 0
            reason[v] = None
            polarity[v] = lit & 1
            heapq.heappush(heap, (-act[v], v))
        del trail[start:]
        del self.trail_lim[lvl:]
        self.qhead = start
        if len(heap) > 4 * self.n + 100:
            self._rebuild_heap()

    def _rebuild_heap(self) -> None:
        val, act = self.val, self.activity
        self.heap = [(-act[v], v) for v in range(1, self.n + 1) if val[2 * v] == 0]
        heapq.heapify(self.heap)

    # ---- propagation -----------------------------------------------------

    def propagate(self) -> Optional[StoredClause]:
        """Unit propagation to fixpoint; returns a falsified clause on conflict."""
        val, watches, trail = self.val, self.watches, self.trail
        level, reason = self.level, self.reason
        dl = len(self.trail_lim)
        props = 0
        while self.qhead < len(trail):
            false_lit = trail[self.qhead] ^ 1
            self.qhead += 1
            props += 1
            ws = watches[false_lit]
            i = j = 0
            end = len(ws)
            while i < end:
                c = ws[i]
                i += 1
                if c.deleted:
                    continue
                lits = c.lits
                if lits[0] == false_lit:
                    lits[0] = lits[1]
                    lits[1] = false_lit
                first = lits[0]
                if val[first] == 1:
                    ws[j] = c
                    j += 1
                    continue
                for k in range(2, len(lits)):
                    lk = lits[k]
                    if val[lk] != -1:
                        lits[1] = lk
                        lits[k] = false_lit
                        watches[lk].append(c)
                        break
                else:
                    ws[j] = c
                    j += 1
                    if val[first] == -1:
                        while i < end:
                            ws[j] = ws[i]
                            j += 1
                            i += 1
                        del ws[j:]
                        self.qhead = len(trail)
                        self.stats.propagations += props
                        return c
                    val[first] = 1
                    val[first ^ 1] = -1
                    v = first >> 1
                    level[v] = dl
                    reason[v] = c
                    trail.append(first)
            del ws[j:]
        self.stats.propagations += props
        return None

    # ---- conflict analysis -----------------------------------------------

    def _lbd(self, lits) -> int:
        level = self.level
        return len({level[l >> 1] for l in lits})

    def _clause_used(self, c: StoredClause) -> None:
        self.store.on_used(c, self._lbd(c.lits), self.stats.conflicts)
        self.store.bump_activity(c)

    def _bump_var(self, v: int) -> None:
        act = self.activity
        act[v] += self.var_inc
        if act[v] > 1e100:
            for u in range(1, self.n + 1):
                act[u] *= 1e-100
            self.var_inc *= 1e-100
            self._rebuild_heap()

    def analyze(self, confl: StoredClause) -> ConflictAnalysisOutcome:
        """First-UIP learning; records a use of every learned clause resolved on."""
        dl = len(self.trail_lim)
        if dl == 0:
            raise ValueError("conflict at level 0: formula is unsatisfiable")
        seen, level, reason, trail = self.seen, self.level, self.reason, self.trail
        learnt = [0]
        path = 0
        p = -1
        idx = len(trail) - 1
        c = confl
        while True:
            if c.learnt:
                self._clause_used(c)
            lits = c.lits
            for q in (lits if p < 0 else lits[1:]):
                v = q >> 1
                if not seen[v] and level[v] > 0:
                    seen[v] = True
                    self._bump_var(v)
                    if level[v] >= dl:
                        path += 1
                    else:
                        learnt.append(q)
            while not seen[trail[idx] >> 1]:
                idx -= 1
            p = trail[idx]
            idx -= 1
            v = p >> 1
            c = reason[v]
            seen[v] = False
            path -= 1
            if path == 0:
                break
        learnt[0] = p ^ 1

        # recursive minimization
        to_clear = list(learnt)
        abstract = 0
        for q in learnt[1:]:
            abstract |= 1 << (level[q >> 1] & 31)
        kept = [learnt[0]]
        for q in learnt[1:]:
            if reason[q >> 1] is None or not self._redundant(q, abstract, to_clear):
                kept.append(q)
        learnt = kept
        for q in to_clear:
            seen[q >> 1] = False

        if len(learnt) == 1:
            bj = 0
        else:
            best = 1
            for k in range(2, len(learnt)):
                if level[learnt[k] >> 1] > level[learnt[best] >> 1]:
                    best = k
            learnt[1], learnt[best] = learnt[best], learnt[1]
            bj = level[learnt[1] >> 1]
        decisions = [trail[self.trail_lim[i]] for i in range(bj)]
        return ConflictAnalysisOutcome(learnt, learnt[0], bj, dl, decisions, self._lbd(learnt))

    def _redundant(self, p: int, abstract: int, to_clear: list[int]) -> bool:
        seen, level, reason = self.seen, self.level, self.reason
        stack = [p]
        top = len(to_clear)
        while stack:
            q = stack.pop()
            for l in reason[q >> 1].lits[1:]:
                v = l >> 1
                if seen[v] or level[v] == 0:
                    continue
                if reason[v] is not None and (1 << (level[v] & 31)) & abstract:
                    seen[v] = True
                    stack.append(l)
                    to_clear.append(l)
                else:
                    for l2 in to_clear[top:]:
                        seen[l2 >> 1] = False
                    del to_clear[top:]
                    return False
        return True

    # ---- learning ----------------------------------------------------------

    def _clause_centrality(self, lits) -> Optional[float]:
        if self.centrality is None:
            return None
        vals = self.centrality.values
        return float(sum(vals[l >> 1] for l in lits) / len(lits))

    def _attach(self, c: StoredClause) -> None:
        self.watches[c.lits[0]].append(c)
        self.watches[c.lits[1]].append(c)

    def _learn(self, out: ConflictAnalysisOutcome) -> None:
        learnt = out.learned
        conflicts = self.stats.conflicts
        c = self.store.admit(learnt, out.lbd, conflicts, self._clause_centrality(learnt))
        self.stats.learned += 1
        if self.learned_log is not None:
            self.learned_log.append((len(learnt), out.lbd))
        if len(learnt) == 1:
            self._assign(learnt[0], None)
        else:
            self._attach(c)
            self._assign(learnt[0], c)
        self._learn_aux(out)

    def _learn_aux(self, out: ConflictAnalysisOutcome) -> None:
        cfg = self.policy.aux
        if cfg.mode is AuxMode.OFF:
            return
        aux = derive_backjump_clause(out, cfg)
        if aux is None:
            return
        lits = list(aux.lits)
        route = "perm" if cfg.mode is AuxMode.TO_PERM else "temp"
        c = self.store.admit(lits, aux.lbd, self.stats.conflicts,
                             self._clause_centrality(lits), route=route)
        self._attach(c)
        self.stats.aux_emitted += 1
        if self.aux_log is not None:
            self.aux_log.append((tuple(from_code(l) for l in lits), aux.lbd, aux.backjump_level))

    # ---- search ------------------------------------------------------------

    def _pick_branch(self) -> int:
        heap, val, act = self.heap, self.val, self.activity
        while heap:
            neg, v = heapq.heappop(heap)
            if val[2 * v] == 0 and -neg == act[v]:
                return 2 * v + self.polarity[v]
        for v in range(1, self.n + 1):
            if val[2 * v] == 0:  # pragma: no cover - heap invariant guards this
                return 2 * v + self.polarity[v]
        return 0

    def _simplify(self) -> None:
        val = self.val
        self.store.remove_satisfied(lambda c: any(val[l] == 1 for l in c.lits))

    def _snapshot(self) -> None:
        self.recorder.snapshot(self.stats.conflicts, self.store, self.hc_state,
                               self.stats.aux_emitted)

    def _finish(self, status: Status, t0: float) -> SolveResult:
        self.stats.wall_time = time.perf_counter() - t0
        if self.store is None:
            self.prepare()
        rows = self.recorder.rows
        if rows and rows[-1].conflict_no == self.stats.conflicts:
            rows.pop()
        self._snapshot()
        model = None
        if status is Status.SAT:
            model = [v if self.val[2 * v] == 1 else -v for v in range(1, self.n + 1)]
        if self.trace is not None:
            self.trace.append(("end", status.value))
        return SolveResult(status, model, self.stats, self.recorder.rows)

    def solve(self, budget: Optional[Budget] = None) -> SolveResult:
        budget = budget or Budget()
        t0 = time.perf_counter()
        deadline = None if budget.seconds is None else t0 + budget.seconds
        if self.store is None:
            self.prepare()
        if not self.ok or self.propagate() is not None:
            return self._finish(Status.UNSAT, t0)
        store, stats, trace = self.store, self.stats, self.trace
        hc_cfg = self.policy.hc
        max_conflicts = budget.conflicts
        restart_idx = 0
        restart_limit = self.restart_base * luby(0)
        since_restart = 0
        simplified_at = -1
        while True:
            confl = self.propagate()
            if confl is not None:
                if not self.trail_lim:
                    return self._finish(Status.UNSAT, t0)
                stats.conflicts += 1
                since_restart += 1
                out = self.analyze(confl)
                self.cancel_until(out.backjump_level)
                self._learn(out)
                if trace is not None:
                    trace.append(("c", stats.conflicts, tuple(out.learned), out.backjump_level))
                self.var_inc /= self.var_decay
                store.decay_activities()
                if self.hc_state is not None and stats.conflicts % hc_cfg.review_period == 0:
                    hc_tick(self.hc_state, store.learned_total, hc_cfg)
                store.tick(stats.conflicts)
                if self.recorder.due(stats.conflicts):
                    self._snapshot()
                if max_conflicts is not None and stats.conflicts >= max_conflicts:
                    return self._finish(Status.UNKNOWN, t0)
                if deadline is not None and time.perf_counter() > deadline:
                    return self._finish(Status.UNKNOWN, t0)
                if since_restart >= restart_limit:
                    self.cancel_until(0)
                    stats.restarts += 1
                    restart_idx += 1
                    restart_limit = self.restart_base * luby(restart_idx)
                    since_restart = 0
                    if trace is not None:
                        trace.append(("r", stats.conflicts))
            else:
                if not self.trail_lim and len(self.trail) != simplified_at:
                    self._simplify()
                    simplified_at = len(self.trail)
                lit = self._pick_branch()
                if lit == 0:
                    return self._finish(Status.SAT, t0)
                stats.decisions += 1
                if deadline is not None and stats.decisions % 512 == 0 \
                        and time.perf_counter() > deadline:
                    return self._finish(Status.UNKNOWN, t0)
                self.decide(lit)
                if trace is not None:
                    trace.append(("d", lit))


class BaselineSolver(Solver):
    """The solver with centrality/HC and auxiliary learning removed entirely."""

    def _setup_features(self) -> None:
        self.centrality = None
        self.criterion = resolve_criterion(self.policy.criterion, False)
        self.hc_state = None

    def _learn_aux(self, out) -> None:
        pass


def solve(f: Formula, cfg: Optional[PolicyConfig] = None, budget: Optional[Budget] = None,
          **kwargs) -> SolveResult:
    return Solver(f, cfg, **kwargs).solve(budget)
