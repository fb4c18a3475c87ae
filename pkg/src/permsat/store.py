"""Three-tier learned clause database.

Core is the permanent store (PERM); Tier2 and Local together are the
temporary store.  Clauses enter a tier at admission, move up when their LBD
improves, drop from Tier2 to Local when unused for long enough, and are
deleted only from Local (or from Core by an explicit PERM limit scheme).
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, NamedTuple, Optional

from .policy import (REROUTE, CoreThreshold, DeleteHalfLbd, LbdAtMost, LbdOrHc, NoLimit, PermCriterion,
                     PermLimitScheme, enforce_perm_limit, perm_criterion)
from .stats import record_use


class Tier(str, Enum):
    CORE = "core"
    TIER2 = "tier2"
    LOCAL = "local"


class StoredClause:
    __slots__ = ("lits", "id", "lbd", "activity", "last_used", "tier", "usage",
                 "centrality", "born_at", "deleted", "learnt", "use_stamp")

    def __init__(self, lits, id=-1, lbd=0, born_at=0, centrality=None, learnt=True):
        self.lits = lits
        self.id = id
        self.lbd = lbd                # minimum LBD observed so far
        self.activity = 0.0
        self.last_used = born_at
        self.tier: Optional[Tier] = None
        self.usage = 0
        self.centrality = centrality
        self.born_at = born_at
        self.deleted = False
        self.learnt = learnt
        self.use_stamp = -1

    @property
    def size(self) -> int:
        return len(self.lits)

    def __repr__(self):
        return (f"StoredClause(id={self.id}, size={len(self.lits)}, lbd={self.lbd}, "
                f"tier={self.tier and self.tier.value}, act={self.activity:.3g})")


@dataclass
class StoreConfig:
    core_lbd_relaxed: int = 5
    local_lbd_floor: int = 6          # LBD above this goes to Local
    tier2_scan_period: int = 10_000
    tier2_stale_age: int = 30_000
    relax_check_at: int = 100_000
    relax_if_core_below: int = 100
    local_cap_base: int = 2000
    local_cap_step: int = 300
    clause_decay: float = 0.999
    activity_limit: float = 1e20
    allow_deletion: bool = True       # Local reduction and satisfied-clause cleanup
    allow_demotion: bool = True
    count_use_once_per_conflict: bool = False


class StoreEvent(NamedTuple):
    kind: str           # admit | promote | demote | delete | remove | relax
    conflict_no: int
    clause_id: int
    src: str
    dst: str


class ClauseStore:
    def __init__(self, criterion: PermCriterion, limit: PermLimitScheme = NoLimit(),
                 config: Optional[StoreConfig] = None,
                 hc: Optional[Callable[[StoredClause], bool]] = None,
                 record_events: bool = False, keep_history: bool = False):
        self.criterion = criterion
        self.limit = limit
        self.config = config or StoreConfig()
        self.hc = hc
        self.threshold = CoreThreshold.for_criterion(
            criterion, relaxed=self.config.core_lbd_relaxed,
            check_at=self.config.relax_check_at, min_core=self.config.relax_if_core_below)
        self.tiers: dict[Tier, dict[int, StoredClause]] = {t: {} for t in Tier}
        self.is_locked: Callable[[StoredClause], bool] = lambda c: False
        self.cla_inc = 1.0
        self.next_id = 0
        self.learned_total = 0
        self.sent_to_core = 0
        self.deleted = 0
        self.removed_satisfied = 0
        self.reductions = 0
        self.core_reductions = 0
        self.conflict_no = 0
        self.events: Optional[list[StoreEvent]] = [] if record_events else None
        self.history: Optional[list[StoredClause]] = [] if keep_history else None
        # Core clauses the save predicate does not protect, so delete-half by LBD
        # never has to scan a Core that is mostly protected
        self._unsaved: Optional[dict[int, StoredClause]] = \
            {} if isinstance(limit, DeleteHalfLbd) else None

    def __len__(self):
        return sum(len(t) for t in self.tiers.values())

    @property
    def core(self):
        return self.tiers[Tier.CORE]

    @property
    def tier2(self):
        return self.tiers[Tier.TIER2]

    @property
    def local(self):
        return self.tiers[Tier.LOCAL]

    def clauses(self) -> Iterable[StoredClause]:
        for t in self.tiers.values():
            yield from t.values()

    def _emit(self, kind, c_id, src, dst):
        if self.events is not None:
            self.events.append(StoreEvent(kind, self.conflict_no, c_id, src, dst))

    def _move(self, c: StoredClause, dst: Tier, kind: str):
        src = c.tier
        del self.tiers[src][c.id]
        self.tiers[dst][c.id] = c
        c.tier = dst
        self._emit(kind, c.id, src.value, dst.value)

    def _index(self, c: StoredClause) -> None:
        if self._unsaved is None or c.tier is not Tier.CORE:
            return
        if self.limit.save(c):
            self._unsaved.pop(c.id, None)
        else:
            self._unsaved[c.id] = c

    def _lbd_says_core(self, size: int, lbd: int) -> bool:
        return perm_criterion(size, lbd, self.criterion, lbd_threshold=self.threshold.k)

    def _frozen(self) -> bool:
        return enforce_perm_limit(self.core, self.limit, incoming=True) == REROUTE

    def classify(self, size: int, lbd: int, perm: bool) -> Tier:
        """Admission table: PERM verdict first, then the Local/Tier2 LBD split."""
        if perm:
            return Tier.TIER2 if self._frozen() else Tier.CORE
        return Tier.LOCAL if lbd > self.config.local_lbd_floor else Tier.TIER2

    def admit(self, lits, lbd: int, conflict_no: Optional[int] = None,
              centrality: Optional[float] = None, route: Optional[str] = None) -> StoredClause:
        """Register a freshly learned clause; ``route`` forces "perm" or "temp"."""
        if conflict_no is not None:
            self.conflict_no = conflict_no
        c = StoredClause(lits, self.next_id, lbd, self.conflict_no, centrality)
        self.next_id += 1
        self.learned_total += 1
        if route == "perm":
            perm = True
        elif route == "temp":
            perm = False
        elif self._frozen():
            # no HC bookkeeping once PERM is frozen
            perm = self._lbd_says_core(len(lits), lbd)
        else:
            hc = (lambda: self.hc(c)) if self.hc is not None else None
            perm = perm_criterion(len(lits), lbd, self.criterion, hc, self.threshold.k)
        tier = self.classify(len(lits), lbd, perm)
        c.tier = tier
        self.tiers[tier][c.id] = c
        if self.history is not None:
            self.history.append(c)
        self._emit("admit", c.id, "", tier.value)
        if tier is Tier.CORE:
            self.sent_to_core += 1
            self._index(c)
            self._check_core_limit()
        return c

    def on_used(self, c: StoredClause, lbd_now: int, conflict_no: Optional[int] = None):
        """Account one use in conflict analysis; returns (src, dst) if promoted."""
        if conflict_no is not None:
            self.conflict_no = conflict_no
        record_use(c, self.conflict_no, self.config.count_use_once_per_conflict)
        c.last_used = self.conflict_no
        if lbd_now >= c.lbd:
            return None
        c.lbd = lbd_now
        if c.tier is Tier.CORE or c.deleted:
            if not c.deleted:
                self._index(c)
            return None
        src = c.tier
        dst = None
        if (isinstance(self.criterion, (LbdAtMost, LbdOrHc))
                and self._lbd_says_core(len(c.lits), lbd_now) and not self._frozen()):
            dst = Tier.CORE
        elif src is Tier.LOCAL and lbd_now <= self.config.local_lbd_floor:
            dst = Tier.TIER2
        if dst is None:
            return None
        self._move(c, dst, "promote")
        if dst is Tier.CORE:
            self._index(c)
            self._check_core_limit()
        return src, dst

    def demote_stale_tier2(self, conflict_no: Optional[int] = None) -> int:
        if conflict_no is not None:
            self.conflict_no = conflict_no
        age = self.config.tier2_stale_age
        stale = [c for c in self.tier2.values() if self.conflict_no - c.last_used >= age]
        for c in stale:
            self._move(c, Tier.LOCAL, "demote")
        return len(stale)

    def local_due(self) -> bool:
        cfg = self.config
        return len(self.local) >= cfg.local_cap_base + cfg.local_cap_step * self.reductions

    def reduce_local(self) -> int:
        """Delete-half on Local by activity; locked clauses survive outside the quota."""
        local = list(self.local.values())
        quota = len(local) // 2
        victims = sorted((c for c in local if not self.is_locked(c)),
                         key=lambda c: (c.activity, -c.lbd, c.born_at))[:quota]
        for c in victims:
            self.delete(c)
        self.reductions += 1
        return len(victims)

    def _check_core_limit(self) -> int:
        if isinstance(self.limit, NoLimit) or len(self.core) < self.limit.cap:
            return 0
        pool = self.core if self._unsaved is None else self._unsaved
        victims = enforce_perm_limit(list(pool.values()), self.limit, is_locked=self.is_locked,
                                     size=len(self.core))
        if not victims or victims == REROUTE:
            return 0
        for c in victims:
            self.delete(c)
        self.core_reductions += 1
        return len(victims)

    def delete(self, c: StoredClause, kind: str = "delete") -> None:
        del self.tiers[c.tier][c.id]
        if self._unsaved is not None:
            self._unsaved.pop(c.id, None)
        c.deleted = True
        if kind == "delete":
            self.deleted += 1
        else:
            self.removed_satisfied += 1
        self._emit(kind, c.id, c.tier.value, "")

    def remove_satisfied(self, satisfied: Callable[[StoredClause], bool]) -> int:
        """Drop clauses satisfied by level-0 facts; they can never be used again."""
        if not self.config.allow_deletion:
            return 0
        gone = [c for c in self.clauses() if satisfied(c) and not self.is_locked(c)]
        for c in gone:
            self.delete(c, "remove")
        return len(gone)

    def bump_activity(self, c: StoredClause) -> None:
        c.activity += self.cla_inc
        if c.activity > self.config.activity_limit:
            scale = 1.0 / self.config.activity_limit
            for d in self.clauses():
                d.activity *= scale
            self.cla_inc *= scale

    def decay_activities(self) -> None:
        self.cla_inc /= self.config.clause_decay

    def tick(self, conflict_no: int) -> None:
        """Per-conflict maintenance: relaxation check, staleness scan, Local reduction."""
        self.conflict_no = conflict_no
        new_k = self.threshold.maybe_relax(conflict_no, len(self.core))
        if new_k is not None:
            self._emit("relax", -1, "", str(new_k))
        if self.config.allow_demotion and conflict_no % self.config.tier2_scan_period == 0:
            self.demote_stale_tier2()
        if self.config.allow_deletion and self.local_due():
            self.reduce_local()

    def write_events(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(StoreEvent._fields)
            w.writerows(self.events or [])


def read_events(path) -> list[StoreEvent]:
    with open(path, newline="") as fh:
        r = csv.DictReader(fh)
        return [StoreEvent(row["kind"], int(row["conflict_no"]), int(row["clause_id"]),
                           row["src"], row["dst"]) for row in r]
