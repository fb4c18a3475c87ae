"""Randomized event-stream driver for the tier machine with invariant checks.

Each step is one of: admission, use with a recomputed LBD, staleness scan,
Local reduction, plus the periodic tick the solver performs per conflict.
Every invariant is checked against state captured just before the step, so a
violation names the event that caused it.
"""
from __future__ import annotations

import math
import random

from permsat.policy import (DeleteHalfActivity, DeleteHalfLbd, Freeze, LbdAtMost, LbdOrHc,
                            NoLimit, SAVE_PREDICATES, SizeAtMost)
from permsat.store import ClauseStore, StoreConfig, Tier

ALLOWED = {(Tier.LOCAL, Tier.TIER2), (Tier.LOCAL, Tier.CORE), (Tier.TIER2, Tier.CORE),
           (Tier.TIER2, Tier.LOCAL)}


class Violation(AssertionError):
    pass


def _check(cond, msg):
    if not cond:
        raise Violation(msg)


def make_store(rng: random.Random, record_events=False):
    criterion = rng.choice([LbdAtMost(rng.randint(2, 8)), SizeAtMost(rng.randint(2, 15)),
                            LbdAtMost(3), LbdOrHc(3)])
    limit = rng.choice([NoLimit(), NoLimit(), Freeze(rng.randint(5, 300)),
                        DeleteHalfActivity(rng.randint(5, 300)),
                        DeleteHalfLbd(rng.randint(5, 300), rng.choice(list(SAVE_PREDICATES.values())))])
    if rng.random() < 0.5:
        # production constants; conflicts advance fast enough to reach them
        cfg = StoreConfig()
        step = rng.choice([1, 5, 20])
    else:
        cfg = StoreConfig(tier2_scan_period=50, tier2_stale_age=150, local_cap_base=100,
                          local_cap_step=15, relax_check_at=2000, relax_if_core_below=40)
        step = 1
    hc = None
    if isinstance(criterion, LbdOrHc):
        hc_rng = random.Random(rng.random())
        hc = lambda c: hc_rng.random() < 0.2
    return ClauseStore(criterion, limit, cfg, hc=hc, record_events=record_events), step


def replay(seed: int, n_events: int = 100_000, record_events=False):
    rng = random.Random(seed)
    store, step = make_store(rng, record_events)
    locked_mod = rng.randint(5, 40)
    # reasons for current assignments: some young clauses, released as they age
    store.is_locked = lambda c: c.id % locked_mod == 0 and store.conflict_no - c.born_at < 500
    if store.hc is not None:
        verdicts = {}
        inner = store.hc
        store.hc = lambda c: verdicts.setdefault(c.id, inner(c))
    live = []          # admitted clauses, pruned lazily when deleted
    conflict_no = 0
    last_k = store.threshold.k
    stats = dict(admit=0, use=0, scan=0, reduce=0, promote=0, demote=0, deleted=0)

    for _ in range(n_events):
        r = rng.random()
        if r < 0.45 or not live:
            conflict_no += step
            size = rng.randint(1, 30)
            lbd = rng.randint(1, size)
            core_before = len(store.core)
            reductions_before = store.core_reductions
            frozen_before = isinstance(store.limit, Freeze) and core_before >= store.limit.cap
            c = store.admit(list(range(0, 2 * size, 2)), lbd, conflict_no)
            hc_v = verdicts.get(c.id) if store.hc is not None else None
            # expected tier against state before admission
            store_k = store.threshold.k
            cr = store.criterion
            if isinstance(cr, SizeAtMost):
                perm = size <= cr.k
            else:
                perm = lbd <= store_k or (not frozen_before and bool(hc_v))
            if perm:
                want = Tier.TIER2 if frozen_before else Tier.CORE
            else:
                want = Tier.LOCAL if lbd > store.config.local_lbd_floor else Tier.TIER2
            if store.core_reductions == reductions_before:
                _check(c.tier is want, f"seed {seed}: admitted size={size} lbd={lbd} to "
                                       f"{c.tier}, expected {want}")
            else:
                _check(want is Tier.CORE, f"seed {seed}: core reduction without core admission")
            _check(c.lbd == lbd and c.last_used == conflict_no, "admission bookkeeping")
            live.append(c)
            stats["admit"] += 1
            _tick(store, conflict_no, seed, stats)
            if store.threshold.k != last_k:
                _check(last_k == 3 and store.threshold.k == 5 and conflict_no >=
                       store.config.relax_check_at, "illegal threshold change")
                last_k = store.threshold.k
        elif r < 0.996:
            c = live[rng.randrange(len(live))]
            if c.deleted:
                live = [x for x in live if not x.deleted]
                continue
            before_tier, before_lbd, before_use = c.tier, c.lbd, c.usage
            core_red = store.core_reductions
            lbd_now = rng.randint(1, len(c.lits))
            moved = store.on_used(c, lbd_now, conflict_no)
            stats["use"] += 1
            if rng.random() < 0.3:
                store.bump_activity(c)
                store.decay_activities()
            _check(c.lbd == min(before_lbd, lbd_now), f"seed {seed}: lbd_min not monotone")
            _check(c.usage == before_use + 1 and c.last_used == conflict_no, "use bookkeeping")
            if moved is None:
                _check(c.tier is before_tier or (c.deleted and store.core_reductions > core_red),
                       "tier changed without a promotion")
            else:
                _check(moved[0] is before_tier and moved in ALLOWED and moved[1] is not
                       Tier.LOCAL, f"seed {seed}: illegal promotion {moved}")
                _check(lbd_now < before_lbd, "promotion without an LBD decrease")
                _check(moved[1] is not Tier.CORE or not isinstance(store.criterion, SizeAtMost),
                       "LBD promotion to Core under a size criterion")
                stats["promote"] += 1
            if before_tier is Tier.CORE:
                _check(c.tier is Tier.CORE, "Core clause left Core")
        elif r < 0.998:
            _scan(store, conflict_no, seed, stats)
        else:
            _reduce(store, seed, stats)
        _check(len(store) == store.learned_total - store.deleted - store.removed_satisfied,
               f"seed {seed}: accounting identity broken")
    return store, stats


def _tick(store, conflict_no, seed, stats):
    cfg = store.config
    if conflict_no % cfg.tier2_scan_period == 0:
        _scan(store, conflict_no, seed, stats, via_tick=True)
    elif store.local_due():
        _reduce(store, seed, stats, via_tick=True)
    else:
        store.tick(conflict_no)


def _scan(store, conflict_no, seed, stats, via_tick=False):
    age = store.config.tier2_stale_age
    stale = {c.id for c in store.tier2.values() if conflict_no - c.last_used >= age}
    core = set(store.core)
    tier2_before = set(store.tier2)
    local_before = set(store.local)
    reductions_before = store.reductions
    if via_tick:
        store.tick(conflict_no)
    else:
        store.demote_stale_tier2(conflict_no)
    _check(set(store.core) == core, f"seed {seed}: scan touched Core")
    _check(set(store.tier2) == tier2_before - stale, f"seed {seed}: wrong clauses demoted")
    if store.reductions == reductions_before:
        _check(set(store.local) == local_before | stale, f"seed {seed}: Local changed by scan")
    stats["scan"] += 1
    stats["demote"] += len(stale)


def _reduce(store, seed, stats, via_tick=False):
    before = dict(store.local)
    locked = {i for i, c in before.items() if store.is_locked(c)}
    core = set(store.core)
    tier2 = set(store.tier2)
    unlocked = sorted((c for c in before.values() if c.id not in locked),
                      key=lambda c: (c.activity, -c.lbd, c.born_at))
    if via_tick:
        store.tick(store.conflict_no)
    else:
        store.reduce_local()
    after = set(store.local)
    _check(len(after) >= math.ceil(len(before) / 2), f"seed {seed}: reduced below half")
    _check(locked <= after, f"seed {seed}: locked clause deleted")
    _check(after <= set(before), f"seed {seed}: reduction added clauses")
    gone = set(before) - after
    _check(gone == {c.id for c in unlocked[:len(gone)]}, f"seed {seed}: wrong victims")
    _check(len(gone) == min(len(before) // 2, len(unlocked)), f"seed {seed}: wrong quota")
    _check(set(store.core) == core and set(store.tier2) == tier2, "reduction touched Core/Tier2")
    stats["reduce"] += 1
    stats["deleted"] += len(gone)
