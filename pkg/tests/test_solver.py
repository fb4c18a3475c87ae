import pytest
from hypothesis import given, strategies as st

from permsat.cnf import Formula, from_code, to_code
from permsat.generators import pigeonhole, random_3cnf, random_kcnf
from permsat.harness import verify_model
from permsat.oracle import oracle_entails, oracle_solve
from permsat.policy import (AuxLearnConfig, AuxMode, DeleteHalfActivity, DeleteHalfLbd, Freeze,
                            Hybrid, LbdAtMost, LbdOrHc, PolicyConfig, SAVE_PREDICATES,
                            SizeAtMost, parse_policy)
from permsat.solver import Budget, Solver, Status, compute_lbd, luby, solve


def test_empty_formula_sat():
    res = solve(Formula(0, ()))
    assert res.status is Status.SAT
    assert res.model == []


def test_contradictory_units():
    assert solve(Formula(1, ((1,), (-1,)))).status is Status.UNSAT


def test_empty_clause_unsat():
    assert solve(Formula(2, ((1, 2), ()))).status is Status.UNSAT


# statuses frozen from exhaustive 2^20 enumeration (oracle.brute_force_status)
RANDOM_20_85 = ["UNSAT", "UNSAT", "SAT", "SAT", "UNSAT", "SAT", "SAT", "SAT"]


@pytest.mark.parametrize("seed", range(8))
def test_random_3cnf_matches_enumeration(seed):
    f = random_kcnf(20, 85, 3, seed)
    res = solve(f)
    assert res.status.value == RANDOM_20_85[seed]
    if res.status is Status.SAT:
        assert verify_model(f, res.model)


def _manual(clauses, n):
    s = Solver(Formula(n, tuple(clauses)))
    s.prepare()
    return s


def test_propagate_unit_rule():
    s = _manual([(1, 2)], 2)
    s.decide(to_code(-1))
    assert s.propagate() is None
    assert s.val[to_code(2)] == 1
    assert s.reason[2] is not None


def test_propagate_reports_conflict():
    s = _manual([(1, 2), (1, -2)], 2)
    s.decide(to_code(-1))
    confl = s.propagate()
    assert confl is not None
    assert all(s.val[l] == -1 for l in confl.lits)


def test_propagate_fixpoint_no_change():
    s = _manual([(1, 2, 3)], 3)
    s.decide(to_code(-1))
    assert s.propagate() is None
    assert s.trail == [to_code(-1)]


# decide 1 at level 1 (-> 2), decide 3 at level 2 (-> 4 -> 5, 6) and the last
# clause is falsified.  The first UIP is 4; -2 is removed by minimization.
CRAFTED = [(-1, 2), (-3, 4), (-2, -4, 5), (-2, -4, 6), (-5, -6, -1)]


def test_analyze_crafted_instance():
    s = _manual(CRAFTED, 6)
    s.decide(to_code(1))
    assert s.propagate() is None
    s.decide(to_code(3))
    confl = s.propagate()
    assert confl is not None
    out = s.analyze(confl)
    learned = [from_code(l) for l in out.learned]
    assert from_code(out.asserting_literal) == -4
    assert sorted(learned) == [-4, -1]
    assert out.conflict_level == 2 and out.backjump_level == 1
    assert [from_code(d) for d in out.decisions] == [1]
    assert out.lbd == 2
    assert oracle_entails(Formula(6, tuple(CRAFTED)), learned)


def test_analyze_unit_learned_clause_backjumps_to_zero():
    s = _manual([(-1, 2), (-1, 3), (-2, -3)], 3)
    s.decide(to_code(1))
    out = s.analyze(s.propagate())
    assert [from_code(l) for l in out.learned] == [-1]
    assert out.backjump_level == 0 and out.decisions == []


def test_analyze_at_level_zero_is_refused():
    s = _manual([(1, 2)], 2)
    with pytest.raises(ValueError):
        s.analyze(s.originals[0])


class CheckingSolver(Solver):
    """Checks every conflict-analysis outcome against its contract."""

    outcomes = 0

    def analyze(self, confl):
        out = super().analyze(confl)
        lvl = self.level
        levels = [lvl[l >> 1] for l in out.learned]
        assert all(self.val[l] == -1 for l in out.learned)          # falsified now
        assert levels.count(out.conflict_level) == 1
        assert lvl[out.asserting_literal >> 1] == out.conflict_level
        others = levels[1:]
        assert out.backjump_level == (max(others) if others else 0)
        assert out.backjump_level < out.conflict_level
        assert len(out.decisions) == out.backjump_level
        assert out.lbd == len(set(levels))
        if self.check_entailment:
            assert oracle_entails(self.formula, [from_code(l) for l in out.learned])
        self.outcomes += 1
        return out

    def cancel_until(self, lvl):
        super().cancel_until(lvl)
        # trail levels are non-decreasing and each variable appears once
        levels = [self.level[l >> 1] for l in self.trail]
        assert levels == sorted(levels)
        assert len({l >> 1 for l in self.trail}) == len(self.trail)


@pytest.mark.parametrize("seed", range(6))
def test_learned_clauses_are_implied_and_asserting(seed):
    f = random_kcnf(14, 60, 3, seed)
    s = CheckingSolver(f)
    s.check_entailment = True
    res = s.solve()
    assert res.status is oracle_solve(f)
    assert s.outcomes == res.stats.conflicts


def test_compute_lbd_examples():
    assert compute_lbd([1, 2, 3], {1: 3, 2: 3, 3: 3}) == 1
    assert compute_lbd([1, -2, 3, 4], {1: 0, 2: 1, 3: 2, 4: 3}) == 4
    assert compute_lbd([1, 2, 3, 4, 5], {1: 2, 2: 5, 3: 5, 4: 7, 5: 7}) == 3


def test_compute_lbd_unassigned_is_contract_violation():
    with pytest.raises(ValueError):
        compute_lbd([1, 2], {1: 0, 2: None})


@given(st.lists(st.tuples(st.integers(1, 30), st.integers(0, 12)), min_size=1, max_size=20,
                unique_by=lambda t: t[0]))
def test_lbd_bounds(assignments):
    lits = [v for v, _ in assignments]
    lbd = compute_lbd(lits, dict(assignments))
    assert 1 <= lbd <= len(lits)


def test_luby_prefix():
    assert [luby(i) for i in range(15)] == [1, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1, 1, 2, 4, 8]


def test_budget_exhaustion_is_unknown():
    f = pigeonhole(7)
    res = solve(f, budget=Budget(conflicts=50))
    assert res.status is Status.UNKNOWN
    assert res.stats.conflicts == 50
    res = solve(f, budget=Budget(seconds=0.05))
    assert res.status is Status.UNKNOWN


def test_deterministic_traces():
    f = random_3cnf(60, 4.26, 11)
    traces = []
    for _ in range(2):
        s = Solver(f, record_trace=True)
        s.solve()
        traces.append(s.trace)
    assert traces[0] == traces[1]


MATRIX = [
    PolicyConfig(),
    PolicyConfig(LbdAtMost(2)),
    PolicyConfig(SizeAtMost(8)),
    PolicyConfig(SizeAtMost(15), Freeze(20)),
    PolicyConfig(LbdAtMost(3), DeleteHalfActivity(15)),
    PolicyConfig(LbdAtMost(3), DeleteHalfLbd(15, SAVE_PREDICATES["size3"])),
    PolicyConfig(LbdOrHc(3), aux=AuxLearnConfig(AuxMode.TO_PERM)),
    PolicyConfig(Hybrid(), aux=AuxLearnConfig(AuxMode.TO_TEMP)),
]


@pytest.mark.parametrize("cfg", MATRIX, ids=lambda c: c.label)
def test_policy_matrix_agrees_with_oracle(cfg):
    for seed in range(25):
        f = random_3cnf(12 + seed % 12, 4.3, 1000 + seed)
        res = solve(f, cfg)
        assert res.status is oracle_solve(f), seed
        if res.status is Status.SAT:
            assert verify_model(f, res.model)
    for holes in range(1, 5):
        assert solve(pigeonhole(holes), cfg).status is Status.UNSAT


def test_small_store_caps_exercise_reductions():
    from permsat.store import StoreConfig
    f = pigeonhole(6)
    cfg = StoreConfig(local_cap_base=20, local_cap_step=5, tier2_scan_period=50,
                      tier2_stale_age=100)
    s = Solver(f, PolicyConfig(SizeAtMost(3), DeleteHalfLbd(10)), store_config=cfg)
    assert s.solve().status is Status.UNSAT
    assert s.store.reductions > 0 and s.store.deleted > 0
    assert len(s.store.core) <= 10


@pytest.mark.parametrize("seed", range(4))
def test_zero_centrality_budget_searches_like_plain_lbd(seed):
    f = random_3cnf(70, 4.26, 40 + seed)
    traces = []
    for line in ("--perm-criterion lbd+hc:3 --centrality-budget-ms 0",
                 "--perm-criterion lbd:3"):
        s = Solver(f, parse_policy(line), record_trace=True)
        s.solve()
        traces.append(s.trace)
    assert traces[0] == traces[1]
