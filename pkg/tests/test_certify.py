"""
Tests for seeded certification, sweeps, extrapolation and the shift check
"""
import math
from types import SimpleNamespace

import pytest

from core.errors import BranchError, ExtrapolationError, PreconditionError
from pwcycles import certify
from pwcycles.certify import (
    DOUBLED_FROM_PARENT, MELNIKOV_SEED, PSEUDO_HOPF, SUMMARY_COLUMNS, SWEEP, HypothesisCheck,
    certify_chain, certify_level0, certify_level_k, check_hypothesis_ak, check_limit_ordinates,
    fold_alignment_diagnostic, pseudo_hopf_bookkeeping, refine_cycle, richardson_limit, seed_window,
    shift_bound_for_report, shifted_origin_displacement, sweep_count, sweep_level, sweep_windows,
    validate_epsilon,
)
from pwcycles.hamiltonian_family import (
    build_level, default_epsilon_vector, default_tables, expected_cycles, refined_expected_cycles,
)

EPSILON = 1e-3
VECTOR = default_epsilon_vector(1)


@pytest.fixture(scope="module")
def chain1():
    return certify_chain(1, EPSILON, VECTOR)


class TestLevel0:

    def test_single_cycle_near_canonical_zero(self):
        report = certify_level0(EPSILON)
        assert report.passed
        assert report.found == report.expected == 1
        record = report.records[0]
        assert record.provenance == MELNIKOV_SEED
        assert record.upper_ordinate == pytest.approx(0.5, abs=1e-2)
        assert record.lower_ordinate == pytest.approx(-0.5, abs=1e-2)
        assert record.surrounds_origin
        assert record.residual <= 1e-10

    def test_epsilon_range(self):
        with pytest.raises(PreconditionError):
            certify_level0(0.0)
        with pytest.raises(PreconditionError):
            certify_level0(0.5)

    def test_summary_row_columns(self):
        row = certify_level0(EPSILON).summary_row()
        assert tuple(row) == SUMMARY_COLUMNS
        assert row["n_k"] == 2


class TestLevel1:

    def test_count_follows_recurrence(self, chain1):
        level0, level1 = chain1
        assert level1.passed
        assert level1.found == 2 * level0.found + 3 - 1 == 4
        provenances = sorted(r.provenance for r in level1.records)
        assert provenances == [DOUBLED_FROM_PARENT] * 2 + [MELNIKOV_SEED] * 2

    def test_doubled_cycles_sit_near_square_roots(self, chain1):
        level0, level1 = chain1
        y = level0.records[0].upper_ordinate
        doubled = [r.upper_ordinate for r in level1.records if r.provenance == DOUBLED_FROM_PARENT]
        assert max(doubled) == pytest.approx((y + 2.0) ** 0.5, abs=1e-2)

    def test_parent_must_match(self, chain1):
        level0, _ = chain1
        with pytest.raises(PreconditionError):
            certify_level_k(1, 2e-3, VECTOR, level0)
        with pytest.raises(PreconditionError):
            certify_level_k(2, EPSILON, VECTOR + (1e-5,), level0)
        with pytest.raises(PreconditionError):
            certify_level_k(0, EPSILON, (), level0)

    def test_chain_needs_vector_entries(self):
        with pytest.raises(PreconditionError):
            certify_chain(1, EPSILON, ())

    def test_sweep_agrees_with_seeded_count(self, chain1):
        _, level1 = chain1
        report = sweep_level(build_level(1, EPSILON, VECTOR, default_tables(1)), density=400)
        assert report.found == level1.found
        assert all(r.provenance == SWEEP for r in report.records)
        seeded = sorted(r.upper_ordinate for r in level1.records)
        swept = sorted(r.upper_ordinate for r in report.records)
        assert swept == pytest.approx(seeded, abs=1e-6)
        assert report.diagnostics["sweep"]["count"] == 4


class TestShiftBound:

    def test_level0_cycle_is_monotone_in_b(self):
        check = shift_bound_for_report(certify_level0(EPSILON))
        assert check.passed
        assert len(check.rows) == 3
        assert check.minimum == pytest.approx(2.0, abs=1e-2)
        for row in check.rows:
            assert row["closedForm"] == pytest.approx(row["shiftDerivative"], abs=1e-3)

    def test_level1_cycles_are_monotone_in_b(self, chain1):
        check = shift_bound_for_report(chain1[1])
        assert check.passed
        assert len(check.rows) == 12
        assert check.to_json()["minimum"] >= 1.0 - 1e-4


class TestExtrapolation:

    def test_linear_decay(self):
        eps = (1e-2, 1e-3, 1e-4)
        assert richardson_limit(eps, [0.5 + 3.0 * e for e in eps]) == pytest.approx(0.5, abs=1e-10)

    def test_quadratic_decay(self):
        eps = (1e-2, 1e-3, 1e-4)
        values = [0.5 - 7.0 * e * e for e in eps]
        assert richardson_limit(eps, values) == pytest.approx(0.5, abs=1e-10)

    def test_converged_samples(self):
        assert richardson_limit((1e-2, 1e-3, 1e-4), [0.25, 0.25, 0.25]) == 0.25

    def test_irregular_decay_raises(self):
        with pytest.raises(ExtrapolationError):
            richardson_limit((1e-2, 1e-3, 1e-4), [0.5, 0.4, 0.2])
        with pytest.raises(PreconditionError):
            richardson_limit((1e-2, 1e-3), [0.5, 0.4])

    def test_limit_ordinates_must_be_distinct_and_nonzero(self):
        assert check_limit_ordinates([0.5, -0.5, 0.5 + 1e-9, 0.0]) == [False, True, False, False]
        assert check_limit_ordinates([0.3, 0.3]) == [False, False]
        assert check_limit_ordinates([0.3, -0.3, 0.7]) == [True, True, True]
        assert check_limit_ordinates([1e-7, 0.4]) == [False, True]

    def test_duplicated_limit_fails_the_hypothesis(self):
        assert not HypothesisCheck(0, 0.5, 0.0, 1.0, a_prime=False, a_double_prime=True).passed
        assert not HypothesisCheck(0, 0.5, 0.2, 1e-9, a_prime=True, a_double_prime=False).passed
        assert HypothesisCheck(0, 0.5, 0.0, 1.0, a_prime=True, a_double_prime=True).passed

    def test_hypothesis_holds_at_level0(self):
        checks = check_hypothesis_ak(certify_level0(EPSILON))
        assert len(checks) == 1
        check = checks[0]
        assert check.limit_ordinate == pytest.approx(0.5, abs=1e-8)
        assert check.reduced_value == pytest.approx(0.0, abs=1e-6)
        assert check.reduced_slope == pytest.approx(1.0, rel=1e-2)
        assert check.passed

    def test_hypothesis_needs_three_samples(self):
        with pytest.raises(PreconditionError):
            check_hypothesis_ak(certify_level0(EPSILON), schedule=(1e-2, 1e-3))


class TestSweeps:

    def test_sweep_count_finds_sign_changes(self):
        result = sweep_count(lambda y: (y - 0.333) * (y - 0.811), [(0.0, 1.0)], density=100)
        assert result.roots == pytest.approx([0.333, 0.811], abs=1e-10)
        assert result.undefined == 0

    def test_identically_zero_counts_nothing(self):
        assert sweep_count(lambda y: 0.0, [(0.0, 1.0)], density=50).count == 0

    def test_empty_window_rejected(self):
        with pytest.raises(PreconditionError):
            sweep_count(lambda y: y, [(1.0, 1.0)])

    def test_level0_windows(self):
        assert sweep_windows(0) == [pytest.approx((0.02, 0.98))]

    def test_refine_cycle_on_linear_function(self):
        y, residual, margin, scale = refine_cycle(lambda y: 2.0 * (y - 0.4), 0.45)
        assert y == pytest.approx(0.4, abs=1e-14)
        assert residual <= 1e-14
        assert margin == pytest.approx(2.0)
        assert scale == pytest.approx(2.0)


def test_adaptive_epsilon_stabilises_at_level0():
    epsilon, vector, reports = validate_epsilon(0, ())
    assert epsilon == pytest.approx(5e-3)
    assert vector == ()
    assert reports[-1].found == 1


def test_fold_alignment_matches_melnikov_constant(level0):
    diagnostic = fold_alignment_diagnostic(level0)
    assert diagnostic["foldMinus"] == pytest.approx(0.0, abs=1e-10)
    assert diagnostic["bAlign"] == pytest.approx(EPSILON / 8.0, rel=1e-3)
    assert diagnostic["epsilonMelnikovAtZero"] == pytest.approx(-EPSILON / 4.0)
    assert diagnostic["consistent"]


def test_pseudo_hopf_bookkeeping(chain1):
    rows = pseudo_hopf_bookkeeping(chain1)
    expected = [refined_expected_cycles(0), refined_expected_cycles(1)]
    assert [row["refinedExpected"] for row in rows] == expected
    assert [row["k"] for row in rows] == [0, 1]
    assert chain1[1].diagnostics["pseudoHopf"] is rows[1]


def test_adaptive_epsilon_halves_the_vector_with_epsilon(monkeypatch):
    calls = []

    def fake_chain(k, epsilon, vector, tables, tol, jobs, pseudo_hopf):
        calls.append((epsilon, vector))
        return [SimpleNamespace(level=k, found=4)]

    monkeypatch.setattr(certify, "certify_chain", fake_chain)
    epsilon, vector, _ = validate_epsilon(1, (4e-5,))
    assert [c[0] for c in calls] == [pytest.approx(1e-2), pytest.approx(5e-3)]
    assert [c[1] for c in calls] == [(pytest.approx(4e-5),), (pytest.approx(2e-5),)]
    assert epsilon == pytest.approx(5e-3)
    assert vector == (pytest.approx(2e-5),)


def test_seed_window_holds_a_lower_copy_seed():
    window = seed_window(2, -1.3038)
    assert window is not None
    lo, hi = window
    assert -math.sqrt(2.0) < lo < -1.3038 < hi < -1.0
    assert seed_window(2, 0.0) is None


@pytest.fixture(scope="module")
def stepped_chain():
    return certify_chain(1, EPSILON, VECTOR, pseudo_hopf=True)


class TestPseudoHopfStep:

    def test_level0_cycle_encloses_the_sliding_segment(self, stepped_chain):
        step = stepped_chain[0].pseudo_hopf
        assert step.passed
        assert step.admissible_sign == -1
        assert step.b_align == pytest.approx(EPSILON / 8.0, rel=1e-3)
        assert step.cycle.provenance == PSEUDO_HOPF
        assert step.cycle.upper_ordinate == pytest.approx(0.158, abs=2e-3)
        assert step.encloses
        assert step.opposite_roots == []
        assert step.shifted_origin_count == 1

    def test_level1_moves_only_the_innermost_origin_cycle(self, stepped_chain):
        step = stepped_chain[1].pseudo_hopf
        assert step.passed
        assert step.admissible_sign == -1
        assert step.cycle.upper_ordinate < 0.3
        assert step.shifted_origin_count == 2

    def test_chain_passes_with_the_step(self, stepped_chain):
        assert [r.found for r in stepped_chain] == [expected_cycles(0), expected_cycles(1)]
        assert all(r.passed for r in stepped_chain)
        assert stepped_chain[1].to_json()["pseudoHopfStep"]["passed"]

    def test_count_with_shift_stays_below_refined(self, stepped_chain):
        rows = pseudo_hopf_bookkeeping(stepped_chain)
        assert [row["countWithShift"] for row in rows] == [1, 4]
        assert all(row["countWithShift"] < row["refinedExpected"] for row in rows)

    def test_shift_outside_the_origin_window_raises(self, level0):
        with pytest.raises(BranchError):
            shifted_origin_displacement(level0, 0.5, 0.6)

    def test_offset_must_be_a_fraction(self, stepped_chain):
        with pytest.raises(PreconditionError):
            certify.pseudo_hopf_step(stepped_chain[0], offset=1.5)


@pytest.mark.slow
def test_level2_count_with_derived_vector():
    reports = certify_chain(2, EPSILON, default_epsilon_vector(2))
    assert reports[-1].level == 2
    assert reports[-1].found == expected_cycles(2)
    assert all(r.passed for r in reports)
    level = build_level(2, EPSILON, default_epsilon_vector(2), default_tables(2))
    assert sweep_level(level).found == expected_cycles(2)
