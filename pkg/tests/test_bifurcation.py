"""
Tests for pseudo-Hopf setups and searches and for the degree lift
"""
import pytest

from core.errors import ConditionError, MonodromyError, PreconditionError
from pwcycles.bifurcation import (
    ADMISSIBLE, OPPOSITE, PERSISTED, PSEUDO_HOPF, ZERO, check_conditions, focus_demo_field,
    focus_setup, level0_cycles, lift_degree, lift_demo_field, lifted_field, lyapunov_v2_leading,
    monotonicity_demo, origin_values, pseudo_hopf_search, simultaneous_pseudo_hopf,
    two_fold_demo_field, two_fold_setup,
)
from pwcycles.field import PiecewiseField
from pwcycles.poly import BiPolynomial

ONE = BiPolynomial.constant(1.0)
ZERO_POLY = BiPolynomial.constant(0.0)


@pytest.fixture(scope="module")
def two_fold():
    return two_fold_setup(two_fold_demo_field(), 0.0, (0.5, 1.0))


class TestSetups:

    def test_damped_two_fold_is_attracting(self, two_fold):
        assert two_fold.ell_sign == -1
        assert two_fold.rotation_sign == 1
        assert two_fold.admissible_b_sign == 1
        assert two_fold.certificate.ell_sign == -1

    def test_focus_on_the_line(self):
        setup = focus_setup(focus_demo_field(), 0.0)
        assert setup.ell_sign == 1
        assert setup.rotation_sign == 1
        assert setup.admissible_b_sign == -1

    def test_center_is_not_a_focus(self):
        with pytest.raises(MonodromyError):
            focus_setup(focus_demo_field(epsilon=0.0), 0.0)

    def test_crossing_point_is_not_a_two_fold(self):
        with pytest.raises(MonodromyError):
            two_fold_setup(two_fold_demo_field(), -1.0, (0.5,))


class TestTwoFoldSearch:

    def test_dichotomy(self, two_fold):
        report = pseudo_hopf_search(two_fold, (5e-2,), include_zero=False)
        assert report.dichotomy(5e-2)
        assert report.passed
        good = report.at(5e-2, ADMISSIBLE)
        assert good.b == pytest.approx(5e-2)
        assert good.cycle.provenance == PSEUDO_HOPF
        lo, hi = good.sliding_segment
        assert good.cycle.lower_ordinate < lo < hi < good.cycle.upper_ordinate
        bad = report.at(5e-2, OPPOSITE)
        assert not bad.found
        assert bad.absence_certified

    def test_magnitudes_must_be_positive(self, two_fold):
        with pytest.raises(PreconditionError):
            pseudo_hopf_search(two_fold, (0.0,))


class TestSimultaneousSearch:

    def test_unshifted_focus_keeps_its_cycle(self):
        field = focus_demo_field(cycle_radius=1.0)
        result = simultaneous_pseudo_hopf(field, [0.0], 0.0, existing_lower_ordinates=[-1.0])
        assert result.new_cycles == 0
        assert (result.persisting, result.existing) == (1, 1)
        assert result.per_focus[0].sign == ZERO
        assert not result.per_focus[0].found

    def test_center_cannot_be_searched(self):
        with pytest.raises(MonodromyError):
            simultaneous_pseudo_hopf(focus_demo_field(epsilon=0.0), [0.0], 1e-2)


class TestDegreeLift:

    def test_v2_leading_term(self):
        assert lyapunov_v2_leading(1.0, 1.0, 1.0, 1.0, 0.5) == pytest.approx(8.0 / 3.0)
        with pytest.raises(PreconditionError):
            lyapunov_v2_leading(1.0, 1.0, 1.0, 1.0, 0.0)
        with pytest.raises(ConditionError):
            lyapunov_v2_leading(1.0, 1.0, 1.0, -1.0, 0.5)

    def test_conditions(self):
        field, cycles = lift_demo_field()
        check_conditions(field, cycles)
        with pytest.raises(ConditionError) as info:
            check_conditions(field, [(0.1, -0.5)])
        assert info.value.condition == 'A'
        with pytest.raises(ConditionError) as info:
            check_conditions(two_fold_demo_field())
        assert info.value.condition == 'A'
        with pytest.raises(ConditionError) as info:
            check_conditions(PiecewiseField(ONE, ZERO_POLY, ONE, ONE))
        assert info.value.condition == 'B'

    @pytest.mark.parametrize("epsilon", [1e-3, 0.05])
    def test_demo_cycle_is_found_on_the_return_map(self, epsilon):
        assert level0_cycles(epsilon) == [(pytest.approx(0.5, abs=1e-9), pytest.approx(-0.5, abs=1e-9))]

    def test_demo_cycle_moves_with_the_translation(self):
        _, cycles = lift_demo_field(translation=0.75)
        assert cycles == [(pytest.approx(-0.25, abs=1e-9), pytest.approx(-1.25, abs=1e-9))]

    def test_lift_raises_degree_and_creates_two_fold(self):
        field, cycles = lift_demo_field()
        lift = lift_degree(field, 1e-2, cycles)
        assert lift.degree_out == lift.degree_in + 1
        assert lift.certificate.is_monodromic_two_fold
        assert lift.v2_leading == pytest.approx(lyapunov_v2_leading(*origin_values(field), 1e-2))
        assert origin_values(lift.lifted_field)[0] == 0.0

    def test_flat_lift_has_no_certificate(self):
        field, cycles = lift_demo_field()
        lift = lift_degree(field, 0.0, cycles)
        assert lift.certificate is None
        assert lift.v2_leading_sign == 0
        assert lifted_field(field, 0.0).degree == field.degree + 1

    def test_negative_epsilon_rejected(self):
        field, cycles = lift_demo_field()
        with pytest.raises(PreconditionError):
            lift_degree(field, -1e-3, cycles)


@pytest.mark.slow
class TestMonotonicityDemo:

    def test_admissible_shift_adds_one_cycle(self):
        field, cycles = lift_demo_field()
        report = monotonicity_demo(field, cycles)
        assert report.expected == 2
        assert report.passed
        assert sorted(r.provenance for r in report.records) == [PERSISTED, PSEUDO_HOPF]

    def test_controls_keep_the_base_count(self):
        field, cycles = lift_demo_field()
        natural = monotonicity_demo(field, cycles).diagnostics["b"]
        wrong = monotonicity_demo(field, cycles, b_sign=-1 if natural > 0 else 1)
        flat = monotonicity_demo(field, cycles, epsilon=0.0)
        assert wrong.expected == flat.expected == 1
        assert wrong.found == 1
        assert flat.found == 1
