"""
Tests for half-returns, displacements and shifted first returns
"""
import numpy as np
import pytest

from core.errors import CrossingError, IndeterminateError, PreconditionError
from pwcycles.certify import minus_first_crossing
from pwcycles.field import MINUS, PLUS, PiecewiseField
from pwcycles.hamiltonian_family import (
    build_h0, build_level, canonical_level0, default_tables, ordinate_windows, partner_ordinate,
)
from pwcycles.poly import BiPolynomial, phi_iterate
from pwcycles.return_maps import (
    UNFOLDING_EVEN_MINUS, UNFOLDING_EVEN_PLUS, UNFOLDING_ODD, DividedDifference, ReturnChain,
    alternating_shift_sum, chain_points, composed_return, displacement, displacement_grid, divided_difference,
    first_return, half_map_slopes, half_return_algebraic, half_return_numeric, integrate_half_orbit,
    lifted_displacement, reduced_displacement, shift_derivative, unfolding_type,
)

X, Y = BiPolynomial.x(), BiPolynomial.y()


def paired_centers() -> PiecewiseField:
    """Centers at (1, 0) and (-1, 0); both half-returns are y -> -y"""
    h_plus = 0.5 * ((X - 1.0) * (X - 1.0) + Y * Y)
    h_minus = 0.5 * ((X + 1.0) * (X + 1.0) + Y * Y)
    return PiecewiseField.from_hamiltonians(h_plus, h_minus)


class TestAlgebraicHalfReturn:

    def test_unperturbed_return_is_symmetric(self):
        level = build_h0(canonical_level0(), 0.0)
        assert half_return_algebraic(level, PLUS, 0.4) == pytest.approx(-0.4, abs=1e-14)
        assert half_return_algebraic(level, MINUS, 0.4) == pytest.approx(-0.4, abs=1e-14)

    def test_displacement_matches_first_order(self, level0):
        # w+ ~ eps (y^2 - 1/4) on the canonical level-0 table
        assert displacement(level0, 0.8) == pytest.approx(3.9e-4, rel=5e-2)

    def test_displacement_changes_sign_at_canonical_zero(self, level0):
        assert displacement(level0, 0.4) < 0.0 < displacement(level0, 0.6)
        assert abs(displacement(level0, 0.5)) < 1e-6

    def test_reduced_displacement(self, level0):
        assert reduced_displacement(level0, 0.8) == pytest.approx(0.39, rel=5e-2)
        with pytest.raises(PreconditionError):
            reduced_displacement(build_h0(canonical_level0(), 0.0), 0.8)

    def test_divided_difference_on_diagonal_is_derivative(self, level0):
        h = level0.boundary(PLUS)
        step = 1e-6
        expected = (h.value(0.3 + step) - h.value(0.3 - step)) / (2 * step)
        assert divided_difference(level0, PLUS, 0.3, 0.3) == pytest.approx(expected, rel=1e-6)

    def test_displacement_grid_rows(self, level0):
        rows = displacement_grid(level0, [0.3, 0.7])
        assert [row["y"] for row in rows] == [0.3, 0.7]
        assert rows[0]["reducedDelta"] == pytest.approx(rows[0]["delta"] / 1e-3)

    def test_divided_difference_is_symmetric(self, level1):
        rng = np.random.default_rng(7)
        for y1, y2 in rng.uniform(-1.9, 1.9, size=(100, 2)):
            for side in (PLUS, MINUS):
                f = DividedDifference(level1, side)
                assert f(y1, y2) == pytest.approx(f(y2, y1), rel=1e-12, abs=1e-13)

    @pytest.mark.parametrize("k", [0, 1, 2])
    def test_partial_in_partner_on_symmetric_orbits(self, k):
        # H(0, y) = (1 - (phi^k y)^2) / 2 at eps = 0
        level = build_level(k, 0.0, (0.0,) * k, default_tables(k))
        y = 0.3
        expected = -2.0 ** (k - 1)
        for i in range(1, k + 1):
            expected *= phi_iterate(y, i)
        for side in (PLUS, MINUS):
            assert DividedDifference(level, side).partial_y2(y, -y) == pytest.approx(expected, rel=1e-6)

    @pytest.mark.parametrize("k", [0, 1, 2])
    def test_zero_epsilon_returns_to_the_partner(self, k):
        level = build_level(k, 0.0, (0.0,) * k, default_tables(k))
        upper, _ = ordinate_windows(k)
        for lo, hi in upper:
            for y in np.linspace(lo, hi, 7)[1:-1]:
                for side in (PLUS, MINUS):
                    z = half_return_algebraic(level, side, y)
                    assert z == pytest.approx(partner_ordinate(k, y), abs=1e-12)
                    assert level.boundary(side).value(z) == pytest.approx(
                        level.boundary(side).value(y), abs=1e-12)


class TestLiftedDisplacement:

    def test_agrees_with_direct_displacement_near_doubled_copy(self, level1):
        y = 1.6
        assert lifted_displacement(level1, y) == pytest.approx(displacement(level1, y), abs=1e-8)

    def test_undefined_at_zero(self, level1):
        with pytest.raises(PreconditionError):
            lifted_displacement(level1, 0.0)


class TestNumericHalfReturn:

    def test_matches_algebraic_return(self, level0):
        field = level0.field()
        numeric = half_return_numeric(field, PLUS, 0.8)
        algebraic = half_return_algebraic(level0, PLUS, 0.8)
        assert numeric == pytest.approx(algebraic, abs=1e-8)

    @pytest.mark.parametrize("side", [PLUS, MINUS])
    def test_agrees_with_algebraic_return_on_a_grid(self, level0, side):
        field = level0.field()
        for y in np.linspace(0.1, 0.9, 20):
            assert half_return_numeric(field, side, y) == pytest.approx(
                half_return_algebraic(level0, side, y), abs=1e-8)

    def test_conserves_hamiltonian(self, level0):
        orbit = integrate_half_orbit(level0.field(), PLUS, 0.8)
        h = level0.hamiltonian(PLUS)
        start = float(h(0.0, 0.8))
        drift = np.max(np.abs(np.asarray(h(orbit.xs, orbit.ys)) - start))
        assert drift <= 1e-8
        assert np.all(orbit.xs >= -1e-9)
        assert orbit.time > 0.0

    def test_wrong_direction_is_rejected(self, level0):
        # at y > 0 the flow of Z+ leaves the right half-plane in forward time
        with pytest.raises(CrossingError):
            integrate_half_orbit(level0.field(), PLUS, 0.8, direction='forward')


class TestShiftedReturns:

    def test_chain_validation(self):
        with pytest.raises(PreconditionError):
            ReturnChain((PLUS,))
        with pytest.raises(PreconditionError):
            ReturnChain((PLUS, PLUS))
        with pytest.raises(PreconditionError):
            ReturnChain((PLUS, MINUS), windows=((0.0, 1.0),))

    def test_chain_side_from_flow(self):
        field = paired_centers()
        assert ReturnChain.for_crossing(field, 0.5).sides == (PLUS, MINUS)
        assert ReturnChain.for_crossing(field, -0.5).sides == (MINUS, PLUS)
        assert minus_first_crossing(field, 0.5, -0.5) == -0.5

    def test_paired_centers_return_is_identity(self):
        points = chain_points(ReturnChain((MINUS, PLUS)), paired_centers(), -0.5)
        assert points == pytest.approx([-0.5, 0.5, -0.5], abs=1e-8)
        assert first_return(paired_centers(), 0.3) == pytest.approx(0.3, abs=1e-8)

    def test_composed_return_under_shift(self):
        field = paired_centers()
        chain = ReturnChain((MINUS, PLUS))
        assert composed_return(chain, field, -0.5) == pytest.approx(-0.5, abs=1e-8)
        shifted = composed_return(chain, field, -0.5, b=1e-3)
        assert shifted - (-0.5) == pytest.approx(2e-3, abs=1e-6)

    def test_alternating_sum_for_symmetric_maps(self):
        assert alternating_shift_sum([MINUS, PLUS], [-1.0, -1.0]) == pytest.approx(2.0)
        assert alternating_shift_sum([PLUS, MINUS], [-1.0, -1.0]) == pytest.approx(-2.0)
        with pytest.raises(PreconditionError):
            alternating_shift_sum([PLUS, MINUS], [-1.0])

    @pytest.mark.parametrize("b", [0.0, 1e-3, -1e-3])
    def test_paired_centers_shift_derivative(self, b):
        field = paired_centers()
        chain = ReturnChain((MINUS, PLUS))
        assert shift_derivative(chain, field, -0.5, b) == pytest.approx(2.0, abs=1e-4)
        slopes = half_map_slopes(chain, field, -0.5, b)
        assert slopes == pytest.approx([-1.0, -1.0], abs=1e-4)
        assert alternating_shift_sum(chain.sides, slopes) == pytest.approx(2.0, abs=1e-4)

    def test_chain_rejects_wrong_entry(self):
        with pytest.raises(CrossingError):
            chain_points(ReturnChain((PLUS, MINUS)), paired_centers(), -0.5)


class TestUnfoldingType:

    def test_simple_zero(self):
        unfolding = unfolding_type(lambda y: 2.0 * (y - 0.5), 0.5)
        assert unfolding.kind == UNFOLDING_ODD
        assert unfolding.multiplicity == 1
        assert unfolding.leading_coefficient == pytest.approx(2.0, rel=1e-6)

    def test_even_zeros(self):
        plus = unfolding_type(lambda y: (y - 0.5) ** 2, 0.5)
        minus = unfolding_type(lambda y: -3.0 * (y - 0.5) ** 2 + (y - 0.5) ** 3, 0.5)
        assert (plus.kind, plus.multiplicity) == (UNFOLDING_EVEN_PLUS, 2)
        assert (minus.kind, minus.multiplicity) == (UNFOLDING_EVEN_MINUS, 2)
        assert minus.leading_sign == -1

    def test_triple_zero(self):
        unfolding = unfolding_type(lambda y: (y - 0.2) ** 3, 0.2)
        assert (unfolding.kind, unfolding.multiplicity) == (UNFOLDING_ODD, 3)

    def test_identically_zero(self):
        with pytest.raises(IndeterminateError):
            unfolding_type(lambda y: 0.0, 0.0)
