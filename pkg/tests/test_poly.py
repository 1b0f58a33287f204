import numpy as np
import pytest

from core.errors import DegenerateIntervalError, PreconditionError
from pwcycles.poly import PHI, BiPolynomial, UniPolynomial, phi, phi_iterate, real_roots


def test_trailing_zeros_are_trimmed():
    p = UniPolynomial([1.0, 2.0, 0.0, 0.0])
    assert p.degree == 1
    assert UniPolynomial([]).is_zero


def test_non_finite_coefficients_rejected():
    with pytest.raises(PreconditionError):
        UniPolynomial([1.0, float('nan')])


def test_divided_difference_matches_quotient_and_derivative():
    cube = UniPolynomial([0.0, 0.0, 0.0, 1.0])
    assert cube.divided_difference(2.0, 1.0) == pytest.approx(7.0)
    assert cube.divided_difference(2.0, 2.0) == pytest.approx(12.0)
    assert UniPolynomial([5.0]).divided_difference(1.0, 3.0) == 0.0


def test_divided_difference_keeps_precision_for_close_arguments():
    p = UniPolynomial([0.3, -1.0, 0.25, 2.0])
    a, b = 0.7, 0.7 + 1e-13
    assert p.divided_difference(a, b) == pytest.approx(p.derivative()(a), rel=1e-10)


def test_split_parity():
    even, odd = UniPolynomial([1.0, 2.0, 3.0, 4.0]).split_parity()
    np.testing.assert_array_equal(even.coefficients, [1.0, 0.0, 3.0])
    np.testing.assert_array_equal(odd.coefficients, [0.0, 2.0, 0.0, 4.0])


def test_compose_phi_with_itself():
    np.testing.assert_allclose(PHI.compose(PHI).coefficients, [2.0, 0.0, -4.0, 0.0, 1.0])


def test_bivariate_product_and_degree():
    xy = BiPolynomial.x() * BiPolynomial.y()
    np.testing.assert_array_equal(xy.coefficients, [[0.0, 0.0], [0.0, 1.0]])
    assert xy.total_degree == 2
    assert xy(2.0, 3.0) == pytest.approx(6.0)


def test_pullback_phi_substitutes_y():
    p = BiPolynomial.x() + BiPolynomial.y()
    pulled = p.pullback_phi()
    for x, y in [(0.3, -1.2), (1.0, 0.5), (-2.0, 1.7)]:
        assert pulled(x, y) == pytest.approx(x + phi(y))
    assert pulled.total_degree == 2


def test_differentiate_and_restrict():
    x, y = BiPolynomial.x(), BiPolynomial.y()
    p = x * x * y + 3.0 * y * y
    assert p.differentiate('x').allclose(2.0 * x * y)
    assert p.differentiate('y').allclose(x * x + 6.0 * y)
    np.testing.assert_array_equal(p.restrict_to_axis().coefficients, [0.0, 0.0, 3.0])
    with pytest.raises(PreconditionError):
        p.differentiate('z')


def test_phi_iterate():
    assert phi_iterate(2.0, 3) == 2.0
    assert phi_iterate(0.0, 2) == 2.0
    assert phi_iterate(1.5, 0) == 1.5


def test_real_roots_simple():
    p = UniPolynomial.from_roots([-1.0, 0.5, 2.0])
    roots = real_roots(p, -3.0, 3.0)
    assert [r for r, _ in roots] == pytest.approx([-1.0, 0.5, 2.0], abs=1e-10)
    assert all(simple for _, simple in roots)


def test_real_roots_double_root_flagged():
    p = UniPolynomial.from_roots([1.0, 1.0, -1.0])
    roots = real_roots(p, -3.0, 3.0)
    assert len(roots) == 2
    (r0, s0), (r1, s1) = roots
    assert r0 == pytest.approx(-1.0, abs=1e-10) and s0
    assert r1 == pytest.approx(1.0, abs=1e-6) and not s1


def test_real_roots_preconditions():
    with pytest.raises(PreconditionError):
        real_roots(UniPolynomial([0.0]), -1.0, 1.0)
    with pytest.raises(DegenerateIntervalError):
        real_roots(UniPolynomial([1.0, 1.0]), 0.0, 0.0)


def test_pullback_phi_on_a_random_grid():
    x, y = BiPolynomial.x(), BiPolynomial.y()
    p = 0.5 * (x - 1.0) * (x - 1.0) - 0.5 * y * y + 0.3 * y * y * y - 0.1 * x * y
    pulled = p.pullback_phi()
    rng = np.random.default_rng(11)
    for xs, ys in rng.uniform(-2.0, 2.0, size=(100, 2)):
        assert pulled(xs, ys) == pytest.approx(p(xs, phi(ys)), rel=1e-12, abs=1e-12)
