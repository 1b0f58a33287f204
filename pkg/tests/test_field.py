import pytest

from core.errors import PreconditionError, TangencyError
from pwcycles.bifurcation import two_fold_demo_field
from pwcycles.field import (
    CROSSING, MINUS, PLUS, REPELLING_SLIDING, TWO_FOLD_II, VISIBLE_FOLD_PLUS, PiecewiseField,
    apply_shift, classify_boundary_point, expand_shift, hamiltonian_field, sliding_segments,
    translate,
)
from pwcycles.poly import BiPolynomial

X, Y = BiPolynomial.x(), BiPolynomial.y()
ONE = BiPolynomial.constant(1.0)


def test_hamiltonian_field_of_circle():
    p, q = hamiltonian_field(0.5 * (X * X + Y * Y))
    assert p.allclose(Y)
    assert q.allclose(-X)


def test_invisible_two_fold_is_monodromic():
    cert = classify_boundary_point(two_fold_demo_field(), 0.0)
    assert cert.classification == TWO_FOLD_II
    assert cert.monodromy_flag
    assert cert.is_monodromic_two_fold
    assert cert.lie_second_plus == pytest.approx(-1.0)
    assert cert.lie_second_minus == pytest.approx(1.0)
    assert cert.rotation_sign == 1


def test_crossing_and_sliding_points():
    field = two_fold_demo_field()
    assert classify_boundary_point(field, -1.0).classification == CROSSING
    shifted = apply_shift(field, 0.1)
    assert classify_boundary_point(shifted, 0.05).classification == REPELLING_SLIDING


def test_visible_fold_plus():
    field = PiecewiseField(Y, ONE, ONE, ONE)
    assert classify_boundary_point(field, 0.0).classification == VISIBLE_FOLD_PLUS


def test_higher_order_tangency_raises():
    field = PiecewiseField(Y * Y, BiPolynomial.constant(0.0), ONE, ONE)
    with pytest.raises(TangencyError):
        classify_boundary_point(field, 0.0)


def test_shift_opens_sliding_segment():
    segments = sliding_segments(apply_shift(two_fold_demo_field(), 0.1), -0.3, 0.3)
    assert len(segments) == 1
    lo, hi = segments[0]
    assert lo == pytest.approx(0.0, abs=1e-10)
    assert hi == pytest.approx(0.1, abs=1e-10)
    assert sliding_segments(two_fold_demo_field(), -0.3, -0.1) == []


def test_sliding_segments_preconditions():
    with pytest.raises(PreconditionError):
        sliding_segments(two_fold_demo_field(), 1.0, -1.0)


def test_shifts_accumulate_and_expand_consistently():
    field = apply_shift(apply_shift(two_fold_demo_field(-0.3), 0.1), 0.2)
    assert field.shift_b == pytest.approx(0.3)
    baked = expand_shift(field)
    assert baked.shift_b == 0.0
    for side in (PLUS, MINUS):
        for x, y in [(0.2, -0.7), (-0.4, 0.9), (0.0, 0.25)]:
            assert baked.vector(side, x, y) == pytest.approx(field.vector(side, x, y))


def test_translate_moves_both_pieces_down():
    field = apply_shift(two_fold_demo_field(), 0.05)
    moved = translate(field, 1.5)
    for side in (PLUS, MINUS):
        assert moved.vector(side, 0.3, -1.0) == pytest.approx(field.vector(side, 0.3, 0.5))


def test_degree_and_side_check():
    assert two_fold_demo_field().degree == 1
    with pytest.raises(PreconditionError):
        two_fold_demo_field().components('0')
