import math

import pytest

from core.errors import PoleError, PreconditionError
from pwcycles.hamiltonian_family import default_epsilon_vector, default_tables, default_targets
from pwcycles.melnikov import (
    MelnikovSpec, default_oracle_grid, melnikov_denominator, melnikov_m0, melnikov_mk1,
    melnikov_numerator, melnikov_oracle_check, melnikov_value, melnikov_zeros,
)
from pwcycles.return_maps import reduced_displacement


def test_canonical_m0(level0):
    spec = MelnikovSpec.for_level(level0)
    assert spec.level == 0
    assert melnikov_m0(0.8, spec) == pytest.approx(0.39)
    assert melnikov_value(0.5, spec) == pytest.approx(0.0, abs=1e-15)
    assert melnikov_zeros(spec) == [(pytest.approx(0.5, abs=1e-12), True)]


def test_m0_approximates_reduced_displacement(level0):
    spec = MelnikovSpec.for_level(level0)
    for y in (0.2, 0.45, 0.8):
        assert reduced_displacement(level0, y) == pytest.approx(melnikov_value(y, spec), abs=5e-3)


def test_level1_zeros_hit_targets(level1):
    spec = MelnikovSpec.for_level(level1)
    assert spec.epsilon_next == pytest.approx(default_epsilon_vector(1)[0])
    zeros = melnikov_zeros(spec)
    assert [y for y, _ in zeros] == pytest.approx(default_targets(0), abs=1e-10)
    assert all(simple for _, simple in zeros)


def test_level1_numerator_is_even():
    spec = MelnikovSpec.from_tables(default_tables(1), 1)
    numerator = melnikov_numerator(spec)
    assert numerator.degree == 2 * len(spec.coeff_deltas) - 2
    assert numerator(0.4) == pytest.approx(numerator(-0.4))


def test_mk1_divides_by_phi_products():
    spec = MelnikovSpec.from_tables(default_tables(1), 1, epsilon_next=0.5)
    y = 0.2
    expected = 0.5 * melnikov_numerator(spec)(y) / (y * y - 2.0)
    assert melnikov_mk1(y, spec) == pytest.approx(expected)
    u = y * y - 2.0
    assert melnikov_denominator(y, 1) == pytest.approx(2.0 * u * (u * u - 2.0))


def test_denominator_pole():
    with pytest.raises(PoleError):
        melnikov_denominator(math.sqrt(2.0), 0)


def test_spec_preconditions():
    with pytest.raises(PreconditionError):
        MelnikovSpec.from_tables(default_tables(0), 1)
    with pytest.raises(PreconditionError):
        melnikov_m0(0.1, MelnikovSpec.from_tables(default_tables(1), 1))
    with pytest.raises(PreconditionError):
        melnikov_mk1(0.1, MelnikovSpec.from_tables(default_tables(1), 0))


def test_oracle_grid_stays_inside_window():
    grid = default_oracle_grid(0, points=5)
    assert grid[0] == pytest.approx(0.05)
    assert grid[-1] == pytest.approx(0.95)


def test_oracle_passes_at_level0(level0):
    report = melnikov_oracle_check(level0, grid=[0.2, 0.4, 0.7])
    assert report.passed
    assert report.failed_points == []
    assert report.max_errors[0] > report.max_errors[1] > report.max_errors[2]
    assert report.to_json()["schedule"] == [1e-2, 1e-3, 1e-4]


def test_oracle_passes_at_level1(level1):
    report = melnikov_oracle_check(level1, grid=[0.1, 0.25, 0.4])
    assert report.passed
    assert report.failed_points == []


def test_oracle_schedule_must_decrease(level0):
    with pytest.raises(PreconditionError):
        melnikov_oracle_check(level0, schedule=(1e-3, 1e-2))
    with pytest.raises(PreconditionError):
        melnikov_oracle_check(level0, schedule=(1e-2,))
