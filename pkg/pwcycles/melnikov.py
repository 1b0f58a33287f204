"""
First-order (Melnikov) functions of the family and the oracle that checks them
against the reduced displacement.

    M_0(y)     = 2 (A_{0,1} + A_{0,3} y^2)
    M_{k+1}(y) = eps_{k+1} * sum_j A_j y^(2j-2) / (2^k prod_{i=1..k+1} phi^i(y))

with A = a+ - a- taken over the odd coefficients of the level's table.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from core.errors import NumericalError, PoleError, PreconditionError
from pwcycles.hamiltonian_family import HamiltonianLevel, PerturbationCoeffs, origin_radius
from pwcycles.poly import UniPolynomial, phi_iterate, real_roots
from pwcycles.return_maps import displacement
from pwcycles.tolerances import DEFAULT_TOLERANCES, Tolerances

logger = logging.getLogger(__name__)

DEFAULT_SCHEDULE = (1e-2, 1e-3, 1e-4)
ORACLE_GRID_POINTS = 20
DECAY_BAND = 3.0
NOISE_FLOOR = 1e-12


@dataclass(frozen=True)
class MelnikovSpec:
    """Differences A_j of the odd perturbation coefficients of one level"""

    level: int
    coeff_deltas: Tuple[float, ...]
    epsilon_next: float = 1.0

    @classmethod
    def from_tables(cls, tables: Sequence[PerturbationCoeffs], level: int,
                    epsilon_next: Optional[float] = None) -> 'MelnikovSpec':
        if not 0 <= level < len(tables):
            raise PreconditionError(f"no coefficient table for level {level}", level=level)
        table = tables[level]
        if level == 0:
            return cls(0, tuple(table.odd_deltas()[:2]))
        return cls(level, tuple(table.odd_deltas()),
                   1.0 if epsilon_next is None else float(epsilon_next))

    @classmethod
    def for_level(cls, level: HamiltonianLevel) -> 'MelnikovSpec':
        """Melnikov data for the top perturbation of an assembled level"""
        top = level.epsilon_vector[-1] if level.level > 0 else None
        return cls.from_tables(level.tables, level.level, top)

    def to_json(self) -> dict:
        return {"level": self.level, "coeffDeltas": list(self.coeff_deltas),
                "epsilonNext": self.epsilon_next}


def melnikov_numerator(spec: MelnikovSpec) -> UniPolynomial:
    """
    Polynomial whose zeros are the Melnikov zeros.

    Level 0 gives M_0 itself; level k+1 gives sum_j A_j y^(2j-2).
    """
    if spec.level == 0:
        a1, a3 = (list(spec.coeff_deltas) + [0.0, 0.0])[:2]
        return UniPolynomial([2.0 * a1, 0.0, 2.0 * a3])
    coeffs = np.zeros(2 * len(spec.coeff_deltas) - 1)
    coeffs[0::2] = spec.coeff_deltas
    return UniPolynomial(coeffs)


def melnikov_m0(y: float, spec: MelnikovSpec) -> float:
    if spec.level != 0:
        raise PreconditionError(f"M_0 needs a level-0 spec, got level {spec.level}")
    return float(melnikov_numerator(spec)(y))


def melnikov_denominator(y: float, k: int, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """2^k prod_{i=1..k+1} phi^i(y)"""
    product = 2.0 ** k
    for i in range(1, k + 2):
        value = phi_iterate(y, i)
        if abs(value) <= tol.phi_nonvanishing:
            raise PoleError(f"phi^{i}({y}) = {value:.3e} vanishes", y=y, i=i)
        product *= value
    return product


def melnikov_mk1(y: float, spec: MelnikovSpec, k: Optional[int] = None,
                 tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """M_{k+1}(y) for Melnikov data of level k+1"""
    if spec.level < 1:
        raise PreconditionError("M_{k+1} needs Melnikov data of level >= 1")
    if k is None:
        k = spec.level - 1
    if k != spec.level - 1:
        raise PreconditionError(f"spec of level {spec.level} does not describe M_{k + 1}")
    numerator = float(melnikov_numerator(spec)(y))
    return spec.epsilon_next * numerator / melnikov_denominator(y, k, tol)


def melnikov_value(y: float, spec: MelnikovSpec, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    if spec.level == 0:
        return melnikov_m0(y, spec)
    return melnikov_mk1(y, spec, tol=tol)


def melnikov_zeros(spec: MelnikovSpec, tol: Tolerances = DEFAULT_TOLERANCES) -> List[Tuple[float, bool]]:
    """Positive zeros of the numerator inside the origin window, with simplicity flags"""
    numerator = melnikov_numerator(spec)
    if numerator.is_zero:
        return []
    radius = origin_radius(spec.level)
    return [(r, simple) for r, simple in real_roots(numerator, 0.0, radius, tol.root, tol.root_grid,
                                                    tol.simple_root)
            if 0.0 < r < radius]


def default_oracle_grid(k: int, points: int = ORACLE_GRID_POINTS) -> List[float]:
    radius = origin_radius(k)
    return [float(y) for y in np.linspace(0.05, 0.95, points) * radius]


@dataclass
class OraclePoint:
    y: float
    m: float
    errors: List[Optional[float]] = field(default_factory=list)
    decay_ratios: List[Optional[float]] = field(default_factory=list)
    failure: Optional[str] = None

    def to_json(self) -> dict:
        return {"y": self.y, "M": self.m, "errors": self.errors,
                "decayRatios": self.decay_ratios, "failure": self.failure}


@dataclass
class MelnikovOracleReport:
    level: int
    schedule: Tuple[float, ...]
    points: List[OraclePoint]
    max_errors: List[float]
    max_decay_ratios: List[Optional[float]]
    passed: bool

    @property
    def failed_points(self) -> List[float]:
        return [p.y for p in self.points if p.failure is not None]

    def to_json(self) -> dict:
        return {
            "level": self.level,
            "schedule": list(self.schedule),
            "maxErrors": self.max_errors,
            "maxDecayRatios": self.max_decay_ratios,
            "failedPoints": self.failed_points,
            "passed": self.passed,
            "points": [p.to_json() for p in self.points],
        }


def _ratio(previous: float, current: float, floor: float) -> Optional[float]:
    if current <= floor:
        return None
    return previous / current


def _decay_ok(ratio: Optional[float], expected: float) -> bool:
    return ratio is None or expected / DECAY_BAND <= ratio <= expected * DECAY_BAND


def melnikov_oracle_check(level: HamiltonianLevel, spec: Optional[MelnikovSpec] = None,
                          grid: Optional[Sequence[float]] = None,
                          schedule: Sequence[float] = DEFAULT_SCHEDULE,
                          tol: Tolerances = DEFAULT_TOLERANCES, jobs: int = 1) -> MelnikovOracleReport:
    """
    Compare delta(y, eps)/eps with M(y) along a decreasing eps schedule.

    The error must shrink linearly in eps: each successive ratio of the
    max-over-grid error lies within a factor 3 of eps_i / eps_{i+1}. Errors
    below the noise floor count as converged.
    """
    schedule = tuple(float(e) for e in schedule)
    if len(schedule) < 2 or any(b >= a or b <= 0.0 for a, b in zip(schedule, schedule[1:])):
        raise PreconditionError(f"epsilon schedule must be positive and decreasing, got {schedule}")
    if spec is None:
        spec = MelnikovSpec.for_level(level)
    if spec.level != level.level:
        raise PreconditionError(f"spec level {spec.level} does not match level {level.level}")
    if grid is None:
        grid = default_oracle_grid(level.level)

    levels = [level.with_epsilon(eps) for eps in schedule]
    floors = [NOISE_FLOOR / eps for eps in schedule]

    def check_point(y: float) -> OraclePoint:
        point = OraclePoint(float(y), melnikov_value(y, spec, tol))
        try:
            for lv, eps in zip(levels, schedule):
                reduced = displacement(lv, y, tol=tol) / eps
                point.errors.append(abs(reduced - point.m))
        except NumericalError as e:
            point.failure = e.message
            return point
        for i in range(1, len(schedule)):
            point.decay_ratios.append(_ratio(point.errors[i - 1], point.errors[i], floors[i]))
        return point

    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        points = list(pool.map(check_point, grid))

    good = [p for p in points if p.failure is None]
    max_errors = [max((p.errors[i] for p in good), default=0.0) for i in range(len(schedule))]
    max_ratios = [_ratio(max_errors[i - 1], max_errors[i], floors[i]) for i in range(1, len(schedule))]
    passed = bool(good) and all(
        _decay_ok(r, schedule[i] / schedule[i + 1]) for i, r in enumerate(max_ratios))
    for p in points:
        if p.failure is not None:
            logger.warning(f"oracle point y={p.y} failed: {p.failure}")
    logger.info(f"melnikov oracle level {level.level}: max errors {max_errors}, passed={passed}")
    return MelnikovOracleReport(level.level, schedule, points, max_errors, max_ratios, passed)
