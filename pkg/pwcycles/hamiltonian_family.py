"""
The recursive family of piecewise Hamiltonians.

Level 0:  H0+- = ((+-x - 1)^2 - y^2) / 2 + eps * P0+-(y)
Level k:  Hk+- = H(k-1)+-(x, y^2 - 2) + eps * eps_k * Pk+-(y)

On the switching line every level is a sum of polynomials evaluated at
iterates of phi(y) = y^2 - 2; BoundaryFunction keeps that structure so that
divided differences can be taken through the chain rule instead of by
subtracting nearly equal values.
"""
import logging
import math
from dataclasses import dataclass, field as dataclass_field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from core.errors import BranchError, DegreeOverflowError, NumericalError, PreconditionError
from pwcycles.field import MINUS, PLUS, PiecewiseField, _check_side
from pwcycles.poly import BiPolynomial, UniPolynomial, phi, phi_iterate
from pwcycles.tolerances import DEFAULT_TOLERANCES, Tolerances

logger = logging.getLogger(__name__)

MAX_LEVEL = 4
DEFAULT_LEVEL_CAP = 2
TARGET_MARGIN = 0.1
DEFAULT_EPSILON = 1e-3
LEVEL_TERM_BOUND = 1e-3
GROWTH_SAMPLES = 257


# --------------------------------------------------------------------------
# Degree and count bookkeeping
# --------------------------------------------------------------------------

def hamiltonian_degree(k: int) -> int:
    return 3 * 2 ** k


def field_degree(k: int) -> int:
    return hamiltonian_degree(k) - 1


def expected_cycles(k: int) -> int:
    """c_k = 3 k 2^(k-1) + 1, computed in integers"""
    return (3 * k * 2 ** k) // 2 + 1


def refined_expected_cycles(k: int) -> int:
    """
    Count with a pseudo-Hopf step at every level: c_0 = 2, c_(k+1) = 2 c_k + d_k,
    which solves to 3 k 2^(k-1) + 2^(k+1)
    """
    return (3 * k * 2 ** k) // 2 + 2 ** (k + 1)


def expected_cycles_by_recurrence(k: int, refined: bool = False) -> int:
    count = 2 if refined else 1
    for level in range(k):
        count = 2 * count + hamiltonian_degree(level) - (0 if refined else 1)
    return count


def hamiltonian_degree_by_recurrence(k: int) -> int:
    degree = 3
    for _ in range(k):
        degree *= 2
    return degree


@dataclass(frozen=True)
class LevelInfo:
    level: int
    hamiltonian_degree: int
    field_degree: int
    expected_cycles: int
    refined_expected_cycles: int

    @classmethod
    def for_level(cls, k: int) -> 'LevelInfo':
        if k < 0:
            raise PreconditionError(f"level must be >= 0, got {k}")
        return cls(k, hamiltonian_degree(k), field_degree(k), expected_cycles(k),
                   refined_expected_cycles(k))

    def to_json(self) -> dict:
        return {
            "k": self.level,
            "hamiltonianDegree": self.hamiltonian_degree,
            "fieldDegree": self.field_degree,
            "expectedCycles": self.expected_cycles,
            "refinedExpectedCycles": self.refined_expected_cycles,
        }


# --------------------------------------------------------------------------
# Intervals and the unperturbed geometry
# --------------------------------------------------------------------------

def xi(y: float) -> float:
    return 2.0 + math.sqrt(y)


def interval_ik(k: int) -> float:
    """Right end of I_k: 1 for k = 1, sqrt(2 - sqrt(xi^(k-2)(3))) for k >= 2"""
    if k < 1:
        raise PreconditionError(f"I_k is defined for k >= 1, got {k}")
    if k == 1:
        return 1.0
    value = 3.0
    for _ in range(k - 2):
        value = xi(value)
    radicand = 2.0 - math.sqrt(value)
    if radicand <= 0.0:
        raise NumericalError(f"negative radicand {radicand} in I_{k}", k=k)
    return math.sqrt(radicand)


def origin_radius(k: int) -> float:
    """Half-width of the window of origin-surrounding orbits at level k"""
    return 1.0 if k <= 1 else interval_ik(k)


def phi_iterate_nonvanishing(k: int, y: float, tol: float = 1e-12) -> bool:
    value = y
    for _ in range(k):
        value = phi(value)
        if abs(value) <= tol:
            return False
    return True


def partner_ordinate(k: int, y: float) -> float:
    """
    Other crossing of the unperturbed level-k orbit through (0, y).

    Origin-surrounding orbits are symmetric (partner -y); every other periodic
    orbit is a square-root copy of a level-(k-1) orbit.
    """
    if abs(y) < origin_radius(k):
        return -y
    if k == 0:
        raise PreconditionError(f"y={y} outside the level-0 window (-1, 1)")
    parent = partner_ordinate(k - 1, phi(y))
    if parent + 2.0 < 0.0:
        raise BranchError(f"partner of y={y} leaves the strip at level {k}", y=y, k=k)
    return math.copysign(math.sqrt(parent + 2.0), y)


def _lift_interval(lo: float, hi: float, sign: int) -> Tuple[float, float]:
    a, b = math.sqrt(lo + 2.0), math.sqrt(hi + 2.0)
    return (a, b) if sign > 0 else (-b, -a)


def ordinate_windows(k: int) -> Tuple[List[Tuple[float, float]], List[Tuple[float, float]]]:
    """
    Windows of upper and lower crossing ordinates of the unperturbed periodic orbits.

    Returns (upper, lower), each sorted by left end.
    """
    upper = [(0.0, 1.0)]
    lower = [(-1.0, 0.0)]
    for level in range(1, k + 1):
        radius = origin_radius(level)
        new_upper = [(0.0, radius)]
        new_lower = [(-radius, 0.0)]
        new_upper += [_lift_interval(lo, hi, +1) for lo, hi in upper]
        new_upper += [_lift_interval(lo, hi, -1) for lo, hi in lower]
        new_lower += [_lift_interval(lo, hi, +1) for lo, hi in lower]
        new_lower += [_lift_interval(lo, hi, -1) for lo, hi in upper]
        upper, lower = sorted(new_upper), sorted(new_lower)
    return upper, lower


# --------------------------------------------------------------------------
# Coefficient tables
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PerturbationCoeffs:
    """a+-_{k,j}, j = 0..d_k"""

    level: int
    a_plus: Tuple[float, ...]
    a_minus: Tuple[float, ...]

    def __post_init__(self):
        size = hamiltonian_degree(self.level) + 1
        for name, values in (('aPlus', self.a_plus), ('aMinus', self.a_minus)):
            if len(values) != size:
                raise PreconditionError(
                    f"level {self.level} {name} needs {size} coefficients, got {len(values)}",
                    level=self.level,
                )
        object.__setattr__(self, 'a_plus', tuple(float(a) for a in self.a_plus))
        object.__setattr__(self, 'a_minus', tuple(float(a) for a in self.a_minus))

    def polynomial(self, side: str) -> UniPolynomial:
        _check_side(side)
        return UniPolynomial(self.a_plus if side == PLUS else self.a_minus)

    def odd_deltas(self) -> List[float]:
        """A_j = a+_{2j-1} - a-_{2j-1}, j = 1..d_k/2"""
        return [self.a_plus[i] - self.a_minus[i] for i in range(1, len(self.a_plus), 2)]

    def to_json(self) -> dict:
        return {"k": self.level, "aPlus": list(self.a_plus), "aMinus": list(self.a_minus)}

    @classmethod
    def from_json(cls, data: dict) -> 'PerturbationCoeffs':
        return cls(int(data["k"]), tuple(data["aPlus"]), tuple(data["aMinus"]))


def canonical_level0() -> PerturbationCoeffs:
    """a+_{0,1} = -1/8, a+_{0,3} = 1/2, everything else 0; M0 vanishes at 1/2"""
    return PerturbationCoeffs(0, (0.0, -0.125, 0.0, 0.5), (0.0, 0.0, 0.0, 0.0))


def default_targets(k: int) -> List[float]:
    """
    d_k - 1 Melnikov zeros for level k+1: cell midpoints of the middle 80% of I_{k+1}
    """
    count = hamiltonian_degree(k) - 1
    radius = interval_ik(k + 1)
    span = 1.0 - 2.0 * TARGET_MARGIN
    return [radius * (TARGET_MARGIN + span * (i + 0.5) / count) for i in range(count)]


def select_melnikov_coeffs(k: int, target_zeros: Sequence[float]) -> PerturbationCoeffs:
    """
    Level-(k+1) coefficients whose Melnikov numerator sum A_j y^(2j-2) vanishes
    exactly on +-target_zeros.

    The numerator is prod (y^2 - z_i^2), scaled to unit maximum on I_{k+1};
    A_j goes to the odd coefficient a+_{k+1,2j-1}, the minus side stays zero.
    """
    if k < 0:
        raise PreconditionError(f"k must be >= 0, got {k}")
    needed = hamiltonian_degree(k) - 1
    targets = [float(z) for z in target_zeros]
    if len(targets) != needed:
        raise PreconditionError(f"level {k + 1} needs {needed} Melnikov targets, got {len(targets)}",
                                k=k, count=len(targets))
    radius = interval_ik(k + 1)
    for z in targets:
        if not 0.0 < z < radius:
            raise PreconditionError(f"target {z} outside Int(I_{k + 1}) = (0, {radius})", target=z)
    ordered = sorted(targets)
    if any(b - a <= 1e-12 for a, b in zip(ordered, ordered[1:])):
        raise PreconditionError("Melnikov targets must be distinct", targets=str(targets))

    numerator_in_u = np.polynomial.polynomial.polyfromroots([z * z for z in ordered])
    # unit sup-norm on the window
    samples = np.polynomial.polynomial.polyval(np.linspace(0.0, radius, 257) ** 2, numerator_in_u)
    numerator_in_u = numerator_in_u / float(np.max(np.abs(samples)))
    a_plus = [0.0] * (hamiltonian_degree(k + 1) + 1)
    for j, coefficient in enumerate(numerator_in_u, start=1):
        a_plus[2 * j - 1] = float(coefficient)
    return PerturbationCoeffs(k + 1, tuple(a_plus), tuple([0.0] * len(a_plus)))


def default_tables(k: int) -> List[PerturbationCoeffs]:
    tables = [canonical_level0()]
    for level in range(1, k + 1):
        tables.append(select_melnikov_coeffs(level - 1, default_targets(level - 1)))
    return tables


def perturbation_growth(table: PerturbationCoeffs, samples: int = GROWTH_SAMPLES) -> float:
    """
    max |P_k+-| over every level-k ordinate window, not only I_k.

    The default tables are normalised on I_k but grow like y^(d_k - 1) towards
    the strip edge, where the doubled cycles live.
    """
    upper, lower = ordinate_windows(table.level)
    grid = np.concatenate([np.linspace(lo, hi, samples) for lo, hi in upper + lower])
    growth = 0.0
    for side in (PLUS, MINUS):
        growth = max(growth, float(np.max(np.abs(table.polynomial(side)(grid)))))
    return growth


def _round_down(value: float) -> float:
    exponent = math.floor(math.log10(value))
    mantissa = math.floor(value / 10.0 ** exponent)
    return float(f"{mantissa}e{exponent}")


def default_epsilon_vector(k: int, tables: Optional[Sequence[PerturbationCoeffs]] = None
                           ) -> Tuple[float, ...]:
    """
    eps_i = LEVEL_TERM_BOUND / max |P_i| over the level-i windows, rounded down
    to one significant digit.

    Keeps eps_i * P_i below 1e-3 wherever a level-i cycle can sit, so each new
    term stays small against the displacement of the cycles it doubles.
    For the default tables this gives (3e-5, 1e-10).
    """
    if tables is None:
        tables = default_tables(k)
    if len(tables) < k + 1:
        raise PreconditionError(f"coefficient tables cover levels 0..{len(tables) - 1}, need 0..{k}")
    vector = []
    for i in range(1, k + 1):
        growth = perturbation_growth(tables[i])
        vector.append(_round_down(LEVEL_TERM_BOUND / growth) if growth > 0.0 else LEVEL_TERM_BOUND)
    return tuple(vector)


# --------------------------------------------------------------------------
# Boundary restriction H(0, y)
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundaryTerm:
    depth: int
    weight: float
    poly: UniPolynomial


class BoundaryFunction:
    """
    y -> H(0, y) written as sum weight_i * p_i(phi^(depth_i)(y))
    """

    def __init__(self, terms: Sequence[BoundaryTerm]):
        self.terms = tuple(t for t in terms if t.weight != 0.0 and not t.poly.is_zero)
        self.depth = max((t.depth for t in terms), default=0)

    def value(self, y: float) -> float:
        return float(sum(t.weight * t.poly(phi_iterate(y, t.depth)) for t in self.terms))

    def derivative(self, y: float) -> float:
        return self.divided_difference(y, y)

    def divided_difference(self, y1: float, y2: float, y_sum: Optional[float] = None) -> float:
        """
        (h(y1) - h(y2)) / (y1 - y2) by the chain rule through phi.

        Since phi(a) - phi(b) = (a - b)(a + b), a term p(phi^m(y)) contributes
        D_p(phi^m y1, phi^m y2) * prod_{j<m} (phi^j y1 + phi^j y2).
        `y_sum` replaces y1 + y2 when it is known more accurately than the
        floating-point sum (partners close to -y1).
        """
        a, b = [y1], [y2]
        for _ in range(self.depth):
            a.append(phi(a[-1]))
            b.append(phi(b[-1]))
        sums = [a[j] + b[j] for j in range(self.depth)]
        if y_sum is not None and self.depth > 0:
            sums[0] = y_sum
        chain = [1.0]
        for s in sums:
            chain.append(chain[-1] * s)
        total = 0.0
        for t in self.terms:
            total += t.weight * t.poly.divided_difference(a[t.depth], b[t.depth]) * chain[t.depth]
        return total


def level0_boundary_poly(coeffs: PerturbationCoeffs, side: str, epsilon: float) -> UniPolynomial:
    """g(u) = (1 - u^2)/2 + eps P0(u)"""
    return UniPolynomial([0.5, 0.0, -0.5]) + epsilon * coeffs.polynomial(side)


# --------------------------------------------------------------------------
# Assembled levels
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class HamiltonianLevel:
    level: int
    epsilon: float
    epsilon_vector: Tuple[float, ...]
    tables: Tuple[PerturbationCoeffs, ...]
    h_plus: BiPolynomial
    h_minus: BiPolynomial
    _boundaries: dict = dataclass_field(default=None, repr=False, compare=False)

    @property
    def info(self) -> LevelInfo:
        return LevelInfo.for_level(self.level)

    @property
    def degree(self) -> int:
        return max(self.h_plus.total_degree, self.h_minus.total_degree)

    def hamiltonian(self, side: str) -> BiPolynomial:
        _check_side(side)
        return self.h_plus if side == PLUS else self.h_minus

    def boundary(self, side: str) -> BoundaryFunction:
        _check_side(side)
        return self._boundaries[side]

    def field(self) -> PiecewiseField:
        return PiecewiseField.from_hamiltonians(self.h_plus, self.h_minus)

    def with_epsilon(self, epsilon: float) -> 'HamiltonianLevel':
        return build_level(self.level, epsilon, self.epsilon_vector, self.tables)

    def with_epsilon_vector(self, epsilon_vector: Sequence[float]) -> 'HamiltonianLevel':
        return build_level(self.level, self.epsilon, epsilon_vector, self.tables)

    def without_top_perturbation(self) -> 'HamiltonianLevel':
        if self.level == 0:
            return self
        return self.with_epsilon_vector(self.epsilon_vector[:-1] + (0.0,))

    def parent(self) -> 'HamiltonianLevel':
        if self.level == 0:
            raise PreconditionError("level 0 has no parent")
        return build_level(self.level - 1, self.epsilon, self.epsilon_vector[:-1],
                           self.tables[:self.level])

    def to_json(self) -> dict:
        return {
            "k": self.level,
            "epsilon": self.epsilon,
            "epsilonVector": list(self.epsilon_vector),
            "levels": [t.to_json() for t in self.tables],
            "hPlus": self.h_plus.to_json(),
            "hMinus": self.h_minus.to_json(),
            "info": self.info.to_json(),
        }


def _boundary_function(k: int, epsilon: float, epsilon_vector: Sequence[float],
                       tables: Sequence[PerturbationCoeffs], side: str) -> BoundaryFunction:
    terms = [BoundaryTerm(k, 1.0, level0_boundary_poly(tables[0], side, epsilon))]
    for i in range(1, k + 1):
        terms.append(BoundaryTerm(k - i, epsilon * epsilon_vector[i - 1], tables[i].polynomial(side)))
    return BoundaryFunction(terms)


def build_h0(coeffs: PerturbationCoeffs, epsilon: float) -> HamiltonianLevel:
    if coeffs.level != 0:
        raise PreconditionError(f"build_h0 needs level-0 coefficients, got level {coeffs.level}")
    return build_level(0, epsilon, (), [coeffs])


def build_level(k: int, epsilon: float, epsilon_vector: Sequence[float],
                tables: Sequence[PerturbationCoeffs],
                tol: Tolerances = DEFAULT_TOLERANCES, max_level: int = MAX_LEVEL) -> HamiltonianLevel:
    """
    Assemble H_k+- by k-fold pullback plus perturbations and check the boundary identity.
    """
    if k < 0:
        raise PreconditionError(f"level must be >= 0, got {k}")
    if k > max_level:
        raise DegreeOverflowError(f"level {k} exceeds the cap {max_level} (degree {field_degree(k)})",
                                  k=k)
    epsilon_vector = tuple(float(e) for e in epsilon_vector)
    if len(epsilon_vector) != k:
        raise PreconditionError(f"level {k} needs {k} entries in the epsilon vector, "
                                f"got {len(epsilon_vector)}")
    if len(tables) < k + 1:
        raise PreconditionError(f"coefficient tables cover levels 0..{len(tables) - 1}, need 0..{k}")
    if not all(math.isfinite(v) for v in (epsilon,) + epsilon_vector):
        raise PreconditionError("epsilon values must be finite")
    for level, table in enumerate(tables[:k + 1]):
        if table.level != level:
            raise PreconditionError(f"table {level} is labelled level {table.level}")

    tables = tuple(tables[:k + 1])
    x, y = BiPolynomial.x(), BiPolynomial.y()
    hamiltonians = {}
    for side, sign in ((PLUS, 1.0), (MINUS, -1.0)):
        shifted = sign * x - 1.0
        h = 0.5 * (shifted * shifted - y * y) + epsilon * BiPolynomial.from_y(tables[0].polynomial(side))
        for i in range(1, k + 1):
            h = h.pullback_phi() + (epsilon * epsilon_vector[i - 1]) * BiPolynomial.from_y(
                tables[i].polynomial(side))
        hamiltonians[side] = h

    boundaries = {side: _boundary_function(k, epsilon, epsilon_vector, tables, side)
                  for side in (PLUS, MINUS)}
    _check_boundary_identity(k, hamiltonians, boundaries, tol.boundary_identity)

    logger.debug(f"built level {k}: eps={epsilon}, E={epsilon_vector}, "
                 f"degree={max(h.total_degree for h in hamiltonians.values())}")
    return HamiltonianLevel(k, float(epsilon), epsilon_vector, tables,
                            hamiltonians[PLUS], hamiltonians[MINUS], boundaries)


def _check_boundary_identity(k, hamiltonians, boundaries, tol: float):
    grid = np.linspace(-2.0, 2.0, 101)[1:-1]
    for side in (PLUS, MINUS):
        restricted = hamiltonians[side].restrict_to_axis()
        assembled = restricted(grid)
        structured = np.array([boundaries[side].value(y) for y in grid])
        scale = max(1.0, float(np.max(np.abs(structured))))
        error = float(np.max(np.abs(assembled - structured)))
        if error > tol * scale:
            raise NumericalError(
                f"boundary identity failed at level {k} side {side}: error {error:.3e}",
                k=k, side=side, error=error,
            )
