"""
Half-return maps to the switching line and the displacement functions built on them.

Two ways of computing a half-return are provided:

  * algebraic: the other crossing z of the level set H(0, y) = H(0, z) is the
    zero of the divided difference (h(y) - h(z)) / (y - z), found by Newton in
    the offset w = z - partner, where partner is the unperturbed crossing;
  * numeric: the orbit is integrated with an event on x = 0.

The algebraic route is used for certification, the numeric one for fields that
are not Hamiltonian (fold demos, lifted fields) and for cross-validation.
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.integrate import solve_ivp

from core.errors import (
    BranchError, ConvergenceError, CrossingError, DerivativeUnderflowError, IndeterminateError,
    LiftConsistencyError, NoReturnError, NumericalError, PreconditionError, TangencyError,
)
from pwcycles.field import MINUS, PLUS, PiecewiseField, _check_side
from pwcycles.hamiltonian_family import HamiltonianLevel, partner_ordinate
from pwcycles.poly import phi
from pwcycles.tolerances import DEFAULT_TOLERANCES, Tolerances

logger = logging.getLogger(__name__)

FORWARD = 'forward'
BACKWARD = 'backward'

UNFOLDING_ODD = 'O'
UNFOLDING_EVEN_PLUS = 'Eplus'
UNFOLDING_EVEN_MINUS = 'Eminus'

MAX_MULTIPLICITY = 6
FIT_DEGREE = 7
ESCAPE_RADIUS = 1e3


# --------------------------------------------------------------------------
# Algebraic half-returns
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class DividedDifference:
    """F(y1, y2) = (H(0, y1) - H(0, y2)) / (y1 - y2) for one side of a level"""

    level: HamiltonianLevel
    side: str

    def __post_init__(self):
        _check_side(self.side)

    def __call__(self, y1: float, y2: float, y_sum: Optional[float] = None) -> float:
        return self.level.boundary(self.side).divided_difference(y1, y2, y_sum)

    def partial_y2(self, y1: float, y2: float, step: float = 1e-6) -> float:
        return (self(y1, y2 + step) - self(y1, y2 - step)) / (2.0 * step)


def divided_difference(level: HamiltonianLevel, side: str, y1: float, y2: float,
                       y_sum: Optional[float] = None) -> float:
    """F(y1, y2); y1 == y2 gives dH/dy(0, y1)"""
    return DividedDifference(level, side)(y1, y2, y_sum)


def _level_at(level: HamiltonianLevel, epsilon: Optional[float]) -> HamiltonianLevel:
    if epsilon is None or epsilon == level.epsilon:
        return level
    return level.with_epsilon(epsilon)


def half_return_offset(level: HamiltonianLevel, side: str, y: float,
                       partner: Optional[float] = None,
                       tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """
    Offset w of the perturbed crossing z = partner + w from the unperturbed one.

    Newton on w -> F(y, partner + w), started at w = 0. The sum y + z is carried
    as (y + partner) + w so that the origin case (partner = -y) never forms the
    cancelling sum y + z in floating point.

    Raises:
        DerivativeUnderflowError: |dF/dz| below tol.derivative_floor at an iterate
        ConvergenceError: no convergence in the iteration budget, or the iterate
            left the seed radius
    """
    _check_side(side)
    if partner is None:
        partner = partner_ordinate(level.level, y)
    boundary = level.boundary(side)
    base_sum = 0.0 if partner == -y else y + partner

    def residual(w: float) -> float:
        return boundary.divided_difference(y, partner + w, base_sum + w)

    step = 1e-7 * max(1.0, abs(partner))
    atol = tol.newton_step * max(1.0, abs(partner))
    w = 0.0
    for _ in range(tol.newton_max_iterations):
        f = residual(w)
        if f == 0.0:
            break
        df = (residual(w + step) - residual(w - step)) / (2.0 * step)
        if abs(df) < tol.derivative_floor:
            raise DerivativeUnderflowError(
                f"dF/dz = {df:.3e} at z = {partner + w} (y = {y}, side {side})",
                y=y, side=side, iterate=partner + w, derivative=df,
            )
        delta = f / df
        w -= delta
        if abs(w) > tol.seed_radius:
            raise ConvergenceError(
                f"half-return from y = {y} ({side}) left the seed radius: |w| = {abs(w):.3g}",
                y=y, side=side, offset=w,
            )
        if abs(delta) <= 4.0 * np.finfo(float).eps * abs(w) + atol:
            break
    else:
        raise ConvergenceError(
            f"half-return from y = {y} ({side}) did not converge in {tol.newton_max_iterations} steps",
            y=y, side=side, offset=w,
        )

    final = residual(w)
    if abs(final) > tol.newton_residual:
        raise ConvergenceError(
            f"half-return residual {abs(final):.3e} at y = {y} ({side})",
            y=y, side=side, residual=final,
        )
    return w


def half_return_algebraic(level: HamiltonianLevel, side: str, y: float,
                          epsilon: Optional[float] = None, partner: Optional[float] = None,
                          tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """
    Return point y1 near the unperturbed partner of F(y, y1) = 0.

    Args:
        level: assembled Hamiltonian level
        side: '+' or '-'
        y: starting ordinate on the switching line
        epsilon: overrides level.epsilon when given
        partner: unperturbed return point; defaults to partner_ordinate(k, y)
    """
    level = _level_at(level, epsilon)
    if partner is None:
        partner = partner_ordinate(level.level, y)
    return partner + half_return_offset(level, side, y, partner, tol)


def displacement(level: HamiltonianLevel, y: float, epsilon: Optional[float] = None,
                 partner: Optional[float] = None,
                 tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """delta(y) = y1+(y) - y1-(y), taken as a difference of offsets"""
    level = _level_at(level, epsilon)
    if partner is None:
        partner = partner_ordinate(level.level, y)
    w_plus = half_return_offset(level, PLUS, y, partner, tol)
    w_minus = half_return_offset(level, MINUS, y, partner, tol)
    return w_plus - w_minus


def reduced_displacement(level: HamiltonianLevel, y: float, epsilon: Optional[float] = None,
                         tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """delta(y) / epsilon"""
    level = _level_at(level, epsilon)
    if level.epsilon == 0.0:
        raise PreconditionError("reduced displacement needs epsilon != 0")
    return displacement(level, y, tol=tol) / level.epsilon


@dataclass(frozen=True)
class LiftContext:
    """The parent level and the level with its top perturbation switched off"""

    level: HamiltonianLevel
    parent: HamiltonianLevel
    unperturbed_top: HamiltonianLevel

    @classmethod
    def for_level(cls, level: HamiltonianLevel) -> 'LiftContext':
        if level.level < 1:
            raise PreconditionError("lifted displacement needs a level >= 1")
        return cls(level, level.parent(), level.without_top_perturbation())


def lifted_displacement(level: HamiltonianLevel, y: float, epsilon: Optional[float] = None,
                        epsilon_next: Optional[float] = None,
                        parent_ordinate: Optional[float] = None,
                        context: Optional[LiftContext] = None,
                        tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """
    Displacement of level k+1 near a doubled copy of a level-k orbit.

    The parent's half-returns R+- from u = phi(y) are pulled back by the square
    root: sqrt(R+ + 2) - sqrt(R- + 2), on the branch of sign(y). With the top
    perturbation switched off this must equal the direct displacement; the top
    perturbation is then added from the direct computation.

    Raises:
        BranchError: R + 2 < 0 on either side
        LiftConsistencyError: lifted and direct values disagree
    """
    if epsilon is not None or epsilon_next is not None:
        if epsilon is not None:
            level = _level_at(level, epsilon)
        if epsilon_next is not None and epsilon_next != level.epsilon_vector[-1]:
            level = level.with_epsilon_vector(level.epsilon_vector[:-1] + (float(epsilon_next),))
        context = None
    if context is None or context.level is not level:
        context = LiftContext.for_level(level)
    if y == 0.0:
        raise PreconditionError("lifted displacement is undefined at y = 0")

    u = phi(y)
    if parent_ordinate is not None:
        if parent_ordinate <= -2.0:
            raise BranchError(f"parent ordinate {parent_ordinate} is not above -2",
                              parent_ordinate=parent_ordinate)
        if abs(u - parent_ordinate) > tol.seed_radius:
            raise PreconditionError(
                f"y = {y} is not near a copy of the parent ordinate {parent_ordinate}",
                y=y, parent_ordinate=parent_ordinate,
            )

    parent_partner = partner_ordinate(context.parent.level, u)
    w_plus = half_return_offset(context.parent, PLUS, u, parent_partner, tol)
    w_minus = half_return_offset(context.parent, MINUS, u, parent_partner, tol)
    r_plus, r_minus = parent_partner + w_plus, parent_partner + w_minus
    if r_plus + 2.0 < 0.0 or r_minus + 2.0 < 0.0:
        raise BranchError(f"parent return points {r_plus}, {r_minus} leave the strip",
                          r_plus=r_plus, r_minus=r_minus)
    # sqrt(a) - sqrt(b) = (a - b) / (sqrt(a) + sqrt(b)), and a - b = w+ - w-
    lifted = math.copysign(1.0, y) * (w_plus - w_minus) / (
        math.sqrt(r_plus + 2.0) + math.sqrt(r_minus + 2.0))

    partner = partner_ordinate(level.level, y)
    direct_unperturbed = displacement(context.unperturbed_top, y, partner=partner, tol=tol)
    scale = max(1.0, abs(direct_unperturbed))
    if abs(lifted - direct_unperturbed) > tol.lift_crosscheck * scale:
        raise LiftConsistencyError(
            f"lifted {lifted:.6e} and direct {direct_unperturbed:.6e} displacements differ at y = {y}",
            y=y, lifted=lifted, direct=direct_unperturbed,
        )
    if level.epsilon_vector[-1] == 0.0:
        return lifted
    direct = displacement(level, y, partner=partner, tol=tol)
    return lifted + (direct - direct_unperturbed)


def displacement_grid(level: HamiltonianLevel, ys: Sequence[float],
                      tol: Tolerances = DEFAULT_TOLERANCES) -> List[Dict[str, float]]:
    """Rows (y, delta, reducedDelta) for plotting; failed points are NaN"""
    rows = []
    for y in ys:
        try:
            delta = displacement(level, float(y), tol=tol)
        except NumericalError as e:
            logger.warning(f"displacement undefined at y={y}: {e.message}")
            delta = float('nan')
        reduced = delta / level.epsilon if level.epsilon != 0.0 else float('nan')
        rows.append({"y": float(y), "delta": delta, "reducedDelta": reduced})
    return rows


# --------------------------------------------------------------------------
# Numeric half-returns
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class HalfOrbit:
    """Result of one integrated half-return"""

    side: str
    start: float
    ordinate: float
    time: float
    xs: np.ndarray
    ys: np.ndarray


def _time_sign(field: PiecewiseField, side: str, y: float, direction: Optional[str],
               tol: Tolerances) -> float:
    p = float(field.p_on_axis(side, y))
    if abs(p) < tol.ode_tangency:
        raise TangencyError(f"Z{side} is tangent to the switching line at y = {y}", side=side, y=y)
    # sign of time that carries the orbit into the half-plane of `side`
    entering = (1.0 if p > 0 else -1.0) * (1.0 if side == PLUS else -1.0)
    if direction is None:
        return entering
    if direction not in (FORWARD, BACKWARD):
        raise PreconditionError(f"direction must be {FORWARD!r} or {BACKWARD!r}, got {direction!r}")
    requested = 1.0 if direction == FORWARD else -1.0
    if requested != entering:
        raise CrossingError(
            f"the {direction} orbit of Z{side} from y = {y} leaves into the other half-plane",
            side=side, y=y,
        )
    return requested


def integrate_half_orbit(field: PiecewiseField, side: str, y: float,
                         direction: Optional[str] = None,
                         tol: Tolerances = DEFAULT_TOLERANCES) -> HalfOrbit:
    """
    Integrate Z(side) from (0, y) until it comes back to x = 0.

    direction None picks the time direction that enters the half-plane of `side`.
    """
    _check_side(side)
    sign = _time_sign(field, side, y, direction, tol)

    def rhs(t, state):
        p, q = field.vector(side, state[0], state[1])
        return [sign * p, sign * q]

    def hit_axis(t, state):
        return state[0]

    # x decreases through 0 when coming back from the right, increases from the left
    hit_axis.terminal = True
    hit_axis.direction = -1 if side == PLUS else 1

    def escape(t, state):
        return ESCAPE_RADIUS - math.hypot(state[0], state[1])

    escape.terminal = True

    sol = solve_ivp(rhs, (0.0, tol.ode_max_time), [0.0, float(y)], method='DOP853',
                    rtol=tol.ode_rtol, atol=tol.ode_atol, events=(hit_axis, escape))
    if sol.status == -1:
        raise NoReturnError(f"integration failed from y = {y} ({side}): {sol.message}",
                            side=side, y=y)
    if sol.status != 1 or len(sol.t_events[0]) == 0:
        raise NoReturnError(
            f"orbit of Z{side} from y = {y} did not return within time {tol.ode_max_time}",
            side=side, y=y,
        )
    hit = sol.y_events[0][0]
    ordinate = float(hit[1])
    p_hit = float(field.p_on_axis(side, ordinate))
    if abs(p_hit) < tol.ode_tangency:
        raise TangencyError(f"orbit from y = {y} returns tangentially at {ordinate}",
                            side=side, y=y, ordinate=ordinate)
    xs = np.append(sol.y[0], 0.0)
    ys = np.append(sol.y[1], ordinate)
    return HalfOrbit(side, float(y), ordinate, float(sol.t_events[0][0]), xs, ys)


def half_return_numeric(field: PiecewiseField, side: str, y: float,
                        direction: Optional[str] = None,
                        tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    return integrate_half_orbit(field, side, y, direction, tol).ordinate


# --------------------------------------------------------------------------
# Composed first returns under the upper-piece shift
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ReturnChain:
    """
    Half-maps in the order they are applied; each upper map is shifted by b

    windows, when given, hold the approximate ordinate window of each half-map.
    """

    sides: Tuple[str, ...]
    windows: Optional[Tuple[Tuple[float, float], ...]] = None
    shift_b: float = 0.0

    def __post_init__(self):
        sides = tuple(self.sides)
        object.__setattr__(self, 'sides', sides)
        if not sides or len(sides) % 2:
            raise PreconditionError(f"a closed chain needs an even number of half-maps, got {len(sides)}")
        for side in sides:
            _check_side(side)
        for a, b in zip(sides, sides[1:]):
            if a == b:
                raise PreconditionError(f"chain sides must alternate, got {''.join(sides)}")
        if self.windows is not None and len(self.windows) != len(sides):
            raise PreconditionError("one window per half-map is required")

    def __len__(self):
        return len(self.sides)

    @classmethod
    def for_crossing(cls, field: PiecewiseField, y: float, b: float = 0.0) -> 'ReturnChain':
        """The two-map chain of the crossing orbit through (0, y)"""
        first = _crossing_side(field, y, b, 0)
        return cls((first, MINUS if first == PLUS else PLUS), shift_b=b)

    def to_json(self) -> dict:
        return {"sides": list(self.sides), "windows": self.windows, "shiftB": self.shift_b}


def _crossing_side(field: PiecewiseField, y: float, b: float, position: int) -> str:
    p_plus = float(field.p_on_axis(PLUS, y - b))
    p_minus = float(field.p_on_axis(MINUS, y))
    if p_plus * p_minus <= 0.0:
        raise CrossingError(
            f"y = {y} is not a crossing point (P+ = {p_plus:.3e}, P- = {p_minus:.3e})",
            y=y, position=position, p_plus=p_plus, p_minus=p_minus,
        )
    return PLUS if p_plus > 0 else MINUS


def _apply_half_map(field: PiecewiseField, side: str, v: float, b: float,
                    tol: Tolerances) -> float:
    if side == PLUS:
        return half_return_numeric(field, PLUS, v - b, FORWARD, tol) + b
    return half_return_numeric(field, MINUS, v, FORWARD, tol)


def chain_points(chain: ReturnChain, field: PiecewiseField, y: float,
                 b: Optional[float] = None, tol: Tolerances = DEFAULT_TOLERANCES) -> List[float]:
    """
    Successive crossings of the switching line along `chain`, starting point included.

    Upper maps are replaced by v -> phi+(v - b) + b.

    Raises:
        CrossingError: an intermediate point is not a crossing point in the
            direction the chain expects
        NumericalError: a half-map failed; context carries the chain position
    """
    if b is None:
        b = chain.shift_b
    points = [float(y)]
    for position, side in enumerate(chain.sides):
        v = points[-1]
        actual = _crossing_side(field, v, b, position)
        if actual != side:
            raise CrossingError(
                f"half-map {position} expects to enter {side} at y = {v} but the flow enters {actual}",
                y=v, position=position,
            )
        try:
            points.append(_apply_half_map(field, side, v, b, tol))
        except NumericalError as e:
            raise type(e)(f"half-map {position} ({side}) at y = {v}: {e.message}",
                          **{**e.context, "position": position}) from e
    return points


def composed_return(chain: ReturnChain, field: PiecewiseField, y: float,
                    b: Optional[float] = None, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """First return along `chain` under the upper-piece shift b"""
    return chain_points(chain, field, y, b, tol)[-1]


def first_return(field: PiecewiseField, y: float, b: float = 0.0,
                 tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    return composed_return(ReturnChain.for_crossing(field, y, b), field, y, b, tol)


def half_map_slopes(chain: ReturnChain, field: PiecewiseField, y: float, b: float = 0.0,
                    tol: Tolerances = DEFAULT_TOLERANCES) -> List[float]:
    """Central-difference slope of each half-map at its intermediate argument"""
    step = tol.shift_step
    slopes = []
    v = float(y)
    for side in chain.sides:
        hi = _apply_half_map(field, side, v + step, b, tol)
        lo = _apply_half_map(field, side, v - step, b, tol)
        slopes.append((hi - lo) / (2.0 * step))
        v = _apply_half_map(field, side, v, b, tol)
    return slopes


def alternating_shift_sum(sides: Sequence[str], slopes: Sequence[float]) -> float:
    """
    d/db of the composed return from the half-map slopes.

    An upper map v -> phi+(v - b) + b contributes 1 - phi+'; every map then
    multiplies what came before by its own slope.
    """
    if len(sides) != len(slopes):
        raise PreconditionError("one slope per half-map is required")
    total = 0.0
    for side, slope in zip(sides, slopes):
        total = slope * total
        if side == PLUS:
            total += 1.0 - slope
    return total


def shift_derivative(chain: ReturnChain, field: PiecewiseField, y: float, b: Optional[float] = None,
                     tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """Central finite difference of the composed return in b"""
    if b is None:
        b = chain.shift_b
    h = tol.shift_step
    upper = composed_return(chain, field, y, b + h, tol)
    lower = composed_return(chain, field, y, b - h, tol)
    return (upper - lower) / (2.0 * h)


# --------------------------------------------------------------------------
# Multiplicity of a zero of the displacement
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Unfolding:
    kind: str
    multiplicity: int
    leading_coefficient: float

    @property
    def leading_sign(self) -> int:
        return 1 if self.leading_coefficient > 0 else -1

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "multiplicity": self.multiplicity,
            "leadingCoefficient": self.leading_coefficient,
            "leadingSign": self.leading_sign,
        }


def unfolding_type(delta: Callable[[float], float], y_c: float, h: float = 1e-2,
                   half_width: int = 7, tol: Tolerances = DEFAULT_TOLERANCES) -> Unfolding:
    """
    Multiplicity l and leading coefficient a of delta(y) = a (y - y_c)^l + ...

    A degree-7 polynomial is fitted to 2 * half_width + 1 samples; the first
    coefficient above tol.multiplicity * max|samples| decides.

    Raises:
        IndeterminateError: all coefficients up to order 6 vanish numerically
    """
    t = np.arange(-half_width, half_width + 1, dtype=float)
    values = np.array([delta(y_c + h * j) for j in t])
    scale = float(np.max(np.abs(values)))
    if scale == 0.0:
        raise IndeterminateError(f"displacement vanishes identically near y = {y_c}", y=y_c)
    coeffs = npoly.polyfit(t, values, FIT_DEGREE)
    for order in range(1, MAX_MULTIPLICITY + 1):
        if abs(coeffs[order]) > tol.multiplicity * scale:
            leading = float(coeffs[order] / h ** order)
            if order % 2:
                kind = UNFOLDING_ODD
            else:
                kind = UNFOLDING_EVEN_PLUS if leading > 0 else UNFOLDING_EVEN_MINUS
            logger.debug(f"zero at {y_c}: multiplicity {order}, leading {leading:.6g}")
            return Unfolding(kind, order, leading)
    raise IndeterminateError(
        f"derivatives up to order {MAX_MULTIPLICITY} vanish at y = {y_c}", y=y_c,
    )
