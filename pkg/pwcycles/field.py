"""
Piecewise planar polynomial vector fields split by the switching line x = 0.

Z(x, y) = Z+(x, y - b) on x > 0 and Z-(x, y) on x < 0, each piece Z = (P, Q).
Boundary points are classified with the Lie derivatives of h(x, y) = x.
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from scipy.optimize import brentq

from core.errors import PreconditionError, TangencyError
from pwcycles.poly import BiPolynomial, UniPolynomial

logger = logging.getLogger(__name__)

PLUS = '+'
MINUS = '-'
SIDES = (PLUS, MINUS)

CROSSING = 'crossing'
ATTRACTING_SLIDING = 'attractingSliding'
REPELLING_SLIDING = 'repellingSliding'
VISIBLE_FOLD_PLUS = 'visibleFold+'
VISIBLE_FOLD_MINUS = 'visibleFold-'
INVISIBLE_FOLD_PLUS = 'invisibleFold+'
INVISIBLE_FOLD_MINUS = 'invisibleFold-'
TWO_FOLD_II = 'twoFoldII'
TWO_FOLD_VV = 'twoFoldVV'
TWO_FOLD_VI = 'twoFoldVI'


def _check_side(side: str):
    if side not in SIDES:
        raise PreconditionError(f"side must be '+' or '-', got {side!r}")


@dataclass(frozen=True)
class PiecewiseField:
    """The four components P+, Q+, P-, Q- and the upper-piece shift b"""

    plus_p: BiPolynomial
    plus_q: BiPolynomial
    minus_p: BiPolynomial
    minus_q: BiPolynomial
    shift_b: float = 0.0

    @classmethod
    def from_hamiltonians(cls, h_plus: BiPolynomial, h_minus: BiPolynomial) -> 'PiecewiseField':
        plus_p, plus_q = hamiltonian_field(h_plus)
        minus_p, minus_q = hamiltonian_field(h_minus)
        return cls(plus_p, plus_q, minus_p, minus_q)

    @property
    def degree(self) -> int:
        return max(c.total_degree for c in (self.plus_p, self.plus_q, self.minus_p, self.minus_q))

    def components(self, side: str) -> Tuple[BiPolynomial, BiPolynomial]:
        _check_side(side)
        if side == PLUS:
            return self.plus_p, self.plus_q
        return self.minus_p, self.minus_q

    def _local_y(self, side: str, y):
        return y - self.shift_b if side == PLUS else y

    def vector(self, side: str, x: float, y: float) -> Tuple[float, float]:
        """Value of the piece on `side` at (x, y), shift included"""
        p, q = self.components(side)
        yy = self._local_y(side, y)
        return float(p(x, yy)), float(q(x, yy))

    def p_on_axis(self, side: str, y):
        p, _ = self.components(side)
        return p(0.0, self._local_y(side, y))

    def q_on_axis(self, side: str, y):
        _, q = self.components(side)
        return q(0.0, self._local_y(side, y))

    def divergence(self, side: str, x: float, y: float) -> float:
        p, q = self.components(side)
        yy = self._local_y(side, y)
        return float(p.differentiate('x')(x, yy) + q.differentiate('y')(x, yy))

    def lie_second(self, side: str, y: float) -> float:
        """(Z)^2 h = dP/dx * P + dP/dy * Q on the axis"""
        p, q = self.components(side)
        yy = self._local_y(side, y)
        return float(p.differentiate('x')(0.0, yy) * p(0.0, yy)
                     + p.differentiate('y')(0.0, yy) * q(0.0, yy))

    def to_json(self) -> dict:
        return {
            "plusP": self.plus_p.to_json(),
            "plusQ": self.plus_q.to_json(),
            "minusP": self.minus_p.to_json(),
            "minusQ": self.minus_q.to_json(),
            "shiftB": float(self.shift_b),
        }

    @classmethod
    def from_json(cls, data: dict) -> 'PiecewiseField':
        return cls(
            BiPolynomial.from_json(data["plusP"]),
            BiPolynomial.from_json(data["plusQ"]),
            BiPolynomial.from_json(data["minusP"]),
            BiPolynomial.from_json(data["minusQ"]),
            float(data.get("shiftB", 0.0)),
        )


@dataclass(frozen=True)
class FoldCertificate:
    point: float
    lie_first_plus: float
    lie_first_minus: float
    lie_second_plus: float
    lie_second_minus: float
    classification: str
    monodromy_flag: bool
    ell_sign: int
    rotation_sign: int

    @property
    def is_monodromic_two_fold(self) -> bool:
        return self.classification == TWO_FOLD_II and self.monodromy_flag

    def to_json(self) -> dict:
        return {
            "point": self.point,
            "lieFirstPlus": self.lie_first_plus,
            "lieFirstMinus": self.lie_first_minus,
            "lieSecondPlus": self.lie_second_plus,
            "lieSecondMinus": self.lie_second_minus,
            "classification": self.classification,
            "monodromyFlag": self.monodromy_flag,
            "ellSign": self.ell_sign,
            "rotationSign": self.rotation_sign,
        }


def hamiltonian_field(h: BiPolynomial) -> Tuple[BiPolynomial, BiPolynomial]:
    """Return (dH/dy, -dH/dx)"""
    return h.differentiate('y'), -h.differentiate('x')


def _sign(value: float, tol: float) -> int:
    if abs(value) <= tol:
        return 0
    return 1 if value > 0 else -1


def rotation_sign(field: PiecewiseField, y: float, tol: float = 1e-12) -> int:
    """
    Direction of turning near a boundary point: +1 counterclockwise.

    Taken from the sign of Q+ at the point; when Q+ vanishes there (a focus
    sitting on the line) the sign of dQ+/dx decides.
    """
    q_plus = float(field.q_on_axis(PLUS, y))
    if abs(q_plus) > tol:
        return 1 if q_plus > 0 else -1
    _, q = field.components(PLUS)
    slope = float(q.differentiate('x')(0.0, y - field.shift_b))
    return 1 if slope >= 0 else -1


def classify_boundary_point(field: PiecewiseField, y: float, tol: float = 1e-12,
                            ell_sign: int = 0) -> FoldCertificate:
    """
    Classify the point (0, y) of the switching line.

    The stability sign is not a first/second-order Lie quantity; callers that
    measured it pass it through `ell_sign`.
    """
    first_plus = float(field.p_on_axis(PLUS, y))
    first_minus = float(field.p_on_axis(MINUS, y))
    second_plus = field.lie_second(PLUS, y)
    second_minus = field.lie_second(MINUS, y)
    s1p, s1m = _sign(first_plus, tol), _sign(first_minus, tol)
    s2p, s2m = _sign(second_plus, tol), _sign(second_minus, tol)

    for side, s1, s2 in ((PLUS, s1p, s2p), (MINUS, s1m, s2m)):
        if s1 == 0 and s2 == 0:
            raise TangencyError(
                f"higher-order tangency of Z{side} at y={y}: first and second Lie derivatives vanish",
                side=side, y=y,
            )

    if s1p != 0 and s1m != 0:
        if s1p == s1m:
            classification = CROSSING
        elif s1p < 0 < s1m:
            classification = ATTRACTING_SLIDING
        else:
            classification = REPELLING_SLIDING
    elif s1p == 0 and s1m != 0:
        classification = VISIBLE_FOLD_PLUS if s2p > 0 else INVISIBLE_FOLD_PLUS
    elif s1m == 0 and s1p != 0:
        classification = VISIBLE_FOLD_MINUS if s2m < 0 else INVISIBLE_FOLD_MINUS
    else:
        invisible_plus = s2p < 0
        invisible_minus = s2m > 0
        if invisible_plus and invisible_minus:
            classification = TWO_FOLD_II
        elif not invisible_plus and not invisible_minus:
            classification = TWO_FOLD_VV
        else:
            classification = TWO_FOLD_VI

    monodromic = False
    if classification == TWO_FOLD_II:
        monodromic = float(field.q_on_axis(PLUS, y)) * float(field.q_on_axis(MINUS, y)) < 0.0

    return FoldCertificate(
        point=float(y),
        lie_first_plus=first_plus,
        lie_first_minus=first_minus,
        lie_second_plus=second_plus,
        lie_second_minus=second_minus,
        classification=classification,
        monodromy_flag=monodromic,
        ell_sign=int(ell_sign),
        rotation_sign=rotation_sign(field, y, tol),
    )


def apply_shift(field: PiecewiseField, b: float) -> PiecewiseField:
    """Shift the upper piece: Z+(x, y) becomes Z+(x, y - b). Shifts accumulate."""
    if b == 0.0:
        return field
    return PiecewiseField(field.plus_p, field.plus_q, field.minus_p, field.minus_q,
                          field.shift_b + b)


def expand_shift(field: PiecewiseField) -> PiecewiseField:
    """Bake the shift into the upper-piece coefficients, returning shift_b = 0"""
    if field.shift_b == 0.0:
        return field
    inner = UniPolynomial([-field.shift_b, 1.0])
    return PiecewiseField(field.plus_p.compose_y(inner), field.plus_q.compose_y(inner),
                          field.minus_p, field.minus_q, 0.0)


def translate(field: PiecewiseField, t: float) -> PiecewiseField:
    """Both pieces moved down by t: Z(x, y) becomes Z(x, y + t)"""
    baked = expand_shift(field)
    inner = UniPolynomial([t, 1.0])
    return PiecewiseField(baked.plus_p.compose_y(inner), baked.plus_q.compose_y(inner),
                          baked.minus_p.compose_y(inner), baked.minus_q.compose_y(inner))


def sliding_segments(field: PiecewiseField, y_lo: float, y_hi: float, resolution: int = 401,
                     tol: float = 1e-12) -> List[Tuple[float, float]]:
    """
    Maximal subintervals of [y_lo, y_hi] where P+(0, y) P-(0, y) < 0.

    Endpoints are refined with Brent's method on the product.
    """
    if not y_lo < y_hi:
        raise PreconditionError(f"sliding_segments needs y_lo < y_hi, got [{y_lo}, {y_hi}]")
    if resolution < 2:
        raise PreconditionError("sliding_segments needs resolution >= 2")

    def product(y):
        return float(field.p_on_axis(PLUS, y)) * float(field.p_on_axis(MINUS, y))

    ys = np.linspace(y_lo, y_hi, resolution)
    values = np.array([product(y) for y in ys])
    inside = values < 0.0

    def refine(i_out: int, i_in: int) -> float:
        a, b = ys[i_out], ys[i_in]
        if values[i_out] == 0.0:
            return float(a)
        return brentq(product, min(a, b), max(a, b), xtol=tol)

    segments = []
    i = 0
    while i < resolution:
        if not inside[i]:
            i += 1
            continue
        start = i
        while i + 1 < resolution and inside[i + 1]:
            i += 1
        end = i
        lo = y_lo if start == 0 else refine(start - 1, start)
        hi = y_hi if end == resolution - 1 else refine(end + 1, end)
        segments.append((lo, hi))
        i += 1
    logger.debug(f"sliding segments in [{y_lo}, {y_hi}]: {segments}")
    return segments
