"""
Dense univariate and bivariate polynomials with real-root isolation.

UniPolynomial coefficients are indexed by power of y. BiPolynomial coefficients
form a grid c[i][j] for the monomial x**i * y**j. Both are immutable.
"""
import logging
from typing import List, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial import Polynomial
from numpy.polynomial import polynomial as npoly
from scipy.optimize import brentq
from scipy.signal import convolve2d

from core.errors import DegenerateIntervalError, PreconditionError

logger = logging.getLogger(__name__)

Number = Union[int, float]


def _frozen(array: np.ndarray) -> np.ndarray:
    array.flags.writeable = False
    return array


def _trim_1d(coeffs: np.ndarray) -> np.ndarray:
    nonzero = np.flatnonzero(coeffs)
    if nonzero.size == 0:
        return np.zeros(1)
    return coeffs[: nonzero[-1] + 1]


def _trim_2d(coeffs: np.ndarray) -> np.ndarray:
    rows, cols = np.nonzero(coeffs)
    if rows.size == 0:
        return np.zeros((1, 1))
    return coeffs[: rows.max() + 1, : cols.max() + 1]


class UniPolynomial:
    """Polynomial in one variable, p(y) = sum c[j] y**j"""

    __slots__ = ('_coeffs',)

    def __init__(self, coeffs: Sequence[Number]):
        array = np.array(coeffs, dtype=float).reshape(-1)
        if array.size == 0:
            array = np.zeros(1)
        if not np.all(np.isfinite(array)):
            raise PreconditionError("polynomial coefficients must be finite")
        self._coeffs = _frozen(_trim_1d(array))

    @classmethod
    def from_roots(cls, roots: Sequence[float], leading: float = 1.0) -> 'UniPolynomial':
        return cls(leading * npoly.polyfromroots(list(roots)))

    @property
    def coefficients(self) -> np.ndarray:
        return self._coeffs

    @property
    def degree(self) -> int:
        return len(self._coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return not np.any(self._coeffs)

    @property
    def scale(self) -> float:
        return float(np.max(np.abs(self._coeffs)))

    def __call__(self, y):
        return npoly.polyval(y, self._coeffs)

    def derivative(self) -> 'UniPolynomial':
        return UniPolynomial(npoly.polyder(self._coeffs))

    def compose(self, inner: 'UniPolynomial') -> 'UniPolynomial':
        """Return p(inner(y))"""
        composed = Polynomial(self._coeffs)(Polynomial(inner.coefficients))
        return UniPolynomial(composed.coef)

    def divided_difference(self, a: float, b: float) -> float:
        """
        (p(a) - p(b)) / (a - b), equal to p'(a) when a == b.

        Synthetic division of p by (y - a) gives q with p(y) - p(a) = (y - a) q(y);
        the divided difference is q(b). No subtraction of nearly equal values occurs.
        """
        c = self._coeffs
        n = len(c) - 1
        if n == 0:
            return 0.0
        q = np.empty(n)
        q[n - 1] = c[n]
        for m in range(n - 1, 0, -1):
            q[m - 1] = c[m] + a * q[m]
        result = 0.0
        for coeff in q[::-1]:
            result = result * b + coeff
        return float(result)

    def split_parity(self) -> Tuple['UniPolynomial', 'UniPolynomial']:
        """Return (even part, odd part) so that p = even + odd"""
        even = self._coeffs.copy()
        odd = self._coeffs.copy()
        even[1::2] = 0.0
        odd[0::2] = 0.0
        return UniPolynomial(even), UniPolynomial(odd)

    def __add__(self, other):
        other = _as_uni(other)
        size = max(len(self._coeffs), len(other.coefficients))
        return UniPolynomial(np.pad(self._coeffs, (0, size - len(self._coeffs)))
                             + np.pad(other.coefficients, (0, size - len(other.coefficients))))

    __radd__ = __add__

    def __neg__(self):
        return UniPolynomial(-self._coeffs)

    def __sub__(self, other):
        return self + (-_as_uni(other))

    def __rsub__(self, other):
        return _as_uni(other) - self

    def __mul__(self, other):
        if isinstance(other, UniPolynomial):
            return UniPolynomial(npoly.polymul(self._coeffs, other.coefficients))
        return UniPolynomial(self._coeffs * float(other))

    __rmul__ = __mul__

    def allclose(self, other: 'UniPolynomial', tol: float = 1e-12) -> bool:
        diff = (self - other).coefficients
        return bool(np.max(np.abs(diff)) <= tol * max(1.0, self.scale, other.scale))

    def to_json(self) -> dict:
        return {"coeffs": [float(c) for c in self._coeffs]}

    @classmethod
    def from_json(cls, data: dict) -> 'UniPolynomial':
        return cls(data["coeffs"])

    def __repr__(self):
        return f"UniPolynomial({self._coeffs.tolist()})"


def _as_uni(value) -> UniPolynomial:
    if isinstance(value, UniPolynomial):
        return value
    return UniPolynomial([float(value)])


class BiPolynomial:
    """Polynomial in (x, y), p = sum c[i][j] x**i y**j"""

    __slots__ = ('_coeffs',)

    def __init__(self, coeffs):
        array = np.array(coeffs, dtype=float)
        if array.ndim == 1:
            array = array.reshape(1, -1)
        if array.size == 0:
            array = np.zeros((1, 1))
        if array.ndim != 2:
            raise PreconditionError("bivariate coefficients must form a 2-D grid")
        if not np.all(np.isfinite(array)):
            raise PreconditionError("polynomial coefficients must be finite")
        self._coeffs = _frozen(_trim_2d(array))

    @classmethod
    def constant(cls, value: float) -> 'BiPolynomial':
        return cls([[value]])

    @classmethod
    def x(cls) -> 'BiPolynomial':
        return cls([[0.0], [1.0]])

    @classmethod
    def y(cls) -> 'BiPolynomial':
        return cls([[0.0, 1.0]])

    @classmethod
    def from_y(cls, p: UniPolynomial) -> 'BiPolynomial':
        """Embed a polynomial in y alone"""
        return cls(p.coefficients.reshape(1, -1))

    @property
    def coefficients(self) -> np.ndarray:
        return self._coeffs

    @property
    def degree_x(self) -> int:
        return self._coeffs.shape[0] - 1

    @property
    def degree_y(self) -> int:
        return self._coeffs.shape[1] - 1

    @property
    def total_degree(self) -> int:
        rows, cols = np.nonzero(self._coeffs)
        if rows.size == 0:
            return 0
        return int(np.max(rows + cols))

    @property
    def is_zero(self) -> bool:
        return not np.any(self._coeffs)

    @property
    def scale(self) -> float:
        return float(np.max(np.abs(self._coeffs)))

    def __call__(self, x, y):
        return npoly.polyval2d(x, y, self._coeffs)

    def evaluate(self, x, y):
        return self(x, y)

    def differentiate(self, variable: str) -> 'BiPolynomial':
        if variable == 'x':
            if self.degree_x == 0:
                return BiPolynomial.constant(0.0)
            return BiPolynomial(npoly.polyder(self._coeffs, axis=0))
        if variable == 'y':
            if self.degree_y == 0:
                return BiPolynomial.constant(0.0)
            return BiPolynomial(npoly.polyder(self._coeffs, axis=1))
        raise PreconditionError(f"unknown variable {variable!r}, expected 'x' or 'y'")

    def compose_y(self, inner: UniPolynomial) -> 'BiPolynomial':
        """Return p(x, inner(y))"""
        rows = [UniPolynomial(row).compose(inner).coefficients for row in self._coeffs]
        width = max(len(r) for r in rows)
        return BiPolynomial(np.array([np.pad(r, (0, width - len(r))) for r in rows]))

    def pullback_phi(self) -> 'BiPolynomial':
        """Return p(x, y**2 - 2)"""
        return self.compose_y(PHI)

    def restrict_to_axis(self) -> UniPolynomial:
        """Return y -> p(0, y)"""
        return UniPolynomial(self._coeffs[0])

    def __add__(self, other):
        other = _as_bi(other)
        shape = (max(self._coeffs.shape[0], other.coefficients.shape[0]),
                 max(self._coeffs.shape[1], other.coefficients.shape[1]))
        return BiPolynomial(_pad_to(self._coeffs, shape) + _pad_to(other.coefficients, shape))

    __radd__ = __add__

    def __neg__(self):
        return BiPolynomial(-self._coeffs)

    def __sub__(self, other):
        return self + (-_as_bi(other))

    def __rsub__(self, other):
        return _as_bi(other) - self

    def __mul__(self, other):
        if isinstance(other, BiPolynomial):
            return BiPolynomial(convolve2d(self._coeffs, other.coefficients))
        if isinstance(other, UniPolynomial):
            return self * BiPolynomial.from_y(other)
        return BiPolynomial(self._coeffs * float(other))

    __rmul__ = __mul__

    def allclose(self, other: 'BiPolynomial', tol: float = 1e-12) -> bool:
        diff = (self - other).coefficients
        return bool(np.max(np.abs(diff)) <= tol * max(1.0, self.scale, other.scale))

    def to_json(self) -> dict:
        return {"coeffs": [[float(c) for c in row] for row in self._coeffs]}

    @classmethod
    def from_json(cls, data: dict) -> 'BiPolynomial':
        return cls(data["coeffs"])

    def __repr__(self):
        return f"BiPolynomial({self._coeffs.tolist()})"


def _pad_to(array: np.ndarray, shape) -> np.ndarray:
    return np.pad(array, ((0, shape[0] - array.shape[0]), (0, shape[1] - array.shape[1])))


def _as_bi(value) -> BiPolynomial:
    if isinstance(value, BiPolynomial):
        return value
    if isinstance(value, UniPolynomial):
        return BiPolynomial.from_y(value)
    return BiPolynomial.constant(float(value))


PHI = UniPolynomial([-2.0, 0.0, 1.0])


def phi(y):
    """The singular map y -> y**2 - 2"""
    return y * y - 2.0


def phi_iterate(y, i: int):
    """phi applied i times"""
    for _ in range(i):
        y = y * y - 2.0
    return y


def evaluate(p: BiPolynomial, x: float, y: float) -> float:
    return float(p(x, y))


def differentiate(p: BiPolynomial, variable: str) -> BiPolynomial:
    return p.differentiate(variable)


def pullback_phi(p: BiPolynomial) -> BiPolynomial:
    return p.pullback_phi()


def real_roots(p: UniPolynomial, lo: float, hi: float, tol: float = 1e-12,
               grid: int = 4096, simple_tol: float = 1e-8) -> List[Tuple[float, bool]]:
    """
    Isolate the real roots of p in [lo, hi].

    Sign changes on a uniform grid are polished with Brent's method. Roots of even
    multiplicity show up as local minima of |p| without a sign change; those are
    refined on the sign change of p' and kept when |p| is below tol there.

    Args:
        p: polynomial, not identically zero
        lo, hi: interval ends, lo < hi
        tol: absolute root tolerance
        grid: number of grid intervals
        simple_tol: a root is simple iff |p'(root)| > simple_tol * scale(p)

    Returns:
        Sorted list of (root, is_simple)
    """
    if p.is_zero:
        raise PreconditionError("real_roots called on the zero polynomial")
    if hi - lo < tol:
        raise DegenerateIntervalError(f"interval [{lo}, {hi}] shorter than tol {tol}",
                                      lo=lo, hi=hi, tol=tol)

    scale = p.scale
    dp = p.derivative()
    ys = np.linspace(lo, hi, grid + 1)
    values = p(ys)
    found: List[float] = []

    for i in range(grid):
        v0, v1 = values[i], values[i + 1]
        if v0 == 0.0:
            found.append(float(ys[i]))
        elif v0 * v1 < 0.0:
            found.append(brentq(p, ys[i], ys[i + 1], xtol=tol, maxiter=200))
    if values[-1] == 0.0:
        found.append(float(hi))

    magnitudes = np.abs(values)
    for i in range(1, grid):
        if values[i] == 0.0 or values[i - 1] * values[i + 1] <= 0.0:
            continue
        if magnitudes[i] > magnitudes[i - 1] or magnitudes[i] > magnitudes[i + 1]:
            continue
        d0, d1 = dp(ys[i - 1]), dp(ys[i + 1])
        if d0 * d1 >= 0.0:
            continue
        critical = brentq(dp, ys[i - 1], ys[i + 1], xtol=tol, maxiter=200)
        if abs(p(critical)) <= tol * max(1.0, scale):
            found.append(critical)

    found.sort()
    merged: List[float] = []
    for root in found:
        if merged and root - merged[-1] <= 10.0 * tol:
            continue
        merged.append(root)

    result = [(r, bool(abs(dp(r)) > simple_tol * scale)) for r in merged]
    logger.debug(f"real_roots on [{lo}, {hi}]: {len(result)} roots")
    return result
