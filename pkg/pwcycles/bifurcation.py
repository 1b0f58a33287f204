"""
Pseudo-Hopf bifurcations at monodromic boundary points and the degree lift.

Shifting the upper piece by b opens a sliding segment at a monodromic two-fold
(or a focus sitting on the switching line). When a * b * l < 0, with a the
rotation sign and l the stability sign of the point, a crossing cycle is born
around the segment. The degree lift multiplies a field by y and tilts the
second components so that a crossing point at the origin becomes such a
two-fold, which adds one cycle to every field whose cycles live in {y < 0}.
"""
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from core.errors import ConditionError, ConvergenceError, MonodromyError, NumericalError, PreconditionError
from pwcycles.certify import (
    PERSISTED, PSEUDO_HOPF, CountReport, CycleRecord, refine_cycle, sweep_count, sweep_windows,
)
from pwcycles.field import (
    MINUS, PLUS, FoldCertificate, PiecewiseField, apply_shift, classify_boundary_point,
    expand_shift, rotation_sign, sliding_segments, translate,
)
from pwcycles.hamiltonian_family import build_h0, canonical_level0
from pwcycles.poly import BiPolynomial
from pwcycles.return_maps import ReturnChain, chain_points, displacement, half_return_offset
from pwcycles.tolerances import DEFAULT_TOLERANCES, Tolerances

logger = logging.getLogger(__name__)

ADMISSIBLE = 'admissible'
OPPOSITE = 'opposite'
ZERO = 'zero'

DEFAULT_B_MAGNITUDES = (1e-1, 5e-2, 1e-2)
SEARCH_SAMPLES = 120
MIN_DEFINED_SAMPLES = 20
SEGMENT_WINDOW = 3.0

TWO_FOLD_ALPHA = -0.2
FOCUS_EPSILON = 0.05
LIFT_BASE_EPSILON = 0.05
LIFT_TRANSLATION = 1.0
LIFT_EPSILON = 1e-2
LIFT_B_MAGNITUDE = 1e-5
PERSIST_RADIUS = 0.05


def _sign(value: float) -> int:
    return 1 if value > 0 else -1


# --------------------------------------------------------------------------
# Setups
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PseudoHopfSetup:
    base_field: PiecewiseField
    fold_ordinate: float
    ell_sign: int
    rotation_sign: int
    certificate: Optional[FoldCertificate] = None

    def __post_init__(self):
        if self.ell_sign not in (-1, 1) or self.rotation_sign not in (-1, 1):
            raise MonodromyError(f"stability {self.ell_sign} and rotation {self.rotation_sign} "
                                 f"must both be +-1", fold=self.fold_ordinate)

    @property
    def admissible_b_sign(self) -> int:
        """sign of b with a * b * l < 0"""
        return -self.rotation_sign * self.ell_sign

    def to_json(self) -> dict:
        return {
            "foldOrdinate": self.fold_ordinate,
            "ellSign": self.ell_sign,
            "rotationSign": self.rotation_sign,
            "admissibleBSign": self.admissible_b_sign,
            "certificate": self.certificate.to_json() if self.certificate else None,
        }


def estimate_fold_stability(field: PiecewiseField, fold: float, offsets: Sequence[float],
                            tol: Tolerances = DEFAULT_TOLERANCES) -> int:
    """
    l = +1 (repelling) when the first return from below the fold lands further
    below, -1 when it lands closer. Every offset must agree.
    """
    signs = set()
    for offset in offsets:
        y0 = fold - abs(offset)
        chain = ReturnChain.for_crossing(field, y0)
        delta = chain_points(chain, field, y0, 0.0, tol)[-1] - y0
        if abs(delta) <= tol.ode_atol * 1e3:
            raise MonodromyError(f"return map at {y0} is the identity to integration accuracy",
                                 y=y0, delta=delta)
        signs.add(-1 if delta > 0 else 1)
    if len(signs) != 1:
        raise MonodromyError(f"offsets below {fold} disagree on the stability", fold=fold)
    return signs.pop()


def two_fold_setup(field: PiecewiseField, fold: float, offsets: Sequence[float],
                   tol: Tolerances = DEFAULT_TOLERANCES) -> PseudoHopfSetup:
    """Certify an invisible-invisible monodromic two-fold and measure its stability"""
    certificate = classify_boundary_point(field, fold, tol.root)
    if not certificate.is_monodromic_two_fold:
        raise MonodromyError(f"y = {fold} is {certificate.classification}, "
                             f"monodromic={certificate.monodromy_flag}", fold=fold)
    ell = estimate_fold_stability(field, fold, offsets, tol)
    certificate = replace(certificate, ell_sign=ell)
    return PseudoHopfSetup(field, fold, ell, certificate.rotation_sign, certificate)


def focus_setup(field: PiecewiseField, focus: float,
                tol: Tolerances = DEFAULT_TOLERANCES) -> PseudoHopfSetup:
    """A focus on the switching line: stability from the divergence there"""
    divergence = field.divergence(PLUS, 0.0, focus)
    if abs(divergence) <= tol.root:
        raise MonodromyError(f"focus at {focus} has zero divergence", focus=focus)
    if _sign(field.divergence(MINUS, 0.0, focus)) != _sign(divergence):
        raise MonodromyError(f"the two pieces disagree on the stability at {focus}", focus=focus)
    return PseudoHopfSetup(field, focus, _sign(divergence), rotation_sign(field, focus, tol.root))


# --------------------------------------------------------------------------
# Searches
# --------------------------------------------------------------------------

@dataclass
class PseudoHopfResult:
    b: float
    sign: str
    found: bool
    cycle: Optional[CycleRecord]
    sliding_segment: Optional[Tuple[float, float]]
    encloses: bool
    defined_samples: int
    absence_certified: bool

    def to_json(self) -> dict:
        return {
            "b": self.b,
            "sign": self.sign,
            "found": self.found,
            "cycle": self.cycle.to_json() if self.cycle else None,
            "slidingSegment": list(self.sliding_segment) if self.sliding_segment else None,
            "encloses": self.encloses,
            "definedSamples": self.defined_samples,
            "absenceCertified": self.absence_certified,
        }


def _segment_near(field: PiecewiseField, fold: float, b: float,
                  tol: Tolerances) -> Optional[Tuple[float, float]]:
    if b == 0.0:
        return None
    reach = SEGMENT_WINDOW * abs(b)
    segments = sliding_segments(apply_shift(field, b), fold - reach, fold + reach,
                                tol.sliding_resolution, tol.root)
    if not segments:
        return None
    return min(segments, key=lambda s: 0.0 if s[0] <= fold <= s[1] else min(abs(s[0] - fold),
                                                                             abs(s[1] - fold)))


def _numeric_record(field: PiecewiseField, y0: float, b: float, epsilon: float, scale: float,
                    provenance: str, tol: Tolerances) -> CycleRecord:
    chain = ReturnChain.for_crossing(field, y0, b)

    def delta(y):
        return chain_points(chain, field, y, b, tol)[-1] - y

    points = chain_points(chain, field, y0, b, tol)
    h = max(1e-3 * scale, 1e-9)
    slope = (delta(y0 + h) - delta(y0 - h)) / (2.0 * h)
    r = 0.1 * scale
    try:
        slope_scale = max(abs(delta(y0 - r)), abs(delta(y0 + r))) / r
    except NumericalError:
        slope_scale = abs(slope)
    return CycleRecord(
        level=None,
        epsilon=epsilon,
        epsilon_vector=(),
        upper_ordinate=max(points[:-1]),
        lower_ordinate=min(points[:-1]),
        limit_ordinate=None,
        limit_lower=None,
        residual=abs(points[-1] - y0),
        hyperbolicity_margin=abs(slope),
        slope_scale=slope_scale,
        surrounds_origin=False,
        provenance=provenance,
    )


def search_cycle_below(field: PiecewiseField, fold: float, b: float, span: float,
                       samples: int = SEARCH_SAMPLES, epsilon: float = 0.0,
                       tol: Tolerances = DEFAULT_TOLERANCES) -> PseudoHopfResult:
    """
    Look for a crossing cycle through the switching line below the sliding
    segment opened by b, scanning pi(y) - y on a geometric grid of offsets.

    Samples whose orbit runs into the sliding segment are undefined and skipped;
    absence is certified when no sign change shows up among enough defined ones.
    """
    segment = _segment_near(field, fold, b, tol)
    start = segment[0] if segment else fold
    offsets = np.geomspace(1e-3 * span, span, samples)
    ys = np.sort(start - offsets)

    def delta(y):
        chain = ReturnChain.for_crossing(field, y, b)
        return chain_points(chain, field, y, b, tol)[-1] - y

    values = []
    for y in ys:
        try:
            values.append((float(y), delta(float(y))))
        except NumericalError:
            continue

    roots = []
    for (y_a, d_a), (y_b, d_b) in zip(values, values[1:]):
        if d_a * d_b < 0.0:
            try:
                roots.append(brentq(delta, y_a, y_b, xtol=tol.root, maxiter=200))
            except (ValueError, RuntimeError, NumericalError) as e:
                logger.warning(f"sign change in [{y_a}, {y_b}] not refined: {e}")

    label = ZERO if b == 0.0 else ''
    if not roots:
        return PseudoHopfResult(b, label, False, None, segment, False, len(values),
                                len(values) >= MIN_DEFINED_SAMPLES)
    # the innermost cycle is the one born at the fold
    y_star = max(roots)
    record = _numeric_record(field, y_star, b, epsilon, start - y_star, PSEUDO_HOPF, tol)
    encloses = segment is None or (record.lower_ordinate < segment[0]
                                   and record.upper_ordinate > segment[1])
    return PseudoHopfResult(b, label, True, record, segment, encloses, len(values), False)


@dataclass
class PseudoHopfSearchReport:
    setup: PseudoHopfSetup
    results: List[PseudoHopfResult]

    def at(self, magnitude: float, sign: str) -> Optional[PseudoHopfResult]:
        for r in self.results:
            if abs(abs(r.b) - magnitude) <= 1e-15 and r.sign == sign:
                return r
        return None

    def dichotomy(self, magnitude: float) -> bool:
        """Cycle enclosing the segment for the admissible sign, certified absence for the other"""
        good, bad = self.at(magnitude, ADMISSIBLE), self.at(magnitude, OPPOSITE)
        return bool(good and bad and good.found and good.encloses
                    and not bad.found and bad.absence_certified)

    @property
    def magnitudes(self) -> List[float]:
        return sorted({abs(r.b) for r in self.results if r.sign != ZERO}, reverse=True)

    @property
    def monotone(self) -> bool:
        """Existence at some |b| implies existence at every smaller tested |b|"""
        seen = False
        for magnitude in self.magnitudes:
            result = self.at(magnitude, ADMISSIBLE)
            if seen and not result.found:
                return False
            seen = seen or result.found
        return True

    @property
    def passed(self) -> bool:
        return self.monotone and any(self.dichotomy(m) for m in self.magnitudes)

    def to_json(self) -> dict:
        return {
            "setup": self.setup.to_json(),
            "results": [r.to_json() for r in self.results],
            "dichotomy": {str(m): self.dichotomy(m) for m in self.magnitudes},
            "monotone": self.monotone,
            "passed": self.passed,
        }


def pseudo_hopf_search(setup: PseudoHopfSetup, b_magnitudes: Sequence[float] = DEFAULT_B_MAGNITUDES,
                       span: float = 2.0, samples: int = SEARCH_SAMPLES, include_zero: bool = True,
                       tol: Tolerances = DEFAULT_TOLERANCES, jobs: int = 1) -> PseudoHopfSearchReport:
    """For each |b|: search with the admissible sign of b and with the opposite one"""
    if any(m <= 0.0 for m in b_magnitudes):
        raise PreconditionError("b magnitudes must be positive")
    tasks = []
    for magnitude in b_magnitudes:
        tasks.append((setup.admissible_b_sign * magnitude, ADMISSIBLE))
        tasks.append((-setup.admissible_b_sign * magnitude, OPPOSITE))
    if include_zero:
        tasks.append((0.0, ZERO))

    def run(task):
        b, label = task
        result = search_cycle_below(setup.base_field, setup.fold_ordinate, b, span, samples, tol=tol)
        result.sign = label
        return result

    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        results = list(pool.map(run, tasks))
    results.sort(key=lambda r: (-abs(r.b), r.sign))
    for r in results:
        logger.info(f"pseudo-Hopf b={r.b:+.3e} ({r.sign}): found={r.found}")
    return PseudoHopfSearchReport(setup, results)


def persisting_cycle(field: PiecewiseField, lower: float, b: float, radius: float,
                     tol: Tolerances = DEFAULT_TOLERANCES, points: int = 21) -> Optional[float]:
    """Zero of pi_b(y) - y closest to a known lower ordinate, if any within `radius`"""

    def delta(y):
        chain = ReturnChain.for_crossing(field, y, b)
        return chain_points(chain, field, y, b, tol)[-1] - y

    samples = []
    for y in np.linspace(lower - radius, lower + radius, points):
        try:
            samples.append((float(y), delta(float(y))))
        except NumericalError:
            continue
    roots = []
    for (y_a, d_a), (y_b, d_b) in zip(samples, samples[1:]):
        if d_a == 0.0:
            roots.append(y_a)
        elif d_a * d_b < 0.0:
            try:
                roots.append(brentq(delta, y_a, y_b, xtol=tol.root, maxiter=200))
            except (ValueError, RuntimeError, NumericalError):
                continue
    if not roots:
        return None
    return min(roots, key=lambda r: abs(r - lower))


@dataclass
class SimultaneousResult:
    b: float
    new_cycles: int
    persisting: int
    existing: int
    per_focus: List[PseudoHopfResult]

    def to_json(self) -> dict:
        return {
            "b": self.b,
            "newCycles": self.new_cycles,
            "persisting": self.persisting,
            "existing": self.existing,
            "perFocus": [r.to_json() for r in self.per_focus],
        }


def simultaneous_pseudo_hopf(field: PiecewiseField, foci: Sequence[float], b: float,
                             existing_lower_ordinates: Sequence[float] = (), span: float = 0.5,
                             samples: int = SEARCH_SAMPLES, tol: Tolerances = DEFAULT_TOLERANCES,
                             jobs: int = 1) -> SimultaneousResult:
    """
    Shift by b and search one new cycle per focus; existing cycles, given by
    their lower crossings, are re-found near where they were.
    """
    setups = [focus_setup(field, f, tol) for f in foci]
    if len({s.ell_sign for s in setups}) > 1 or len({s.rotation_sign for s in setups}) > 1:
        raise PreconditionError("all foci must share stability and rotation direction")

    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        per_focus = list(pool.map(
            lambda s: search_cycle_below(field, s.fold_ordinate, b, span, samples, tol=tol), setups))
        persisted = list(pool.map(
            lambda c: persisting_cycle(field, c, b, 0.1 * max(abs(c), 1e-3), tol),
            existing_lower_ordinates))
    for s, r in zip(setups, per_focus):
        if b == 0.0:
            r.sign = ZERO
        else:
            r.sign = ADMISSIBLE if _sign(b) == s.admissible_b_sign else OPPOSITE
    new_cycles = sum(1 for r in per_focus if r.found and r.encloses)
    return SimultaneousResult(b, new_cycles, sum(1 for p in persisted if p is not None),
                              len(existing_lower_ordinates), per_focus)


# --------------------------------------------------------------------------
# Degree lift
# --------------------------------------------------------------------------

def lyapunov_v2_leading(pp: float, qp: float, pm: float, qm: float, epsilon: float) -> float:
    """
    Leading 1/eps term of the second Lyapunov coefficient of the lifted two-fold:
    (2 d / (3 eps)) (Pp Qp + Pm Qm) / (Pp Qp Pm Qm), d = sign(Pp).
    """
    if epsilon <= 0.0:
        raise PreconditionError(f"V2 needs epsilon > 0, got {epsilon}")
    if pp == 0.0:
        raise ConditionError('A', 'P+(0,0) != 0', pp)
    if qp * qm == 0.0:
        raise ConditionError('B', 'Q+(0,0) Q-(0,0) != 0', qp * qm)
    mixed = pp * qp + pm * qm
    if mixed == 0.0:
        raise ConditionError('B', 'P+(0,0) Q+(0,0) + P-(0,0) Q-(0,0) != 0', mixed)
    delta = _sign(pp)
    return (2.0 * delta / (3.0 * epsilon)) * mixed / (pp * qp * pm * qm)


def origin_values(field: PiecewiseField) -> Tuple[float, float, float, float]:
    return (float(field.p_on_axis(PLUS, 0.0)), float(field.q_on_axis(PLUS, 0.0)),
            float(field.p_on_axis(MINUS, 0.0)), float(field.q_on_axis(MINUS, 0.0)))


def check_conditions(field: PiecewiseField, base_cycles: Sequence[Tuple[float, float]] = ()):
    """
    (A) every known crossing cycle lies in {y < 0} and the origin is a crossing point;
    (B) Q+(0,0) Q-(0,0) != 0 and P+ Q+ + P- Q- != 0 at the origin.
    """
    pp, qp, pm, qm = origin_values(field)
    for upper, lower in base_cycles:
        if max(upper, lower) >= 0.0:
            raise ConditionError('A', 'crossing cycles inside {y < 0}', max(upper, lower))
    if pp * pm <= 0.0:
        raise ConditionError('A', 'P+(0,0) P-(0,0) > 0', pp * pm)
    if qp * qm == 0.0:
        raise ConditionError('B', 'Q+(0,0) Q-(0,0) != 0', qp * qm)
    if pp * qp + pm * qm == 0.0:
        raise ConditionError('B', 'P+(0,0) Q+(0,0) + P-(0,0) Q-(0,0) != 0', pp * qp + pm * qm)


@dataclass(frozen=True)
class LiftResult:
    base_field: PiecewiseField
    epsilon: float
    lifted_field: PiecewiseField
    v2_leading: Optional[float]
    delta_sign: int
    certificate: Optional[FoldCertificate]

    @property
    def v2_leading_sign(self) -> int:
        if not self.v2_leading:
            return 0
        return _sign(self.v2_leading)

    @property
    def degree_in(self) -> int:
        return self.base_field.degree

    @property
    def degree_out(self) -> int:
        return self.lifted_field.degree

    def family(self, epsilon: float) -> PiecewiseField:
        return lifted_field(self.base_field, epsilon)

    def to_json(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "degreeIn": self.degree_in,
            "degreeOut": self.degree_out,
            "v2Leading": self.v2_leading,
            "v2LeadingSign": self.v2_leading_sign,
            "deltaSign": self.delta_sign,
            "certificate": self.certificate.to_json() if self.certificate else None,
            "liftedField": self.lifted_field.to_json(),
        }


def lifted_field(field: PiecewiseField, epsilon: float) -> PiecewiseField:
    """Z_eps = (y P, Q_eps) with Q+-_eps = (y -+ eps P+-(0,0) Q+-(0,0)) Q+-"""
    field = expand_shift(field)
    pp, qp, pm, qm = origin_values(field)
    y = BiPolynomial.y()
    return PiecewiseField(
        y * field.plus_p,
        (y - epsilon * pp * qp) * field.plus_q,
        y * field.minus_p,
        (y + epsilon * pm * qm) * field.minus_q,
    )


def lift_degree(field: PiecewiseField, epsilon: float,
                base_cycles: Sequence[Tuple[float, float]] = (),
                tol: Tolerances = DEFAULT_TOLERANCES) -> LiftResult:
    """
    Lift a degree-n field to degree n+1 with a monodromic two-fold at the origin.

    With epsilon = 0 the lift is y Z, a reparametrization on {y < 0}, and the
    origin carries no certificate.
    """
    if epsilon < 0.0:
        raise PreconditionError(f"lift epsilon must be >= 0, got {epsilon}")
    field = expand_shift(field)
    check_conditions(field, base_cycles)
    pp, qp, pm, qm = origin_values(field)
    lifted = lifted_field(field, epsilon)
    if epsilon == 0.0:
        return LiftResult(field, 0.0, lifted, None, _sign(pp), None)
    v2 = lyapunov_v2_leading(pp, qp, pm, qm, epsilon)
    certificate = classify_boundary_point(lifted, 0.0, tol.root, ell_sign=_sign(v2))
    if not certificate.is_monodromic_two_fold:
        raise MonodromyError(f"lifted origin is {certificate.classification}, "
                             f"monodromic={certificate.monodromy_flag}")
    logger.info(f"lifted degree {field.degree} -> {lifted.degree}, V2 ~ {v2:.4g}")
    return LiftResult(field, float(epsilon), lifted, v2, _sign(pp), certificate)


def monotonicity_demo(field: PiecewiseField, base_cycles: Sequence[Tuple[float, float]],
                      epsilon: float = LIFT_EPSILON, b_magnitude: float = LIFT_B_MAGNITUDE,
                      b_sign: Optional[int] = None,
                      span: Optional[float] = None, samples: int = SEARCH_SAMPLES,
                      tol: Tolerances = DEFAULT_TOLERANCES) -> CountReport:
    """
    Lift, shift by b with sign(b) = sign(delta V2) unless `b_sign` overrides it,
    re-find the base cycles and search the pseudo-Hopf cycle at the origin.

    The report expects m + 1 cycles when the shift is admissible and m otherwise.
    The search window below the origin defaults to eps, the size of the region
    where the tilt dominates. The new cycle crosses near sqrt(2 |b| / V2), so |b|
    must stay well below eps^2 V2 for it to fit inside.
    """
    started = time.perf_counter()
    if span is None:
        span = epsilon if epsilon > 0.0 else 1e-2
    lift = lift_degree(field, epsilon, base_cycles, tol)
    natural = _sign(lift.delta_sign * lift.v2_leading) if lift.v2_leading else 1
    sign = natural if b_sign is None else _sign(b_sign)
    b = sign * abs(b_magnitude)
    lifted = lift.lifted_field

    records = []
    failures = []
    for upper, lower in base_cycles:
        match_radius = max(10.0 * (epsilon + abs(b)) * max(1.0, abs(lower)), PERSIST_RADIUS)
        root = persisting_cycle(lifted, lower, b, match_radius, tol)
        if root is None:
            failures.append({"seed": lower, "provenance": PERSISTED,
                             "error": {"type": "ConvergenceError",
                                       "message": f"base cycle at {lower} not re-found"}})
            continue
        records.append(_numeric_record(lifted, root, b, epsilon, 0.1 * max(1.0, abs(root)),
                                       PERSISTED, tol))

    search = None
    admissible = lift.certificate is not None and sign == natural
    if lift.certificate is not None:
        search = search_cycle_below(lifted, 0.0, b, span, samples, epsilon, tol)
        search.sign = ADMISSIBLE if sign == natural else OPPOSITE
        if search.found and search.encloses:
            records.append(search.cycle)
    else:
        logger.info("epsilon = 0: the origin is not a two-fold, no pseudo-Hopf search")

    records.sort(key=lambda r: r.lower_ordinate)
    expected = len(base_cycles) + (1 if admissible else 0)
    report = CountReport(
        level=None,
        expected=expected,
        records=records,
        epsilon=epsilon,
        epsilon_vector=(),
        wall_clock=time.perf_counter() - started,
        degree=lifted.degree,
        failures=failures,
        tol=tol,
    )
    report.diagnostics["lift"] = {k: v for k, v in lift.to_json().items() if k != "liftedField"}
    report.diagnostics["b"] = b
    report.diagnostics["search"] = search.to_json() if search else None
    return report


# --------------------------------------------------------------------------
# Demo fields
# --------------------------------------------------------------------------

def two_fold_demo_field(alpha: float = TWO_FOLD_ALPHA) -> PiecewiseField:
    """Z+ = (-y + alpha x, 1), Z- = (-y, -1): an invisible two-fold at the origin"""
    x, y = BiPolynomial.x(), BiPolynomial.y()
    return PiecewiseField(-y + alpha * x, BiPolynomial.constant(1.0), -y, BiPolynomial.constant(-1.0))


def focus_demo_field(epsilon: float = FOCUS_EPSILON, cycle_radius: Optional[float] = None) -> PiecewiseField:
    """
    Z+ = Z- = (-y + eps x, x), a focus on the switching line.

    With `cycle_radius` the first component becomes -y + eps x (r^2 - x^2 - y^2),
    which keeps the focus repelling and adds an attracting cycle near radius r.
    """
    x, y = BiPolynomial.x(), BiPolynomial.y()
    if cycle_radius is None:
        p = -y + epsilon * x
    else:
        p = -y + epsilon * x * (cycle_radius ** 2 - x * x - y * y)
    return PiecewiseField(p, x, p, x)


def level0_cycles(epsilon: float, tol: Tolerances = DEFAULT_TOLERANCES) -> List[Tuple[float, float]]:
    """
    (upper, lower) of every crossing cycle of the canonical level-0 field, found by
    scanning the displacement over the origin window and refining each sign change
    """
    level = build_h0(canonical_level0(), epsilon)

    def delta(y: float) -> float:
        return displacement(level, y, partner=-y, tol=tol)

    cycles = []
    for root in sweep_count(delta, sweep_windows(0), tol=tol).roots:
        y, residual, _, _ = refine_cycle(delta, root, tol)
        if residual > tol.residual:
            raise ConvergenceError(f"level-0 cycle near {root} has residual {residual:.3e}",
                                   y=root, residual=residual)
        cycles.append((y, -y + half_return_offset(level, MINUS, y, -y, tol)))
    return cycles


def lift_demo_field(epsilon: float = LIFT_BASE_EPSILON, translation: float = LIFT_TRANSLATION,
                    tol: Tolerances = DEFAULT_TOLERANCES
                    ) -> Tuple[PiecewiseField, List[Tuple[float, float]]]:
    """The level-0 field moved down by `translation`, with its cycles (upper, lower) moved along"""
    cycles = level0_cycles(epsilon, tol)
    if not cycles:
        raise ConvergenceError(f"the level-0 field has no crossing cycle at epsilon {epsilon}")
    base = build_h0(canonical_level0(), epsilon).field()
    return translate(base, translation), [(u - translation, z - translation) for u, z in cycles]
