"""
Cycle counting for the recursive family.

Level 0 is seeded at the zeros of M_0. Level k is seeded twice from every
certified level-(k-1) cycle (the two square-root copies) and once from every
simple zero of the level-k Melnikov numerator inside the origin window. Each
seed is refined on the displacement and accepted only with a small residual
and a hyperbolicity margin bounded away from zero.

An independent sweep counts sign changes of the displacement on the ordinate
windows of the unperturbed orbits and is used to cross-check the seeded count.
"""
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from core.errors import (
    BranchError, ConvergenceError, ExtrapolationError, NumericalError, PreconditionError,
    UnresolvedSignChangeError,
)
from pwcycles.field import MINUS, PLUS, PiecewiseField
from pwcycles.hamiltonian_family import (
    HamiltonianLevel, PerturbationCoeffs, build_level, default_tables, expected_cycles,
    field_degree, ordinate_windows, origin_radius, partner_ordinate, refined_expected_cycles,
)
from pwcycles.melnikov import MelnikovSpec, melnikov_value, melnikov_zeros
from pwcycles.return_maps import (
    LiftContext, ReturnChain, alternating_shift_sum, displacement, first_return, half_map_slopes,
    half_return_offset, lifted_displacement, shift_derivative,
)
from pwcycles.tolerances import DEFAULT_TOLERANCES, Tolerances

logger = logging.getLogger(__name__)

MELNIKOV_SEED = 'melnikovSeed'
DOUBLED_FROM_PARENT = 'doubledFromParent'
PSEUDO_HOPF = 'pseudoHopf'
SWEEP = 'sweep'
PERSISTED = 'persisted'

LEVEL0_MAX_EPSILON = 1e-2
STRIP_HALF_WIDTH = 2.0
DEFAULT_HYPOTHESIS_SCHEDULE = (1e-2, 1e-3, 1e-4)
RICHARDSON_BAND = 3.0
LIMIT_SEPARATION = 1e-6
A_DOUBLE_PRIME_RATIO = 1e-3
SWEEP_DENSITY = 2000
WINDOW_SHRINK = 0.02
WINDOW_SCAN = 400
ADAPTIVE_START = 1e-2
ADAPTIVE_FLOOR = 1e-6
NEWTON_STALL = 3
SHIFT_BOUND = 1.0 - 1e-4
SHIFT_SAMPLES = (0.0, 1e-3, -1e-3)
PSEUDO_HOPF_MAX_LEVEL = 1
PSEUDO_HOPF_OFFSET = 0.1
# local window (floor * radius, radius), radius a fraction of the origin window
PSEUDO_HOPF_RADIUS = 0.25
PSEUDO_HOPF_FLOOR = 0.02

SUMMARY_COLUMNS = ('k', 'n_k', 'c_k_expected', 'found', 'max_residual', 'min_margin', 'wall_clock')


# --------------------------------------------------------------------------
# Records and reports
# --------------------------------------------------------------------------

@dataclass
class CycleRecord:
    level: Optional[int]
    epsilon: float
    epsilon_vector: Tuple[float, ...]
    upper_ordinate: float
    lower_ordinate: float
    limit_ordinate: Optional[float]
    limit_lower: Optional[float]
    residual: float
    hyperbolicity_margin: float
    slope_scale: float
    surrounds_origin: bool
    provenance: str
    parent_index: Optional[int] = None

    def passes(self, tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
        return (self.residual <= tol.residual
                and self.hyperbolicity_margin > tol.margin * self.slope_scale
                and self.upper_ordinate > self.lower_ordinate
                and self.upper_ordinate != 0.0
                and abs(self.upper_ordinate) < STRIP_HALF_WIDTH
                and abs(self.lower_ordinate) < STRIP_HALF_WIDTH)

    def to_json(self) -> dict:
        return {
            "k": self.level,
            "epsilon": self.epsilon,
            "epsilonVector": list(self.epsilon_vector),
            "upperOrdinate": self.upper_ordinate,
            "lowerOrdinate": self.lower_ordinate,
            "limitOrdinate": self.limit_ordinate,
            "limitLower": self.limit_lower,
            "residual": self.residual,
            "hyperbolicityMargin": self.hyperbolicity_margin,
            "slopeScale": self.slope_scale,
            "surroundsOrigin": self.surrounds_origin,
            "provenance": self.provenance,
            "parentIndex": self.parent_index,
        }


@dataclass
class CountReport:
    level: Optional[int]
    expected: int
    records: List[CycleRecord]
    epsilon: float
    epsilon_vector: Tuple[float, ...]
    wall_clock: float
    degree: int
    tables: Tuple[PerturbationCoeffs, ...] = ()
    failures: List[Dict] = field(default_factory=list)
    diagnostics: Dict = field(default_factory=dict)
    tol: Tolerances = DEFAULT_TOLERANCES
    pseudo_hopf: Optional['PseudoHopfStep'] = None

    @property
    def found(self) -> int:
        return sum(1 for r in self.records if r.passes(self.tol))

    @property
    def passed(self) -> bool:
        return (self.found == self.expected and not self.failures
                and (self.pseudo_hopf is None or self.pseudo_hopf.passed))

    @property
    def max_residual(self) -> float:
        return max((r.residual for r in self.records), default=0.0)

    @property
    def min_margin(self) -> float:
        return min((r.hyperbolicity_margin for r in self.records), default=0.0)

    def summary_row(self) -> Dict:
        return {
            "k": self.level,
            "n_k": self.degree,
            "c_k_expected": self.expected,
            "found": self.found,
            "max_residual": self.max_residual,
            "min_margin": self.min_margin,
            "wall_clock": round(self.wall_clock, 3),
        }

    def to_json(self) -> dict:
        return {
            "k": self.level,
            "expected": self.expected,
            "found": self.found,
            "passed": self.passed,
            "degree": self.degree,
            "epsilonUsed": self.epsilon,
            "epsilonVectorUsed": list(self.epsilon_vector),
            "records": [r.to_json() for r in self.records],
            "failures": self.failures,
            "diagnostics": self.diagnostics,
            "pseudoHopfStep": self.pseudo_hopf.to_json() if self.pseudo_hopf else None,
        }


# --------------------------------------------------------------------------
# Refinement of a single seed
# --------------------------------------------------------------------------

def _newton(f: Callable[[float], float], y0: float, tol: Tolerances,
            window: Optional[Tuple[float, float]] = None) -> float:
    """Newton with a central-difference slope; stops when |f| stalls at its noise floor"""
    y = y0
    best_y, best_value = y0, math.inf
    stalled = 0
    for _ in range(tol.newton_max_iterations):
        value = f(y)
        if value == 0.0:
            return y
        if abs(value) < best_value:
            best_y, best_value, stalled = y, abs(value), 0
        else:
            stalled += 1
            if stalled >= NEWTON_STALL:
                return best_y
        h = tol.fd_step * max(1.0, abs(y))
        slope = (f(y + h) - f(y - h)) / (2.0 * h)
        if slope == 0.0:
            raise ConvergenceError(f"flat displacement at y = {y}", y=y)
        step = value / slope
        y -= step
        if abs(y - y0) > tol.seed_radius:
            raise ConvergenceError(f"refinement from {y0} wandered to {y}", seed=y0, iterate=y)
        if window is not None and not window[0] < y < window[1]:
            raise ConvergenceError(f"refinement from {y0} left its window {window} at {y}",
                                   seed=y0, iterate=y)
        if abs(step) <= 1e-14 * max(1.0, abs(y)):
            return y
    raise ConvergenceError(f"refinement from {y0} did not converge", seed=y0)


def _nearest_sign_change(f: Callable[[float], float], y0: float, window: Tuple[float, float],
                         tol: Tolerances) -> Optional[float]:
    ys = np.linspace(window[0], window[1], WINDOW_SCAN + 1)
    values = []
    for y in ys:
        try:
            values.append(f(float(y)))
        except NumericalError:
            values.append(math.nan)
    brackets = [(ys[i], ys[i + 1]) for i in range(WINDOW_SCAN)
                if values[i] * values[i + 1] < 0.0]
    for lo, hi in sorted(brackets, key=lambda ab: abs(0.5 * (ab[0] + ab[1]) - y0)):
        try:
            return float(brentq(f, lo, hi, xtol=tol.root, maxiter=200))
        except (ValueError, RuntimeError, NumericalError):
            continue
    return None


def _bracket_root(f: Callable[[float], float], y0: float, radius: float, tol: Tolerances,
                  window: Optional[Tuple[float, float]] = None) -> float:
    lo_limit, hi_limit = window if window is not None else (-math.inf, math.inf)
    for r in (radius / 64, radius / 16, radius / 4, radius):
        lo, hi = max(y0 - r, lo_limit), min(y0 + r, hi_limit)
        try:
            f_lo, f_hi = f(lo), f(hi)
        except NumericalError:
            continue
        if f_lo * f_hi < 0.0:
            return brentq(f, lo, hi, xtol=tol.root, maxiter=200)
    if window is not None:
        root = _nearest_sign_change(f, y0, window, tol)
        if root is not None:
            return root
    raise ConvergenceError(f"no sign change of the displacement around {y0}", seed=y0)


def _slope(f: Callable[[float], float], y: float, tol: Tolerances) -> float:
    h = tol.fd_step * max(1.0, abs(y))
    return (f(y + h) - f(y - h)) / (2.0 * h)


def _slope_scale(f: Callable[[float], float], y: float, slope: float, tol: Tolerances) -> float:
    r = tol.margin_radius
    for _ in range(3):
        try:
            return max(abs(f(y - r)), abs(f(y + r))) / r
        except NumericalError:
            r /= 10.0
    return abs(slope)


def refine_cycle(f: Callable[[float], float], seed: float,
                 tol: Tolerances = DEFAULT_TOLERANCES,
                 window: Optional[Tuple[float, float]] = None) -> Tuple[float, float, float, float]:
    """
    Zero of the displacement f near `seed`.

    Newton with a central-difference slope; Brent's method on a bracket around
    the seed when Newton fails. With a `window` every iterate must stay inside
    it, and the last resort is the sign change in the window nearest the seed.

    Returns:
        (zero, residual |f|, margin |f'|, slope scale)
    """
    try:
        y = _newton(f, seed, tol, window)
    except NumericalError as e:
        logger.debug(f"newton failed from {seed} ({e.message}); bracketing")
        y = _bracket_root(f, seed, tol.seed_radius / 4, tol, window)
    residual = abs(f(y))
    slope = _slope(f, y, tol)
    return y, residual, abs(slope), _slope_scale(f, y, slope, tol)


def _lower_from_returns(level: HamiltonianLevel, y: float, partner: float, tol: Tolerances) -> float:
    w_plus = half_return_offset(level, PLUS, y, partner, tol)
    w_minus = half_return_offset(level, MINUS, y, partner, tol)
    return partner + 0.5 * (w_plus + w_minus)


def _make_record(level: HamiltonianLevel, f: Callable[[float], float], seed: float,
                 limit: Optional[float], limit_lower: Optional[float], provenance: str,
                 tol: Tolerances, parent_index: Optional[int] = None,
                 window: Optional[Tuple[float, float]] = None) -> CycleRecord:
    y, residual, margin, scale = refine_cycle(f, seed, tol, window)
    lower = _lower_from_returns(level, y, partner_ordinate(level.level, y), tol)
    return CycleRecord(
        level=level.level,
        epsilon=level.epsilon,
        epsilon_vector=level.epsilon_vector,
        upper_ordinate=float(y),
        lower_ordinate=float(lower),
        limit_ordinate=limit,
        limit_lower=limit_lower,
        residual=float(residual),
        hyperbolicity_margin=float(margin),
        slope_scale=float(scale),
        surrounds_origin=abs(y) < origin_radius(level.level),
        provenance=provenance,
        parent_index=parent_index,
    )


# --------------------------------------------------------------------------
# Seeded certification
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class _Seed:
    ordinate: float
    limit: Optional[float]
    limit_lower: Optional[float]
    provenance: str
    parent_index: Optional[int] = None


def _origin_seeds(tables: Sequence[PerturbationCoeffs], level: HamiltonianLevel,
                  tol: Tolerances) -> List[_Seed]:
    top = level.epsilon_vector[-1] if level.level > 0 else None
    spec = MelnikovSpec.from_tables(tables, level.level, top)
    seeds = []
    for root, simple in melnikov_zeros(spec, tol):
        if not simple:
            logger.warning(f"level {level.level}: Melnikov zero {root} is not simple, skipped")
            continue
        seeds.append(_Seed(root, root, -root, MELNIKOV_SEED))
    return seeds


def doubled_seeds(parent: 'CountReport', k: int) -> List[_Seed]:
    """
    Two descendants per parent cycle (y, z), y > z:
    upper copy (sqrt(y+2), sqrt(z+2)) and lower copy (-sqrt(z+2), -sqrt(y+2)).
    """
    seeds = []
    for index, record in enumerate(parent.records):
        y_p, z_p = record.upper_ordinate, record.lower_ordinate
        if z_p + 2.0 <= 0.0:
            logger.warning(f"parent cycle {index} touches the strip edge, not doubled")
            continue
        limit_y = record.limit_ordinate
        limit_z = record.limit_lower
        seeds.append(_Seed(
            math.sqrt(y_p + 2.0),
            None if limit_y is None else math.sqrt(limit_y + 2.0),
            None if limit_z is None else math.sqrt(limit_z + 2.0),
            DOUBLED_FROM_PARENT, index,
        ))
        seeds.append(_Seed(
            -math.sqrt(z_p + 2.0),
            None if limit_z is None else -math.sqrt(limit_z + 2.0),
            None if limit_y is None else -math.sqrt(limit_y + 2.0),
            DOUBLED_FROM_PARENT, index,
        ))
    return seeds


def seed_window(k: int, y: float, shrink: float = WINDOW_SHRINK) -> Optional[Tuple[float, float]]:
    """The shrunk level-k upper-ordinate window holding y, if any"""
    for lo, hi in sweep_windows(k, shrink):
        if lo < y < hi:
            return lo, hi
    return None


def _confined(f: Callable[[float], float], window: Optional[Tuple[float, float]]) -> Callable[[float], float]:
    if window is None:
        return f

    def inside(y: float) -> float:
        if not window[0] <= y <= window[1]:
            raise BranchError(f"y = {y} is outside the seed window {window}", y=y)
        return f(y)

    return inside


def _refine_seeds(level: HamiltonianLevel, seeds: Sequence[_Seed], tol: Tolerances,
                  jobs: int, context: Optional[LiftContext]) -> Tuple[List[CycleRecord], List[Dict]]:
    def origin_f(y: float) -> float:
        return displacement(level, y, partner=-y, tol=tol)

    def lifted_f(y: float) -> float:
        return lifted_displacement(level, y, context=context, tol=tol)

    def run(seed: _Seed):
        window = seed_window(level.level, seed.ordinate)
        if window is None:
            logger.debug(f"level {level.level}: seed {seed.ordinate} lies in no ordinate window")
        f = _confined(lifted_f if seed.provenance == DOUBLED_FROM_PARENT else origin_f, window)
        try:
            return _make_record(level, f, seed.ordinate, seed.limit, seed.limit_lower,
                                seed.provenance, tol, seed.parent_index, window)
        except (NumericalError, PreconditionError) as e:
            logger.warning(f"level {level.level}: seed {seed.ordinate} failed: {e.message}")
            return {"seed": seed.ordinate, "provenance": seed.provenance, "error": e.to_dict()}

    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        results = list(pool.map(run, seeds))
    records = sorted((r for r in results if isinstance(r, CycleRecord)),
                     key=lambda r: r.upper_ordinate)
    failures = sorted((r for r in results if isinstance(r, dict)), key=lambda r: r["seed"])
    return records, failures


def _duplicate_failures(records: Sequence[CycleRecord]) -> List[Dict]:
    failures = []
    for a, b in zip(records, records[1:]):
        if abs(a.upper_ordinate - b.upper_ordinate) <= LIMIT_SEPARATION:
            failures.append({"seed": b.upper_ordinate, "provenance": b.provenance,
                             "error": {"type": "DuplicateCycle",
                                       "message": f"records at {a.upper_ordinate} and "
                                                  f"{b.upper_ordinate} coincide"}})
    return failures


def _finish(level: HamiltonianLevel, records, failures, started: float, tol: Tolerances) -> CountReport:
    failures = failures + _duplicate_failures(records)
    for r in records:
        if not r.passes(tol):
            failures.append({"seed": r.upper_ordinate, "provenance": r.provenance,
                             "error": {"type": "RecordCheck",
                                       "message": f"residual {r.residual:.3e}, margin "
                                                  f"{r.hyperbolicity_margin:.3e}"}})
    report = CountReport(
        level=level.level,
        expected=expected_cycles(level.level),
        records=list(records),
        epsilon=level.epsilon,
        epsilon_vector=level.epsilon_vector,
        wall_clock=time.perf_counter() - started,
        degree=level.field().degree,
        tables=level.tables,
        failures=failures,
        tol=tol,
    )
    logger.info(f"level {level.level}: found {report.found} of {report.expected} cycles "
                f"in {report.wall_clock:.2f}s")
    return report


def certify_level0(epsilon: float, tables: Optional[Sequence[PerturbationCoeffs]] = None,
                   tol: Tolerances = DEFAULT_TOLERANCES, jobs: int = 1) -> CountReport:
    """The single hyperbolic cycle of the level-0 field, seeded at the zeros of M_0"""
    if not 0.0 < epsilon <= LEVEL0_MAX_EPSILON:
        raise PreconditionError(f"level 0 needs epsilon in (0, {LEVEL0_MAX_EPSILON}], got {epsilon}",
                                epsilon=epsilon)
    started = time.perf_counter()
    tables = tuple(tables) if tables is not None else tuple(default_tables(0))
    level = build_level(0, epsilon, (), tables, tol)
    seeds = _origin_seeds(tables, level, tol)
    if not seeds:
        raise ConvergenceError("M_0 has no simple zero in (0, 1); nothing to continue")
    records, failures = _refine_seeds(level, seeds, tol, jobs, None)
    return _finish(level, records, failures, started, tol)


def certify_level_k(k: int, epsilon: float, epsilon_vector: Sequence[float],
                    parent_report: CountReport,
                    tables: Optional[Sequence[PerturbationCoeffs]] = None,
                    tol: Tolerances = DEFAULT_TOLERANCES, jobs: int = 1) -> CountReport:
    """
    Level-k cycles from a certified level-(k-1) report: 2 c_{k-1} doubled plus
    d_{k-1} - 1 origin-surrounding ones.
    """
    if k < 1:
        raise PreconditionError(f"certify_level_k needs k >= 1, got {k}")
    if parent_report.level != k - 1:
        raise PreconditionError(f"parent report is level {parent_report.level}, need {k - 1}")
    if not parent_report.passed:
        raise PreconditionError(f"parent level {k - 1} did not pass "
                                f"({parent_report.found}/{parent_report.expected})")
    epsilon_vector = tuple(float(e) for e in epsilon_vector)
    if epsilon != parent_report.epsilon or epsilon_vector[:-1] != tuple(parent_report.epsilon_vector):
        raise PreconditionError("epsilon and the leading epsilon vector must match the parent report")

    started = time.perf_counter()
    if tables is None:
        tables = tuple(parent_report.tables) + tuple(default_tables(k)[len(parent_report.tables):])
    tables = tuple(tables)
    level = build_level(k, epsilon, epsilon_vector, tables, tol)
    context = LiftContext.for_level(level)
    seeds = doubled_seeds(parent_report, k) + _origin_seeds(tables, level, tol)
    records, failures = _refine_seeds(level, seeds, tol, jobs, context)
    return _finish(level, records, failures, started, tol)


def certify_chain(k: int, epsilon: float, epsilon_vector: Sequence[float],
                  tables: Optional[Sequence[PerturbationCoeffs]] = None,
                  tol: Tolerances = DEFAULT_TOLERANCES, jobs: int = 1,
                  pseudo_hopf: bool = False) -> List[CountReport]:
    """
    Reports for levels 0..k; stops at the first level that fails.

    With `pseudo_hopf`, levels up to PSEUDO_HOPF_MAX_LEVEL also carry the
    pseudo-Hopf step at the origin, and a level passes only when it does.
    """
    if len(epsilon_vector) < k:
        raise PreconditionError(f"level {k} needs {k} epsilon-vector entries")
    tables = tuple(tables) if tables is not None else tuple(default_tables(k))
    if len(tables) < k + 1:
        raise PreconditionError(f"coefficient tables cover levels 0..{len(tables) - 1}, need 0..{k}")

    def checked(report: CountReport) -> CountReport:
        if pseudo_hopf and report.level <= PSEUDO_HOPF_MAX_LEVEL and report.passed:
            try:
                report.pseudo_hopf = pseudo_hopf_step(report, tol=tol)
            except NumericalError as e:
                logger.warning(f"level {report.level}: pseudo-Hopf step failed: {e.message}")
                report.failures.append({"seed": 0.0, "provenance": PSEUDO_HOPF, "error": e.to_dict()})
        return report

    reports = [checked(certify_level0(epsilon, tables[:1], tol, jobs))]
    for level in range(1, k + 1):
        if not reports[-1].passed:
            break
        reports.append(checked(certify_level_k(level, epsilon, tuple(epsilon_vector[:level]),
                                               reports[-1], tables[:level + 1], tol, jobs)))
    return reports


def validate_epsilon(k: int, epsilon_vector: Sequence[float],
                     tables: Optional[Sequence[PerturbationCoeffs]] = None,
                     start: float = ADAPTIVE_START, tol: Tolerances = DEFAULT_TOLERANCES,
                     jobs: int = 1, pseudo_hopf: bool = False
                     ) -> Tuple[float, Tuple[float, ...], List[CountReport]]:
    """
    Halve epsilon and every eps_i together, from (`start`, epsilon_vector), until
    the level-k count is the same for two consecutive steps; returns the smaller
    epsilon, its vector and its reports.
    """
    previous = None
    epsilon = start
    vector = tuple(float(e) for e in epsilon_vector)
    while epsilon >= ADAPTIVE_FLOOR:
        reports = certify_chain(k, epsilon, vector, tables, tol, jobs, pseudo_hopf)
        found = reports[-1].found if reports[-1].level == k else -1
        logger.info(f"adaptive epsilon {epsilon:.3e}, E={vector}: level {k} found {found}")
        if previous is not None and found == previous and found >= 0:
            return epsilon, vector, reports
        previous = found
        epsilon /= 2.0
        vector = tuple(e / 2.0 for e in vector)
    raise ConvergenceError(f"count at level {k} did not stabilise above epsilon {ADAPTIVE_FLOOR}", k=k)


# --------------------------------------------------------------------------
# Hypothesis checks on the limit ordinates
# --------------------------------------------------------------------------

def check_limit_ordinates(limits: Sequence[float], tol: float = LIMIT_SEPARATION) -> List[bool]:
    """Per limit ordinate: nonzero and distinct from every other one"""
    result = []
    for i, y in enumerate(limits):
        distinct = all(abs(y - other) > tol for j, other in enumerate(limits) if j != i)
        result.append(abs(y) > tol and distinct)
    return result


def richardson_limit(epsilons: Sequence[float], values: Sequence[float],
                     noise: float = 1e-10) -> float:
    """
    Value at eps = 0 from three samples on a geometric schedule.

    Successive differences must shrink by roughly the schedule ratio; when they
    are both below the noise floor the last sample is taken as the limit.
    """
    if len(epsilons) != 3 or len(values) != 3:
        raise PreconditionError("Richardson extrapolation needs three samples")
    q = epsilons[0] / epsilons[1]
    floor = noise * max(1.0, max(abs(v) for v in values))
    d1, d2 = values[0] - values[1], values[1] - values[2]
    if abs(d2) <= floor:
        if abs(d1) <= RICHARDSON_BAND * q * q * floor:
            return float(values[2])
        raise ExtrapolationError(f"differences {d1:.3e}, {d2:.3e} do not decay geometrically",
                                 d1=d1, d2=d2)
    ratio = d1 / d2
    # leading term of order eps or eps^2
    if not any(order / RICHARDSON_BAND <= ratio <= order * RICHARDSON_BAND for order in (q, q * q)):
        raise ExtrapolationError(f"Richardson ratio {ratio:.3g} matches neither {q:.3g} nor {q * q:.3g}",
                                 ratio=ratio)
    coeffs = np.polyfit(np.asarray(epsilons, dtype=float), np.asarray(values, dtype=float), 2)
    return float(coeffs[-1])


@dataclass
class HypothesisCheck:
    index: int
    limit_ordinate: float
    reduced_value: float
    reduced_slope: float
    a_prime: bool
    a_double_prime: bool

    @property
    def passed(self) -> bool:
        return self.a_prime and self.a_double_prime

    def to_json(self) -> dict:
        return {
            "index": self.index,
            "limitOrdinate": self.limit_ordinate,
            "reducedValue": self.reduced_value,
            "reducedSlope": self.reduced_slope,
            "aPrime": self.a_prime,
            "aDoublePrime": self.a_double_prime,
        }


def check_hypothesis_ak(report: CountReport,
                        schedule: Sequence[float] = DEFAULT_HYPOTHESIS_SCHEDULE,
                        tol: Tolerances = DEFAULT_TOLERANCES, jobs: int = 1) -> List[HypothesisCheck]:
    """
    Re-certify the report's level along the epsilon schedule and check, per cycle,
    that the extrapolated limit ordinate is nonzero and distinct from the others,
    and that Delta = delta/eps vanishes there with nonzero slope in y.
    """
    schedule = tuple(float(e) for e in schedule)
    if len(schedule) != 3:
        raise PreconditionError("the hypothesis check needs a three-point epsilon schedule")
    k = report.level
    chains = [certify_chain(k, eps, report.epsilon_vector, report.tables, tol, jobs) for eps in schedule]
    tops = [chain[-1] for chain in chains]
    for top, eps in zip(tops, schedule):
        if top.level != k or not top.passed:
            raise PreconditionError(f"level {k} does not certify at epsilon {eps}")
    counts = {len(top.records) for top in tops}
    if len(counts) != 1:
        raise ExtrapolationError(f"record counts differ across the schedule: {sorted(counts)}")

    levels = [build_level(k, eps, report.epsilon_vector, report.tables, tol) for eps in schedule]
    contexts = [LiftContext.for_level(lv) if k > 0 else None for lv in levels]
    checks = []
    limits = []
    for index in range(len(tops[0].records)):
        ys = [top.records[index].upper_ordinate for top in tops]
        limits.append(richardson_limit(schedule, ys))
    distinct = check_limit_ordinates(limits)

    for index, limit in enumerate(limits):
        record = tops[0].records[index]
        doubled = record.provenance == DOUBLED_FROM_PARENT

        def reduced(y: float, i: int) -> float:
            if doubled:
                return lifted_displacement(levels[i], y, context=contexts[i], tol=tol) / schedule[i]
            return displacement(levels[i], y, partner=-y, tol=tol) / schedule[i]

        values = [reduced(limit, i) for i in range(3)]
        value = _extrapolate_loose(schedule, values)
        h = tol.margin_radius * 1e-2
        slopes = [(reduced(limit + h, i) - reduced(limit - h, i)) / (2.0 * h) for i in range(3)]
        slope = _extrapolate_loose(schedule, slopes)
        r = tol.margin_radius
        scale = max(abs(reduced(limit - r, 2)), abs(reduced(limit + r, 2))) / r
        a_double_prime = (abs(value) <= A_DOUBLE_PRIME_RATIO * abs(slope)
                          and abs(slope) > tol.margin * scale)
        checks.append(HypothesisCheck(index, limit, value, slope, distinct[index], a_double_prime))
        logger.debug(f"level {k} cycle {index}: limit {limit:.12g}, Delta {value:.3e}, "
                     f"slope {slope:.3e}")
    return checks


def _extrapolate_loose(epsilons: Sequence[float], values: Sequence[float]) -> float:
    coeffs = np.polyfit(np.asarray(epsilons, dtype=float), np.asarray(values, dtype=float), 2)
    return float(coeffs[-1])


# --------------------------------------------------------------------------
# Sign-change sweeps
# --------------------------------------------------------------------------

@dataclass
class SweepResult:
    roots: List[float]
    windows: List[Tuple[float, float]]
    evaluated: int
    undefined: int

    @property
    def count(self) -> int:
        return len(self.roots)

    def to_json(self) -> dict:
        return {"count": self.count, "roots": self.roots, "windows": [list(w) for w in self.windows],
                "evaluated": self.evaluated, "undefined": self.undefined}


def _sweep_window(f: Callable[[float], float], lo: float, hi: float, density: int,
                  tol: Tolerances) -> Tuple[List[float], int]:
    n = max(2, int(math.ceil(density * (hi - lo))))
    ys = np.linspace(lo, hi, n + 1)
    values = np.empty(n + 1)
    undefined = 0
    for i, y in enumerate(ys):
        try:
            values[i] = f(float(y))
        except NumericalError:
            values[i] = np.nan
            undefined += 1
    roots = []
    for i in range(n):
        a, b = values[i], values[i + 1]
        if np.isnan(a) or np.isnan(b):
            continue
        if a * b < 0.0:
            try:
                roots.append(float(brentq(f, ys[i], ys[i + 1], xtol=tol.root, maxiter=200)))
            except (ValueError, RuntimeError, NumericalError) as e:
                raise UnresolvedSignChangeError(
                    f"sign change in [{ys[i]}, {ys[i + 1]}] could not be refined: {e}",
                    lo=float(ys[i]), hi=float(ys[i + 1]),
                ) from e
        elif a == 0.0 and 0 < i and not np.isnan(values[i - 1]) and values[i - 1] * b < 0.0:
            roots.append(float(ys[i]))
    return roots, undefined


def sweep_count(f: Callable[[float], float], windows: Sequence[Tuple[float, float]],
                density: int = SWEEP_DENSITY, tol: Tolerances = DEFAULT_TOLERANCES,
                jobs: int = 1) -> SweepResult:
    """
    Count zeros of f by sign changes on a uniform grid of `density` points per unit.

    An identically zero f has no isolated zeros and counts 0.
    """
    windows = [(float(lo), float(hi)) for lo, hi in windows]
    for lo, hi in windows:
        if not lo < hi:
            raise PreconditionError(f"empty sweep window [{lo}, {hi}]")

    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        results = list(pool.map(lambda w: _sweep_window(f, w[0], w[1], density, tol), windows))
    roots = sorted(r for window_roots, _ in results for r in window_roots)
    undefined = sum(u for _, u in results)
    evaluated = sum(max(2, int(math.ceil(density * (hi - lo)))) + 1 for lo, hi in windows)
    logger.info(f"sweep over {len(windows)} windows: {len(roots)} sign changes, {undefined} undefined")
    return SweepResult(roots, windows, evaluated, undefined)


def sweep_windows(k: int, shrink: float = WINDOW_SHRINK) -> List[Tuple[float, float]]:
    """Upper-ordinate windows of level k, each shrunk by `shrink` of its width at both ends"""
    upper, _ = ordinate_windows(k)
    return [(lo + shrink * (hi - lo), hi - shrink * (hi - lo)) for lo, hi in upper]


def sweep_level(level: HamiltonianLevel, density: int = SWEEP_DENSITY,
                tol: Tolerances = DEFAULT_TOLERANCES, jobs: int = 1) -> CountReport:
    """Seed-free count of the level's cycles, as a CountReport with provenance 'sweep'"""
    started = time.perf_counter()

    def f(y: float) -> float:
        return displacement(level, y, tol=tol)

    result = sweep_count(f, sweep_windows(level.level), density, tol, jobs)
    records = []
    for root in result.roots:
        partner = partner_ordinate(level.level, root)
        slope = _slope(f, root, tol)
        records.append(CycleRecord(
            level=level.level,
            epsilon=level.epsilon,
            epsilon_vector=level.epsilon_vector,
            upper_ordinate=root,
            lower_ordinate=_lower_from_returns(level, root, partner, tol),
            limit_ordinate=None,
            limit_lower=None,
            residual=abs(f(root)),
            hyperbolicity_margin=abs(slope),
            slope_scale=_slope_scale(f, root, slope, tol),
            surrounds_origin=abs(root) < origin_radius(level.level),
            provenance=SWEEP,
        ))
    report = _finish(level, records, [], started, tol)
    report.diagnostics["sweep"] = result.to_json()
    return report


def sweep_field(vector_field: PiecewiseField, window: Tuple[float, float], density: int = SWEEP_DENSITY,
                b: float = 0.0, tol: Tolerances = DEFAULT_TOLERANCES, jobs: int = 1) -> SweepResult:
    """Sign changes of pi(y) - y for a field given only by its vector field"""

    def f(y: float) -> float:
        return first_return(vector_field, y, b, tol) - y

    return sweep_count(f, [window], density, tol, jobs)


# --------------------------------------------------------------------------
# Shift monotonicity at certified cycles
# --------------------------------------------------------------------------


@dataclass
class ShiftBoundCheck:
    rows: List[Dict]

    @property
    def passed(self) -> bool:
        return bool(self.rows) and all(row["passed"] for row in self.rows)

    @property
    def minimum(self) -> Optional[float]:
        values = [row["shiftDerivative"] for row in self.rows if row["shiftDerivative"] is not None]
        return min(values) if values else None

    def to_json(self) -> dict:
        return {"passed": self.passed, "minimum": self.minimum, "bound": SHIFT_BOUND, "rows": self.rows}


def minus_first_crossing(vector_field: PiecewiseField, upper: float, lower: float) -> float:
    """The crossing of a two-crossing orbit from which the flow first enters x < 0"""
    for y in (upper, lower):
        if ReturnChain.for_crossing(vector_field, y).sides[0] == MINUS:
            return y
    raise PreconditionError(f"neither {upper} nor {lower} starts a chain into x < 0",
                            upper=upper, lower=lower)


def shift_bound_check(vector_field: PiecewiseField, cycles: Sequence[Tuple[float, float]],
                      shifts: Sequence[float] = SHIFT_SAMPLES,
                      tol: Tolerances = DEFAULT_TOLERANCES) -> ShiftBoundCheck:
    """
    d/db of the shifted first return at each cycle, from its minus-first crossing.

    Both the finite difference in b and the closed form from the half-map slopes
    are reported; a row passes when the finite difference is at least SHIFT_BOUND.
    """
    rows = []
    for upper, lower in cycles:
        start = minus_first_crossing(vector_field, upper, lower)
        chain = ReturnChain.for_crossing(vector_field, start)
        for b in shifts:
            row = {"upper": upper, "lower": lower, "start": start, "b": b,
                   "shiftDerivative": None, "closedForm": None, "passed": False}
            try:
                row["shiftDerivative"] = shift_derivative(chain, vector_field, start, b, tol)
                slopes = half_map_slopes(chain, vector_field, start, b, tol)
                row["closedForm"] = alternating_shift_sum(chain.sides, slopes)
                row["passed"] = row["shiftDerivative"] >= SHIFT_BOUND
            except NumericalError as e:
                row["error"] = e.message
                logger.warning(f"shift derivative at y = {start}, b = {b}: {e.message}")
            rows.append(row)
    return ShiftBoundCheck(rows)


def shift_bound_for_report(report: CountReport, shifts: Sequence[float] = SHIFT_SAMPLES,
                           tol: Tolerances = DEFAULT_TOLERANCES) -> ShiftBoundCheck:
    level = build_level(report.level, report.epsilon, report.epsilon_vector, report.tables, tol)
    cycles = [(r.upper_ordinate, r.lower_ordinate) for r in report.records]
    return shift_bound_check(level.field(), cycles, shifts, tol)


# --------------------------------------------------------------------------
# Pseudo-Hopf bookkeeping for the family
# --------------------------------------------------------------------------

def _axis_fold(field: PiecewiseField, side: str, radius: float, tol: Tolerances) -> float:
    def p(y):
        return float(field.p_on_axis(side, y))

    lo, hi = -0.25 * radius, 0.25 * radius
    if p(lo) * p(hi) > 0.0:
        raise ConvergenceError(f"no fold of Z{side} in [{lo}, {hi}]", side=side)
    return float(brentq(p, lo, hi, xtol=tol.root, maxiter=200))


def fold_alignment_diagnostic(level: HamiltonianLevel, tol: Tolerances = DEFAULT_TOLERANCES) -> Dict:
    """
    Shift that would make the two folds near the origin coincide.

    The upper fold sits at y+ and the lower at y-; shifting the upper piece by
    b = -(y+ - y-) aligns them. To first order 2 b = -eps M(0): the family
    already carries the shift in the constant term of its Melnikov function.
    """
    vector_field = level.field()
    radius = origin_radius(level.level)
    fold_plus = _axis_fold(vector_field, PLUS, radius, tol)
    fold_minus = _axis_fold(vector_field, MINUS, radius, tol)
    b_align = -(fold_plus - fold_minus)
    spec = MelnikovSpec.for_level(level)
    scaled_m0 = level.epsilon * melnikov_value(0.0, spec, tol)
    mismatch = abs(2.0 * b_align + scaled_m0)
    return {
        "k": level.level,
        "foldPlus": fold_plus,
        "foldMinus": fold_minus,
        "bAlign": b_align,
        "epsilonMelnikovAtZero": scaled_m0,
        "consistent": mismatch <= 1e-2 * abs(scaled_m0) if scaled_m0 != 0.0 else mismatch <= tol.root,
    }


def pseudo_hopf_bookkeeping(reports: Sequence[CountReport],
                            tol: Tolerances = DEFAULT_TOLERANCES) -> List[Dict]:
    """
    Refined counts, fold-alignment diagnostics and, when the chain ran it, the
    pseudo-Hopf step per certified level.

    countWithShift replaces the report's origin cycles by those found with the
    admissible shift; it stays at found, below refinedExpected.
    """
    rows = []
    for report in reports:
        level = build_level(report.level, report.epsilon, report.epsilon_vector, report.tables, tol)
        row = {
            "k": report.level,
            "found": report.found,
            "refinedExpected": refined_expected_cycles(report.level),
            "degree": field_degree(report.level),
        }
        try:
            row["foldAlignment"] = fold_alignment_diagnostic(level, tol)
        except NumericalError as e:
            row["foldAlignment"] = {"error": e.to_dict()}
        if report.pseudo_hopf is not None:
            step = report.pseudo_hopf
            origin = sum(1 for r in report.records if r.surrounds_origin and r.passes(report.tol))
            row["step"] = step.to_json()
            row["countWithShift"] = report.found - origin + step.shifted_origin_count
        rows.append(row)
        report.diagnostics["pseudoHopf"] = row
    return rows


# --------------------------------------------------------------------------
# Pseudo-Hopf step at the origin
# --------------------------------------------------------------------------

def shifted_origin_displacement(level: HamiltonianLevel, y: float, b: float,
                                tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """
    R+_b(y) - R-(y) on an origin-surrounding orbit, with the upper piece shifted by b.

    Shifting gives R+_b(y) = b + R+(y - b); origin partners are exact negatives,
    so the difference is 2 b + w+(y - b) - w-(y).

    Raises:
        BranchError: y - b or y outside the origin window
    """
    v = y - b
    radius = origin_radius(level.level)
    if not (0.0 < v < radius and 0.0 < y < radius):
        raise BranchError(f"y = {y} with shift {b} leaves the origin window (0, {radius})",
                          y=y, b=b)
    w_plus = half_return_offset(level, PLUS, v, -v, tol)
    w_minus = half_return_offset(level, MINUS, y, -y, tol)
    return 2.0 * b + w_plus - w_minus


@dataclass
class PseudoHopfStep:
    """
    Shift b_align + s * offset * |b_align| on both sides s of fold alignment:
    a cycle enclosing the sliding segment on the admissible side, none near
    the origin on the other.
    """

    level: int
    b_align: float
    admissible_b: float
    opposite_b: float
    window: Tuple[float, float]
    segment: Tuple[float, float]
    cycle: Optional[CycleRecord]
    admissible_roots: List[float]
    opposite_roots: List[float]
    opposite_undefined: int
    shifted_origin_count: int
    tol: Tolerances = DEFAULT_TOLERANCES

    @property
    def admissible_sign(self) -> int:
        return 1 if self.admissible_b > self.b_align else -1

    @property
    def encloses(self) -> bool:
        return (self.cycle is not None and self.cycle.lower_ordinate < self.segment[0]
                and self.cycle.upper_ordinate > self.segment[1])

    @property
    def passed(self) -> bool:
        return (self.cycle is not None and self.cycle.passes(self.tol) and self.encloses
                and len(self.admissible_roots) == 1
                and not self.opposite_roots and self.opposite_undefined == 0)

    def to_json(self) -> dict:
        return {
            "k": self.level,
            "bAlign": self.b_align,
            "admissibleB": self.admissible_b,
            "oppositeB": self.opposite_b,
            "admissibleSign": self.admissible_sign,
            "window": list(self.window),
            "slidingSegment": list(self.segment),
            "cycle": self.cycle.to_json() if self.cycle else None,
            "encloses": self.encloses,
            "admissibleRoots": self.admissible_roots,
            "oppositeRoots": self.opposite_roots,
            "shiftedOriginCount": self.shifted_origin_count,
            "passed": self.passed,
        }


def pseudo_hopf_step(report: CountReport, offset: float = PSEUDO_HOPF_OFFSET,
                     density: int = SWEEP_DENSITY,
                     tol: Tolerances = DEFAULT_TOLERANCES) -> PseudoHopfStep:
    """
    Pseudo-Hopf step of a certified level at its origin two-fold.

    The admissible side is the one where delta_b at b_align leans against the
    shift: delta_b grows with b, so a positive lean needs a smaller b. A single
    shift only moves the innermost origin cycle onto the segment, so the count
    over the whole origin window is unchanged.
    """
    if not 0.0 < offset < 1.0:
        raise PreconditionError(f"pseudo-Hopf offset must lie in (0, 1), got {offset}")
    level = build_level(report.level, report.epsilon, report.epsilon_vector, report.tables, tol)
    alignment = fold_alignment_diagnostic(level, tol)
    b_align = alignment["bAlign"]
    if b_align == 0.0:
        raise PreconditionError(f"level {report.level}: the folds at the origin already coincide")
    shift = offset * abs(b_align)
    radius = origin_radius(level.level)
    hi = PSEUDO_HOPF_RADIUS * radius
    lo = max(PSEUDO_HOPF_FLOOR * hi, 4.0 * (abs(b_align) + shift))
    window = (lo, hi)

    def at(b: float) -> Callable[[float], float]:
        return lambda y: shifted_origin_displacement(level, y, b, tol)

    lean = at(b_align)(0.5 * (lo + hi))
    sign = -1 if lean > 0.0 else 1
    admissible_b, opposite_b = b_align + sign * shift, b_align - sign * shift
    admissible = sweep_count(at(admissible_b), [window], density, tol)
    opposite = sweep_count(at(opposite_b), [window], density, tol)

    fold_plus, fold_minus = alignment["foldPlus"] + admissible_b, alignment["foldMinus"]
    segment = (min(fold_plus, fold_minus), max(fold_plus, fold_minus))
    cycle = None
    if len(admissible.roots) == 1:
        f = at(admissible_b)
        y, residual, margin, scale = refine_cycle(f, admissible.roots[0], tol)
        lower = -y + half_return_offset(level, MINUS, y, -y, tol)
        cycle = CycleRecord(
            level=level.level,
            epsilon=level.epsilon,
            epsilon_vector=level.epsilon_vector,
            upper_ordinate=float(y),
            lower_ordinate=float(lower),
            limit_ordinate=None,
            limit_lower=None,
            residual=float(residual),
            hyperbolicity_margin=float(margin),
            slope_scale=float(scale),
            surrounds_origin=True,
            provenance=PSEUDO_HOPF,
        )

    full = (WINDOW_SHRINK * radius, (1.0 - WINDOW_SHRINK) * radius)
    shifted = sweep_count(at(admissible_b), [(max(full[0], lo), full[1])], density, tol)
    step = PseudoHopfStep(level.level, b_align, admissible_b, opposite_b, window, segment, cycle,
                          admissible.roots, opposite.roots, opposite.undefined, shifted.count, tol)
    logger.info(f"level {level.level}: pseudo-Hopf at b = {admissible_b:.3e} "
                f"{'passed' if step.passed else 'failed'}, origin cycles with the shift {shifted.count}")
    return step
