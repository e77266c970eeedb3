"""Packing-density bounds for hyperbolic space and the parameters behind them.

The lower bound improves the covering bound mu(B_R)/mu(B_2R) by the factor
(1 - eps) m ln(sqrt(m) cosh 2R). Its proof runs a Poisson process whose
intensity is set by a threshold distance tau (root of ``gamma_fn``) and a
target degree Delta. All quantities here are log-scale reals.
"""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass
from typing import Iterable

from ._numerics import lcosh, lsinh
from .errors import DomainError, NoRootError
from .hypgeo import law_of_cosines_angle, sigma_intersection
from .volumes import log_ball_volume, log_volume_ratio

DEFAULT_EPSILON = 0.1
CLAIM_WINDOW = 20.0
TAU_REL_WIDTH = 1e-13
TAU_SWEEP_STEPS = 200


def trivial_lower_bound_log(m: int, R: float) -> float:
    """ln L_R = ln(mu(B_R) / mu(B_2R))."""
    return log_volume_ratio(m, R, 2.0 * R)


def gamma_fn(x: float, m: int, R: float) -> float:
    """Threshold function whose root on (0, R] is tau.

    For R < m this is m tanh^2(x/2) - 50 tanh^2(2R) (ln m + ln ln(sinh 2R / sinh x)).
    For R >= m the value cosh^2(x/2) - m ln cosh(2R) overflows, so the
    sign-equivalent 2 ln cosh(x/2) - ln(m ln cosh 2R) is returned instead.
    """
    if not 0 < x <= R:
        raise DomainError(f"x must lie in (0, R] = (0, {R}], got {x}")
    if R < m:
        inner = float(lsinh(2.0 * R) - lsinh(x))
        assert inner > 0.0, "ln(sinh 2R / sinh x) must be positive for x <= R"
        return (m * math.tanh(x / 2.0) ** 2
                - 50.0 * math.tanh(2.0 * R) ** 2 * (math.log(m) + math.log(inner)))
    return 2.0 * float(lcosh(x / 2.0)) - math.log(m * float(lcosh(2.0 * R)))


def bracket_tau(m: int, R: float):
    """Bracket [lo, hi] of width < 1e-13 R with gamma_fn(lo) < 0 <= gamma_fn(hi)."""
    if m < 2:
        raise DomainError("m must be >= 2")
    if not R > 0:
        raise DomainError("R must be positive")
    top = gamma_fn(R, m, R)
    if top <= 0.0:
        raise NoRootError(f"gamma(R) = {top:.6g} <= 0 for m={m}, R={R}: m is below m0", top)
    hi = R
    for k in range(1, TAU_SWEEP_STEPS + 1):
        lo = R * 2.0 ** -k
        if gamma_fn(lo, m, R) < 0.0:
            break
        hi = lo
    else:
        raise NoRootError(f"no sign change down to x = R 2^-{TAU_SWEEP_STEPS}", top)
    while hi - lo >= TAU_REL_WIDTH * R:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if gamma_fn(mid, m, R) < 0.0:
            lo = mid
        else:
            hi = mid
    return lo, hi


def solve_tau(m: int, R: float) -> float:
    """The root tau in (0, R] of :func:`gamma_fn` (bracket midpoint)."""
    lo, hi = bracket_tau(m, R)
    return 0.5 * (lo + hi)


def log_delta_param(m: int, R: float, tau: float) -> float:
    """ln Delta with Delta = mu(B_2R) / (m^4 mu(B_tau))."""
    return -4.0 * math.log(m) - log_volume_ratio(m, tau, 2.0 * R)


def log_lambda(m: int, R: float, tau: float) -> float:
    """ln lambda with lambda = Delta / mu(B_2R)."""
    return log_delta_param(m, R, tau) - log_ball_volume(m, 2.0 * R).log


def log_improvement_factor(m: int, R: float, epsilon: float = DEFAULT_EPSILON) -> float:
    """ln((1 - eps) m ln(sqrt(m) cosh 2R))."""
    if not 0 < epsilon < 1:
        raise DomainError(f"epsilon must lie in (0, 1), got {epsilon}")
    return math.log1p(-epsilon) + math.log(m) + math.log(0.5 * math.log(m) + float(lcosh(2.0 * R)))


def main_bound_log(m: int, R: float, epsilon: float = DEFAULT_EPSILON) -> float:
    """ln of (1 - eps) m ln(sqrt(m) cosh 2R) mu(B_R)/mu(B_2R).

    A formula value: it is a valid lower bound only for m >= m0(eps),
    which the proof does not make explicit.
    """
    return log_improvement_factor(m, R, epsilon) + trivial_lower_bound_log(m, R)


@dataclass(frozen=True)
class ClaimReport:
    log_q: float
    window: float = CLAIM_WINDOW

    @property
    def q(self) -> float:
        return math.exp(self.log_q)

    @property
    def within(self) -> bool:
        return abs(self.log_q) <= math.log(self.window)


def check_claim_basic(m: int, R: float, tau: float) -> ClaimReport:
    """Ratio q of sinh(2R)/sinh(tau) to cosh(2R) sqrt(m / ln m).

    The proof only gives q = Theta(1); ``within`` tests q in [1/20, 20].
    """
    if not R < m:
        raise DomainError("the sinh-ratio claim needs R < m")
    log_q = (float(lsinh(2.0 * R) - lsinh(tau)) - float(lcosh(2.0 * R))
             - 0.5 * (math.log(m) - math.log(math.log(m))))
    return ClaimReport(log_q)


def check_covolume_claim(m: int, R: float, tau: float) -> float:
    """Log margin of lambda mu(B_2R(x) & B_2R(y)) <= Delta (ln Delta)^-15 for d(x, y) >= tau.

    The intersection is bounded by the ball of radius sigma(tau, 2R); a
    positive return value certifies the inequality for this (m, R).
    """
    if not tau < 4.0 * R:
        raise DomainError("tau must be below 4R")
    log_delta = log_delta_param(m, R, tau)
    if log_delta <= 0.0:
        raise DomainError(f"Delta <= 1 (ln Delta = {log_delta:.4g}); ln ln Delta undefined")
    sigma = sigma_intersection(tau, 2.0 * R)
    lhs = log_lambda(m, R, tau) + log_ball_volume(m, sigma).log
    rhs = log_delta - 15.0 * math.log(log_delta)
    return rhs - lhs


def ln_delta_ratio(m: int, R: float, tau: float | None = None) -> float:
    """ln Delta divided by its leading-order prediction m ln(sqrt(m) cosh 2R)."""
    tau = solve_tau(m, R) if tau is None else tau
    return log_delta_param(m, R, tau) / (m * (0.5 * math.log(m) + float(lcosh(2.0 * R))))


def local_density_bound_m2(R: float) -> float:
    """Fraction of an equilateral triangle of side 2R in H^2 covered by R-discs at its corners.

    With corner angle a, the triangle has area pi - 3a and the three
    sectors together 3a (cosh R - 1).
    """
    if not R > 0:
        raise DomainError("R must be positive")
    alpha = law_of_cosines_angle(2.0 * R, 2.0 * R, 2.0 * R)
    defect = math.pi - 3.0 * alpha
    assert defect > 0.0, "angle defect must be positive in H^2"
    # cosh R - 1 = 2 sinh^2(R/2)
    return 3.0 * alpha * 2.0 * math.sinh(R / 2.0) ** 2 / defect


def cohn_zhao_bound_log(m: int, codes: Iterable[tuple[float, float]]) -> float:
    """min over (theta, ln A) rows of (m - 1) ln sin(theta/2) + ln A.

    ``A`` is the size of a spherical code in R^m with minimum angle theta,
    supplied by the caller.
    """
    best = math.inf
    rows = 0
    for theta, log_a in codes:
        if not math.pi / 3 - 1e-12 <= theta <= math.pi + 1e-12:
            raise DomainError(f"theta={theta} outside [pi/3, pi]")
        rows += 1
        best = min(best, (m - 1) * math.log(math.sin(theta / 2.0)) + log_a)
    if rows == 0:
        raise DomainError("empty code table")
    return best


def read_code_table(path) -> list[tuple[float, float]]:
    """Rows of a CSV with header ``theta,log_A``."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["theta", "log_A"]:
            raise DomainError("code table must have header 'theta,log_A'")
        return [(float(row["theta"]), float(row["log_A"])) for row in reader]


@dataclass
class BoundsRow:
    m: int
    R: float
    epsilon: float
    log_L: float
    log_main: float
    tau: float | None = None
    log_delta: float | None = None
    log_lambda: float | None = None
    notes: str = ""

    def as_dict(self):
        return asdict(self)


def compute_row(m: int, R: float, epsilon: float = DEFAULT_EPSILON) -> BoundsRow:
    """All bound values for one (m, R) cell; no-root cells keep tau empty."""
    log_l = trivial_lower_bound_log(m, R)
    row = BoundsRow(m=m, R=R, epsilon=epsilon, log_L=log_l,
                    log_main=log_improvement_factor(m, R, epsilon) + log_l)
    try:
        tau = solve_tau(m, R)
    except NoRootError:
        row.notes = "no-root"
        return row
    row.tau = tau
    row.log_delta = log_delta_param(m, R, tau)
    row.log_lambda = row.log_delta - log_ball_volume(m, 2.0 * R).log
    row.notes = "formula-value"
    return row

