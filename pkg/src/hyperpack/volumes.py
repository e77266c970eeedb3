"""Log-space volumes of hyperbolic balls.

Everything is kept as a natural logarithm so that dimensions in the
millions and radii in the hundreds stay representable.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

from ._numerics import EPS, log_integral, logsumexp, lsinh
from .errors import DomainError

QUAD_RTOL = 1e-10
LOG_LIMIT = 1e15


@dataclass(frozen=True, order=True)
class LogReal:
    """A nonnegative real stored as its natural log; ``log = -inf`` is zero."""

    log: float

    def __post_init__(self):
        if math.isnan(self.log) or self.log == math.inf:
            raise DomainError(f"invalid log value {self.log}")
        if abs(self.log) > LOG_LIMIT and self.log != -math.inf:
            raise OverflowError(f"log value {self.log} beyond supported range")

    @classmethod
    def from_float(cls, x: float) -> LogReal:
        if x < 0:
            raise DomainError("LogReal holds nonnegative values only")
        return cls(math.log(x) if x > 0 else -math.inf)

    @classmethod
    def zero(cls) -> LogReal:
        return cls(-math.inf)

    @property
    def is_zero(self) -> bool:
        return self.log == -math.inf

    def __mul__(self, other: LogReal) -> LogReal:
        return LogReal(self.log + other.log)

    def __truediv__(self, other: LogReal) -> LogReal:
        if other.is_zero:
            raise ZeroDivisionError("division by a zero LogReal")
        return LogReal(self.log - other.log)

    def __add__(self, other: LogReal) -> LogReal:
        return LogReal(logsumexp([self.log, other.log]))

    def __pow__(self, k: float) -> LogReal:
        return LogReal(self.log * k)

    def __float__(self) -> float:
        """Linear value; raises ``OverflowError`` when it does not fit a float."""
        return math.exp(self.log)


def log_sphere_surface(m: int) -> LogReal:
    """ln of the surface measure of the unit sphere S^{m-1} in R^m."""
    if m < 2:
        raise DomainError("m must be >= 2")
    return LogReal(math.log(2.0) + 0.5 * m * math.log(math.pi) - math.lgamma(0.5 * m))


def _breakpoints(m: int, r: float):
    # geometric refinement towards r, where sinh^{m-1} concentrates
    width = math.tanh(r) / (m - 1)
    pts = [1.0]
    k = 1.0
    while r - k * width > 0.0:
        pts.append(r - k * width)
        k *= 4.0
    return pts


@functools.lru_cache(maxsize=65536)
def _log_sinh_power_integral(m: int, r: float) -> float:
    def g(eta):
        return (m - 1) * lsinh(eta)

    # roundoff in (m-1) * lsinh bounds the attainable relative accuracy
    noise = 64 * EPS * (1.0 + (m - 1) * (1.0 + r + abs(float(lsinh(r)))))
    return log_integral(g, 0.0, r, breakpoints=_breakpoints(m, r), rtol=QUAD_RTOL, noise=noise)


def log_ball_volume(m: int, r: float) -> LogReal:
    """ln mu(B_r) = ln vol(S^{m-1}) + ln int_0^r sinh^{m-1}(eta) d eta."""
    if m < 2:
        raise DomainError("m must be >= 2")
    if not r > 0:
        raise DomainError(f"radius must be positive, got {r}")
    return LogReal(log_sphere_surface(m).log + _log_sinh_power_integral(int(m), float(r)))


def log_ball_volume_asymptotic(m: int, r: float) -> LogReal:
    """Large-r form (m-1) r - ln(m-1) - (m-1) ln 2 + ln vol(S^{m-1})."""
    if m < 3:
        raise DomainError("asymptotic form needs m >= 3")
    if not r > 0:
        raise DomainError(f"radius must be positive, got {r}")
    return LogReal((m - 1) * r - math.log(m - 1) - (m - 1) * math.log(2.0)
                   + log_sphere_surface(m).log)


def log_volume_ratio(m: int, r: float, R: float) -> float:
    """ln(mu(B_r) / mu(B_R)) for 0 < r < R."""
    if m < 2:
        raise DomainError("m must be >= 2")
    if not 0 < r < R:
        raise DomainError(f"need 0 < r < R, got r={r}, R={R}")
    return _log_sinh_power_integral(int(m), float(r)) - _log_sinh_power_integral(int(m), float(R))


def volume_ratio_window(m: int, r: float, R: float):
    """The interval [m (lsinh r - lsinh R), (m-1)(lsinh r - lsinh R)] bracketing the ratio."""
    d = float(lsinh(r) - lsinh(R))
    return m * d, (m - 1) * d
