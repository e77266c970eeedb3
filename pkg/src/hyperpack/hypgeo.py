"""Hyperboloid model of hyperbolic m-space.

Points live on the upper sheet {x : <x, x> = -1, x[-1] > 0} of R^{m+1}
with the Minkowski form <u, v> = -u[-1] v[-1] + sum_i u[i] v[i]; the last
coordinate is the time-like one and the origin is (0, ..., 0, 1).

Scalar helpers take :class:`HPoint` / :class:`TangentVec` objects; the
``*_points`` / ``pairwise_*`` helpers work on plain ``(n, m+1)`` arrays
for the simulation code.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator

from ._numerics import adaptive_simpson, lsinh
from .errors import DimensionError, DomainError, EmptyIntersectionError

MAX_SAMPLING_DIM = 64
CDF_TABLE_SIZE = 4096
CDF_FLOOR = 1e-16
CDF_TABLE_RTOL = 1e-10


def _coords(x) -> np.ndarray:
    return np.asarray(getattr(x, "coords", x), dtype=float)


def minkowski_form(u, v):
    """Minkowski bilinear form, -u[-1] v[-1] + sum_{i<m+1} u[i] v[i].

    Broadcasts over leading axes.
    """
    u, v = _coords(u), _coords(v)
    if u.shape[-1] != v.shape[-1]:
        raise DimensionError(f"length mismatch: {u.shape[-1]} vs {v.shape[-1]}")
    if u.shape[-1] < 3:
        raise DimensionError(f"need vectors of length >= 3, got {u.shape[-1]}")
    out = np.einsum("...i,...i->...", u[..., :-1], v[..., :-1]) - u[..., -1] * v[..., -1]
    return float(out) if np.ndim(out) == 0 else out


def project_to_sheet(x):
    """Rescale ``x`` (or each row of ``x``) onto the upper sheet."""
    x = np.array(x, dtype=float)
    q = -minkowski_form(x, x)
    if np.any(np.asarray(q) <= 0.0) or np.any(x[..., -1] <= 0.0):
        raise DomainError("vector is not time-like on the upper sheet")
    return x / np.sqrt(q)[..., None] if x.ndim > 1 else x / math.sqrt(q)


@dataclass(frozen=True, eq=False)
class HPoint:
    """A point of H^m; coordinates are re-projected onto the sheet."""

    coords: np.ndarray

    def __post_init__(self):
        c = np.array(self.coords, dtype=float).reshape(-1)
        if c.size < 3:
            raise DimensionError("points of H^m need m >= 2")
        c = project_to_sheet(c)
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    @property
    def dim(self) -> int:
        return self.coords.size - 1

    @classmethod
    def origin(cls, m: int) -> HPoint:
        c = np.zeros(m + 1)
        c[-1] = 1.0
        return cls(c)

    @classmethod
    def from_spatial(cls, x) -> HPoint:
        """Lift spatial coordinates x in R^m to (x, sqrt(1 + |x|^2))."""
        x = np.asarray(x, dtype=float)
        return cls(np.append(x, math.sqrt(1.0 + float(x @ x))))

    def __repr__(self):
        return f"HPoint({np.array2string(self.coords, precision=6)})"


@dataclass(frozen=True, eq=False)
class TangentVec:
    """A unit tangent vector at ``base``.

    The component along ``base`` is removed and the result normalized
    under the Minkowski form, so any nonzero spatial direction works.
    """

    base: HPoint
    coords: np.ndarray

    def __post_init__(self):
        b = self.base.coords
        v = np.array(self.coords, dtype=float).reshape(-1)
        if v.size != b.size:
            raise DimensionError(f"tangent length {v.size} vs base length {b.size}")
        v = v + minkowski_form(v, b) * b
        n2 = minkowski_form(v, v)
        if n2 <= 1e-300:
            raise DomainError("zero tangent direction")
        v = v / math.sqrt(n2)
        v.setflags(write=False)
        object.__setattr__(self, "coords", v)


# below this value of -<p, q> the chord form is used (d < ~0.96)
_CHORD_SWITCH = 1.5


def _from_chord(diff):
    chord2 = np.einsum("...i,...i->...", diff[..., :-1], diff[..., :-1]) - diff[..., -1] ** 2
    return 2.0 * np.arcsinh(0.5 * np.sqrt(np.maximum(chord2, 0.0)))


def distance(p, q):
    """Hyperbolic distance: arccosh of -<p, q>, clamped below at 1.

    Short distances go through the equivalent chord form
    2 asinh(|p - q|_M / 2), which keeps relative accuracy for nearby
    points far from the origin.
    """
    p, q = _coords(p), _coords(q)
    if p.shape[-1] != q.shape[-1]:
        raise DimensionError(f"dimension mismatch: {p.shape[-1] - 1} vs {q.shape[-1] - 1}")
    c = -np.asarray(minkowski_form(p, q))
    out = np.where(c < _CHORD_SWITCH, _from_chord(p - q), np.arccosh(np.maximum(1.0, c)))
    return float(out) if np.ndim(out) == 0 else out


def pairwise_distances(P, Q=None):
    """Distance matrix between the rows of ``P`` and ``Q`` (default ``P``)."""
    P = np.asarray(P, dtype=float)
    Q = P if Q is None else np.asarray(Q, dtype=float)
    if P.shape[-1] != Q.shape[-1]:
        raise DimensionError("dimension mismatch")
    c = np.outer(P[:, -1], Q[:, -1]) - P[:, :-1] @ Q[:, :-1].T
    out = np.arccosh(np.maximum(1.0, c))
    i, j = np.nonzero(c < _CHORD_SWITCH)
    if i.size:
        out[i, j] = _from_chord(P[i] - Q[j])
    return out


def geodesic_point(base: HPoint, direction: TangentVec, t: float) -> HPoint:
    """Point at arc length ``t`` along the geodesic from ``base`` in ``direction``."""
    if t < 0:
        raise DomainError(f"t must be nonnegative, got {t}")
    return HPoint(math.cosh(t) * base.coords + math.sinh(t) * direction.coords)


def direction_to(x: HPoint, u: HPoint) -> TangentVec:
    """Unit tangent at ``x`` pointing along the geodesic towards ``u``."""
    if distance(x, u) == 0.0:
        raise DomainError("direction between coincident points is undefined")
    return TangentVec(x, u.coords)


def midpoint(x: HPoint, u: HPoint) -> HPoint:
    d = distance(x, u)
    if d == 0.0:
        return x
    return geodesic_point(x, direction_to(x, u), d / 2.0)


def tangent_frame(base) -> np.ndarray:
    """Rows form a Minkowski-orthonormal basis of the tangent space at ``base``.

    Built by Gram-Schmidt from the first m standard basis vectors after
    removing their component along ``base``.
    """
    b = _coords(base)
    m = b.size - 1
    frame = np.zeros((m, m + 1))
    for i in range(m):
        v = np.zeros(m + 1)
        v[i] = 1.0
        v += minkowski_form(v, b) * b
        for j in range(i):
            v -= minkowski_form(v, frame[j]) * frame[j]
        frame[i] = v / math.sqrt(minkowski_form(v, v))
    return frame


def random_tangent(base: HPoint, rng: np.random.Generator) -> TangentVec:
    """Isotropic unit tangent at ``base``."""
    z = rng.standard_normal(base.dim)
    return TangentVec(base, z @ tangent_frame(base))


@functools.lru_cache(maxsize=256)
def _radius_table(m: int, r_max: float):
    """Normalized CDF of the density sinh^{m-1} on [0, r_max], tabulated."""
    eta = np.linspace(0.0, r_max, CDF_TABLE_SIZE)
    top = (m - 1) * float(lsinh(r_max))

    def f(x):
        with np.errstate(under="ignore"):
            return np.exp((m - 1) * lsinh(x) - top)

    pieces = adaptive_simpson(f, eta[:-1], eta[1:], rtol=CDF_TABLE_RTOL)
    cdf = np.concatenate([[0.0], np.cumsum(pieces)])
    cdf /= cdf[-1]
    cdf[-1] = 1.0
    # drop the underflowed head: knots with CDF below 1e-16 give PCHIP
    # slopes that overflow, and the mass they carry is below double resolution
    keep = np.r_[np.diff(cdf) > 0.0, True] & (cdf >= CDF_FLOOR)
    keep[0] = True
    inverse = PchipInterpolator(cdf[keep], eta[keep], extrapolate=False)
    return eta, cdf, inverse


def radius_cdf_table(m: int, r_max: float):
    """The cached ``(eta, cdf)`` table used by :func:`sample_radius`."""
    eta, cdf, _ = _radius_table(int(m), float(r_max))
    return eta, cdf


def sample_radius(m: int, r_max: float, rng: np.random.Generator, size=None):
    """Draw radii from the density proportional to sinh^{m-1} on [0, r_max]."""
    if m < 2:
        raise DimensionError("m must be >= 2")
    if m > MAX_SAMPLING_DIM:
        raise DimensionError(f"sampling supports m <= {MAX_SAMPLING_DIM}")
    if not r_max > 0:
        raise DomainError("r_max must be positive")
    _, _, inverse = _radius_table(int(m), float(r_max))
    u = rng.random(size)
    return np.clip(inverse(u), 0.0, r_max)


def sample_ball_points(center, r: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` points uniform (hyperbolic measure) in the closed ball B_r(center)."""
    c = _coords(center)
    m = c.size - 1
    if not r > 0:
        raise DomainError("radius must be positive")
    if n == 0:
        return np.empty((0, m + 1))
    z = rng.standard_normal((n, m))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    dirs = z @ tangent_frame(c)
    rho = sample_radius(m, r, rng, size=n)[:, None]
    return project_to_sheet(np.cosh(rho) * c + np.sinh(rho) * dirs)


def sample_ball_point(center: HPoint, r: float, rng: np.random.Generator) -> HPoint:
    """One uniform point of B_r(center)."""
    direction = random_tangent(center, rng)
    return geodesic_point(center, direction, float(sample_radius(center.dim, r, rng)))


def law_of_cosines_angle(a: float, b: float, c: float) -> float:
    """Angle opposite side ``c`` in a hyperbolic triangle with sides a, b, c.

    Equivalent to arccos((cosh a cosh b - cosh c) / (sinh a sinh b)), but
    evaluated through the half-angle form so that thin and tiny triangles
    keep full relative accuracy.
    """
    if not (a > 0 and b > 0):
        raise DomainError("sides a and b must be positive")
    slack = 1e-12 * (a + b)
    if c < abs(a - b) - slack or c > a + b + slack:
        raise DomainError(f"triangle inequality violated for sides {a}, {b}, {c}")
    den = lsinh(a) + lsinh(b)
    s1 = max((c - a + b) / 2.0, 0.0)
    s2 = max((c + a - b) / 2.0, 0.0)
    s3 = max((a + b - c) / 2.0, 0.0)
    # sin^2(g/2) and cos^2(g/2)
    sin2 = math.exp(lsinh(s1) + lsinh(s2) - den) if s1 > 0 and s2 > 0 else 0.0
    cos2 = math.exp(lsinh((a + b + c) / 2.0) + lsinh(s3) - den) if s3 > 0 else 0.0
    return 2.0 * math.atan2(math.sqrt(sin2), math.sqrt(cos2))


def sigma_intersection(tau: float, r: float) -> float:
    """Radius of a ball about the midpoint that contains B_r(x) & B_r(u), d(x, u) = tau.

    sinh^2(sigma) = sinh^2(r) - cosh^2(r) tanh^2(tau/2), evaluated as
    sinh(r - tau/2) sinh(r + tau/2) / cosh^2(tau/2) to avoid cancellation.
    """
    if not tau > 0:
        raise DomainError(f"tau must be positive, got {tau}")
    if tau >= 2.0 * r:
        raise EmptyIntersectionError(f"tau={tau} >= 2r={2.0 * r}: balls meet in at most a point")
    h = tau / 2.0
    log_s2 = lsinh(r - h) + lsinh(r + h) - 2.0 * (h + math.log1p(math.exp(-2.0 * h)) - math.log(2.0))
    # asinh(e^{x/2}) without overflow
    half = 0.5 * log_s2
    if half > 20.0:
        return half + math.log(2.0) + math.log1p(math.exp(-2.0 * half) / 4.0)
    return math.asinh(math.exp(half))
