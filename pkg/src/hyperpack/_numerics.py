"""Stable elementary functions and log-space adaptive quadrature."""

import math

import numpy as np

LN2 = math.log(2.0)
EPS = float(np.finfo(float).eps)

# below this the Taylor expansion of ln(sinh(x)/x) is used
_SERIES_CUTOFF = 1e-3
_MAX_ACTIVE = 2_000_000


def lsinh(x):
    """Natural log of sinh(x) for x >= 0, without overflow.

    Returns -inf at x = 0. Works on scalars and arrays.
    """
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        big = x + np.log(-np.expm1(-2.0 * x)) - LN2
        x2 = x * x
        small = np.log(x) + x2 / 6.0 - x2 * x2 / 180.0 + x2 * x2 * x2 / 2835.0
    out = np.where(x < _SERIES_CUTOFF, small, big)
    return out[()] if out.ndim == 0 else out


def lcosh(x):
    """Natural log of cosh(x), stable for any real x."""
    x = np.abs(np.asarray(x, dtype=float))
    out = x + np.log1p(np.exp(-2.0 * x)) - LN2
    return out[()] if out.ndim == 0 else out


def logsumexp(values):
    values = [v for v in values if v != -math.inf]
    if not values:
        return -math.inf
    top = max(values)
    if top == math.inf:
        return math.inf
    return top + math.log(math.fsum(math.exp(v - top) for v in values))


def _simpson_pass(f, a, b, tol, max_depth, noise):
    """One vectorized adaptive Simpson sweep over the intervals [a_i, b_i].

    ``tol`` is the per-interval absolute tolerance. A subinterval is also
    accepted once its Richardson error falls below ``noise`` times its
    value, the relative accuracy to which ``f`` itself is known.
    """
    n = a.size
    result = np.zeros(n)
    mid = 0.5 * (a + b)
    fa, fm, fb = f(a), f(mid), f(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    owner = np.arange(n)
    lo, hi = a.copy(), b.copy()
    tol = np.broadcast_to(np.asarray(tol, dtype=float), (n,)).copy()

    for depth in range(max_depth + 1):
        if owner.size == 0:
            break
        if owner.size > _MAX_ACTIVE:
            raise FloatingPointError("adaptive Simpson failed to converge")
        mid = 0.5 * (lo + hi)
        lm = 0.5 * (lo + mid)
        rm = 0.5 * (mid + hi)
        flm, frm = f(lm), f(rm)
        left = (mid - lo) / 6.0 * (fa + 4.0 * flm + fm)
        right = (hi - mid) / 6.0 * (fm + 4.0 * frm + fb)
        both = left + right
        err = both - whole
        done = ((np.abs(err) <= 15.0 * tol) | (np.abs(err) <= noise * np.abs(both))
                | (depth == max_depth))

        if done.any():
            val = both[done] + err[done] / 15.0
            result += np.bincount(owner[done], weights=val, minlength=n)

        keep = ~done
        owner = np.concatenate([owner[keep], owner[keep]])
        lo, hi, mid_k = lo[keep], hi[keep], mid[keep]
        fa_k, fm_k, fb_k = fa[keep], fm[keep], fb[keep]
        flm_k, frm_k = flm[keep], frm[keep]
        tol = np.concatenate([tol[keep], tol[keep]]) * 0.5
        whole = np.concatenate([left[keep], right[keep]])
        lo, hi = np.concatenate([lo, mid_k]), np.concatenate([mid_k, hi])
        fa, fm, fb = (np.concatenate([fa_k, fm_k]), np.concatenate([flm_k, frm_k]),
                      np.concatenate([fm_k, fb_k]))
    return result


def adaptive_simpson(f, a, b, rtol=1e-10, atol=0.0, noise=64 * EPS, max_depth=50):
    """Integrate a vectorized ``f`` over each interval [a_i, b_i].

    Two sweeps are made: the first locates the magnitude of each integral,
    the second refines to ``max(atol, rtol * |integral|)``. Returns an
    array shaped like ``a`` (a float for scalar input).
    """
    scalar = np.ndim(a) == 0 and np.ndim(b) == 0
    a, b = np.broadcast_arrays(np.atleast_1d(np.asarray(a, dtype=float)),
                               np.atleast_1d(np.asarray(b, dtype=float)))
    a, b = a.ravel().copy(), b.ravel().copy()
    mid = 0.5 * (a + b)
    rough = np.abs((b - a) / 6.0 * (f(a) + 4.0 * f(mid) + f(b)))
    first = _simpson_pass(f, a, b, np.maximum(atol, math.sqrt(rtol) * rough), max_depth, noise)
    out = _simpson_pass(f, a, b, np.maximum(atol, rtol * np.abs(first)), max_depth, noise)
    return float(out[0]) if scalar else out


def log_integral(g, a, b, breakpoints=(), rtol=1e-10, noise=64 * EPS):
    """ln of the integral of exp(g(x)) over [a, b] for nondecreasing ``g``.

    Each piece between breakpoints is integrated after shifting by its
    maximum, and the pieces are combined with log-sum-exp. ``noise`` is the
    relative accuracy of exp(g) as evaluated.
    """
    if b <= a:
        return -math.inf
    cuts = sorted({a, b, *(p for p in breakpoints if a < p < b)})
    logs = []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        shift = float(g(np.array([hi]))[0])
        if shift == -math.inf:
            continue

        def shifted(x, shift=shift):
            with np.errstate(under="ignore"):
                return np.exp(g(x) - shift)

        val = adaptive_simpson(shifted, lo, hi, rtol=rtol, noise=noise)
        if val > 0.0:
            logs.append(shift + math.log(val))
    return logsumexp(logs)
