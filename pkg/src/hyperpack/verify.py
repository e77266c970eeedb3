"""Numerical verification batteries behind ``hyperpack verify``.

Each suite returns a list of :class:`Check` records. A check passes when
its margin is nonnegative; margins are in the natural units of the check
(distance, log-volume, count z-score, ...).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import bounds, hypgeo, packing, volumes
from ._numerics import lsinh

SUITES = ("geometry", "volumes", "claims", "poisson")


@dataclass
class Check:
    name: str
    margin: float
    tolerance: float
    detail: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.margin >= 0.0)

    def to_dict(self):
        out = asdict(self)
        out["passed"] = self.passed
        return out


# -- geometry ---------------------------------------------------------------

def containment_trial(m, r, tau, n_samples, rng, tol=1e-7):
    """Sample B_r(x), keep points also in B_r(u), and compare with sigma(tau, r).

    Returns ``(violations, survivors, margin)`` with margin = sigma + tol - max distance.
    """
    x = hypgeo.sample_ball_point(hypgeo.HPoint.origin(m), 1.0, rng)
    u = hypgeo.geodesic_point(x, hypgeo.random_tangent(x, rng), tau)
    w = hypgeo.geodesic_point(x, hypgeo.direction_to(x, u), tau / 2.0)
    ys = hypgeo.sample_ball_points(x, r, n_samples, rng)
    ys = ys[(hypgeo.distance(ys, x.coords) <= r) & (hypgeo.distance(ys, u.coords) <= r)]
    sigma = hypgeo.sigma_intersection(tau, r)
    if ys.shape[0] == 0:
        return 0, 0, math.inf
    d = hypgeo.distance(ys, w.coords)
    return int(np.count_nonzero(d > sigma + tol)), int(ys.shape[0]), float(sigma + tol - d.max())


def intersection_containment(seed=0, n_configs=30, n_samples=100_000, tol=1e-7):
    rng = np.random.default_rng(seed)
    violations = survivors = 0
    margin = math.inf
    for _ in range(n_configs):
        m = int(rng.integers(2, 9))
        r = 4.0 * (1.0 - float(rng.random()))  # (0, 4]
        tau = 2.0 * r * float(rng.uniform(np.nextafter(0.0, 1.0), 1.0))  # (0, 2r)
        v, s, mg = containment_trial(m, r, tau, n_samples, rng, tol)
        violations += v
        survivors += s
        margin = min(margin, mg)
    return Check("intersection_containment", margin if violations == 0 else -float(violations),
                 tol, {"configs": n_configs, "samples_per_config": n_samples,
                       "survivors": survivors, "violations": violations})


def _random_points(rng, n, m, spread=3.0):
    return hypgeo.sample_ball_points(hypgeo.HPoint.origin(m), spread, n, rng)


def metric_axioms(seed=0, n=300, tol=1e-8):
    rng = np.random.default_rng(seed)
    checks = []
    sym = tri = math.inf
    for m in (2, 3, 5, 8):
        P = _random_points(rng, n, m)
        D = hypgeo.pairwise_distances(P)
        sym = min(sym, tol - float(np.abs(D - D.T).max()))
        idx = rng.integers(0, n, size=(5000, 3))
        a, b, c = idx.T
        tri = min(tri, float((D[a, b] + D[b, c] - D[a, c]).min()) + tol)
    checks.append(Check("distance_symmetry", sym, tol))
    checks.append(Check("triangle_inequality", tri, tol))
    return checks


def geodesic_round_trip(seed=0, tol=1e-9):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for m in range(2, 9):
        base = hypgeo.HPoint.origin(m)
        for _ in range(20):
            v = hypgeo.random_tangent(base, rng)
            t = float(rng.uniform(0.0, 5.0))
            worst = max(worst, abs(hypgeo.distance(base, hypgeo.geodesic_point(base, v, t)) - t))
    return Check("geodesic_round_trip", tol - worst, tol, {"max_error": worst})


def hyperbolic_identities(tol=1e-10):
    x = np.logspace(-6, math.log10(30.0), 400)
    # tanh rounds to 1 near x = 30, so the first one is checked non-strictly
    ineq = min(float((1.0 - np.tanh(x)).min()),
               float((np.sinh(2 * x) - 2 * np.sinh(x)).min()),
               float((2 * np.tanh(x) - np.tanh(2 * x)).min()))
    rel_cosh = np.abs(np.cosh(2 * x) - (2 * np.cosh(x) ** 2 - 1)) / np.cosh(2 * x)
    rel_sinh = np.abs(np.sinh(2 * x) - 2 * np.sinh(x) * np.cosh(x)) / np.sinh(2 * x)
    return [
        Check("hyperbolic_inequalities", ineq, 0.0, {"grid": "logspace(1e-6, 30, 400)"}),
        Check("angle_doubling", tol - float(max(rel_cosh.max(), rel_sinh.max())), tol),
    ]



# -- volumes ----------------------------------------------------------------

RADIUS_GRID = tuple(round(0.1 * k, 10) for k in range(1, 51))


def volume_ratio_sandwich(ms=range(2, 51), radii=RADIUS_GRID, tol=1e-9):
    margin = math.inf
    cells = 0
    for m in ms:
        for i, r in enumerate(radii):
            for R in radii[i + 1:]:
                v = volumes.log_volume_ratio(m, r, R)
                lo, hi = volumes.volume_ratio_window(m, r, R)
                margin = min(margin, v - lo, hi - v)
                cells += 1
    return Check("volume_ratio_sandwich", margin + tol, tol, {"cells": cells})


def trivial_bound_asymptotic(ms=(100, 1000, 10_000), C=50.0):
    margin = math.inf
    detail = {}
    for m in ms:
        R = math.log(m) + 5.0
        err = abs(volumes.log_volume_ratio(m, R, 2 * R) + R * (m - 1))
        allowed = math.log1p(C * m * math.exp(-R))
        detail[str(m)] = err
        margin = min(margin, allowed - err)
    return Check("trivial_bound_asymptotic", margin, math.log1p(C * math.exp(-5.0)), detail)


def closed_form_agreement(tol=1e-9):
    """Quadrature against the m = 2, 3 antiderivatives on (0, 30]."""
    worst = 0.0
    for r in np.linspace(0.05, 30.0, 120):
        exact2 = math.log(2 * math.pi) + math.log(2.0) + 2 * float(lsinh(r / 2.0))
        # pi (sinh 2r - 2r), written through ln sinh to avoid overflow
        exact3 = math.log(math.pi) + float(lsinh(2 * r)) + math.log1p(-2 * r / math.sinh(2 * r))
        worst = max(worst, abs(volumes.log_ball_volume(2, r).log - exact2))
        worst = max(worst, abs(volumes.log_ball_volume(3, r).log - exact3))
    return Check("closed_form_agreement", tol - worst, tol, {"max_abs_log_error": worst})


def asymptotic_form_agreement():
    d10 = abs(volumes.log_ball_volume_asymptotic(10, 20.0).log - volumes.log_ball_volume(10, 20.0).log)
    d3 = abs(volumes.log_ball_volume_asymptotic(3, 30.0).log - volumes.log_ball_volume(3, 30.0).log)
    allow10 = math.log1p(10.0 * 10 * math.exp(-20.0))
    return [Check("asymptotic_volume_m10_r20", allow10 - d10, allow10),
            Check("asymptotic_volume_m3_r30", 1e-6 - d3, 1e-6)]



# -- claims -----------------------------------------------------------------

CLAIM_MS = (10_000, 100_000, 1_000_000)
CLAIM_RS = (0.1, 1.0, 10.0)


def tau_solver(ms=CLAIM_MS, Rs=CLAIM_RS):
    width = claim = math.inf
    detail = {}
    for m in ms:
        for R in Rs:
            lo, hi = bounds.bracket_tau(m, R)
            tau = 0.5 * (lo + hi)
            rep = bounds.check_claim_basic(m, R, tau)
            width = min(width, bounds.TAU_REL_WIDTH * R - (hi - lo))
            claim = min(claim, math.log(bounds.CLAIM_WINDOW) - abs(rep.log_q))
            detail[f"{m},{R}"] = {"tau": tau, "q": rep.q}
    return [Check("tau_bracket_width", width, bounds.TAU_REL_WIDTH, detail),
            Check("claim_sinh_ratio_window", claim, math.log(bounds.CLAIM_WINDOW))]


def covolume_margins(ms=(10_000, 100_000), Rs=CLAIM_RS):
    margin = math.inf
    detail = {}
    for m in ms:
        for R in Rs:
            val = bounds.check_covolume_claim(m, R, bounds.solve_tau(m, R))
            detail[f"{m},{R}"] = val
            margin = min(margin, val)
    return Check("covolume_claim", margin, 0.0, detail)


def improvement_factor(ms=CLAIM_MS, Rs=CLAIM_RS, epsilon=bounds.DEFAULT_EPSILON, tol=1e-9):
    worst = 0.0
    for m in ms:
        for R in Rs:
            row = bounds.compute_row(m, R, epsilon)
            want = math.log((1 - epsilon) * m * (0.5 * math.log(m) + math.log(math.cosh(2 * R))))
            worst = max(worst, abs(row.log_main - row.log_L - want))
    return Check("theorem_improvement_factor", tol - worst, tol, {"max_error": worst})


def ln_delta_trend(ms=CLAIM_MS, Rs=CLAIM_RS):
    """ln Delta over m ln(sqrt(m) cosh 2R) must increase towards 1 with m."""
    margin = math.inf
    detail = {}
    for R in Rs:
        ratios = [bounds.ln_delta_ratio(m, R) for m in ms]
        detail[str(R)] = ratios
        margin = min(margin, *np.diff(ratios), 1.0 - max(ratios))
    return Check("ln_delta_ratio_increasing", margin, 0.0, detail)



# -- poisson ----------------------------------------------------------------

TAIL_FIXTURES = ((5.0, 0.5), (20.0, 1.0), (50.0, 2.0))
MECKE_FIXTURE = {"m": 2, "R": 0.5, "lam": 2.0, "s": 0.5, "L": 3.0}


def tail_checks(seed=0, n_draws=1_000_000):
    out = []
    for k, (mean, t) in enumerate(TAIL_FIXTURES):
        rep = packing.poisson_tail_check(mean, t, n_draws, seed=seed + k)
        out.append(Check(f"poisson_tail_mean{mean:g}_t{t:g}",
                         rep.bound + 3 * rep.std_error - rep.frequency, 3 * rep.std_error,
                         {"frequency": rep.frequency, "bound": rep.bound}))
    return out


def mecke(seed=0, n_runs=2000):
    f = MECKE_FIXTURE
    rep = packing.mecke_check(f["m"], f["R"], f["lam"], f["s"], n_runs, f["L"], seed=seed)
    return Check("mecke_identity", 3.0 - abs(rep.z), 3.0,
                 {"empirical": rep.empirical, "std_error": rep.std_error, "analytic": rep.analytic})


def poisson_count_mean(seed=0, n_runs=200):
    cfg = packing.SimConfig(m=2, R=0.5, L=3.0, target_degree=20.0)
    counts = np.array([packing.sample_poisson(cfg, np.random.default_rng(child)).shape[0]
                       for child in np.random.SeedSequence(seed).spawn(n_runs)])
    se = counts.std(ddof=1) / math.sqrt(n_runs)
    z = (counts.mean() - cfg.expected_count()) / se
    return Check("poisson_count_mean", 3.0 - abs(z), 3.0,
                 {"mean": float(counts.mean()), "expected": cfg.expected_count()})



_CHECKS = {
    "geometry": (intersection_containment, metric_axioms, geodesic_round_trip,
                 lambda seed: hyperbolic_identities()),
    "volumes": (lambda seed: volume_ratio_sandwich(), lambda seed: trivial_bound_asymptotic(),
                lambda seed: closed_form_agreement(), lambda seed: asymptotic_form_agreement()),
    "claims": (lambda seed: tau_solver(), lambda seed: covolume_margins(),
               lambda seed: improvement_factor(), lambda seed: ln_delta_trend()),
    "poisson": (tail_checks, mecke, poisson_count_mean),
}


def _run_one(job):
    suite, k, seed = job
    out = _CHECKS[suite][k](seed)
    return out if isinstance(out, list) else [out]


def run_suite(name: str, seed: int = 0, map_fn=map) -> list[Check]:
    """Run every check of a suite; ``map_fn`` may be a pool's ordered map."""
    if name not in _CHECKS:
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    jobs = [(name, k, seed) for k in range(len(_CHECKS[name]))]
    return [c for chunk in map_fn(_run_one, jobs) for c in chunk]
