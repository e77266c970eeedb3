"""Poisson-process packing construction in a bounded hyperbolic region.

A Poisson process of intensity lambda is drawn in the ball B_L about the
origin, points with too many 2R-neighbours or too large a common
neighbourhood with some other point are discarded (one pass, against the
original process), and a greedy independent set of the 2R-proximity graph
on the survivors is returned as the packing. Coverage is measured only in
the core ball B_{L-2R}, where no covering centre can lie outside B_L.
"""

from __future__ import annotations

import csv
import heapq
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from .errors import ConfigError, DomainError, ResourceError
from .hypgeo import MAX_SAMPLING_DIM, HPoint, pairwise_distances, sample_ball_points
from .volumes import log_ball_volume

MAX_EXPECTED_POINTS = 10_000_000
EDGE_SLACK = 1e-12
CODEGREE_FLOOR = 2.0
_BLOCK = 2048


def ball_volume(m: int, r: float) -> float:
    return float(log_ball_volume(m, r)) if r > 0 else 0.0


@dataclass(frozen=True)
class SimConfig:
    """One simulation run.

    Give exactly one of ``lam`` (explicit intensity) or ``target_degree``
    (expected number of points in a 2R-ball, lambda = Delta / mu(B_2R)).
    Caps default to Delta + Delta^(2/3) and Delta (ln Delta)^-10. Two
    adjacent points always share at least themselves, so a codegree cap
    of 2 or less would prune every non-isolated point; at or below that
    floor (every Delta between 2.81 and 8.9e15) the default codegree
    condition is disabled. An explicit ``codegree_cap`` is always honoured.
    """

    m: int
    R: float
    L: float
    lam: float | None = None
    target_degree: float | None = None
    seed: int = 0
    degree_cap: float | None = None
    codegree_cap: float | None = None
    mc_samples: int = 20_000

    def __post_init__(self):
        if not 2 <= self.m <= MAX_SAMPLING_DIM:
            raise ConfigError(f"m must lie in [2, {MAX_SAMPLING_DIM}], got {self.m}")
        if not self.R > 0:
            raise ConfigError("R must be positive")
        if not self.L > 4 * self.R:
            raise ConfigError(f"need L > 4R, got L={self.L}, R={self.R}")
        if (self.lam is None) == (self.target_degree is None):
            raise ConfigError("give exactly one of lam or target_degree")
        if self.lam is not None and self.lam < 0:
            raise ConfigError("lam must be nonnegative")
        if self.target_degree is not None and not self.target_degree > math.e:
            raise ConfigError("target_degree must exceed e")
        if self.mc_samples < 1:
            raise ConfigError("mc_samples must be positive")

    @property
    def intensity(self) -> float:
        if self.lam is not None:
            return self.lam
        return self.target_degree / ball_volume(self.m, 2 * self.R)

    @property
    def delta_sim(self) -> float:
        if self.target_degree is not None:
            return self.target_degree
        return self.lam * ball_volume(self.m, 2 * self.R)

    @property
    def core_radius(self) -> float:
        return self.L - 2 * self.R

    def caps(self) -> tuple[float, float]:
        d = self.delta_sim
        deg = self.degree_cap if self.degree_cap is not None else d + d ** (2.0 / 3.0)
        if self.codegree_cap is not None:
            return deg, self.codegree_cap
        cod = self.codegree_formula()
        return deg, cod if cod is not None and cod > CODEGREE_FLOOR else math.inf

    def codegree_formula(self) -> float | None:
        d = self.delta_sim
        return d * math.log(d) ** -10 if d > math.e else None

    def expected_count(self) -> float:
        return self.intensity * ball_volume(self.m, self.L)


@dataclass
class GeometricGraph:
    """2R-proximity graph; ``ball`` also keeps the closed-ball incidences."""

    points: np.ndarray
    R: float
    adjacency: list
    ball: sparse.csr_matrix = field(repr=False)

    @property
    def n(self) -> int:
        return len(self.adjacency)

    def degrees(self) -> np.ndarray:
        return np.array([a.size for a in self.adjacency], dtype=int)

    def max_degree(self) -> int:
        return int(self.degrees().max()) if self.n else 0

    def subgraph(self, keep) -> GeometricGraph:
        keep = np.asarray(keep, dtype=int)
        remap = np.full(self.n, -1)
        remap[keep] = np.arange(keep.size)
        adj = []
        for i in keep:
            nb = remap[self.adjacency[i]]
            adj.append(np.sort(nb[nb >= 0]))
        ball = self.ball[keep][:, keep].tocsr()
        return GeometricGraph(self.points[keep], self.R, adj, ball)


def sample_poisson(config: SimConfig, rng: np.random.Generator) -> np.ndarray:
    """Poisson process of intensity lambda in B_L(origin), as an (N, m+1) array."""
    mean = config.expected_count()
    if mean > MAX_EXPECTED_POINTS:
        raise ResourceError(f"expected {mean:.3g} points exceeds {MAX_EXPECTED_POINTS:.0e}; "
                            "lower the intensity or the region radius")
    n = int(rng.poisson(mean)) if mean > 0 else 0
    return sample_ball_points(HPoint.origin(config.m), config.L, n, rng)


def build_graph(points, R: float) -> GeometricGraph:
    """Exact all-pairs graph with an edge iff 0 < d <= 2R (1e-12 slack)."""
    points = np.asarray(points, dtype=float)
    n = points.shape[0]
    limit = 2 * R + EDGE_SLACK
    rows, cols, adj = [], [], []
    for start in range(0, n, _BLOCK):
        d = pairwise_distances(points[start:start + _BLOCK], points)
        for k, drow in enumerate(d):
            i = start + k
            idx = np.flatnonzero(drow <= limit)
            rows.append(np.full(idx.size, i))
            cols.append(idx)
            nb = idx[(drow[idx] > 0.0) & (idx != i)]
            adj.append(nb)
    if n:
        r, c = np.concatenate(rows), np.concatenate(cols)
    else:
        r = c = np.empty(0, dtype=int)
    ball = sparse.csr_matrix((np.ones(r.size, dtype=np.int32), (r, c)), shape=(n, n))
    return GeometricGraph(points, R, adj, ball)


def prune_bad(graph: GeometricGraph, config: SimConfig):
    """Indices surviving both bad-point conditions, evaluated once against all points.

    A point x is bad if |X & B_2R(x)| >= degree_cap, or if some other
    y in X has |X & B_2R(x) & B_2R(y)| >= codegree_cap.
    Returns ``(survivors, pruned_degree, pruned_codegree)``; a point can
    appear in both pruned sets.
    """
    deg_cap, cod_cap = config.caps()
    n = graph.n
    if n == 0:
        empty = np.empty(0, dtype=int)
        return empty, empty, empty
    closed = np.asarray(graph.ball.sum(axis=1)).ravel()
    bad_deg = closed >= deg_cap
    if math.isinf(cod_cap):
        bad_cod = np.zeros(n, dtype=bool)
    else:
        common = (graph.ball @ graph.ball).tocoo()
        off = common.row != common.col
        best = np.zeros(n)
        np.maximum.at(best, common.row[off], common.data[off])
        bad_cod = best >= cod_cap
    survivors = np.flatnonzero(~(bad_deg | bad_cod))
    return survivors, np.flatnonzero(bad_deg), np.flatnonzero(bad_cod)


def independent_set(graph: GeometricGraph) -> np.ndarray:
    """Minimum-degree greedy independent set (ties to the lowest index)."""
    n = graph.n
    deg = graph.degrees()
    alive = np.ones(n, dtype=bool)
    heap = [(int(deg[i]), i) for i in range(n)]
    heapq.heapify(heap)
    chosen = []
    while heap:
        d, i = heapq.heappop(heap)
        if not alive[i] or d != deg[i]:
            continue
        chosen.append(i)
        removed = [i, *(j for j in graph.adjacency[i] if alive[j])]
        alive[removed] = False
        for j in removed:
            for k in graph.adjacency[j]:
                if alive[k]:
                    deg[k] -= 1
                    heapq.heappush(heap, (int(deg[k]), int(k)))
    return np.array(sorted(chosen), dtype=int)


def is_packing(points, R: float) -> bool:
    """True iff all pairwise distances exceed 2R."""
    points = np.asarray(points, dtype=float)
    for start in range(0, points.shape[0], _BLOCK):
        block = points[start:start + _BLOCK]
        d = pairwise_distances(block, points[start:])
        # only pairs (i, j) with j > i
        iu = np.triu_indices(block.shape[0], k=1, m=d.shape[1])
        if np.any(d[iu] <= 2 * R):
            return False
    return True


def coverage_fraction(centres, m: int, R: float, region_radius: float, n_samples: int,
                      rng: np.random.Generator):
    """Monte Carlo fraction of B_region(origin) within distance R of ``centres``.

    Returns ``(fraction, binomial standard error)``.
    """
    if not region_radius > 0:
        raise ConfigError("core region is empty")
    centres = np.asarray(centres, dtype=float).reshape(-1, m + 1)
    if centres.shape[0] == 0:
        return 0.0, 0.0
    samples = sample_ball_points(HPoint.origin(m), region_radius, n_samples, rng)
    covered = 0
    for start in range(0, n_samples, _BLOCK):
        d = pairwise_distances(samples[start:start + _BLOCK], centres)
        covered += int(np.count_nonzero(d.min(axis=1) <= R))
    p = covered / n_samples
    return p, math.sqrt(p * (1.0 - p) / n_samples)


def estimate_density(points, config: SimConfig, rng: np.random.Generator):
    """Covered fraction of the core region B_{L-2R}; ``(fraction, std_error)``."""
    return coverage_fraction(points, config.m, config.R, config.core_radius,
                             config.mc_samples, rng)


@dataclass
class PackingResult:
    kept: np.ndarray
    pruned_degree: np.ndarray
    pruned_codegree: np.ndarray
    n_initial: int
    n_survivors: int
    max_degree: int
    density_core: float
    density_std_error: float
    alpha_lower_ref: float | None
    packing_valid: bool
    thresholds: dict
    points: np.ndarray = field(repr=False)

    @property
    def pruned_fraction(self) -> float:
        if self.n_initial == 0:
            return 0.0
        return 1.0 - self.n_survivors / self.n_initial

    def to_dict(self, include_points: bool = False) -> dict:
        out = {
            "kept": self.kept.tolist(),
            "pruned_degree": self.pruned_degree.tolist(),
            "pruned_codegree": self.pruned_codegree.tolist(),
            "n_initial": self.n_initial,
            "n_survivors": self.n_survivors,
            "n_kept": int(self.kept.size),
            "max_degree": self.max_degree,
            "pruned_fraction": self.pruned_fraction,
            "density_core": self.density_core,
            "density_std_error": self.density_std_error,
            "alpha_lower_ref": self.alpha_lower_ref,
            "packing_valid": self.packing_valid,
            "thresholds": self.thresholds,
        }
        if include_points:
            out["points"] = self.points.tolist()
        return out


def run_pipeline(config: SimConfig) -> PackingResult:
    """Sample, prune, build the survivor graph, take an independent set, measure density."""
    point_seq, density_seq = np.random.SeedSequence(config.seed).spawn(2)
    points = sample_poisson(config, np.random.default_rng(point_seq))
    graph = build_graph(points, config.R)
    survivors, p_deg, p_cod = prune_bad(graph, config)
    sub = graph.subgraph(survivors)
    kept = survivors[independent_set(sub)]

    max_deg = sub.max_degree()
    alpha_ref = None
    if max_deg >= 2:
        alpha_ref = survivors.size * math.log(max_deg) / max_deg

    valid = is_packing(points[kept], config.R)
    frac, se = estimate_density(points[kept], config, np.random.default_rng(density_seq))
    deg_cap, cod_cap = config.caps()
    thresholds = {
        "lambda": config.intensity,
        "delta_sim": config.delta_sim,
        "degree_cap": deg_cap,
        "codegree_cap": None if math.isinf(cod_cap) else cod_cap,
        "codegree_formula": config.codegree_formula(),
    }
    return PackingResult(kept=kept, pruned_degree=p_deg, pruned_codegree=p_cod,
                         n_initial=int(points.shape[0]), n_survivors=int(survivors.size),
                         max_degree=max_deg, density_core=frac, density_std_error=se,
                         alpha_lower_ref=alpha_ref, packing_valid=valid,
                         thresholds=thresholds, points=points)


def write_points_csv(path, result: PackingResult) -> None:
    """CSV with header ``idx,x1,...,xm,xm1,kept,pruned_reason``; xm1 is the time coordinate."""
    pts = result.points
    m = pts.shape[1] - 1
    kept = set(result.kept.tolist())
    deg = set(result.pruned_degree.tolist())
    cod = set(result.pruned_codegree.tolist())
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["idx", *(f"x{i}" for i in range(1, m + 1)), "xm1", "kept", "pruned_reason"])
        for i, row in enumerate(pts):
            reason = "+".join(r for r, s in (("degree", deg), ("codegree", cod)) if i in s)
            w.writerow([i, *(repr(float(v)) for v in row), int(i in kept), reason])


@dataclass(frozen=True)
class MeckeReport:
    empirical: float
    std_error: float
    analytic: float
    n_runs: int

    @property
    def z(self) -> float:
        if self.std_error == 0:
            return 0.0 if self.empirical == self.analytic else math.inf
        return (self.empirical - self.analytic) / self.std_error

    @property
    def passed(self) -> bool:
        return abs(self.z) <= 3.0


def mecke_analytic(m: int, R: float, lam: float, s: float, L: float) -> float:
    """lambda mu(core) exp(-lambda mu(B_s)) for the isolation event at range s."""
    return lam * ball_volume(m, L - 2 * R) * math.exp(-lam * ball_volume(m, s))


def mecke_check(m: int, R: float, lam: float, s: float, n_runs: int, L: float,
                seed: int = 0) -> MeckeReport:
    """Expected number of core points with no other point within ``s``, simulated vs exact.

    ``s <= 2R`` keeps every s-ball around a core point inside B_L.
    """
    if not 0 < s <= 2 * R:
        raise DomainError("need 0 < s <= 2R so that s-balls around core points stay in B_L")
    origin = HPoint.origin(m)
    core = L - 2 * R
    mean = lam * ball_volume(m, L)
    counts = np.empty(n_runs)
    for k, child in enumerate(np.random.SeedSequence(seed).spawn(n_runs)):
        rng = np.random.default_rng(child)
        n = int(rng.poisson(mean)) if mean > 0 else 0
        pts = sample_ball_points(origin, L, n, rng)
        in_core = np.flatnonzero(pts[:, -1] <= math.cosh(core)) if n else np.empty(0, int)
        if in_core.size == 0:
            counts[k] = 0
            continue
        d = pairwise_distances(pts[in_core], pts)
        d[np.arange(in_core.size), in_core] = np.inf
        counts[k] = np.count_nonzero(d.min(axis=1) > s)
    se = counts.std(ddof=1) / math.sqrt(n_runs) if n_runs > 1 else 0.0
    return MeckeReport(float(counts.mean()), float(se), mecke_analytic(m, R, lam, s, L), n_runs)


@dataclass(frozen=True)
class TailReport:
    mean: float
    t: float
    frequency: float
    std_error: float
    bound: float
    n_draws: int

    @property
    def passed(self) -> bool:
        return self.frequency <= self.bound + 3.0 * self.std_error


def poisson_tail_bound(mean: float, t: float) -> float:
    """exp(-min(t, t^2) mean / 3), a bound on P[Z - EZ >= t EZ]."""
    return math.exp(-min(t, t * t) * mean / 3.0)


def poisson_tail_check(mean: float, t: float, n_draws: int, seed: int = 0) -> TailReport:
    if not mean > 0 or not t > 0:
        raise DomainError("mean and t must be positive")
    z = np.random.default_rng(seed).poisson(mean, size=n_draws)
    freq = float(np.count_nonzero(z - mean >= t * mean)) / n_draws
    se = math.sqrt(freq * (1.0 - freq) / n_draws)
    return TailReport(mean, t, freq, se, poisson_tail_bound(mean, t), n_draws)
