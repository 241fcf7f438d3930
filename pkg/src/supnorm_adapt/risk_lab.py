"""Monte Carlo laboratory for sup-norm risk, oracle levels and bounds.

Every randomized routine takes a master ``seed``; replicate ``k`` draws
its sample from the stream ``(seed, "sample", n, k)`` and its sign
vectors from ``(seed, "select", n, k)``, so results do not depend on the
number of worker threads.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate, stats

from ._rng import generator, seed_path
from .bounds import BoundInputs, bound_evaluators
from .densities import TestDensity
from .estimator import Sample, _coefficients_to_poly, cdf_estimate, estimate_density
from .lepski import SelectorVariant, build_grid, select
from .piecewise import (
    DyadicPiecewisePoly,
    PiecewiseAntiderivative,
    _horner,
    evaluate,
    evaluate_antiderivative,
    sup_norm,
)
from .spline_kernel import ProjectionKernel, bspline_pieces

SQRT_2LOG2 = math.sqrt(2.0 * math.log(2.0))
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)


def _pmap(fn, items, threads=1):
    items = list(items)
    if threads is None or threads <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _mean_se(values):
    v = np.asarray(values, dtype=float)
    se = float(v.std(ddof=1) / math.sqrt(v.size)) if v.size > 1 else 0.0
    return float(v.mean()), se


# ---------------------------------------------------------------------------
# deterministic quantities


def variance_proxy(j: int, n: int) -> float:
    """``sqrt(2^j j / n)``."""
    return math.sqrt(2.0 ** j * j / n)


def bias_bound(j: int, density: TestDensity, kernel: ProjectionKernel) -> float:
    """Deterministic bound on ``sup |E p_n(j) - p0|``.

    Haar: ``2^{-jt} H / (t+1)``.  Splines: ``2^{-jt} ||p0||_{t,inf} C(Phi)``
    with ``C(Phi) = ∫ Phi(|u|) |u|^t du``.
    """
    t = density.t
    if kernel.order == 1:
        return 2.0 ** (-j * t) * density.holder_H / (t + 1.0)
    return 2.0 ** (-j * t) * density.holder_norm * kernel.holder_moment(t)


def _cell_range(density, level):
    lo, hi = density.support
    return (math.floor(lo * 2.0 ** level), math.ceil(hi * 2.0 ** level) - 1)


@lru_cache(maxsize=256)
def expected_density(density: TestDensity, j: int, kernel: ProjectionKernel) -> DyadicPiecewisePoly:
    """``E p_n(j) = pi_j p0`` by integrating B-spline pieces against ``p0``.

    Cells where ``p0`` is smooth use 24-point Gauss-Legendre; cells touching
    a point where a derivative of ``p0`` blows up use adaptive quadrature.
    """
    r = kernel.order
    pieces = bspline_pieces(r)
    h = 2.0 ** -j
    a, b = _cell_range(density, j)
    cells = np.arange(a, b + 1)
    u = 0.5 * (_GL_NODES + 1.0)
    w = 0.5 * _GL_WEIGHTS
    x = (cells[:, None] + u[None, :]) * h
    pv = density.pdf(x)
    basis = np.stack([_horner(pieces[p], u) for p in range(r)])  # (r, nodes)
    contrib = h * np.einsum("cq,pq,q->cp", pv, basis, w)
    for s in density.singular:
        touching = np.flatnonzero((cells * h <= s) & ((cells + 1) * h >= s))
        for ci in touching:
            k = cells[ci]
            for p in range(r):
                fn = (lambda uu, p=p, k=k: density.pdf((k + uu) * h) * _horner(pieces[p], uu))
                brk = [min(max(s / h - k, 0.0), 1.0)]
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", integrate.IntegrationWarning)
                    val, _ = integrate.quad(fn, 0.0, 1.0, points=brk, epsabs=1e-13,
                                            epsrel=1e-12, limit=200)
                contrib[ci, p] = h * val
    idx = (cells[:, None] - np.arange(r)[None, :]).reshape(-1)
    return _coefficients_to_poly(j, kernel, idx, contrib.reshape(-1))


def sup_error(poly: DyadicPiecewisePoly, density: TestDensity, per_cell: int = 64,
              max_per_cell: int = 1024, rel_change: float = 1e-3) -> float:
    """``sup |poly - p0|`` on knots, feature points and a refined cell grid.

    The per-cell grid doubles from ``per_cell`` until the sup moves by
    less than ``rel_change`` (relative) or ``max_per_cell`` is reached.
    """
    j = poly.level
    h = poly.width
    a, b = _cell_range(density, j)
    cells = np.union1d(poly.cells, np.arange(a, b + 1))
    coeffs = np.zeros((cells.size, poly.coeffs.shape[1]))
    coeffs[np.searchsorted(cells, poly.cells)] = poly.coeffs
    feats = np.asarray(density.features, dtype=float)
    feat_err = float(np.max(np.abs(evaluate(poly, feats) - density.pdf(feats)))) if feats.size else 0.0
    q = per_cell
    prev = None
    while True:
        u = np.linspace(0.0, 1.0, q + 1)
        vals = _horner(coeffs[:, None, :], u[None, :])
        err = np.abs(vals - density.pdf((cells[:, None] + u[None, :]) * h))
        cur = max(float(err.max()), feat_err)
        if prev is not None and abs(cur - prev) <= rel_change * max(cur, 1e-300):
            return cur
        if q >= max_per_cell:
            return cur
        prev = cur
        q *= 2


def local_holder_W(l: int, density: TestDensity, per_cell: int = 256) -> float:
    """Self-similarity functional at level ``l`` (Haar), capped at 1.

    For ``x`` in the cell ``(k 2^-l, (k+1) 2^-l]`` the inner integral is
    ``2^l ∫_cell p0 - p0(x)``, evaluated exactly through the CDF.
    """
    h = 2.0 ** -l
    a, b = _cell_range(density, l)
    cells = np.arange(a - 1, b + 2)
    avg = (density.cdf((cells + 1) * h) - density.cdf(cells * h)) / h
    u = np.arange(1, per_cell + 1) / per_cell
    x = (cells[:, None] + u[None, :]) * h
    inner = np.abs(avg[:, None] - density.pdf(x))
    t = density.t
    value = 2.0 ** (l * t) * (t + 1.0) / density.holder_H * float(inner.max())
    return min(value, 1.0)


def adaptive_constant_A(density: TestDensity) -> float:
    """``26.6 [ ||p0||^t H / (sqrt(2 log 2) (1+t)) ]^{1/(2t+1)}``."""
    t = density.t
    inner = density.sup ** t * density.holder_H / (SQRT_2LOG2 * (1.0 + t))
    return 26.6 * inner ** (1.0 / (2.0 * t + 1.0))


def sudakov_constant(density: TestDensity) -> float:
    return math.sqrt(density.sup / (4.0 * math.pi * math.log(2.0)))


# ---------------------------------------------------------------------------
# Monte Carlo risk


@dataclass(frozen=True)
class RiskEstimate:
    mean: float
    stderr: float
    values: np.ndarray = field(repr=False)
    levels: np.ndarray = field(repr=False)


def draw_sample(density: TestDensity, n: int, seed, rep: int) -> Sample:
    return Sample(density.sample(generator(seed, "sample", n, rep), n))


def _selection_seed(seed, n, rep):
    return seed_path(seed, "select", n, rep)


def supnorm_risk_mc(density: TestDensity, kernel: ProjectionKernel, n: int, reps: int, seed, *,
                    j: int | None = None, variant: SelectorVariant | None = None,
                    threads: int = 1, shared_stream: bool = False) -> RiskEstimate:
    """Mean and standard error of ``sup |p_hat - p0|`` over replications.

    Either a fixed level ``j`` or a selector ``variant`` must be given.
    ``shared_stream`` gives every replication the streams of replication 0
    (a test hook: the standard error is then zero).
    """
    if reps < 2:
        raise ValueError("reps must be at least 2")
    if (j is None) == (variant is None):
        raise ValueError("give exactly one of j or variant")

    def one(rep):
        rep = 0 if shared_stream else rep
        s = draw_sample(density, n, seed, rep)
        if j is not None:
            est = estimate_density(s, j, kernel).density
            level = j
        else:
            sel = select(s, kernel, variant, _selection_seed(seed, n, rep))
            est, level = sel.estimate.density, sel.trace.j_hat
        return sup_error(est, density), level

    out = _pmap(one, range(reps), threads)
    vals = np.array([v for v, _ in out])
    levels = np.array([lv for _, lv in out])
    mean, se = _mean_se(vals)
    return RiskEstimate(mean, se, vals, levels)


@dataclass(frozen=True)
class LevelScan:
    """Per-replication deviation ``sup|p_n - Ep_n|`` and risk ``sup|p_n - p0|``."""

    levels: tuple
    deviation: np.ndarray
    risk: np.ndarray

    def _col(self, arr, l):
        return arr[:, self.levels.index(l)]

    def E(self, l):
        return _mean_se(self._col(self.deviation, l))

    def risk_at(self, l):
        return _mean_se(self._col(self.risk, l))


@lru_cache(maxsize=32)
def _level_scan(density, kernel, n, reps, seed, levels, threads):
    expected = {l: expected_density(density, l, kernel) for l in levels}

    def one(rep):
        s = draw_sample(density, n, seed, rep)
        dev, risk = [], []
        for l in levels:
            est = estimate_density(s, l, kernel).density
            dev.append(sup_norm(est - expected[l]))
            risk.append(sup_error(est, density))
        return dev, risk

    out = _pmap(one, range(reps), threads)
    return LevelScan(levels, np.array([d for d, _ in out]), np.array([r for _, r in out]))


def level_scan(density: TestDensity, kernel: ProjectionKernel, n: int, reps: int, seed, *,
               levels=None, threads: int = 1) -> LevelScan:
    """Monte Carlo scan of deviation and risk over the grid levels."""
    if levels is None:
        levels = build_grid(n, kernel.order).levels
    seed_key = tuple(seed) if isinstance(seed, (list, tuple)) else seed
    return _level_scan(density, kernel, n, reps, seed_key, tuple(int(l) for l in levels), threads)


@dataclass(frozen=True)
class OracleLevel:
    level: int
    flagged: bool
    table: dict


def oracle_jstar(density: TestDensity, kernel: ProjectionKernel, n: int, *, bias=None,
                 levels=None) -> OracleLevel:
    """Smallest level whose bias bound is below the deviation constant times ``sigma(j, n)``.

    ``bias`` optionally replaces :func:`bias_bound` (a callable of the level).
    """
    levels = build_grid(n, kernel.order).levels if levels is None else list(levels)
    bias = bias if bias is not None else (lambda l: bias_bound(l, density, kernel))
    scale = SQRT_2LOG2 * math.sqrt(density.sup) * kernel.phi_l2
    table = {}
    chosen = None
    for l in levels:
        B = bias(l)
        D = scale * variance_proxy(l, n)
        table[l] = {"bias": B, "deviation_term": D}
        if chosen is None and B <= D:
            chosen = l
    if chosen is None:
        return OracleLevel(levels[-1], True, table)
    return OracleLevel(chosen, False, table)


def _argmin_smallest(values, levels):
    best = min(values)
    for l, v in zip(levels, values):
        if v == best:
            return l


def oracle_jsharp(density: TestDensity, kernel: ProjectionKernel, n: int, reps: int, seed, *,
                  deviation=None, levels=None, threads: int = 1) -> OracleLevel:
    """``argmin_l max(E(l), B(l))`` with the smallest level on ties.

    ``E(l)`` is estimated by Monte Carlo unless ``deviation`` (a callable of
    the level) is given.
    """
    if reps < 50:
        raise ValueError("reps must be at least 50")
    levels = build_grid(n, kernel.order).levels if levels is None else list(levels)
    table = {}
    crit = []
    scan = None if deviation is not None else level_scan(density, kernel, n, reps, seed,
                                                          levels=levels, threads=threads)
    for l in levels:
        E, se = (deviation(l), 0.0) if deviation is not None else scan.E(l)
        B = bias_bound(l, density, kernel)
        table[l] = {"E": E, "E_stderr": se, "bias": B}
        crit.append(max(E, B))
    return OracleLevel(_argmin_smallest(crit, levels), False, table)


def oracle_jH(density: TestDensity, kernel: ProjectionKernel, n: int, reps: int, seed, *,
              levels=None, threads: int = 1) -> OracleLevel:
    """Level minimising the Monte Carlo sup-norm risk (smallest on ties)."""
    if reps < 50:
        raise ValueError("reps must be at least 50")
    levels = build_grid(n, kernel.order).levels if levels is None else list(levels)
    scan = level_scan(density, kernel, n, reps, seed, levels=levels, threads=threads)
    table = {}
    means = []
    for l in levels:
        m, se = scan.risk_at(l)
        table[l] = {"risk": m, "risk_stderr": se}
        means.append(m)
    return OracleLevel(_argmin_smallest(means, levels), False, table)


# ---------------------------------------------------------------------------
# concentration experiment


@dataclass(frozen=True)
class ViolationReport:
    n: int
    j: int
    reps: int
    sigma2: float
    V_prime: float
    t: np.ndarray
    frequency: np.ndarray
    frequency_conditional: np.ndarray
    bound: np.ndarray
    binomial_se: np.ndarray
    margin: np.ndarray
    centered_mean: tuple
    rademacher_mean: tuple
    mean_Pf: float
    sandwich_ok: bool

    @property
    def ok(self) -> bool:
        return bool(np.all(self.margin >= 0)) and self.sandwich_ok


def empirical_violation_rate(density: TestDensity, n: int, j: int, reps: int, seed, *,
                             t_ladder=None, m_cond: int = 20) -> ViolationReport:
    """Frequency of ``||sum (f(X_i) - Pf)|| >= 2 ||sum eps_i f(X_i)|| + 3t``.

    The class is ``{2^-j K_j(., y) / 2 : y}`` for the Haar kernel, i.e. half
    the indicators of the level-``j`` cells, so every supremum is a maximum
    over cells.  ``m_cond`` extra sign draws per replication estimate the
    conditional Rademacher expectation for the second form of the event.
    """
    if reps < 2:
        raise ValueError("reps must be at least 2")
    h = 2.0 ** -j
    a, b = _cell_range(density, j)
    cells = np.arange(a, b + 1)
    probs = density.cdf((cells + 1) * h) - density.cdf(cells * h)
    centered, rad, rad_cond = np.empty(reps), np.empty(reps), np.empty(reps)
    for rep in range(reps):
        s = draw_sample(density, n, seed, rep)
        k = np.floor(s.xs / h).astype(np.int64)
        pos = np.searchsorted(cells, k)
        counts = np.bincount(pos, minlength=cells.size)
        centered[rep] = 0.5 * np.max(np.abs(counts - n * probs))
        rng = generator(seed, "rademacher", n, rep)
        signs = 1.0 - 2.0 * rng.integers(0, 2, size=(m_cond + 1, n))
        sums = np.zeros((m_cond + 1, cells.size))
        for row in range(m_cond + 1):
            sums[row] = np.bincount(pos, weights=signs[row], minlength=cells.size)
        sup_rows = 0.5 * np.max(np.abs(sums), axis=1)
        rad[rep] = sup_rows[0]
        rad_cond[rep] = sup_rows[1:].mean() if m_cond else sup_rows[0]
    sigma2 = 2.0 ** -j * density.sup * 1.0 / 4.0  # ||Phi||_2 = ||Phi||_inf = 1 for Haar
    Erad, Erad_se = _mean_se(rad)
    Ec, Ec_se = _mean_se(centered)
    inputs = BoundInputs(n=n, sigma2=sigma2, Esup=Ec, Erad=Erad)
    V_prime = inputs.V_rad
    if t_ladder is None:
        # spread ten levels up to where the bound reaches 1e-3
        t_top = _solve_tail(lambda t: 2.0 * math.exp(-t * t / (2.0 * V_prime + 2.0 * t)), 1e-3)
        t_ladder = t_top * np.arange(1, 11) / 10.0
    t_ladder = np.asarray(t_ladder, dtype=float)
    freq = np.array([np.mean(centered >= 2.0 * rad + 3.0 * t) for t in t_ladder])
    freq_c = np.array([np.mean(centered >= 2.0 * rad_cond + 3.0 * t) for t in t_ladder])
    bound = np.array([bound_evaluators(inputs, t)["rademacher"].value for t in t_ladder])
    p = np.minimum(bound, 1.0)
    se = np.sqrt(p * (1.0 - p) / reps)
    margin = np.minimum(bound + 3.0 * se - freq, bound + 3.0 * se - freq_c)
    mean_Pf = 0.5 * float(probs.max())
    lower = 0.5 * Erad - 0.5 * math.sqrt(n) * mean_Pf
    upper = 2.0 * Erad
    slack = 3.0 * math.hypot(Ec_se, 2.0 * Erad_se)
    sandwich = (lower - slack <= Ec) and (Ec <= upper + slack)
    return ViolationReport(n, j, reps, sigma2, V_prime, t_ladder, freq, freq_c, bound, se,
                           margin, (Ec, Ec_se), (Erad, Erad_se), mean_Pf, bool(sandwich))


def _solve_tail(fn, level):
    t = 1.0
    while fn(t) > level:
        t *= 2.0
    lo, hi = 0.0, t
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if fn(mid) > level:
            lo = mid
        else:
            hi = mid
    return hi


# ---------------------------------------------------------------------------
# rates, CLT and constants


@dataclass(frozen=True)
class RateRegression:
    slope: float
    half_width: float
    intercept: float
    ns: tuple
    risks: tuple
    stderrs: tuple = ()
    mean_levels: tuple = ()


def fit_rate(ns, risks, stderrs=(), mean_levels=()) -> RateRegression:
    """Least squares of ``log risk`` on ``log(n / log n)`` with a 95% half-width."""
    ns = np.asarray(ns, dtype=float)
    risks = np.asarray(risks, dtype=float)
    if ns.size < 3:
        raise ValueError("need at least three ladder points")
    x = np.log(ns / np.log(ns))
    y = np.log(risks)
    res = stats.linregress(x, y)
    tq = stats.t.ppf(0.975, ns.size - 2)
    return RateRegression(float(res.slope), float(tq * res.stderr), float(res.intercept),
                          tuple(int(v) for v in ns), tuple(float(v) for v in risks),
                          tuple(float(v) for v in stderrs), tuple(float(v) for v in mean_levels))


def _check_ladder(ladder, minimum=1):
    ladder = [int(n) for n in ladder]
    if len(ladder) < minimum:
        raise ValueError(f"n-ladder needs at least {minimum} values")
    if any(b <= a for a, b in zip(ladder, ladder[1:])):
        raise ValueError("n-ladder must be strictly increasing")
    return ladder


def rate_regression(density: TestDensity, kernel: ProjectionKernel, variant: SelectorVariant,
                    n_ladder, reps: int, seed, *, fixed_level: int | None = None,
                    threads: int = 1) -> RateRegression:
    """Risk over an n-ladder and its log-log slope.

    With ``fixed_level`` every n uses that level instead of the selector.
    """
    ladder = _check_ladder(n_ladder, 5)
    risks, ses, lv = [], [], []
    for n in ladder:
        est = supnorm_risk_mc(density, kernel, n, reps, seed, threads=threads,
                              j=fixed_level, variant=None if fixed_level is not None else variant)
        risks.append(est.mean)
        ses.append(est.stderr)
        lv.append(float(np.mean(est.levels)))
    return fit_rate(ladder, risks, ses, lv)


@lru_cache(maxsize=4)
def brownian_bridge_sups(draws: int = 100_000, grid: int = 4096, seed=0) -> np.ndarray:
    """Sup of ``|B|`` for simulated Brownian bridges on a uniform grid."""
    rng = generator(seed, "bridge", draws, grid)
    out = np.empty(draws)
    chunk = 2000
    t = np.arange(1, grid + 1) / grid
    for start in range(0, draws, chunk):
        m = min(chunk, draws - start)
        steps = rng.standard_normal((m, grid)) / math.sqrt(grid)
        walk = np.cumsum(steps, axis=1)
        bridge = walk - t[None, :] * walk[:, -1:]
        out[start:start + m] = np.abs(bridge).max(axis=1)
    out.flags.writeable = False
    return out


def sup_cdf_error(F: PiecewiseAntiderivative, density: TestDensity, per_cell: int = 64,
                  max_per_cell: int = 1024, rel_change: float = 1e-3) -> float:
    """``sup |F_hat - F|`` on a refined grid over both supports."""
    h = F.width
    a, b = _cell_range(density, F.level)
    lo = min(a, int(F.cells[0]) if F.cells.size else a)
    hi = max(b, int(F.cells[-1]) if F.cells.size else b)
    cells = np.arange(lo, hi + 1)
    q = per_cell
    prev = None
    while True:
        x = ((cells[:, None] + np.linspace(0.0, 1.0, q + 1)[None, :]) * h).reshape(-1)
        cur = float(np.max(np.abs(evaluate_antiderivative(F, x) - density.cdf(x))))
        cur = max(cur, abs(F.total - 1.0))
        if prev is not None and abs(cur - prev) <= rel_change * max(cur, 1e-300):
            return cur
        if q >= max_per_cell:
            return cur
        prev = cur
        q *= 2


def ecdf_sup_error(s: Sample, density: TestDensity) -> float:
    """Exact ``sup |F_n - F|`` from the order statistics."""
    F = density.cdf(s.xs)
    i = np.arange(1, s.n + 1)
    return float(max(np.max(i / s.n - F), np.max(F - (i - 1) / s.n)))


@dataclass(frozen=True)
class CltReport:
    n: int
    reps: int
    ks_estimator: float
    ks_calibration: float
    estimator_stats: np.ndarray = field(repr=False)
    calibration_stats: np.ndarray = field(repr=False)
    ladder: tuple = ()
    median_gap: tuple = ()
    mean_level: float = float("nan")

    @property
    def gap_decreases(self) -> bool:
        return bool(len(self.median_gap) < 2 or self.median_gap[-1] < self.median_gap[0])


def clt_check(density: TestDensity, kernel: ProjectionKernel, variant: SelectorVariant, n: int,
              reps: int, seed, *, ladder=(), ladder_reps: int = 100, ref_draws: int = 100_000,
              bridge_grid: int = 4096, threads: int = 1) -> CltReport:
    """Compare ``sqrt(n) sup |F_hat - F|`` with the Kolmogorov law.

    The reference law is a simulated sample of Brownian-bridge suprema.
    The calibration row uses ``F_n`` in place of ``F_hat``.  For each
    ``n`` in ``ladder`` the median of ``sqrt(n) sup |F_hat - F_n|`` is
    reported as well.
    """
    if reps < 200:
        raise ValueError("reps must be at least 200")
    ref = brownian_bridge_sups(ref_draws, bridge_grid, 0)

    def one(rep):
        s = draw_sample(density, n, seed, rep)
        sel = select(s, kernel, variant, _selection_seed(seed, n, rep))
        return (math.sqrt(n) * sup_cdf_error(sel.cdf.cdf, density),
                math.sqrt(n) * ecdf_sup_error(s, density), sel.trace.j_hat)

    out = _pmap(one, range(reps), threads)
    est = np.array([a for a, _, _ in out])
    cal = np.array([b for _, b, _ in out])
    levels = np.array([c for _, _, c in out], dtype=float)
    ks_est = float(stats.ks_2samp(est, ref).statistic)
    ks_cal = float(stats.ks_2samp(cal, ref).statistic)

    medians = []
    ladder = _check_ladder(ladder) if len(ladder) else []
    for m in ladder:
        def gap(rep, m=m):
            s = draw_sample(density, m, seed, rep)
            sel = select(s, kernel, variant, _selection_seed(seed, m, rep))
            from .estimator import sup_distance_to_ecdf
            return math.sqrt(m) * sup_distance_to_ecdf(sel.cdf, s)
        medians.append(float(np.median(_pmap(gap, range(ladder_reps), threads))))
    return CltReport(n, reps, ks_est, ks_cal, est, cal, tuple(ladder), tuple(medians),
                     float(levels.mean()))


def _gate(value, lo, hi):
    if lo <= value <= hi:
        return "pass"
    if lo / 2.0 <= value <= 2.0 * hi:
        return "warn"
    return "fail"


@dataclass(frozen=True)
class ConstantReport:
    ladder: tuple
    levels: tuple
    normalized_deviation: tuple
    normalized_deviation_se: tuple
    ratio: tuple
    ratio_gate: str
    adaptive_risk: tuple
    adaptive_constant: tuple
    A: float
    constant_gate: str
    sudakov: float
    limit: float


def asymptotic_constant_check(density: TestDensity, n_ladder, reps: int, seed, *,
                              variant: SelectorVariant | None = None,
                              kernel: ProjectionKernel | None = None,
                              threads: int = 1) -> ConstantReport:
    """Normalized deviation at ``j*(n)`` and the adaptive risk constant (Haar).

    Gates: the ratio at the largest ``n`` should lie in ``[0.6, 1.3]`` and
    the adaptive constant be at most ``1.5 A``; values outside but within
    a factor two are reported as ``"warn"``.
    """
    from .spline_kernel import projection_kernel

    kernel = kernel if kernel is not None else projection_kernel(1)
    if kernel.order != 1:
        raise ValueError("the constant check is defined for the Haar kernel")
    variant = variant if variant is not None else SelectorVariant("bar_eps")
    ladder = _check_ladder(n_ladder)
    limit = SQRT_2LOG2 * math.sqrt(density.sup)
    t = density.t
    levels, dev, dev_se, ratio, arisk, aconst = [], [], [], [], [], []
    for n in ladder:
        j = oracle_jstar(density, kernel, n).level
        Ep = expected_density(density, j, kernel)

        def one(rep, n=n, j=j, Ep=Ep):
            s = draw_sample(density, n, seed, rep)
            return sup_norm(estimate_density(s, j, kernel).density - Ep)

        vals = np.array(_pmap(one, range(reps), threads)) * math.sqrt(n / (2.0 ** j * j))
        m, se = _mean_se(vals)
        risk = supnorm_risk_mc(density, kernel, n, reps, seed, variant=variant, threads=threads)
        levels.append(j)
        dev.append(m)
        dev_se.append(se)
        ratio.append(m / limit)
        arisk.append(risk.mean)
        aconst.append((n / math.log(n)) ** (t / (2.0 * t + 1.0)) * risk.mean)
    A = adaptive_constant_A(density)
    return ConstantReport(tuple(ladder), tuple(levels), tuple(dev), tuple(dev_se), tuple(ratio),
                          _gate(ratio[-1], 0.6, 1.3), tuple(arisk), tuple(aconst), A,
                          _gate(aconst[-1], 0.0, 1.5 * A), sudakov_constant(density), limit)


__all__ = [
    "variance_proxy", "bias_bound", "expected_density", "sup_error", "local_holder_W",
    "adaptive_constant_A", "sudakov_constant", "RiskEstimate", "supnorm_risk_mc", "LevelScan",
    "level_scan", "OracleLevel", "oracle_jstar", "oracle_jsharp", "oracle_jH",
    "ViolationReport", "empirical_violation_rate", "RateRegression", "fit_rate",
    "rate_regression", "brownian_bridge_sups", "sup_cdf_error", "ecdf_sup_error", "CltReport",
    "clt_check", "ConstantReport", "asymptotic_constant_check", "cdf_estimate",
]
