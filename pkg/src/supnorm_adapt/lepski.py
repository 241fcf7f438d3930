"""Resolution grid and Lepski-type selection of the resolution level.

A level ``j`` is accepted when, for every finer grid level ``l``, the sup
distance between the level-``j`` and level-``l`` estimates stays below a
threshold built from Rademacher suprema plus a deterministic term
``const * sqrt(plug_in) * sqrt(2^l l / n)``.  The smallest accepted level
wins; ``j_max`` is used when no coarser level is accepted.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .estimator import CdfEstimate, DensityEstimate, Sample, cdf_estimate, sup_distance_to_ecdf
from .piecewise import DyadicPiecewisePoly, sup_norm
from .rademacher import LevelEngine, ThresholdStats, draw_signs, threshold_stats
from .spline_kernel import ProjectionKernel

VARIANTS = ("bar_eps", "bar", "tilde_eps", "tilde", "route")
DEFAULT_M_DRAWS = 100


class DegenerateGridError(ValueError):
    """The sample is too small for a grid with ``j_min < j_max``."""


@dataclass(frozen=True)
class ResolutionGrid:
    j_min: int
    j_max: int

    def __post_init__(self):
        if not 0 < self.j_min < self.j_max:
            raise DegenerateGridError(
                f"degenerate resolution grid: j_min={self.j_min}, j_max={self.j_max}"
            )

    @property
    def levels(self) -> list[int]:
        return list(range(self.j_min, self.j_max + 1))


def grid_bounds(n: int, r: int) -> tuple[int, int]:
    """``(j_min, j_max)`` before validation."""
    if n < 2:
        return 1, 0
    ln = math.log(n)
    j_min = max(1, math.floor(math.log2((n / ln) ** (1.0 / (2 * r + 1)))))
    ratio = n / ln ** 2
    j_max = math.floor(math.log2(ratio)) if ratio > 0 else 0
    return j_min, j_max


def build_grid(n: int, r: int) -> ResolutionGrid:
    """Grid with ``2^j_min ~ (n/ln n)^(1/(2r+1))`` and ``2^j_max ~ n/(ln n)^2``."""
    j_min, j_max = grid_bounds(n, r)
    if not j_min < j_max or n < n_min(r):
        raise DegenerateGridError(
            f"n={n} is too small for order {r}: j_min={j_min}, j_max={j_max} "
            f"(need j_min < j_max, i.e. n >= {n_min(r)})"
        )
    return ResolutionGrid(j_min, j_max)


@lru_cache(maxsize=None)
def n_min(r: int) -> int:
    """Smallest ``n`` such that every sample size ``>= n`` has a non-degenerate grid.

    ``n / (ln n)^2`` dips to its minimum near ``e^2``, so tiny samples can
    pass the ``j_min < j_max`` test by accident; both bounds are
    nondecreasing from ``n = 8`` on, which makes the first success there
    the threshold.
    """
    n = 8
    while True:
        a, b = grid_bounds(n, r)
        if a < b:
            return n
        n += 1


def _deterministic_term(const, kernel_l2, plug_in_sup, l, n):
    return const * kernel_l2 * math.sqrt(plug_in_sup) * math.sqrt(2.0 ** l * l / n)


def threshold_bar(j: int, l: int, stats: ThresholdStats, plug_in_sup: float,
                  kernel: ProjectionKernel, n: int) -> float:
    """``T(n,j,l) + 7 ||Phi||_2 sqrt(plug_in) sqrt(2^l l / n)``."""
    if not j < l:
        raise ValueError(f"threshold needs j < l, got j={j}, l={l}")
    return stats.pair(j, l) + _deterministic_term(7.0, kernel.phi_l2, plug_in_sup, l, n)


def threshold_tilde(l: int, stats: ThresholdStats, plug_in_sup: float,
                    kernel: ProjectionKernel, n: int) -> float:
    """``(B + 1) R(n,l) + 7 ||Phi||_2 sqrt(plug_in) sqrt(2^l l / n)``."""
    return ((kernel.op_norm_bound + 1.0) * stats.R[l]
            + _deterministic_term(7.0, kernel.phi_l2, plug_in_sup, l, n))


def threshold_route(l: int, stats: ThresholdStats, plug_in_sup: float, n: int,
                    kernel: ProjectionKernel | None = None) -> float:
    """``5 R(n,l) + 10 sqrt(plug_in) sqrt(2^l l / n)`` (Haar only)."""
    if kernel is not None and kernel.order != 1:
        raise ValueError("the route threshold is defined for the Haar kernel only")
    return 5.0 * stats.R[l] + _deterministic_term(10.0, 1.0, plug_in_sup, l, n)


@dataclass(frozen=True)
class SelectorVariant:
    """Which threshold to use and how the Rademacher terms are obtained.

    ``bar_eps``/``tilde_eps``/``route`` use one sign draw; ``bar``/``tilde``
    average over ``m_draws`` draws.  ``refresh_draws`` redraws the signs
    for every candidate level instead of sharing one draw per run.
    """

    kind: str = "bar_eps"
    m_draws: int = DEFAULT_M_DRAWS
    cdf_constraint: bool = False
    refresh_draws: bool = False

    def __post_init__(self):
        kind = self.kind.replace("-", "_")
        if kind not in VARIANTS:
            raise ValueError(f"unknown selector {self.kind!r}; choose from {VARIANTS}")
        if self.m_draws < 1:
            raise ValueError("m_draws must be at least 1")
        object.__setattr__(self, "kind", kind)

    @property
    def draws(self) -> int:
        return self.m_draws if self.kind in ("bar", "tilde") else 1


@dataclass(frozen=True)
class PairTest:
    j: int
    l: int
    statistic: float
    threshold: float
    rademacher: float
    passed: bool


@dataclass
class SelectionTrace:
    grid: ResolutionGrid
    variant: SelectorVariant
    plug_in: float
    tests: list[PairTest] = field(default_factory=list)
    cdf_distance: dict = field(default_factory=dict)
    cdf_bound: float | None = None
    j_hat: int | None = None
    fallback: bool = False
    sentinel: bool = False


class Selection(NamedTuple):
    trace: SelectionTrace
    estimate: DensityEstimate
    cdf: CdfEstimate


@dataclass(frozen=True, eq=False)
class EmpiricalCdfSentinel:
    """No level met the distribution-function constraint: use ``F_n``."""

    trace: SelectionTrace
    sample: Sample

    def __call__(self, t):
        return self.sample.ecdf(t)


def cdf_constraint_bound(n: int) -> float:
    """``1 / (sqrt(n) ln n)``."""
    return 1.0 / (math.sqrt(n) * math.log(n))


def _stats_for(engine, variant, seed, tag=()):
    signs = draw_signs(engine.sample.n, seed, *tag, m=variant.draws).signs
    return threshold_stats(engine, signs)


def _threshold(variant, j, l, stats, plug_in, kernel, n):
    if variant.kind in ("bar_eps", "bar"):
        return threshold_bar(j, l, stats, plug_in, kernel, n), stats.pair(j, l)
    if variant.kind in ("tilde_eps", "tilde"):
        return threshold_tilde(l, stats, plug_in, kernel, n), stats.R[l]
    return threshold_route(l, stats, plug_in, n, kernel), stats.R[l]


def _run(s, kernel, variant, seed, grid, threshold_scale, constrained):
    if not isinstance(s, Sample):
        s = Sample(s)
    if variant.kind == "route" and kernel.order != 1:
        raise ValueError("the route selector requires the Haar kernel (order 1)")
    n = s.n
    grid = grid if grid is not None else build_grid(n, kernel.order)
    levels = grid.levels
    engine = LevelEngine(s, levels, kernel)
    estimates = {
        j: DyadicPiecewisePoly(j, engine.cells[j], c[0])
        for j, c in engine.project(np.full((1, n), 1.0 / n)).items()
    }
    # statistics: sup distances between the estimates themselves
    _, stat = engine.sups(np.full(n, 1.0 / n))
    plug_in = sup_norm(estimates[grid.j_max])
    trace = SelectionTrace(grid, variant, plug_in)
    shared = None if variant.refresh_draws else _stats_for(engine, variant, seed)

    cdfs = {}

    def cdf_ok(j):
        if j not in cdfs:
            cdfs[j] = cdf_estimate(DensityEstimate(j, estimates[j], kernel.order))
            trace.cdf_distance[j] = sup_distance_to_ecdf(cdfs[j], s)
        return trace.cdf_distance[j] <= trace.cdf_bound

    if constrained:
        trace.cdf_bound = cdf_constraint_bound(n)
        if not cdf_ok(grid.j_max):
            trace.sentinel = True
            trace.fallback = True
            return trace, None, estimates

    chosen = None
    for j in levels[:-1]:
        if constrained and not cdf_ok(j):
            continue
        stats = shared if shared is not None else _stats_for(engine, variant, seed, (j,))
        accepted = True
        for l in levels:
            if l <= j:
                continue
            thr, rad = _threshold(variant, j, l, stats, plug_in, kernel, n)
            thr *= threshold_scale
            ok = bool(stat[(j, l)] <= thr)
            trace.tests.append(PairTest(j, l, stat[(j, l)], thr, rad, ok))
            if not ok:
                accepted = False
                break
        if accepted:
            chosen = j
            break
    if chosen is None:
        chosen = grid.j_max
        trace.fallback = True
    trace.j_hat = chosen
    return trace, chosen, estimates


def select(s: Sample, kernel: ProjectionKernel, variant: SelectorVariant, seed, *,
           grid: ResolutionGrid | None = None, threshold_scale: float = 1.0) -> Selection:
    """Choose the resolution level and return ``(trace, estimate, cdf)``.

    ``threshold_scale`` multiplies every threshold; ``inf`` accepts the
    coarsest level and ``0`` rejects every comparison.  It exists for
    testing the scan logic.
    """
    if variant.cdf_constraint:
        out = select_with_cdf_constraint(s, kernel, variant, seed, grid=grid,
                                         threshold_scale=threshold_scale)
        if isinstance(out, EmpiricalCdfSentinel):
            raise ValueError("distribution-function constraint failed at j_max; "
                             "use select_with_cdf_constraint to receive the sentinel")
        return out
    trace, j, estimates = _run(s, kernel, variant, seed, grid, threshold_scale, False)
    est = DensityEstimate(j, estimates[j], kernel.order)
    return Selection(trace, est, cdf_estimate(est))


def select_with_cdf_constraint(s: Sample, kernel: ProjectionKernel, variant: SelectorVariant,
                               seed, *, grid: ResolutionGrid | None = None,
                               threshold_scale: float = 1.0):
    """Selection restricted to levels whose CDF is within ``1/(sqrt(n) ln n)`` of ``F_n``.

    Returns an :class:`EmpiricalCdfSentinel` when even ``j_max`` fails.
    """
    if not isinstance(s, Sample):
        s = Sample(s)
    trace, j, estimates = _run(s, kernel, variant, seed, grid, threshold_scale, True)
    if trace.sentinel:
        return EmpiricalCdfSentinel(trace, s)
    est = DensityEstimate(j, estimates[j], kernel.order)
    return Selection(trace, est, cdf_estimate(est))
