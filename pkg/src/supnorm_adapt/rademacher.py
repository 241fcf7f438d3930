"""Rademacher suprema of symmetrized projection processes.

For a sample and sign vector ``eps`` the level-``j`` supremum is

    R(n, j)    = 2 || (1/n) sum_i eps_i K_j(X_i, .) ||_inf

and the pair supremum ``T(n, j, l)`` uses ``K_j - K_l`` instead.  Both are
exact sup norms of piecewise polynomials.  ``LevelEngine`` evaluates them
for a whole batch of weight vectors at once; the selectors use it for the
statistics as well, with weights ``1/n``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from ._rng import generator, seed_path
from .estimator import Sample, SampleDesign
from .piecewise import _refine_cells, _refine_coeffs, _sup_abs, _union_index
from .spline_kernel import ProjectionKernel

MAX_EXACT_N = 20
_CHUNK_ELEMENTS = 2_000_000


@dataclass(frozen=True, eq=False)
class RademacherDraw:
    signs: np.ndarray
    seed_path: tuple = ()

    def __post_init__(self):
        s = np.asarray(self.signs, dtype=float)
        if s.ndim not in (1, 2) or not np.all(np.abs(s) == 1.0):
            raise ValueError("signs must be +-1")
        s.flags.writeable = False
        object.__setattr__(self, "signs", s)

    @property
    def n(self) -> int:
        return self.signs.shape[-1]


def draw_signs(n: int, seed, *path, m: int | None = None) -> RademacherDraw:
    """``m`` (or one) independent sign vectors of length ``n``."""
    rng = generator(seed, "rademacher", *path)
    shape = (n,) if m is None else (m, n)
    signs = 1.0 - 2.0 * rng.integers(0, 2, size=shape)
    return RademacherDraw(signs, seed_path(seed, "rademacher", *path))


def all_sign_vectors(n: int) -> np.ndarray:
    """Every element of ``{-1, 1}^n`` (rows), for small ``n``."""
    if n > MAX_EXACT_N:
        raise ValueError(f"exact enumeration limited to n <= {MAX_EXACT_N}")
    codes = np.arange(1 << n, dtype=np.int64)
    bits = (codes[:, None] >> np.arange(n)) & 1
    return 1.0 - 2.0 * bits


class LevelEngine:
    """Batched sup norms of projections at several levels and of their differences.

    Parameters
    ----------
    sample : Sample
    levels : iterable of int
    kernel : ProjectionKernel
    """

    def __init__(self, sample: Sample, levels, kernel: ProjectionKernel):
        self.sample = sample
        self.kernel = kernel
        self.levels = sorted({int(j) for j in levels})
        self.designs = {j: SampleDesign(sample, j, kernel) for j in self.levels}
        self._pairs = {}
        self.cells = {j: d.layout.cell_map[1] for j, d in self.designs.items()}

    def _pair_index(self, j, l):
        key = (j, l)
        if key not in self._pairs:
            fine = _refine_cells(self.cells[j], l - j)
            self._pairs[key] = _union_index(fine, self.cells[l])
        return self._pairs[key]

    def project(self, weights):
        """Per-level ``(m, cells, r)`` coefficient arrays."""
        return {j: d.project(weights)[1] for j, d in self.designs.items()}

    def _sups_chunk(self, weights, pairs):
        polys = self.project(weights)
        R = {j: _sup_abs(c) for j, c in polys.items()}
        T = {}
        for j, l in pairs:
            union, ia, ib = self._pair_index(j, l)
            fine = _refine_coeffs(polys[j], l - j)
            diff = np.zeros(fine.shape[:-2] + (union.size, fine.shape[-1]))
            diff[..., ia, :] += fine
            diff[..., ib, :] -= polys[l]
            T[(j, l)] = _sup_abs(diff)
        return R, T

    def sups(self, weights, pairs=None):
        """Sup norms for a batch of weight vectors.

        Returns ``(R, T)`` with ``R[j]`` and ``T[(j, l)]`` arrays over the
        leading axis of ``weights`` (scalars for a single weight vector).
        ``pairs`` defaults to every ``j < l``.
        """
        w = np.asarray(weights, dtype=float)
        if pairs is None:
            pairs = list(itertools.combinations(self.levels, 2))
        if w.ndim == 1:
            R, T = self._sups_chunk(w[None, :], pairs)
            return {k: float(v[0]) for k, v in R.items()}, {k: float(v[0]) for k, v in T.items()}
        widest = max(c.size for c in self.cells.values()) * self.kernel.order
        if pairs:
            widest = max(widest, max(self._pair_index(j, l)[0].size for j, l in pairs) * self.kernel.order)
        step = max(1, _CHUNK_ELEMENTS // max(widest, 1))
        Rs, Ts = [], []
        for start in range(0, w.shape[0], step):
            R, T = self._sups_chunk(w[start:start + step], pairs)
            Rs.append(R)
            Ts.append(T)
        R = {j: np.concatenate([c[j] for c in Rs]) for j in self.levels}
        T = {p: np.concatenate([c[p] for c in Ts]) for p in pairs}
        return R, T


def _sign_weights(draw: RademacherDraw, n: int):
    if draw.n != n:
        raise ValueError(f"draw has {draw.n} signs for a sample of size {n}")
    return draw.signs / n


def rademacher_sup(s: Sample, draw: RademacherDraw, j: int, kernel: ProjectionKernel):
    """``R(n, j) = 2 sup |(1/n) sum eps_i K_j(X_i, .)|``."""
    engine = LevelEngine(s, [j], kernel)
    R, _ = engine.sups(_sign_weights(draw, s.n), pairs=[])
    return _scale(R[j])


def pair_sup(s: Sample, draw: RademacherDraw, j: int, l: int, kernel: ProjectionKernel):
    """``T(n, j, l) = 2 sup |(1/n) sum eps_i (K_j - K_l)(X_i, .)|`` for ``j < l``."""
    if not j < l:
        raise ValueError(f"pair supremum needs j < l, got j={j}, l={l}")
    engine = LevelEngine(s, [j, l], kernel)
    _, T = engine.sups(_sign_weights(draw, s.n), pairs=[(j, l)])
    return _scale(T[(j, l)])


def _scale(v):
    return 2.0 * v if np.ndim(v) else 2.0 * float(v)


class ExpectedSup(NamedTuple):
    mean: float
    stderr: float
    m_draws: int
    exact: bool


def cond_expect_sup(s: Sample, m: int, seed, j: int, l: int | None = None,
                    kernel: ProjectionKernel | None = None, exact: bool = False) -> ExpectedSup:
    """Average of ``R(n, j)`` (or ``T(n, j, l)``) over sign draws.

    With ``exact=True`` all ``2^n`` sign vectors are enumerated (``n <= 20``)
    and the standard error is zero; otherwise ``m`` draws come from the
    seeded stream.
    """
    if kernel is None:
        raise ValueError("kernel is required")
    if m < 1:
        raise ValueError("m must be at least 1")
    if l is not None and not j < l:
        raise ValueError(f"pair supremum needs j < l, got j={j}, l={l}")
    levels = [j] if l is None else [j, l]
    pairs = [] if l is None else [(j, l)]
    engine = LevelEngine(s, levels, kernel)
    if exact:
        signs = all_sign_vectors(s.n)
    else:
        signs = draw_signs(s.n, seed, m=m).signs
    R, T = engine.sups(signs / s.n, pairs=pairs)
    vals = 2.0 * (R[j] if l is None else T[(j, l)])
    if exact:
        return ExpectedSup(float(vals.mean()), 0.0, vals.size, True)
    se = float(vals.std(ddof=1) / np.sqrt(vals.size)) if vals.size > 1 else float("nan")
    return ExpectedSup(float(vals.mean()), se, vals.size, False)


@dataclass(frozen=True)
class ThresholdStats:
    """Rademacher suprema for every level and every pair of a grid.

    ``R`` and ``T`` are averages over ``m_draws`` sign vectors (a single
    draw for the plain variants); ``R_se`` and ``T_se`` are their Monte
    Carlo standard errors (zero for one draw).
    """

    R: dict
    T: dict
    m_draws: int
    R_se: dict = field(default_factory=dict)
    T_se: dict = field(default_factory=dict)

    def pair(self, j, l):
        return 0.0 if j == l else self.T[(j, l)]


def threshold_stats(engine: LevelEngine, signs) -> ThresholdStats:
    """Rademacher suprema on every level/pair of ``engine`` averaged over draws."""
    signs = np.atleast_2d(signs)
    n = engine.sample.n
    R, T = engine.sups(signs / n)
    m = signs.shape[0]

    def summarize(d):
        means = {k: float(2.0 * v.mean()) for k, v in d.items()}
        ses = {k: (float(2.0 * v.std(ddof=1) / np.sqrt(m)) if m > 1 else 0.0) for k, v in d.items()}
        return means, ses

    Rm, Rse = summarize(R)
    Tm, Tse = summarize(T)
    return ThresholdStats(Rm, Tm, m, Rse, Tse)


__all__ = [
    "RademacherDraw",
    "ThresholdStats",
    "ExpectedSup",
    "LevelEngine",
    "draw_signs",
    "all_sign_vectors",
    "rademacher_sup",
    "pair_sup",
    "cond_expect_sup",
    "threshold_stats",
]
