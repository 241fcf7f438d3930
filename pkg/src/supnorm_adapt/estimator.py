"""Linear projection estimators for arbitrary signed weights.

``project_measure`` turns a weighted point measure into the piecewise
polynomial ``y -> sum_i w_i K_j(X_i, y)``.  The work is done in B-spline
coefficient space: every observation touches ``r`` coefficients, the
inverse-Gram filter is applied once, and only then are cell polynomials
formed.  Far-apart clusters of observations are laid out next to each
other in a compressed coordinate system with enough zero padding that the
filter cannot mix them, so isolated outliers do not blow up the work.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import sparse

from .piecewise import (
    DyadicPiecewisePoly,
    PiecewiseAntiderivative,
    _candidates,
    _horner,
    _subcell_maps,
    antiderivative,
    evaluate,
    evaluate_antiderivative,
    integral,
    refine_to_level,
)
from .spline_kernel import ProjectionKernel, bspline_pieces, series_coeffs


@dataclass(frozen=True, eq=False)
class Sample:
    """Sorted finite observations."""

    xs: np.ndarray

    def __post_init__(self):
        xs = np.sort(np.asarray(self.xs, dtype=float).reshape(-1))
        if xs.size == 0:
            raise ValueError("sample is empty")
        if not np.all(np.isfinite(xs)):
            raise ValueError("sample contains non-finite values")
        xs.flags.writeable = False
        object.__setattr__(self, "xs", xs)

    @property
    def n(self) -> int:
        return int(self.xs.size)

    def ecdf(self, t, left: bool = False):
        """Empirical CDF ``#{X <= t}/n`` (or ``#{X < t}/n`` with ``left``)."""
        side = "left" if left else "right"
        return np.searchsorted(self.xs, t, side=side) / self.n


class _Layout:
    """Compressed coordinates for a sparse set of B-spline coefficient indices."""

    def __init__(self, idx, K: int, r: int):
        idx = np.asarray(idx, dtype=np.int64)
        self.K, self.r = K, r
        pad = 2 * K + r
        if idx.size == 0:
            self.pos = idx
            self.size = 0
            self.blocks = []
            return
        breaks = np.flatnonzero(np.diff(idx) - 1 > pad) + 1
        starts = np.concatenate([[0], breaks])
        stops = np.concatenate([breaks, [idx.size]])
        self.blocks = []
        pos = np.empty(idx.size, dtype=np.int64)
        off = 0
        for a, b in zip(starts, stops):
            lo, hi = int(idx[a]), int(idx[b - 1])
            pos[a:b] = off + (idx[a:b] - lo)
            self.blocks.append((off, lo, hi))
            off += hi - lo + 1 + pad
        self.pos = pos
        self.size = off

    @cached_property
    def cell_map(self):
        """Positions in the series output and the real cells they stand for."""
        K, r = self.K, self.r
        take, cells = [], []
        for off, lo, hi in self.blocks:
            span = hi - lo + 2 * K + r
            take.append(off + np.arange(span))
            cells.append(lo - K + np.arange(span))
        if not take:
            return np.zeros(0, np.int64), np.zeros(0, np.int64)
        return np.concatenate(take), np.concatenate(cells)

    def to_cells(self, coefs, g_full):
        """Filter compressed coefficients with ``g`` and form cell polynomials.

        ``coefs`` has shape ``(..., size)``; returns ``(cells, poly)`` with
        ``poly`` of shape ``(..., len(cells), r)``.
        """
        K = self.K
        n = coefs.shape[-1]
        filt = np.zeros(coefs.shape[:-1] + (n + 2 * K,))
        for s in range(-K, K + 1):
            filt[..., K - s:K - s + n] += g_full[s + K] * coefs
        poly = series_coeffs(filt, self.r)
        take, cells = self.cell_map
        return cells, poly[..., take, :]


class SampleDesign:
    """Per-level precomputation for projecting weights on a fixed sample.

    Parameters
    ----------
    sample : Sample
    j : int
        Resolution level.
    kernel : ProjectionKernel
    """

    def __init__(self, sample: Sample, j: int, kernel: ProjectionKernel):
        if j < 0:
            raise ValueError("level must be non-negative")
        self.sample, self.j, self.kernel = sample, int(j), kernel
        r = kernel.order
        pieces = bspline_pieces(r)
        t = np.ldexp(sample.xs, self.j)
        base = np.floor(t)
        u = t - base
        base = base.astype(np.int64)
        vals = np.empty((r, sample.n))
        for p in range(r):
            vals[p] = _horner(pieces[p], u)
        idx = base[None, :] - np.arange(r)[:, None]
        uniq, inverse = np.unique(idx.reshape(-1), return_inverse=True)
        self.layout = _Layout(uniq, kernel.K_trunc, r)
        self._rows = self.layout.pos[inverse]
        self._vals = vals.reshape(-1)
        self._cols = np.tile(np.arange(sample.n), r)
        self._g = kernel.inv_gram.full()

    @cached_property
    def _matrix(self):
        return sparse.csr_matrix(
            (self._vals, (self._rows, self._cols)),
            shape=(self.layout.size, self.sample.n),
        )

    def coefficients(self, weights):
        """B-spline coefficients for ``weights`` of shape ``(n,)`` or ``(m, n)``."""
        w = np.asarray(weights, dtype=float)
        if w.shape[-1] != self.sample.n:
            raise ValueError(f"expected {self.sample.n} weights, got {w.shape[-1]}")
        # Weights of one magnitude per row (empirical measure, sign draws) are
        # accumulated as signs and scaled once, so Haar cells hold count * w exactly.
        mag = np.abs(w).max(axis=-1, keepdims=True)
        if np.all(np.abs(w) == mag) and np.all(mag > 0):
            w, scale = np.sign(w), mag
        else:
            scale = None
        if w.ndim == 1:
            out = np.bincount(self._rows, weights=self._vals * np.tile(w, self.kernel.order),
                              minlength=self.layout.size)
        else:
            out = np.asarray((self._matrix @ w.T).T)
        return out if scale is None else out * scale

    def project(self, weights):
        """``(cells, coeffs)`` of the weighted projection, batched over leading axes."""
        coefs = self.coefficients(weights)
        cells, poly = self.layout.to_cells(coefs, self._g)
        return cells, np.ldexp(poly, self.j)

    def density(self, weights) -> DyadicPiecewisePoly:
        cells, poly = self.project(weights)
        return DyadicPiecewisePoly(self.j, cells, poly)


@dataclass(frozen=True, eq=False)
class DensityEstimate:
    j: int
    density: DyadicPiecewisePoly
    kernel_order: int

    def __call__(self, y):
        return evaluate(self.density, y)


@dataclass(frozen=True, eq=False)
class CdfEstimate:
    cdf: PiecewiseAntiderivative
    total_mass: float
    density: DyadicPiecewisePoly

    def __call__(self, t):
        return evaluate_antiderivative(self.cdf, t)


def project_measure(points: Sample, weights, j: int, kernel: ProjectionKernel) -> DensityEstimate:
    """``y -> sum_i w_i K_j(X_i, y)`` for a single weight vector."""
    if not isinstance(points, Sample):
        points = Sample(points)
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.size != points.n:
        raise ValueError(f"expected {points.n} weights, got shape {w.shape}")
    design = SampleDesign(points, j, kernel)
    return DensityEstimate(int(j), design.density(w), kernel.order)


def estimate_density(points: Sample, j: int, kernel: ProjectionKernel) -> DensityEstimate:
    """The projection estimator with weights ``1/n``."""
    if not isinstance(points, Sample):
        points = Sample(points)
    return project_measure(points, np.full(points.n, 1.0 / points.n), j, kernel)


def _coefficients_to_poly(j, kernel, idx, contrib):
    uniq, inverse = np.unique(idx, return_inverse=True)
    layout = _Layout(uniq, kernel.K_trunc, kernel.order)
    coefs = np.bincount(layout.pos[inverse], weights=contrib, minlength=layout.size)
    cells, poly = layout.to_cells(coefs, kernel.inv_gram.full())
    return DyadicPiecewisePoly(j, cells, np.ldexp(poly, j))


def project_function(f: DyadicPiecewisePoly, j: int, kernel: ProjectionKernel) -> DyadicPiecewisePoly:
    """``pi_j f (y) = ∫ K_j(y, x) f(x) dx`` by exact piecewise integration."""
    r = kernel.order
    level = max(f.level, j)
    f = refine_to_level(f, level)
    if f.cells.size == 0:
        return DyadicPiecewisePoly.zero(j)
    s = level - j
    # B-spline pieces re-expanded on each of the 2^s subcells of a level-j cell
    pieces = bspline_pieces(r)
    maps = _subcell_maps(s, r)
    sub = np.einsum("iab,pb->ipa", maps, pieces)
    big = f.cells >> s
    which = f.cells - (big << s)
    df = f.coeffs.shape[1]
    hilbert = 1.0 / (np.arange(df)[:, None] + np.arange(r)[None, :] + 1.0)
    # ∫_0^1 f_cell(v) * piece_p((i + v)/2^s) dv, times the cell width
    inner = np.einsum("ma,ab,mpb->mp", f.coeffs, hilbert, sub[which]) * f.width
    idx = (big[:, None] - np.arange(r)[None, :]).reshape(-1)
    return _coefficients_to_poly(j, kernel, idx, inner.reshape(-1))


def cdf_estimate(d: DensityEstimate) -> CdfEstimate:
    F = antiderivative(d.density)
    return CdfEstimate(F, F.total, d.density)


def _density_roots(p: DyadicPiecewisePoly, iters: int = 64):
    """Points inside cells where ``p`` changes sign."""
    if p.cells.size == 0:
        return np.zeros(0)
    u = np.sort(_candidates(p.coeffs), axis=-1)  # NaNs sort last
    a, b = u[:, :-1], u[:, 1:]
    ok = ~(np.isnan(a) | np.isnan(b))
    a = np.where(ok, a, 0.0)
    b = np.where(ok, b, 0.0)
    coeffs = p.coeffs[:, None, :]
    fa = _horner(coeffs, a)
    fb = _horner(coeffs, b)
    change = ok & (fa * fb < 0)
    if not change.any():
        return np.zeros(0)
    cell_i, seg = np.nonzero(change)
    lo, hi = a[cell_i, seg], b[cell_i, seg]
    c = p.coeffs[cell_i]
    flo = fa[cell_i, seg]
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        fm = _horner(c, mid)
        left = np.sign(fm) == np.sign(flo)
        lo = np.where(left, mid, lo)
        flo = np.where(left, fm, flo)
        hi = np.where(left, hi, mid)
    return (p.cells[cell_i] + 0.5 * (lo + hi)) * p.width


def sup_distance_to_ecdf(c: CdfEstimate, s: Sample) -> float:
    """``sup_t |F_S(t) - F_n(t)|`` over the real line.

    Between consecutive candidate points the empirical CDF is constant and
    the smoothed CDF is monotone, so the sup is attained (as a limit) at a
    candidate: observations, cell edges, or sign changes of the density.
    """
    if not isinstance(s, Sample):
        s = Sample(s)
    p = c.density
    edges = np.concatenate([p.cells, p.cells + 1]) * p.width if p.cells.size else np.zeros(0)
    pts = np.concatenate([s.xs, edges, _density_roots(p)])
    F = c(pts)
    right = s.ecdf(pts)
    left = s.ecdf(pts, left=True)
    gap = np.maximum(np.abs(F - right), np.abs(F - left))
    tail = abs(c.total_mass - 1.0)
    return float(max(gap.max(), tail))


def total_mass(d: DensityEstimate) -> float:
    return integral(d.density)
