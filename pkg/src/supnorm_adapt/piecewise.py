"""Piecewise polynomials on dyadic grids.

A function is stored as one polynomial per occupied cell
``[k 2^-j, (k+1) 2^-j)``, written in the local variable ``u = 2^j y - k``
so that conditioning does not degrade at fine levels.  Cells are kept as a
sorted integer array; cells that are not listed carry the zero polynomial.

The module-level helpers prefixed with an underscore operate on raw
coefficient arrays with arbitrary leading batch axes.  The estimator and
the Rademacher engine use them to process many weight vectors at once.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

MAX_DEGREE = 3


# ---------------------------------------------------------------------------
# raw coefficient helpers


def _horner(coeffs, u):
    """Evaluate ascending coefficients ``coeffs[..., d]`` at ``u``."""
    out = np.zeros(np.broadcast_shapes(coeffs.shape[:-1], np.shape(u)))
    for d in range(coeffs.shape[-1] - 1, -1, -1):
        out = out * u + coeffs[..., d]
    return out


def _pad_degree(coeffs, width):
    extra = width - coeffs.shape[-1]
    if extra <= 0:
        return coeffs
    pad = [(0, 0)] * (coeffs.ndim - 1) + [(0, extra)]
    return np.pad(coeffs, pad)


def _subcell_maps(s: int, width: int) -> np.ndarray:
    """Matrices re-expanding a polynomial in u onto the 2^s subcells.

    Row ``i`` maps ascending coefficients in ``u`` to coefficients in the
    subcell variable ``v`` where ``u = (i + v) / 2^s``.
    """
    m = 1 << s
    frac = np.arange(m, dtype=float) / m
    scale = 0.5 ** s
    out = np.zeros((m, width, width))
    for b in range(width):
        for a in range(b + 1):
            out[:, a, b] = comb(b, a) * frac ** (b - a) * scale ** a
    return out


def _refine_coeffs(coeffs, s: int):
    """Split every cell of ``coeffs[..., cells, d]`` into 2^s subcells."""
    if s == 0:
        return coeffs
    maps = _subcell_maps(s, coeffs.shape[-1])
    fine = np.einsum("iab,...cb->...cia", maps, coeffs)
    shape = coeffs.shape[:-2] + (coeffs.shape[-2] << s, coeffs.shape[-1])
    return fine.reshape(shape)


def _refine_cells(cells, s: int):
    if s == 0:
        return cells
    m = 1 << s
    return (cells[:, None] * m + np.arange(m)).reshape(-1)


def _critical_points(coeffs):
    """Roots of the derivative inside (0, 1), NaN where absent.

    Returns an array of shape ``coeffs.shape[:-1] + (2,)``.
    """
    c = _pad_degree(coeffs, 4)
    a = 3.0 * c[..., 3]
    b = 2.0 * c[..., 2]
    cc = c[..., 1]
    roots = np.full(c.shape[:-1] + (2,), np.nan)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        disc = b * b - 4.0 * a * cc
        sq = np.sqrt(np.where(disc >= 0, disc, np.nan))
        q = -0.5 * (b + np.copysign(sq, b))
        quad = a != 0
        r1 = np.where(quad, q / a, np.where(b != 0, -cc / b, np.nan))
        r2 = np.where(quad & (q != 0), cc / q, np.nan)
    roots[..., 0] = r1
    roots[..., 1] = r2
    inside = (roots > 0) & (roots < 1)
    return np.where(inside, roots, np.nan)


def _candidates(coeffs):
    """Endpoints and interior critical points of each cell, NaN padded."""
    ends = np.broadcast_to(np.array([0.0, 1.0]), coeffs.shape[:-1] + (2,))
    return np.concatenate([ends, _critical_points(coeffs)], axis=-1)


def _cell_abs_max(coeffs):
    """Per-cell sup of |p| and the local position where it is reached."""
    u = _candidates(coeffs)
    vals = np.abs(_horner(coeffs[..., None, :], np.nan_to_num(u, nan=0.0)))
    vals = np.where(np.isnan(u), -np.inf, vals)
    idx = np.argmax(vals, axis=-1)
    best = np.take_along_axis(vals, idx[..., None], axis=-1)[..., 0]
    where = np.take_along_axis(u, idx[..., None], axis=-1)[..., 0]
    return best, where


def _sup_abs(coeffs):
    """Sup of |p| over all cells for each batch entry; 0 for no cells."""
    if coeffs.shape[-2] == 0:
        return np.zeros(coeffs.shape[:-2])
    best, _ = _cell_abs_max(coeffs)
    return best.max(axis=-1)


def _union_index(cells_a, cells_b):
    """Union of two sorted cell arrays plus positions of each input in it."""
    union = np.union1d(cells_a, cells_b)
    return union, np.searchsorted(union, cells_a), np.searchsorted(union, cells_b)


# ---------------------------------------------------------------------------
# public type


@dataclass(frozen=True, eq=False)
class DyadicPiecewisePoly:
    """Polynomial of degree at most 3 on each listed level-``level`` cell.

    Parameters
    ----------
    level : int
        Dyadic level ``j >= 0``; cells have width ``2**-j``.
    cells : array of int
        Strictly increasing cell indices ``k``.
    coeffs : array, shape (len(cells), degree + 1)
        Ascending monomial coefficients in ``u = 2**j * y - k``.
    """

    level: int
    cells: np.ndarray
    coeffs: np.ndarray

    def __post_init__(self):
        if int(self.level) != self.level or self.level < 0:
            raise ValueError(f"level must be a non-negative integer, got {self.level}")
        cells = np.array(self.cells, dtype=np.int64).reshape(-1)
        coeffs = np.array(self.coeffs, dtype=float)
        if coeffs.ndim != 2 or coeffs.shape[0] != cells.size:
            raise ValueError("coeffs must have one row per cell")
        if coeffs.shape[1] == 0:
            coeffs = np.zeros((cells.size, 1))
        if coeffs.shape[1] - 1 > MAX_DEGREE:
            raise ValueError(f"degree {coeffs.shape[1] - 1} exceeds {MAX_DEGREE}")
        if cells.size > 1 and np.any(np.diff(cells) <= 0):
            raise ValueError("cells must be strictly increasing")
        cells.flags.writeable = False
        coeffs.flags.writeable = False
        object.__setattr__(self, "level", int(self.level))
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def zero(cls, level: int = 0) -> "DyadicPiecewisePoly":
        return cls(level, np.zeros(0, dtype=np.int64), np.zeros((0, 1)))

    @classmethod
    def contiguous(cls, level: int, k_min: int, coeffs) -> "DyadicPiecewisePoly":
        coeffs = np.asarray(coeffs, dtype=float)
        return cls(level, k_min + np.arange(coeffs.shape[0]), coeffs)

    @property
    def width(self) -> float:
        return 2.0 ** -self.level

    @property
    def degree(self) -> int:
        return self.coeffs.shape[1] - 1

    @property
    def k_min(self) -> int:
        if self.cells.size == 0:
            raise ValueError("empty support")
        return int(self.cells[0])

    @property
    def k_max(self) -> int:
        if self.cells.size == 0:
            raise ValueError("empty support")
        return int(self.cells[-1])

    def __call__(self, y):
        return evaluate(self, y)

    def __neg__(self):
        return DyadicPiecewisePoly(self.level, self.cells, -self.coeffs)

    def __add__(self, other):
        return combine([(1.0, self), (1.0, other)])

    def __sub__(self, other):
        return combine([(1.0, self), (-1.0, other)])

    def __mul__(self, a):
        return DyadicPiecewisePoly(self.level, self.cells, float(a) * self.coeffs)

    __rmul__ = __mul__


def _locate(cells, level, y):
    t = np.ldexp(np.asarray(y, dtype=float), level)
    k = np.floor(t)
    u = t - k
    k = k.astype(np.int64)
    idx = np.searchsorted(cells, k)
    idx_c = np.minimum(idx, max(cells.size - 1, 0))
    hit = (idx < cells.size) & (cells[idx_c] == k) if cells.size else np.zeros(k.shape, bool)
    return idx_c, hit, u


def evaluate(p: DyadicPiecewisePoly, y):
    """Value of ``p`` at ``y`` (scalar or array); zero off the support."""
    y_arr = np.asarray(y, dtype=float)
    if p.cells.size == 0:
        out = np.zeros(y_arr.shape)
    else:
        idx, hit, u = _locate(p.cells, p.level, y_arr)
        out = np.where(hit, _horner(p.coeffs[idx], u), 0.0)
    return float(out) if out.ndim == 0 else out


def refine_to_level(p: DyadicPiecewisePoly, l: int) -> DyadicPiecewisePoly:
    """Represent ``p`` exactly on the finer level ``l``."""
    if l < p.level:
        raise ValueError(f"cannot refine level {p.level} down to {l}")
    s = l - p.level
    return DyadicPiecewisePoly(l, _refine_cells(p.cells, s), _refine_coeffs(p.coeffs, s))


def combine(terms) -> DyadicPiecewisePoly:
    """Weighted sum ``sum(w * p)`` of ``(w, p)`` pairs.

    Terms on coarser levels are refined to the finest level first; the
    support of the result is the union of the supports.
    """
    terms = list(terms)
    if not terms:
        return DyadicPiecewisePoly.zero()
    level = max(p.level for _, p in terms)
    width = max(p.coeffs.shape[1] for _, p in terms)
    fine = [(float(w), refine_to_level(p, level)) for w, p in terms]
    cells = np.unique(np.concatenate([p.cells for _, p in fine]))
    out = np.zeros((cells.size, width))
    for w, p in fine:
        pos = np.searchsorted(cells, p.cells)
        out[pos] += w * _pad_degree(p.coeffs, width)
    return DyadicPiecewisePoly(level, cells, out)


def sup_norm(p: DyadicPiecewisePoly, return_argmax: bool = False):
    """Exact ``sup |p|`` over the real line.

    Each cell is inspected at both ends (the right end as a left limit)
    and at the real roots of the derivative, so jumps between cells are
    covered from both sides.  With ``return_argmax`` the location of the
    sup is returned as well; a location on a right cell edge means the
    value is approached from the left.
    """
    if p.cells.size == 0:
        return (0.0, 0.0) if return_argmax else 0.0
    best, where = _cell_abs_max(p.coeffs)
    i = int(np.argmax(best))
    value = float(best[i])
    if not return_argmax:
        return value
    return value, float((p.cells[i] + where[i]) * p.width)


def cell_extrema(p: DyadicPiecewisePoly):
    """Per-cell minimum and maximum of ``p`` over the closed cell."""
    u = _candidates(p.coeffs)
    vals = _horner(p.coeffs[:, None, :], np.nan_to_num(u, nan=0.0))
    lo = np.where(np.isnan(u), np.inf, vals).min(axis=-1)
    hi = np.where(np.isnan(u), -np.inf, vals).max(axis=-1)
    return lo, hi


def integral(p: DyadicPiecewisePoly) -> float:
    d = np.arange(p.coeffs.shape[1])
    return float(p.width * np.sum(p.coeffs / (d + 1.0)))


def moment(p: DyadicPiecewisePoly, alpha: int) -> float:
    """``∫ y**alpha p(y) dy`` for ``0 <= alpha <= 3``."""
    if not 0 <= alpha <= 3:
        raise ValueError("alpha must be in 0..3")
    h = p.width
    d = np.arange(p.coeffs.shape[1])
    k = p.cells.astype(float)
    total = np.zeros(p.cells.size)
    for b in range(alpha + 1):
        inner = p.coeffs @ (1.0 / (d + b + 1.0))
        total += comb(alpha, b) * k ** (alpha - b) * inner
    return float(h ** (alpha + 1) * total.sum())


@dataclass(frozen=True, eq=False)
class PiecewiseAntiderivative:
    """Running integral of a :class:`DyadicPiecewisePoly`.

    ``coeffs`` holds, per cell, the degree-``d+1`` polynomial in ``u``
    including the mass accumulated to the left of the cell.  Between
    listed cells the function is constant; to the right of the support
    it equals ``total``.
    """

    level: int
    cells: np.ndarray
    coeffs: np.ndarray
    ends: np.ndarray
    total: float

    @property
    def width(self) -> float:
        return 2.0 ** -self.level

    def __call__(self, y):
        return evaluate_antiderivative(self, y)


def antiderivative(p: DyadicPiecewisePoly) -> PiecewiseAntiderivative:
    h = p.width
    m, width = p.coeffs.shape
    d = np.arange(width)
    scaled = h * p.coeffs / (d + 1.0)
    increments = scaled.sum(axis=1)
    ends = np.cumsum(increments)
    before = ends - increments
    coeffs = np.zeros((m, width + 1))
    coeffs[:, 0] = before
    coeffs[:, 1:] = scaled
    total = float(ends[-1]) if m else 0.0
    return PiecewiseAntiderivative(p.level, p.cells, coeffs, ends, total)


def evaluate_antiderivative(F: PiecewiseAntiderivative, y):
    y_arr = np.asarray(y, dtype=float)
    if F.cells.size == 0:
        out = np.zeros(y_arr.shape)
    else:
        t = np.ldexp(y_arr, F.level)
        k = np.floor(t)
        u = t - k
        k = k.astype(np.int64)
        idx = np.searchsorted(F.cells, k, side="right") - 1
        safe = np.maximum(idx, 0)
        inside = (idx >= 0) & (F.cells[safe] == k)
        out = np.where(
            idx < 0,
            0.0,
            np.where(inside, _horner(F.coeffs[safe], u), F.ends[safe]),
        )
    return float(out) if out.ndim == 0 else out
