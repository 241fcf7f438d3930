"""B-splines, their Gram sequence, and the spline projection kernel.

The projection onto the span of integer translates of the order-``r``
B-spline has kernel

    kappa(x, y) = sum_k sum_l g(|k - l|) N(x - l) N(y - k),

where ``g`` are the Toeplitz coefficients of the inverse Gram matrix.
``g`` decays geometrically, which gives both a finite truncation radius
and a radial majorant ``|kappa(x, y)| <= Phi(|x - y|)``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial, log, sqrt

import numpy as np
from scipy import integrate

from .piecewise import DyadicPiecewisePoly

MAX_ORDER = 4
DEFAULT_TAIL_TOL = 1e-10


def check_order(r) -> int:
    if int(r) != r or not 1 <= r <= MAX_ORDER:
        raise ValueError(f"spline order must be an integer in 1..{MAX_ORDER}, got {r}")
    return int(r)


@lru_cache(maxsize=None)
def _pieces_exact(r: int):
    # Piece p of N_{0,r} on [p, p+1), as a polynomial in u = x - p, from
    # the truncated-power formula sum_i (-1)^i C(r,i) (x-i)_+^{r-1}/(r-1)!.
    pieces = []
    for p in range(r):
        c = [Fraction(0)] * r
        for i in range(p + 1):
            shift = p - i
            coef = Fraction((-1) ** i * comb(r, i), factorial(r - 1))
            for a in range(r):
                c[a] += coef * comb(r - 1, a) * shift ** (r - 1 - a)
        pieces.append(tuple(c))
    return tuple(pieces)


def bspline_pieces(r: int) -> np.ndarray:
    """Array ``P[p, a]``: coefficient of ``u**a`` of the piece on ``[p, p+1)``."""
    r = check_order(r)
    return np.array([[float(c) for c in piece] for piece in _pieces_exact(r)])


def bspline_eval(r: int, x):
    """Cardinal B-spline ``N_{0,r}`` at ``x`` (scalar or array).

    Supported on ``[0, r)`` with the half-open convention, so for ``r = 1``
    this is the indicator of ``[0, 1)``.
    """
    pieces = bspline_pieces(r)
    x_arr = np.asarray(x, dtype=float)
    p = np.floor(x_arr)
    inside = (p >= 0) & (p < r)
    idx = np.clip(p, 0, r - 1).astype(int)
    u = x_arr - p
    out = np.zeros(x_arr.shape)
    for a in range(r - 1, -1, -1):
        out = out * u + pieces[idx, a]
    out = np.where(inside, out, 0.0)
    return float(out) if out.ndim == 0 else out


def bspline_sup(r: int) -> float:
    """``max N_{0,r}``, reached at the centre ``r/2``."""
    return float(bspline_eval(r, r / 2.0))


@dataclass(frozen=True)
class GramSequence:
    r: int
    a: tuple[float, ...]
    exact: tuple[Fraction, ...] = field(repr=False)

    def symbol(self, theta):
        """``a(0) + 2 sum_k a(k) cos(k theta)``."""
        theta = np.asarray(theta, dtype=float)
        out = np.full(theta.shape, self.a[0])
        for k in range(1, len(self.a)):
            out = out + 2.0 * self.a[k] * np.cos(k * theta)
        return out


@lru_cache(maxsize=None)
def gram_sequence(r: int) -> GramSequence:
    """Exact inner products ``a(k) = ∫ N_{0,r}(x) N_{0,r}(x - k) dx``."""
    r = check_order(r)
    pieces = _pieces_exact(r)
    vals = []
    for k in range(r):
        s = Fraction(0)
        for p in range(k, r):
            A, B = pieces[p], pieces[p - k]
            s += sum(A[i] * B[m] / (i + m + 1) for i in range(r) for m in range(r))
        vals.append(s)
    return GramSequence(r, tuple(float(v) for v in vals), tuple(vals))


@dataclass(frozen=True, eq=False)
class InverseGramSequence:
    """Toeplitz coefficients of the inverse Gram matrix and their decay.

    ``|g[k]| <= c * |lam|**k`` for every ``k >= 0`` and the neglected tail
    ``c |lam|^(K_trunc+1) / (1 - |lam|)`` is below ``tail_tol``.
    """

    r: int
    g: np.ndarray
    c: float
    lam: float
    K_trunc: int
    tail_tol: float

    def full(self) -> np.ndarray:
        """Symmetric filter ``g(|s|)`` for ``s = -K..K``."""
        return np.concatenate([self.g[:0:-1], self.g])

    def tail_radius(self, tol: float) -> int:
        """Smallest radius whose geometric tail is below ``tol``, capped at K_trunc."""
        return min(self.K_trunc, _radius(self.c, self.lam, tol))


def _radius(c: float, lam: float, tol: float) -> int:
    lam = abs(lam)
    if lam == 0.0:
        return 0
    # smallest K with c lam^(K+1) / (1 - lam) < tol
    K = max(0, int(np.ceil(log(tol * (1.0 - lam) / c) / log(lam))) - 1)
    while c * lam ** (K + 1) / (1.0 - lam) >= tol:
        K += 1
    while K > 0 and c * lam ** K / (1.0 - lam) < tol:
        K -= 1
    return K


def _symbol_roots(a):
    # z^(r-1) a(z) with a(z) the Laurent polynomial sum_k a(|k|) z^k
    r = len(a)
    coeffs = [a[abs(k)] for k in range(-(r - 1), r)]
    roots = np.roots(coeffs)
    inside = roots[np.abs(roots) < 1.0]
    # residues of z^(k-1)/a(z) at the inner roots give g(k) = sum A_i z_i^k
    amps = []
    for i, z in enumerate(roots):
        if abs(z) >= 1.0:
            continue
        others = np.delete(roots, i)
        amps.append(z ** (r - 2) / (a[r - 1] * np.prod(z - others)))
    return roots, inside, np.array(amps)


def _fourier_coeffs(fn, start, stop):
    out = np.empty(stop - start)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for i, k in enumerate(range(start, stop)):
            val, _ = integrate.quad(fn, 0.0, np.pi, weight="cos", wvar=k,
                                    epsabs=1e-15, epsrel=1e-13, limit=400)
            out[i] = val / np.pi
    return out


@lru_cache(maxsize=None)
def inverse_gram(r: int, tail_tol: float = DEFAULT_TAIL_TOL) -> InverseGramSequence:
    """Inverse Gram coefficients via Fourier coefficients of ``1/a(theta)``.

    The decay rate ``lam`` is the largest root of the Gram symbol inside
    the unit disk; ``c`` is the sum of the moduli of the residue
    amplitudes, which bounds every coefficient.  The coefficients
    themselves are computed by adaptive quadrature.
    """
    r = check_order(r)
    if not tail_tol > 0:
        raise ValueError("tail_tol must be positive")
    gram = gram_sequence(r)
    if r == 1:
        return InverseGramSequence(1, np.array([1.0]), 1.0, 0.0, 0, tail_tol)

    grid = np.linspace(0.0, np.pi, 2049)
    if not np.all(gram.symbol(grid) > 0):
        raise ArithmeticError("Gram symbol is not positive; Gram matrix not invertible")

    _, inside, amps = _symbol_roots(gram.a)
    lam_c = inside[np.argmax(np.abs(inside))]
    lam = float(lam_c.real) if abs(lam_c.imag) < 1e-12 else float(abs(lam_c))
    c = float(np.sum(np.abs(amps)))

    def recip(theta):
        return 1.0 / gram.symbol(theta)

    g = np.zeros(0)
    while True:
        K = _radius(c, lam, tail_tol)
        if K + 1 > g.size:
            g = np.concatenate([g, _fourier_coeffs(recip, g.size, K + 1)])
        # the stored decay invariant must hold for the numbers actually kept
        ratio = float(np.max(np.abs(g[:K + 1]) / np.abs(lam) ** np.arange(K + 1)))
        if ratio <= c:
            break
        c = ratio
    g = g[:K + 1].copy()
    g.flags.writeable = False
    return InverseGramSequence(r, g, c, lam, K, tail_tol)


def majorant_constants(r: int, tail_tol: float = DEFAULT_TAIL_TOL):
    """``(phi_l1, phi_l2, op_norm_bound)`` of the radial majorant.

    For ``r >= 2`` the majorant is ``Phi(u) = C0 |lam|^max(u - r, 0)`` with
    ``C0 = c r max(N)^2``, and the norms are taken over the real line in
    ``|x - y|``.  For the Haar case the kernel is the indicator of sharing
    a cell and ``Phi`` is that indicator itself.
    """
    r = check_order(r)
    if r == 1:
        return 1.0, 1.0, 1.0
    inv = inverse_gram(r, tail_tol)
    C0 = majorant_peak(r, tail_tol)
    rate = -log(abs(inv.lam))
    l1 = 2.0 * C0 * (r + 1.0 / rate)
    l2 = sqrt(2.0 * C0 ** 2 * (r + 1.0 / (2.0 * rate)))
    # linear splines have a published operator norm bound of 3
    op = min(l1, 3.0) if r == 2 else l1
    return l1, l2, op


def majorant_peak(r: int, tail_tol: float = DEFAULT_TAIL_TOL) -> float:
    """``sup Phi``."""
    r = check_order(r)
    if r == 1:
        return 1.0
    inv = inverse_gram(r, tail_tol)
    return inv.c * r * bspline_sup(r) ** 2


@dataclass(frozen=True, eq=False)
class ProjectionKernel:
    order: int
    inv_gram: InverseGramSequence
    phi_l1: float
    phi_l2: float
    op_norm_bound: float

    @property
    def K_trunc(self) -> int:
        return self.inv_gram.K_trunc

    @property
    def tail_tol(self) -> float:
        return self.inv_gram.tail_tol

    @property
    def phi_sup(self) -> float:
        return majorant_peak(self.order, self.tail_tol)

    @property
    def is_haar(self) -> bool:
        return self.order == 1

    def majorant(self, u):
        """``Phi(|u|)``."""
        u = np.abs(np.asarray(u, dtype=float))
        if self.order == 1:
            return np.where(u < 1.0, 1.0, 0.0)
        lam = abs(self.inv_gram.lam)
        return self.phi_sup * lam ** np.maximum(u - self.order, 0.0)

    def holder_moment(self, t: float) -> float:
        """``C(Phi) = ∫ Phi(|u|) |u|^t du`` over the real line."""
        if self.order == 1:
            return 1.0 / (t + 1.0)
        r = self.order
        rate = -log(abs(self.inv_gram.lam))
        tail, _ = integrate.quad(lambda v: np.exp(-rate * v) * (v + r) ** t, 0.0, np.inf)
        return 2.0 * self.phi_sup * (r ** (t + 1.0) / (t + 1.0) + tail)


@lru_cache(maxsize=None)
def projection_kernel(r: int, tail_tol: float = DEFAULT_TAIL_TOL) -> ProjectionKernel:
    """Kernel of order ``r`` with its majorant constants (cached)."""
    r = check_order(r)
    l1, l2, op = majorant_constants(r, tail_tol)
    return ProjectionKernel(r, inverse_gram(r, tail_tol), l1, l2, op)


def _active(r: int, x):
    """Indices and values of the ``r`` B-splines ``N(x - l)`` alive at ``x``."""
    pieces = bspline_pieces(r)
    base = np.floor(x)
    u = x - base
    p = np.arange(r)
    vals = np.zeros(np.shape(x) + (r,))
    for a in range(r - 1, -1, -1):
        vals = vals * u[..., None] + pieces[p, a]
    idx = base[..., None].astype(np.int64) - p
    return idx, vals


def kernel_eval(kernel: ProjectionKernel, x, y):
    """``kappa(x, y)``, exactly symmetric in its two arguments.

    The ``r*r`` products are sorted before summation so that swapping the
    arguments reproduces the same floating-point result.
    """
    r = kernel.order
    g = kernel.inv_gram.g
    K = kernel.K_trunc
    x_arr, y_arr = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    lx, vx = _active(r, x_arr)
    ky, vy = _active(r, y_arr)
    dist = np.abs(lx[..., :, None] - ky[..., None, :])
    gv = np.where(dist <= K, g[np.minimum(dist, K)], 0.0)
    terms = gv * (vx[..., :, None] * vy[..., None, :])
    terms = np.sort(terms.reshape(terms.shape[:-2] + (r * r,)), axis=-1)
    out = terms.sum(axis=-1)
    return float(out) if out.ndim == 0 else out


def series_coeffs(coefs, r: int):
    """Per-cell coefficients of ``sum_i coefs[..., i] N(u + ... )``.

    For a coefficient vector indexed from 0, cell ``m`` (0-based, ``m`` in
    ``0 .. L + r - 2``) carries ``sum_p coefs[m - p] * piece_p``.
    """
    coefs = np.asarray(coefs, dtype=float)
    pieces = bspline_pieces(r)
    L = coefs.shape[-1]
    out = np.zeros(coefs.shape[:-1] + (L + r - 1, r))
    for p in range(r):
        out[..., p:p + L, :] += coefs[..., :, None] * pieces[p]
    return out


def bspline_series(level: int, r: int, k_first: int, coefs, scale: float = 1.0):
    """``scale * sum_i coefs[i] N_{0,r}(2^level y - k_first - i)`` as a piecewise poly."""
    cells = series_coeffs(coefs, r)
    return DyadicPiecewisePoly.contiguous(level, k_first, scale * cells)


def kernel_row(kernel: ProjectionKernel, j: int, x: float, tol: float | None = None):
    """``y -> 2^j kappa(2^j x, 2^j y)`` on level-``j`` cells.

    Inverse-Gram coefficients further than the radius implied by ``tol``
    are dropped (the kernel's own truncation when ``tol`` is None).
    """
    if j < 0:
        raise ValueError("level must be non-negative")
    r = kernel.order
    inv = kernel.inv_gram
    K = inv.K_trunc if tol is None else inv.tail_radius(tol)
    idx, vals = _active(r, np.asarray(np.ldexp(float(x), j)))
    b = int(idx[0])
    k_first = b - (r - 1) - K
    ks = k_first + np.arange(r + 2 * K)
    dist = np.abs(ks[:, None] - idx[None, :])
    gv = np.where(dist <= K, inv.g[np.minimum(dist, inv.K_trunc)], 0.0)
    coefs = gv @ vals
    return bspline_series(j, r, k_first, coefs, scale=2.0 ** j)
