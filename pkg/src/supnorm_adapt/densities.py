"""Test densities with known smoothness, used by the Monte Carlo lab."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np


def _invert(cdf, u, lo, hi, iters=64):
    """Vectorised bisection for ``cdf(x) = u`` on ``[lo, hi]``."""
    u = np.asarray(u, dtype=float)
    a = np.full(u.shape, float(lo))
    b = np.full(u.shape, float(hi))
    for _ in range(iters):
        mid = 0.5 * (a + b)
        below = cdf(mid) < u
        a = np.where(below, mid, a)
        b = np.where(below, b, mid)
    return 0.5 * (a + b)


@dataclass(frozen=True, eq=False)
class TestDensity:
    """A density with known sup norm and local Hölder constant.

    ``holder_H`` bounds ``|p(x+v) - p(x)| / |v|**t`` for ``|v| <= 1``.
    ``features`` lists points where the density is not smooth and
    ``singular`` the subset where a derivative blows up; numerical
    integration splits there.
    """

    __test__ = False  # not a pytest class

    name: str
    pdf: Callable
    cdf: Callable
    ppf: Callable
    sup: float
    t: float
    holder_H: float
    support: tuple[float, float]
    features: tuple[float, ...] = ()
    singular: tuple[float, ...] = ()
    deriv_sup: float | None = None

    def __call__(self, x):
        return self.pdf(x)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return self.ppf(rng.random(n))

    @property
    def holder_norm(self) -> float:
        """``||p||_inf + H``, the full Hölder norm used in spline bias bounds."""
        return self.sup + self.holder_H


@lru_cache(maxsize=None)
def triangular() -> TestDensity:
    """Tent on [0, 2] with peak 1 at x = 1."""

    def pdf(x):
        x = np.asarray(x, dtype=float)
        return np.maximum(0.0, 1.0 - np.abs(x - 1.0))

    def cdf(x):
        x = np.clip(np.asarray(x, dtype=float), 0.0, 2.0)
        return np.where(x <= 1.0, 0.5 * x * x, 1.0 - 0.5 * (2.0 - x) ** 2)

    def ppf(u):
        u = np.asarray(u, dtype=float)
        return np.where(u < 0.5, np.sqrt(2.0 * u), 2.0 - np.sqrt(2.0 * (1.0 - u)))

    return TestDensity("triangular", pdf, cdf, ppf, sup=1.0, t=1.0, holder_H=1.0,
                       support=(0.0, 2.0), features=(0.0, 1.0, 2.0), deriv_sup=1.0)


@lru_cache(maxsize=None)
def raised_cosine() -> TestDensity:
    """``(1 + cos(pi x)) / 2`` on [-1, 1]."""

    def pdf(x):
        x = np.asarray(x, dtype=float)
        return np.where(np.abs(x) <= 1.0, 0.5 * (1.0 + np.cos(np.pi * x)), 0.0)

    def cdf(x):
        x = np.clip(np.asarray(x, dtype=float), -1.0, 1.0)
        return 0.5 * (x + 1.0) + np.sin(np.pi * x) / (2.0 * np.pi)

    def ppf(u):
        return _invert(cdf, u, -1.0, 1.0)

    return TestDensity("raised_cosine", pdf, cdf, ppf, sup=1.0, t=1.0,
                       holder_H=np.pi / 2.0, support=(-1.0, 1.0),
                       features=(-1.0, 1.0), deriv_sup=np.pi / 2.0)


@lru_cache(maxsize=None)
def cusp(t: float) -> TestDensity:
    """``C_t (1 - |x|^t)`` on [-1, 1]; Hölder of order ``t`` at the origin."""
    if not 0.0 < t <= 1.0:
        raise ValueError("cusp exponent must lie in (0, 1]")
    C = (t + 1.0) / (2.0 * t)

    def pdf(x):
        x = np.asarray(x, dtype=float)
        return np.where(np.abs(x) <= 1.0, C * (1.0 - np.abs(x) ** t), 0.0)

    def cdf(x):
        x = np.clip(np.asarray(x, dtype=float), -1.0, 1.0)
        a = np.abs(x)
        left = C * ((1.0 - a) - (1.0 - a ** (t + 1.0)) / (t + 1.0))
        return np.where(x <= 0.0, left, 1.0 - left)

    def ppf(u):
        return _invert(cdf, u, -1.0, 1.0)

    return TestDensity(f"cusp_{t:g}", pdf, cdf, ppf, sup=C, t=float(t), holder_H=C,
                       support=(-1.0, 1.0), features=(-1.0, 0.0, 1.0), singular=(0.0,),
                       deriv_sup=None if t < 1 else C)


def by_name(name: str) -> TestDensity:
    """``triangular``, ``raised_cosine`` or ``cusp_<t>``."""
    if name == "triangular":
        return triangular()
    if name in ("raised_cosine", "raised-cosine"):
        return raised_cosine()
    if name.startswith("cusp_") or name.startswith("cusp-"):
        return cusp(float(name[5:]))
    raise ValueError(f"unknown test density {name!r}")
