"""Deviation bounds for suprema of empirical processes.

Each evaluator returns the bound value together with its prefactor and a
flag telling whether the bound's stated range conditions hold at the
given inputs.  Classes are assumed to take values in ``[-1/2, 1/2]``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple


@dataclass(frozen=True)
class BoundInputs:
    """Parameters shared by the bounds.

    Parameters
    ----------
    n : int
        Sample size.
    sigma2 : float
        Weak variance ``sigma^2 >= sup_f P f^2``.
    Esup : float
        ``E sup_f |sum_i (f(X_i) - P f)|``.
    A, v : float
        Covering-number constants of the class.
    lam : float
        Free parameter of the Gaussian-range bound.
    Erad : float, optional
        ``E sup_f |sum_i eps_i f(X_i)|``; defaults to the expectation bound.
    """

    n: int
    sigma2: float
    Esup: float
    A: float = 2.0
    v: float = 2.0
    lam: float = 1.0
    Erad: float | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if not self.sigma2 > 0:
            raise ValueError("sigma2 must be positive")
        if math.sqrt(self.sigma2) > 0.5:
            raise ValueError("sigma must not exceed 1/2 for classes bounded by 1/2")
        if self.Esup < 0 or self.A <= 0 or self.v <= 0 or self.lam <= 0:
            raise ValueError("Esup must be non-negative and A, v, lam positive")

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma2)

    @property
    def log_term(self) -> float:
        return math.log(5.0 * self.A / self.sigma)

    @property
    def V(self) -> float:
        return self.n * self.sigma2 + 2.0 * self.Esup

    @property
    def V_rad(self) -> float:
        erad = self.Erad if self.Erad is not None else expectation_bound(self)
        return self.n * self.sigma2 + 4.0 * erad


class BoundValue(NamedTuple):
    value: float
    prefactor: float
    preconditions_ok: bool


def c1(lam: float) -> float:
    return 2.0 * (15.0 + 1350.0 / lam)


def c2(lam: float) -> float:
    return 1.0 + 120.0 / lam + 10800.0 / lam ** 2


def expectation_bound(b: BoundInputs) -> float:
    """``2 [15 sqrt(2 v n sigma^2 log(5A/sigma)) + 1350 v log(5A/sigma)]``."""
    L = b.log_term
    return 2.0 * (15.0 * math.sqrt(2.0 * b.v * b.n * b.sigma2 * L) + 1350.0 * b.v * L)


def sigma_condition(b: BoundInputs) -> bool:
    """``n sigma^2 >= (lam^2 v / 2) log(5A/sigma)``."""
    return b.n * b.sigma2 >= 0.5 * b.lam ** 2 * b.v * b.log_term


def _exp(x):
    return math.exp(-x)


def bound_evaluators(inputs: BoundInputs, t: float) -> dict[str, BoundValue]:
    """All bounds at deviation level ``t >= 0``."""
    if t < 0:
        raise ValueError("t must be non-negative")
    b = inputs
    ns2 = b.n * b.sigma2
    L = b.log_term
    sig_ok = sigma_condition(b)
    lo = c1(b.lam) * math.sqrt(2.0 * b.v * ns2 * L)
    gauss_range = lo <= t <= 1.5 * c2(b.lam) * ns2
    out = {
        "bousquet": BoundValue(_exp(t * t / (2.0 * b.V + 2.0 * t / 3.0)), 1.0, True),
        "klein_rio": BoundValue(_exp(t * t / (2.0 * b.V + 2.0 * t)), 1.0, True),
        "gaussian_range": BoundValue(_exp(t * t / (3.0 * c2(b.lam) * ns2)), 1.0,
                                     sig_ok and gauss_range),
        "koltchinskii": BoundValue(_exp(2.0 * t * t / (3.0 * b.n)), 1.0, True),
        "rademacher": BoundValue(2.0 * _exp(t * t / (2.0 * b.V_rad + 2.0 * t)), 2.0, True),
        "rademacher_conditional": BoundValue(2.0 * _exp(t * t / (2.0 * b.V_rad + 2.0 * t)),
                                             2.0, True),
        "corollary": BoundValue(2.0 * _exp(t * t / (2.1 * c2(b.lam) * ns2)), 2.0,
                                sig_ok and 0.0 < t <= c2(b.lam) * ns2 / 20.0),
    }
    return out


def expectation_value(inputs: BoundInputs) -> BoundValue:
    """The expectation bound, valid under the variance condition."""
    return BoundValue(expectation_bound(inputs), 1.0, sigma_condition(inputs))
