"""Closed-form stationary quantities of the adversarial coupon collector.

A botnet probes ``m`` proxies at aggregate rate ``beta``; each probe reveals the
current identity of a uniformly chosen proxy. The defense replaces identities
at rate ``delta``. ``Y`` is the number of currently valid identities the botnet
knows, and ``rho = beta / delta`` is the expected number of probes per
replacement cycle.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidityError
from .pmf import Pmf

__all__ = [
    "ModelParams",
    "CltParams",
    "mean_known_poisson",
    "mean_known_deterministic",
    "mean_known_selective",
    "k_pmf_deterministic",
    "k_pmf_poisson",
    "conditional_mean_given_T",
    "stationary_pmf_poisson",
    "prob_fraction_not_found",
    "expected_y_after_k",
    "clt_mean_approx",
]

RENORM_TOL = 1e-8


@dataclass(frozen=True)
class ModelParams:
    m: int
    beta: float
    delta: float
    r: float = 1.0
    rho: float = field(init=False)

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise ValueError(f"m must be a positive integer, got {self.m!r}")
        if not self.beta > 0:
            raise ValueError(f"beta must be > 0, got {self.beta!r}")
        if not self.delta > 0:
            raise ValueError(f"delta must be > 0, got {self.delta!r}")
        if not 0.0 <= self.r <= 1.0:
            raise ValueError(f"r must lie in [0, 1], got {self.r!r}")
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "rho", self.beta / self.delta)

    @classmethod
    def from_rho(cls, m: int, rho: float, delta: float = 1.0, r: float = 1.0) -> ModelParams:
        return cls(m, rho * delta, delta, r)


@dataclass(frozen=True)
class CltParams:
    """Renewal probing with inter-probe standard deviation ``sigma``."""

    base: ModelParams
    sigma: float

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")
        if self.base.m < 2:
            raise ValueError("the renewal approximation needs m >= 2")

    @property
    def v(self) -> float:
        return -math.log1p(-1.0 / self.base.m)


def mean_known_poisson(params: ModelParams) -> float:
    """Stationary mean of Y under Poisson probing and all-at-once replacement."""
    # m rho / (m + rho), written so rho = inf gives m
    return params.m / (1.0 + params.m / params.rho)


def mean_known_deterministic(params: ModelParams) -> float:
    """Stationary mean of Y under constant-rate probing: ``1/(e^{1/rho} - (1 - 1/m))``."""
    x = 1.0 / params.rho
    if x > 1.0:
        # e^{-x} / (1 - (1 - 1/m) e^{-x}) cannot overflow for tiny rho
        ex = math.exp(-x)
        return ex / (1.0 - (1.0 - 1.0 / params.m) * ex)
    # expm1 avoids cancellation when both 1/rho and 1/m are small
    return 1.0 / (math.expm1(x) + 1.0 / params.m)


def mean_known_selective(params: ModelParams) -> float:
    """Stationary mean of Y when each identity is replaced with probability r."""
    m, rho, r = params.m, params.rho, params.r
    return m / (1.0 + r * m / rho)


def k_pmf_deterministic(rho: float, k: int) -> float:
    """P(K = k) for the probe count in one cycle under constant-rate probing."""
    return math.exp(-k / rho) * -math.expm1(-1.0 / rho)


def k_pmf_poisson(rho: float, k: int) -> float:
    """P(K = k) for the probe count in one cycle under Poisson probing (geometric)."""
    return math.exp(-k * math.log1p(1.0 / rho) - math.log1p(rho))


def conditional_mean_given_T(m: int, beta: float, T: float) -> float:
    """Mean number of distinct types collected by Poisson probing over a window T."""
    return m * -math.expm1(-beta * T / m)


def stationary_pmf_poisson(params: ModelParams) -> Pmf:
    """Stationary distribution of Y under Poisson probing and all-at-once replacement.

    With ``a = m (rho + 1) / rho`` the mass is

        P(Y = l) = (m / rho) * (m)_l / (a)_{l+1},    l = 0..m,

    where ``(x)_n`` is the falling factorial. This is the product form with the
    ``m - l`` factor already cancelled, so ``l = m`` is finite, and at ``l = 0``
    it reduces to ``1 / (rho + 1)``. Everything is summed in log space.
    """
    m, rho = params.m, params.rho
    j = np.arange(m + 1, dtype=float)
    log_num = np.concatenate(([0.0], np.cumsum(np.log(m - j[:-1]))))
    log_den = np.cumsum(np.log((m - j) + m / rho))
    log_w = math.log(m) - math.log(rho) + log_num - log_den
    return Pmf.from_log_weights(log_w, tol=RENORM_TOL)


def prob_fraction_not_found(params: ModelParams, fraction: float) -> float:
    """Stationary probability that at least ``fraction`` of the m proxies are unknown.

    That is ``P(Y <= floor((1 - fraction) m))``.
    """
    if not 0.0 < fraction < 1.0:
        raise ValueError("fraction must lie in (0, 1)")
    # the small nudge keeps e.g. (1 - 0.2) * 1000 from flooring to 799
    threshold = math.floor((1.0 - fraction) * params.m + 1e-9)
    return stationary_pmf_poisson(params).cdf(threshold)


def expected_y_after_k(m: int, k: int, y0: float) -> float:
    """E Y(k) after k uniform draws, starting from y0 types already held."""
    q = (1.0 - 1.0 / m) ** k
    return m * (1.0 - q) + q * y0


def clt_mean_approx(params: CltParams) -> float:
    """Renewal-CLT approximation ``m (1 - delta / (delta + beta v - sigma^2 beta^3 v^2 / 2))``.

    Raises :class:`ValidityError` unless ``1/beta > sigma sqrt(v/2)``.
    """
    p = params.base
    v, sigma = params.v, params.sigma
    if not 1.0 / p.beta > sigma * math.sqrt(v / 2.0):
        raise ValidityError(
            f"renewal approximation needs 1/beta > sigma*sqrt(v/2); "
            f"got 1/beta={1.0 / p.beta:.6g}, sigma*sqrt(v/2)={sigma * math.sqrt(v / 2.0):.6g}"
        )
    denom = p.delta + p.beta * v - sigma**2 * p.beta**3 * v**2 / 2.0
    return p.m * (1.0 - p.delta / denom)
