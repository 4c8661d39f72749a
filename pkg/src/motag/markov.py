"""Continuous-time Markov chains for the number of known identities.

States are ``0..m``. Probes move the chain up at rate ``(m - k) beta / m``;
replacements move it down, either by a binomial thinning of all known
identities (selective replacement) or one at a time (independent per-proxy
clocks, a birth-death chain).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .analytic import ModelParams
from .errors import SingularGeneratorError
from .pmf import Pmf

__all__ = [
    "Generator",
    "build_selective_generator",
    "build_birth_death_generator",
    "stationary_distribution",
    "birth_death_closed_form",
]

NEG_CLAMP = 1e-12


@dataclass(frozen=True)
class Generator:
    """Dense rate matrix on ``{0..m}``; row ``i`` holds the rates out of state ``i``."""

    m: int
    rates: np.ndarray

    def __post_init__(self):
        q = np.array(self.rates, dtype=float)
        if q.shape != (self.m + 1, self.m + 1):
            raise ValueError(f"rates must be {(self.m + 1,) * 2}, got {q.shape}")
        off = q - np.diag(np.diag(q))
        if np.any(off < 0):
            raise ValueError("off-diagonal rates must be nonnegative")
        q[np.diag_indices_from(q)] = -off.sum(axis=1)
        q.setflags(write=False)
        object.__setattr__(self, "rates", q)

    def __getitem__(self, ij):
        return self.rates[ij]


def _up_rates(q: np.ndarray, params: ModelParams):
    m = params.m
    k = np.arange(m)
    q[k, k + 1] = (m - k) / m * params.beta


def build_selective_generator(params: ModelParams) -> Generator:
    """Generator for Poisson replacement epochs that thin each known identity w.p. r.

    From ``l`` known identities a replacement epoch leaves ``k`` with the
    binomial probability ``C(l, k) r^(l-k) (1-r)^k``. The ``k = l`` term is a
    self-transition and is left out.
    """
    m, delta, r = params.m, params.delta, params.r
    q = np.zeros((m + 1, m + 1))
    _up_rates(q, params)
    if r > 0:
        for ell in range(1, m + 1):
            k = np.arange(ell)
            if r == 1:
                q[ell, 0] = delta
                continue
            log_binom = gammaln(ell + 1) - gammaln(k + 1) - gammaln(ell - k + 1)
            q[ell, :ell] = delta * np.exp(log_binom + (ell - k) * math.log(r) + k * math.log1p(-r))
    return Generator(m, q)


def build_birth_death_generator(params: ModelParams) -> Generator:
    """Generator for independent per-proxy replacement clocks at rate delta (r is ignored)."""
    m = params.m
    q = np.zeros((m + 1, m + 1))
    _up_rates(q, params)
    ell = np.arange(1, m + 1)
    q[ell, ell - 1] = params.delta * ell
    return Generator(m, q)


def stationary_distribution(g: Generator) -> Pmf:
    """Solve ``pi^T Q = 0`` with ``sum(pi) = 1`` by a dense linear solve.

    The last balance equation is replaced by the normalization row. Entries in
    ``[-1e-12, 0)`` are clamped to zero; anything more negative, or a singular
    system, raises :class:`SingularGeneratorError`.
    """
    n = g.m + 1
    a = g.rates.T.copy()
    a[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    try:
        pi = np.linalg.solve(a, b)
    except np.linalg.LinAlgError as exc:
        raise SingularGeneratorError(str(exc)) from exc
    if not np.all(np.isfinite(pi)):
        raise SingularGeneratorError("balance equations produced non-finite probabilities")
    if np.any(pi < -NEG_CLAMP):
        raise SingularGeneratorError(f"stationary solve gave negative mass {pi.min()!r}")
    pi = np.clip(pi, 0.0, None)
    return Pmf(g.m, pi / pi.sum())


def birth_death_closed_form(params: ModelParams) -> Pmf:
    """``pi(k)`` proportional to ``C(m, k) (rho/m)^k``, i.e. Binomial(m, rho/(m+rho))."""
    m, rho = params.m, params.rho
    k = np.arange(m + 1)
    log_p = math.log(rho) - math.log(m + rho)
    log_q = math.log(m) - math.log(m + rho)
    log_w = gammaln(m + 1) - gammaln(k + 1) - gammaln(m - k + 1) + k * log_p + (m - k) * log_q
    return Pmf.from_log_weights(log_w)
