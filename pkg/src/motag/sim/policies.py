"""Probing, replacement and assignment policies, plus their random draws."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from ..errors import ConfigError

__all__ = [
    "PoissonAggregate",
    "PerBotExponential",
    "PerBotDeterministic",
    "PerBotTruncGaussian",
    "ProbingProcess",
    "AllAtOnce",
    "Selective",
    "PerProxyIndependent",
    "ReplacementPolicy",
    "UniformRandom",
    "RoundRobin",
    "AssignmentPolicy",
    "AssignmentState",
    "sample_interprobe",
    "assign_proxy",
    "MAX_REJECTION_ROUNDS",
]

MAX_REJECTION_ROUNDS = 1_000_000


def _positive(name, value):
    if not value > 0:
        raise ConfigError(f"{name} must be > 0, got {value!r}")


def _count(name, value):
    if int(value) != value or value < 1:
        raise ConfigError(f"{name} must be a positive integer, got {value!r}")


# -- probing ---------------------------------------------------------------


@dataclass(frozen=True)
class PoissonAggregate:
    """All bots together as one Poisson stream of rate ``beta``."""

    beta: float

    def __post_init__(self):
        _positive("beta", self.beta)

    @property
    def rate(self) -> float:
        return self.beta

    @property
    def n_streams(self) -> int:
        return 1


@dataclass(frozen=True)
class PerBotExponential:
    n_bots: int
    mean_interprobe: float

    def __post_init__(self):
        _count("n_bots", self.n_bots)
        _positive("mean_interprobe", self.mean_interprobe)

    @property
    def rate(self) -> float:
        return self.n_bots / self.mean_interprobe

    @property
    def n_streams(self) -> int:
        return self.n_bots


@dataclass(frozen=True)
class PerBotDeterministic:
    """Each bot probes every ``period`` from an independent uniform phase."""

    n_bots: int
    period: float

    def __post_init__(self):
        _count("n_bots", self.n_bots)
        _positive("period", self.period)

    @property
    def rate(self) -> float:
        return self.n_bots / self.period

    @property
    def n_streams(self) -> int:
        return self.n_bots


@dataclass(frozen=True)
class PerBotTruncGaussian:
    """Inter-probe times ~ Normal(mean, (kappa*mean)^2) conditioned on ``>= floor``.

    ``kappa`` is the coefficient of variation of the Gaussian before truncation.
    """

    n_bots: int
    mean_interprobe: float
    kappa: float
    floor: float = 2.0

    def __post_init__(self):
        _count("n_bots", self.n_bots)
        _positive("mean_interprobe", self.mean_interprobe)
        if self.kappa < 0:
            raise ConfigError(f"kappa must be >= 0, got {self.kappa!r}")
        if not self.floor < self.mean_interprobe:
            raise ConfigError("floor must be below mean_interprobe")

    @property
    def rate(self) -> float:
        # nominal rate; truncation shifts the true mean up slightly
        return self.n_bots / self.mean_interprobe

    @property
    def n_streams(self) -> int:
        return self.n_bots


ProbingProcess = Union[PoissonAggregate, PerBotExponential, PerBotDeterministic, PerBotTruncGaussian]


def _trunc_gaussian(rng: np.random.Generator, mean, sd, floor, size):
    out = np.empty(size)
    filled = 0
    rounds = 0
    while filled < size:
        rounds += 1
        if rounds > MAX_REJECTION_ROUNDS:
            raise RuntimeError("truncated Gaussian rejection sampler made no progress")
        need = size - filled
        draw = rng.normal(mean, sd, size=need)
        keep = draw[draw >= floor]
        out[filled:filled + len(keep)] = keep
        filled += len(keep)
    return out


def sample_interprobe(p: ProbingProcess, rng: np.random.Generator, size=None):
    """Draw inter-probe time(s) for a single stream of ``p``.

    Returns a float when ``size`` is None, else an array of that many draws.
    """
    n = 1 if size is None else size
    if isinstance(p, PoissonAggregate):
        out = rng.exponential(1.0 / p.beta, size=n)
    elif isinstance(p, PerBotExponential):
        out = rng.exponential(p.mean_interprobe, size=n)
    elif isinstance(p, PerBotDeterministic):
        out = np.full(n, float(p.period))
    elif isinstance(p, PerBotTruncGaussian):
        out = _trunc_gaussian(rng, p.mean_interprobe, p.kappa * p.mean_interprobe, p.floor, n)
    else:
        raise TypeError(f"unknown probing process {p!r}")
    return float(out[0]) if size is None else out


# -- replacement -----------------------------------------------------------


@dataclass(frozen=True)
class AllAtOnce:
    """Every identity changes at the epochs of a Poisson(delta) process."""

    delta: float

    def __post_init__(self):
        _positive("delta", self.delta)


@dataclass(frozen=True)
class Selective:
    """At Poisson(delta) epochs each identity is replaced independently w.p. r."""

    delta: float
    r: float

    def __post_init__(self):
        _positive("delta", self.delta)
        if not 0.0 <= self.r <= 1.0:
            raise ConfigError(f"r must lie in [0, 1], got {self.r!r}")


@dataclass(frozen=True)
class PerProxyIndependent:
    """One Poisson(delta) replacement clock per proxy."""

    delta: float

    def __post_init__(self):
        _positive("delta", self.delta)


ReplacementPolicy = Union[AllAtOnce, Selective, PerProxyIndependent]


# -- assignment ------------------------------------------------------------


@dataclass(frozen=True)
class UniformRandom:
    pass


@dataclass(frozen=True)
class RoundRobin:
    """The LB hands out proxies cyclically to every session request.

    Nominal clients arrive as a Poisson stream at ``nominal_client_rate`` and
    advance the same cursor as the bots.
    """

    nominal_client_rate: float = 0.0

    def __post_init__(self):
        if self.nominal_client_rate < 0:
            raise ConfigError("nominal_client_rate must be >= 0")


AssignmentPolicy = Union[UniformRandom, RoundRobin]


@dataclass
class AssignmentState:
    m: int
    cursor: int = 0
    last_time: float = 0.0


def assign_proxy(policy: AssignmentPolicy, state: AssignmentState, rng: np.random.Generator,
                 t: float = 0.0) -> int:
    """Proxy slot (0-based) handed to a bot probing at time ``t``.

    For :class:`RoundRobin` the nominal sessions that arrived since the last
    request are drawn as a Poisson count and skipped over before the bot is
    served, which is the same as interleaving the two streams in time order.
    """
    if isinstance(policy, UniformRandom):
        return int(rng.integers(state.m))
    if isinstance(policy, RoundRobin):
        if policy.nominal_client_rate > 0 and t > state.last_time:
            state.cursor += int(rng.poisson(policy.nominal_client_rate * (t - state.last_time)))
        state.last_time = max(state.last_time, t)
        slot = state.cursor % state.m
        state.cursor = slot + 1
        return slot
    raise TypeError(f"unknown assignment policy {policy!r}")
