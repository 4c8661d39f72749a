"""Discrete-event simulation of a probing botnet against rotating proxies.

Each replication is a single-threaded event loop over a heap of probe and
replacement clocks. The state is a per-slot flag saying whether the botnet
knows the slot's current identity; ``Y`` is the number of raised flags. Every
replication draws from its own RNG streams derived from ``(seed, replication)``,
so results do not depend on how replications are scheduled.
"""
from __future__ import annotations

import heapq
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from statistics import NormalDist

import numpy as np

from ..analytic import ModelParams
from ..errors import ConfigError
from ..pmf import Pmf
from .policies import (
    AllAtOnce,
    AssignmentPolicy,
    AssignmentState,
    PerBotDeterministic,
    PerBotTruncGaussian,
    PerProxyIndependent,
    ProbingProcess,
    ReplacementPolicy,
    RoundRobin,
    Selective,
    UniformRandom,
    assign_proxy,
    sample_interprobe,
)

__all__ = [
    "ScenarioConfig",
    "ReplicationResult",
    "SimResult",
    "TraceEvent",
    "InsufficientDataWarning",
    "run_scenario",
    "run_replication",
    "empirical_stationary_pmf",
    "pasta_check",
]

PROBE, REPLACE = 0, 1
BLOCK = 4096
MIN_CYCLES = 1000
RECOMMENDED_REPLICATIONS = 30
Z95 = NormalDist().inv_cdf(0.975)


class InsufficientDataWarning(UserWarning):
    pass


@dataclass(frozen=True)
class ScenarioConfig:
    params: ModelParams
    probing: ProbingProcess
    replacement: ReplacementPolicy
    assignment: AssignmentPolicy = UniformRandom()
    horizon: float = 30_000.0
    warmup: float | None = None
    replications: int = 1
    seed: int = 0
    trajectory_dt: float | None = None
    trace_events: int = 0

    def __post_init__(self):
        if not self.horizon > 0:
            raise ConfigError(f"horizon must be > 0, got {self.horizon!r}")
        if self.warmup is None:
            object.__setattr__(self, "warmup", 0.1 * self.horizon)
        if self.warmup < 0 or self.warmup >= self.horizon:
            raise ConfigError(f"warmup ({self.warmup!r}) must lie in [0, horizon={self.horizon!r})")
        if int(self.replications) != self.replications or self.replications < 1:
            raise ConfigError(f"replications must be a positive integer, got {self.replications!r}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if self.trajectory_dt is not None and not self.trajectory_dt > 0:
            raise ConfigError("trajectory_dt must be > 0")
        p = self.params
        if not math.isclose(self.probing.rate, p.beta, rel_tol=1e-9):
            raise ConfigError(f"probing rate {self.probing.rate!r} does not match beta={p.beta!r}")
        if not math.isclose(self.replacement.delta, p.delta, rel_tol=1e-9):
            raise ConfigError(f"replacement rate {self.replacement.delta!r} does not match delta={p.delta!r}")
        expected_r = self.replacement.r if isinstance(self.replacement, Selective) else 1.0
        if not isinstance(self.replacement, PerProxyIndependent) and p.r != expected_r:
            raise ConfigError(f"params.r={p.r!r} inconsistent with replacement policy")

    @classmethod
    def from_policies(cls, m: int, probing: ProbingProcess, replacement: ReplacementPolicy,
                      **kwargs) -> ScenarioConfig:
        """Build a config whose ModelParams are derived from the policies."""
        r = replacement.r if isinstance(replacement, Selective) else 1.0
        params = ModelParams(m, probing.rate, replacement.delta, r)
        return cls(params, probing, replacement, **kwargs)


@dataclass(frozen=True)
class TraceEvent:
    t: float
    kind: str
    slot: int
    generation: int
    known: int


@dataclass
class ReplicationResult:
    time_avg: float
    occupancy: np.ndarray
    epoch_samples: np.ndarray
    final_known: int
    n_probes: int
    n_replacements: int
    trajectory: np.ndarray | None = None
    running_avg: np.ndarray | None = None
    trace: list[TraceEvent] = field(default_factory=list)


@dataclass
class SimResult:
    config: ScenarioConfig
    time_avg_known: float
    ci_halfwidth: float
    trajectory: np.ndarray
    running_avg: np.ndarray
    epoch_samples: np.ndarray
    empirical_pmf: Pmf
    epoch_avg: float | None
    epoch_ci_halfwidth: float | None
    replications: list[ReplicationResult]

    @property
    def fraction_known(self) -> float:
        return self.time_avg_known / self.config.params.m


def _stream(draw):
    # blocks grow so short replications do not pay for large draws
    size = 64
    while True:
        yield from draw(size).tolist()
        size = min(2 * size, BLOCK)


def _rep_rngs(seed: int, rep: int):
    root = np.random.SeedSequence(seed, spawn_key=(rep,))
    return [np.random.Generator(np.random.PCG64(s)) for s in root.spawn(4)]


def _first_probe_times(p: ProbingProcess, rng: np.random.Generator) -> list[float]:
    n = p.n_streams
    if isinstance(p, PerBotDeterministic):
        return (rng.random(n) * p.period).tolist()
    first = sample_interprobe(p, rng, size=n)
    if isinstance(p, PerBotTruncGaussian):
        # renewal clocks start a uniform fraction into a first interval
        return (rng.random(n) * first).tolist()
    # exponential clocks are memoryless, so they start in equilibrium
    return first.tolist()


def run_replication(cfg: ScenarioConfig, rep: int, record: bool = False) -> ReplicationResult:
    """Run replication ``rep`` of ``cfg``; ``record`` keeps the sampled trajectory."""
    m = cfg.params.m
    horizon, warmup = cfg.horizon, cfg.warmup
    probe_rng, assign_rng, repl_rng, thin_rng = _rep_rngs(cfg.seed, rep)

    probing, replacement, assignment = cfg.probing, cfg.replacement, cfg.assignment
    gaps = _stream(lambda n: sample_interprobe(probing, probe_rng, size=n))
    if isinstance(assignment, UniformRandom):
        slots = _stream(lambda n: assign_rng.integers(m, size=n))
        next_slot = lambda t: next(slots)  # noqa: E731
    elif isinstance(assignment, RoundRobin):
        a_state = AssignmentState(m)
        next_slot = lambda t: assign_proxy(assignment, a_state, assign_rng, t)  # noqa: E731
    else:
        raise ConfigError(f"unknown assignment policy {assignment!r}")

    if isinstance(replacement, PerProxyIndependent):
        n_clocks = m
    elif isinstance(replacement, (AllAtOnce, Selective)):
        n_clocks = 1
    else:
        raise ConfigError(f"unknown replacement policy {replacement!r}")
    repl_gaps = _stream(lambda n: repl_rng.exponential(1.0 / replacement.delta, size=n))
    thin_u = _stream(lambda n: thin_rng.random(n))
    thin_r = replacement.r if isinstance(replacement, Selective) else 1.0

    heap = [(t0, PROBE, i) for i, t0 in enumerate(_first_probe_times(probing, probe_rng))]
    heap += [(next(repl_gaps), REPLACE, j) for j in range(n_clocks)]
    heapq.heapify(heap)

    known = [False] * m
    gen = [0] * m
    y = 0
    last_t = 0.0
    area_all = 0.0
    area = 0.0
    occ = [0.0] * (m + 1)
    epochs = []
    n_probes = n_repl = 0
    trace = []
    n_trace = cfg.trace_events if record else 0

    dt = cfg.trajectory_dt or horizon / 1000.0
    grid_t = 0.0
    grid_i = 0
    traj = []
    run_avg = []

    while True:
        t, kind, idx = heap[0]
        if t >= horizon:
            break
        if record:
            while grid_t <= t and grid_t <= horizon:
                traj.append((grid_t, y))
                run_avg.append((grid_t, (area_all + y * (grid_t - last_t)) / grid_t if grid_t > 0 else float(y)))
                grid_i += 1
                grid_t = grid_i * dt
        seg = t - last_t
        area_all += y * seg
        if t > warmup:
            lo = last_t if last_t > warmup else warmup
            area += y * (t - lo)
            occ[y] += t - lo
        last_t = t

        if kind == PROBE:
            n_probes += 1
            slot = next_slot(t)
            if not known[slot]:
                known[slot] = True
                y += 1
            if n_trace and len(trace) < n_trace:
                trace.append(TraceEvent(t, "probe", slot, gen[slot], y))
            heapq.heapreplace(heap, (t + next(gaps), PROBE, idx))
        else:
            n_repl += 1
            if t >= warmup:
                epochs.append(y)
            if n_clocks == m:
                gen[idx] += 1
                if known[idx]:
                    known[idx] = False
                    y -= 1
                changed = idx
            elif thin_r == 1.0:
                known = [False] * m
                gen = [g + 1 for g in gen]
                y = 0
                changed = -1
            else:
                for s in range(m):
                    if next(thin_u) < thin_r:
                        gen[s] += 1
                        if known[s]:
                            known[s] = False
                            y -= 1
                changed = -1
            if n_trace and len(trace) < n_trace:
                trace.append(TraceEvent(t, "replace", changed, gen[changed] if changed >= 0 else -1, y))
            heapq.heapreplace(heap, (t + next(repl_gaps), REPLACE, idx))

    seg = horizon - last_t
    area_all += y * seg
    lo = max(last_t, warmup)
    area += y * (horizon - lo)
    occ[y] += horizon - lo
    if record:
        while grid_t <= horizon + 1e-9 * dt:
            traj.append((grid_t, y))
            run_avg.append((grid_t, (area_all - y * (horizon - grid_t)) / grid_t if grid_t > 0 else float(y)))
            grid_i += 1
            grid_t = grid_i * dt

    span = horizon - warmup
    occupancy = np.array(occ) / span
    return ReplicationResult(
        time_avg=area / span,
        occupancy=occupancy / occupancy.sum(),
        epoch_samples=np.array(epochs, dtype=np.int64),
        final_known=y,
        n_probes=n_probes,
        n_replacements=n_repl,
        trajectory=np.array(traj, dtype=float).reshape(-1, 2) if record else None,
        running_avg=np.array(run_avg, dtype=float).reshape(-1, 2) if record else None,
        trace=trace,
    )


def _run_reps(args):
    cfg, reps = args
    return [run_replication(cfg, rep, record=(rep == 0)) for rep in reps]


def _halfwidth(values) -> float:
    values = np.asarray(values, dtype=float)
    if len(values) < 2:
        return math.nan
    return Z95 * float(values.std(ddof=1)) / math.sqrt(len(values))


def run_scenario(cfg: ScenarioConfig, workers: int = 1) -> SimResult:
    """Run all replications of ``cfg`` and aggregate them.

    ``workers > 1`` farms replications out to a process pool; the result is
    identical to the serial run.
    """
    if cfg.replications < RECOMMENDED_REPLICATIONS:
        warnings.warn(
            f"{cfg.replications} replications; confidence intervals assume at least "
            f"{RECOMMENDED_REPLICATIONS}", InsufficientDataWarning, stacklevel=2)
    reps = list(range(cfg.replications))
    if workers > 1 and cfg.replications > 1:
        chunks = [(cfg, reps[i::workers]) for i in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_reps, chunks))
        by_rep = {}
        for (_, idxs), part in zip(chunks, parts):
            by_rep.update(zip(idxs, part))
        results = [by_rep[i] for i in reps]
    else:
        results = _run_reps((cfg, reps))
    return aggregate(cfg, results)


def aggregate(cfg: ScenarioConfig, results: list[ReplicationResult]) -> SimResult:
    avgs = [r.time_avg for r in results]
    occ = np.mean([r.occupancy for r in results], axis=0)
    epoch_means = [r.epoch_samples.mean() for r in results if len(r.epoch_samples)]
    all_epochs = np.concatenate([r.epoch_samples for r in results])
    first = results[0]
    return SimResult(
        config=cfg,
        time_avg_known=float(np.mean(avgs)),
        ci_halfwidth=_halfwidth(avgs),
        trajectory=first.trajectory if first.trajectory is not None else np.empty((0, 2)),
        running_avg=first.running_avg if first.running_avg is not None else np.empty((0, 2)),
        epoch_samples=all_epochs,
        empirical_pmf=Pmf(cfg.params.m, occ / occ.sum()),
        epoch_avg=float(all_epochs.mean()) if len(all_epochs) else None,
        epoch_ci_halfwidth=_halfwidth(epoch_means) if epoch_means else None,
        replications=results,
    )


def empirical_stationary_pmf(result: SimResult) -> Pmf:
    """Time-weighted occupancy of each state over ``[warmup, horizon]``, pooled over replications."""
    cfg = result.config
    cycles = cfg.params.delta * cfg.horizon
    if cycles < MIN_CYCLES:
        warnings.warn(
            f"horizon covers only {cycles:.0f} replacement cycles (< {MIN_CYCLES})",
            InsufficientDataWarning, stacklevel=2)
    return result.empirical_pmf


def pasta_check(result: SimResult) -> tuple[float, float | None]:
    """Time average of Y and the average of Y seen just before replacement epochs.

    The replacement epochs form a Poisson process, so both estimate the same
    stationary mean. The epoch average is None when no replacement happened
    after warm-up.
    """
    return result.time_avg_known, result.epoch_avg
