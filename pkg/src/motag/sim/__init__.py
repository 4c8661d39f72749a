"""Monte Carlo counterpart of the analytic and Markov models."""
from .engine import (
    InsufficientDataWarning,
    ReplicationResult,
    ScenarioConfig,
    SimResult,
    TraceEvent,
    empirical_stationary_pmf,
    pasta_check,
    run_replication,
    run_scenario,
)
from .policies import (
    AllAtOnce,
    AssignmentPolicy,
    AssignmentState,
    PerBotDeterministic,
    PerBotExponential,
    PerBotTruncGaussian,
    PerProxyIndependent,
    PoissonAggregate,
    ProbingProcess,
    ReplacementPolicy,
    RoundRobin,
    Selective,
    UniformRandom,
    assign_proxy,
    sample_interprobe,
)

__all__ = [
    "AllAtOnce", "AssignmentPolicy", "AssignmentState", "InsufficientDataWarning",
    "PerBotDeterministic", "PerBotExponential", "PerBotTruncGaussian", "PerProxyIndependent",
    "PoissonAggregate", "ProbingProcess", "ReplacementPolicy", "ReplicationResult", "RoundRobin",
    "ScenarioConfig", "Selective", "SimResult", "TraceEvent", "UniformRandom", "assign_proxy",
    "empirical_stationary_pmf", "pasta_check", "run_replication", "run_scenario", "sample_interprobe",
]
