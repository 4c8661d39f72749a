"""Desk-scale reproductions of the published tables and figures."""
from __future__ import annotations

import warnings

from ..analytic import (
    ModelParams,
    mean_known_deterministic,
    mean_known_poisson,
    prob_fraction_not_found,
)
from ..sim import AllAtOnce, PerBotTruncGaussian, PoissonAggregate, ScenarioConfig, run_scenario

DEFAULT_SEED = 20180601
MEAN_CHANGE = 30.0  # seconds between identity changes
MEAN_PROBE = 30.0  # seconds between probes of one bot
TABLE1_RHOS = (5, 25, 50)
TABLE2_KAPPAS = (0.05, 0.25, 0.5)
TABLE2_BOTS = 50
TABLE2_FLOOR = 2.0
M_TABLES = 25
M_FIGS = 1000


def log_grid(lo_exp: int, hi_exp: int, per_decade: int = 10) -> list[float]:
    """``10**(i/per_decade)`` from ``10**lo_exp`` to ``10**hi_exp`` inclusive."""
    return [10.0 ** (i / per_decade) for i in range(lo_exp * per_decade, hi_exp * per_decade + 1)]


def table1_analytic() -> list[float]:
    """Closed-form percentages for the Table 1 rho values, m = 25."""
    return [100 * mean_known_poisson(ModelParams.from_rho(M_TABLES, rho)) / M_TABLES for rho in TABLE1_RHOS]


def table1(replications=30, horizon=3e4, seed=DEFAULT_SEED, workers=1):
    """Rows ``(rho, simulated_pct, analytic_pct)`` for Poisson probing, m = 25."""
    delta = 1.0 / MEAN_CHANGE
    rows = []
    for i, (rho, analytic) in enumerate(zip(TABLE1_RHOS, table1_analytic())):
        cfg = ScenarioConfig.from_policies(
            M_TABLES, PoissonAggregate(rho * delta), AllAtOnce(delta),
            horizon=horizon, replications=replications, seed=seed + i)
        sim = run_scenario(cfg, workers=workers)
        rows.append((rho, 100 * sim.fraction_known, analytic))
    return rows


def table2(replications=30, horizon=3e4, seed=DEFAULT_SEED, workers=1):
    """Rows ``(kappa, simulated_pct, deterministic_closed_form_pct)``; m = 25, rho = 50."""
    delta = 1.0 / MEAN_CHANGE
    det = 100 * mean_known_deterministic(ModelParams(M_TABLES, TABLE2_BOTS / MEAN_PROBE, delta)) / M_TABLES
    rows = []
    for i, kappa in enumerate(TABLE2_KAPPAS):
        probing = PerBotTruncGaussian(TABLE2_BOTS, MEAN_PROBE, kappa, TABLE2_FLOOR)
        cfg = ScenarioConfig.from_policies(
            M_TABLES, probing, AllAtOnce(delta),
            horizon=horizon, replications=replications, seed=seed + i)
        sim = run_scenario(cfg, workers=workers)
        rows.append((kappa, 100 * sim.fraction_known, det))
    return rows


def fig5(rhos=None, m=M_FIGS):
    """Rows ``(rho, mean_fraction_known)``."""
    rhos = rhos or log_grid(1, 4)
    return [(rho, mean_known_poisson(ModelParams.from_rho(m, rho)) / m) for rho in rhos]


def fig6(rhos=None, m=M_FIGS, fraction=0.2):
    """Rows ``(rho, P(at least `fraction` of proxies unknown))``."""
    rhos = rhos or log_grid(1, 5)
    return [(rho, prob_fraction_not_found(ModelParams.from_rho(m, rho), fraction)) for rho in rhos]


TARGETS = {
    "table1": ("table1.csv", ("rho", "simulated_pct", "analytic_pct")),
    "table2": ("table2.csv", ("kappa", "simulated_pct", "deterministic_closed_form_pct")),
    "fig5": ("fig5.csv", ("rho", "mean_fraction_known")),
    "fig6": ("fig6.csv", ("rho", "prob_at_least_20pct_not_found")),
}


def compute(target, replications=30, horizon=3e4, seed=DEFAULT_SEED, workers=1, rhos=None):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        if target == "table1":
            return table1(replications, horizon, seed, workers)
        if target == "table2":
            return table2(replications, horizon, seed, workers)
    if target == "fig5":
        return fig5(rhos)
    if target == "fig6":
        return fig6(rhos)
    raise ValueError(f"unknown target {target!r}")
