"""Flat key/value scenario files.

Files are TOML restricted to scalar values under dotted keys, e.g.::

    m = 25
    probing.kind = "exponential"
    probing.n_bots = 50

Recognised keys are listed in ``KEYS``. Unknown keys and bad values are
reported with the line they came from.
"""
from __future__ import annotations

import re
import sys

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from ..analytic import ModelParams
from ..errors import ConfigError
from ..sim import (
    AllAtOnce,
    PerBotDeterministic,
    PerBotExponential,
    PerBotTruncGaussian,
    PerProxyIndependent,
    PoissonAggregate,
    RoundRobin,
    ScenarioConfig,
    Selective,
    UniformRandom,
)

KEYS = {
    "m": "number of proxies",
    "beta": "aggregate probe rate (probes per unit time)",
    "delta": "replacement rate (per proxy for per_proxy replacement)",
    "r": "per-identity replacement probability (selective only)",
    "probing.kind": "poisson | exponential | deterministic | trunc_gaussian",
    "probing.n_bots": "number of probing bots (per-bot kinds)",
    "probing.mean": "mean time between probes of one bot",
    "probing.kappa": "coefficient of variation of the Gaussian inter-probe time",
    "probing.floor": "lower truncation bound of the Gaussian inter-probe time",
    "replacement.kind": "all_at_once | selective | per_proxy",
    "assignment.kind": "uniform | round_robin",
    "assignment.nominal_rate": "nominal client session rate (round_robin only)",
    "horizon": "simulated time per replication",
    "warmup": "initial time excluded from statistics (default 10% of horizon)",
    "replications": "independent replications",
    "seed": "64-bit root seed",
    "trajectory_dt": "sampling interval of the recorded trajectory",
}

DEMO = {
    "m": 25,
    "delta": 1 / 30,
    "probing.kind": "exponential",
    "probing.n_bots": 50,
    "probing.mean": 30.0,
    "replacement.kind": "all_at_once",
    "assignment.kind": "uniform",
    "horizon": 30_000.0,
    "warmup": 3_000.0,
    "replications": 30,
    "seed": 20180601,
    "trajectory_dt": 10.0,
}


def _flatten(d, prefix=""):
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        else:
            out[key] = v
    return out


def _line_of(text: str, key: str) -> int | None:
    pat = re.compile(r"^\s*" + r"\s*\.\s*".join(map(re.escape, key.split("."))) + r"\s*=")
    for n, line in enumerate(text.splitlines(), 1):
        if pat.match(line):
            return n
    return None


def parse_config_text(text: str, source: str = "<config>") -> dict:
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        at = re.search(r"\(at line (\d+), column \d+\)", str(exc))
        loc = f"{source}:{at.group(1)}" if at else source
        raise ConfigError(f"{loc}: {exc}") from exc
    flat = _flatten(raw)
    for key, value in flat.items():
        where = _line_of(text, key)
        loc = f"{source}:{where}" if where else source
        if key not in KEYS:
            raise ConfigError(f"{loc}: unknown key {key!r}")
        if isinstance(value, (dict, list)):
            raise ConfigError(f"{loc}: {key} must be a scalar")
    return flat


def load_config(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return parse_config_text(fh.read(), str(path))


def parse_override(item: str) -> tuple[str, object]:
    """Parse ``key=value``; the value is read as a TOML scalar, else kept as a string."""
    if "=" not in item:
        raise ConfigError(f"override {item!r} is not of the form key=value")
    key, value = (s.strip() for s in item.split("=", 1))
    if key not in KEYS:
        raise ConfigError(f"unknown key {key!r} in override")
    try:
        return key, tomllib.loads(f"v = {value}")["v"]
    except tomllib.TOMLDecodeError:
        return key, value


def _get(flat, key, kind=float, default=None, required=False):
    if key not in flat:
        if required:
            raise ConfigError(f"missing required key {key!r}")
        return default
    value = flat[key]
    try:
        if kind is int:
            if isinstance(value, bool) or int(value) != value:
                raise ValueError
            return int(value)
        return kind(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key} = {value!r} is not a valid {kind.__name__}") from None


def build_scenario(flat: dict) -> ScenarioConfig:
    """Turn a flat key dict into a validated :class:`ScenarioConfig`."""
    m = _get(flat, "m", int, required=True)
    delta = _get(flat, "delta", required=True)
    beta = _get(flat, "beta")
    kind = _get(flat, "probing.kind", str, "poisson")
    n_bots = _get(flat, "probing.n_bots", int)
    mean = _get(flat, "probing.mean")

    try:
        if kind == "poisson":
            if beta is None:
                if n_bots is None or mean is None:
                    raise ConfigError("poisson probing needs beta or probing.n_bots with probing.mean")
                beta = n_bots / mean
            probing = PoissonAggregate(beta)
        elif kind in ("exponential", "deterministic", "trunc_gaussian"):
            if n_bots is None:
                raise ConfigError(f"{kind} probing needs probing.n_bots")
            if mean is None:
                if beta is None:
                    raise ConfigError(f"{kind} probing needs probing.mean or beta")
                mean = n_bots / beta
            if kind == "exponential":
                probing = PerBotExponential(n_bots, mean)
            elif kind == "deterministic":
                probing = PerBotDeterministic(n_bots, mean)
            else:
                probing = PerBotTruncGaussian(n_bots, mean, _get(flat, "probing.kappa", default=0.05),
                                              _get(flat, "probing.floor", default=2.0))
        else:
            raise ConfigError(f"unknown probing.kind {kind!r}")
        if beta is not None and abs(beta - probing.rate) > 1e-9 * probing.rate:
            raise ConfigError(f"beta={beta!r} disagrees with probing.n_bots/probing.mean={probing.rate!r}")

        rkind = _get(flat, "replacement.kind", str, "all_at_once")
        r = _get(flat, "r", default=1.0)
        if rkind == "all_at_once":
            if r != 1.0:
                raise ConfigError("r applies to selective replacement only")
            replacement = AllAtOnce(delta)
        elif rkind == "selective":
            replacement = Selective(delta, r)
        elif rkind == "per_proxy":
            replacement = PerProxyIndependent(delta)
        else:
            raise ConfigError(f"unknown replacement.kind {rkind!r}")

        akind = _get(flat, "assignment.kind", str, "uniform")
        if akind == "uniform":
            assignment = UniformRandom()
        elif akind == "round_robin":
            assignment = RoundRobin(_get(flat, "assignment.nominal_rate", default=0.0))
        else:
            raise ConfigError(f"unknown assignment.kind {akind!r}")

        params = ModelParams(m, probing.rate, delta, r if rkind == "selective" else 1.0)
        return ScenarioConfig(
            params, probing, replacement, assignment,
            horizon=_get(flat, "horizon", default=30_000.0),
            warmup=_get(flat, "warmup"),
            replications=_get(flat, "replications", int, 1),
            seed=_get(flat, "seed", int, 0),
            trajectory_dt=_get(flat, "trajectory_dt"),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


DEMO_TEXT = """\
# AWS-style demo: 25 proxies, 50 bots probing every 30 s on average,
# all identities change every 30 s on average (rho = 50).
m = 25
delta = 0.03333333333333333
probing.kind = "exponential"
probing.n_bots = 50
probing.mean = 30.0
replacement.kind = "all_at_once"
assignment.kind = "uniform"
horizon = 30000.0
warmup = 3000.0
replications = 30
seed = 20180601
trajectory_dt = 10.0
"""
