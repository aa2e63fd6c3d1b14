"""Experiment configuration: strict JSON loading with anti-typo validation."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

from .errors import ConfigError

__all__ = ["SchemeSpec", "ExperimentConfig", "config_from_dict", "load_config"]

_TOP_KEYS = {
    "M", "K", "N_grid", "P_grid", "trials", "seed", "schemes",
    "compute_ropt", "ropt_every", "sinr_bits",
}

# scheme id -> (required params, optional params)
_SCHEME_PARAMS = {
    "rbf": (set(), {"threshold"}),
    "eigen_zfbf": ({"t"}, {"B"}),
    "algorithm_a": ({"t", "beta", "eps", "B"}, set()),
    "algorithm_b": ({"t", "eps"}, set()),
    "low_snr_rvq": ({"f_target"}, set()),
}


@dataclass(frozen=True)
class SchemeSpec:
    id: str
    params: tuple  # sorted (key, value) pairs, hashable and picklable

    def param(self, key, default=None):
        for k, v in self.params:
            if k == key:
                return v
        return default


@dataclass(frozen=True)
class ExperimentConfig:
    M: int
    K: int
    N_grid: tuple
    P_grid: tuple
    trials: int
    seed: int
    schemes: tuple
    compute_ropt: bool = False
    ropt_every: int = 1
    sinr_bits: int = 16

    def with_seed(self, seed: int) -> "ExperimentConfig":
        return replace(self, seed=int(seed))


def _require_int(d, key, minimum=None):
    v = d.get(key)
    if not isinstance(v, int) or isinstance(v, bool):
        raise ConfigError(f"'{key}' must be an integer, got {v!r}")
    if minimum is not None and v < minimum:
        raise ConfigError(f"'{key}' must be >= {minimum}, got {v}")
    return v


def _scheme_from_dict(d, M: int, K: int) -> SchemeSpec:
    if not isinstance(d, dict):
        raise ConfigError(f"scheme entries must be objects, got {d!r}")
    sid = d.get("id")
    if sid not in _SCHEME_PARAMS:
        raise ConfigError(
            f"unknown scheme id {sid!r}; known: {sorted(_SCHEME_PARAMS)}"
        )
    required, optional = _SCHEME_PARAMS[sid]
    params = {k: v for k, v in d.items() if k != "id"}
    unknown = set(params) - required - optional
    if unknown:
        raise ConfigError(f"scheme {sid!r} has unknown parameters {sorted(unknown)}")
    missing = required - set(params)
    if missing:
        raise ConfigError(f"scheme {sid!r} is missing parameters {sorted(missing)}")
    for k, v in params.items():
        if not isinstance(v, (int, float)) or isinstance(v, bool):
            raise ConfigError(f"scheme {sid!r} parameter {k!r} must be numeric, got {v!r}")
    if sid == "algorithm_a" and K >= M:
        raise ConfigError(f"algorithm_a requires K < M, got K={K} M={M}")
    if sid == "algorithm_b" and K != M:
        raise ConfigError(f"algorithm_b requires K = M, got K={K} M={M}")
    return SchemeSpec(id=sid, params=tuple(sorted(params.items())))


def config_from_dict(d: dict) -> ExperimentConfig:
    if not isinstance(d, dict):
        raise ConfigError("config root must be an object")
    unknown = set(d) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)}")
    missing = {"M", "K", "N_grid", "P_grid", "trials", "seed", "schemes"} - set(d)
    if missing:
        raise ConfigError(f"missing config keys {sorted(missing)}")

    M = _require_int(d, "M", 1)
    K = _require_int(d, "K", 1)
    if K > M:
        raise ConfigError(f"need K <= M, got K={K} M={M}")
    trials = _require_int(d, "trials", 1)
    seed = _require_int(d, "seed")

    N_grid = d["N_grid"]
    if not isinstance(N_grid, list) or not N_grid:
        raise ConfigError("'N_grid' must be a nonempty list")
    for n in N_grid:
        if not isinstance(n, int) or isinstance(n, bool) or n < 1:
            raise ConfigError(f"'N_grid' entries must be positive integers, got {n!r}")
    P_grid = d["P_grid"]
    if not isinstance(P_grid, list) or not P_grid:
        raise ConfigError("'P_grid' must be a nonempty list")
    for p in P_grid:
        if not isinstance(p, (int, float)) or isinstance(p, bool) or p <= 0:
            raise ConfigError(f"'P_grid' entries must be positive numbers, got {p!r}")

    schemes_raw = d["schemes"]
    if not isinstance(schemes_raw, list) or not schemes_raw:
        raise ConfigError("'schemes' must be a nonempty list")
    schemes = tuple(_scheme_from_dict(s, M, K) for s in schemes_raw)
    ids = [s.id for s in schemes]
    if len(set(ids)) != len(ids):
        raise ConfigError(f"duplicate scheme ids: {ids}")

    compute_ropt = d.get("compute_ropt", False)
    if not isinstance(compute_ropt, bool):
        raise ConfigError(f"'compute_ropt' must be a boolean, got {compute_ropt!r}")
    ropt_every = d.get("ropt_every", 1)
    if not isinstance(ropt_every, int) or isinstance(ropt_every, bool) or ropt_every < 1:
        raise ConfigError(f"'ropt_every' must be a positive integer, got {ropt_every!r}")
    sinr_bits = d.get("sinr_bits", 16)
    if not isinstance(sinr_bits, int) or isinstance(sinr_bits, bool) or sinr_bits < 0:
        raise ConfigError(f"'sinr_bits' must be a nonnegative integer, got {sinr_bits!r}")

    return ExperimentConfig(
        M=M, K=K,
        N_grid=tuple(N_grid), P_grid=tuple(float(p) for p in P_grid),
        trials=trials, seed=seed, schemes=schemes,
        compute_ropt=compute_ropt, ropt_every=ropt_every, sinr_bits=sinr_bits,
    )


def config_to_dict(cfg: ExperimentConfig) -> dict:
    return {
        "M": cfg.M,
        "K": cfg.K,
        "N_grid": list(cfg.N_grid),
        "P_grid": list(cfg.P_grid),
        "trials": cfg.trials,
        "seed": cfg.seed,
        "schemes": [{"id": s.id, **dict(s.params)} for s in cfg.schemes],
        "compute_ropt": cfg.compute_ropt,
        "ropt_every": cfg.ropt_every,
        "sinr_bits": cfg.sinr_bits,
    }


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    return config_from_dict(raw)
