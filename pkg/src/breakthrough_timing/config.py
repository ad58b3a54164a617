"""JSON run configuration.

A config has the sections ``model``, ``payoffs``, ``costs`` and optionally
``solver`` and ``sim``; unknown sections or keys are rejected::

    {"model": {"model": "gbm", "mu": 0.0, "sigma": 0.316, "r": 0.05},
     "payoffs": {"I": 1.0, "kappa": 2.0, "bargaining": "nash"},
     "costs": {"family": "exponential", "rate": 1.0},
     "solver": {"rtol": 1e-10},
     "sim": {"n_paths": 200000, "dt": 0.001, "seed": 42}}
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .boundary import SolverSettings
from .law import CostLaw
from .problem import Problem


class ConfigError(ValueError):
    pass


_SECTIONS = {"model", "payoffs", "costs", "solver", "sim"}
_KEYS = {
    "model": {"model", "mu", "sigma", "r"},
    "payoffs": {"I", "kappa", "bargaining"},
    "costs": {"family", "rate", "location", "scale"},
    "solver": {"rtol", "atol", "diag_eps", "tol", "horizon", "tail", "max_iter",
               "max_doublings", "grid_step"},
    "sim": {"n_paths", "dt", "t_max", "seed", "dt_max", "adaptive", "bridge"},
}
_REQUIRED = {
    "model": {"mu", "sigma", "r"},
    "payoffs": {"I", "kappa"},
    "costs": {"family"},
}


@dataclass
class RunConfig:
    name: str
    model: dict
    payoffs: dict
    costs: dict
    solver: dict = field(default_factory=dict)
    sim: dict = field(default_factory=dict)

    def cost_law(self) -> CostLaw:
        c = self.costs
        family = c["family"]
        try:
            if family == "exponential":
                _only(c, {"family", "rate"}, "costs")
                return CostLaw.exponential(_number(c, "rate", "costs"))
            if family == "lognormal":
                _only(c, {"family", "location", "scale"}, "costs")
                return CostLaw.lognormal(_number(c, "location", "costs"), _number(c, "scale", "costs"))
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"costs: {exc}") from None
        raise ConfigError(f"costs.family: expected 'exponential' or 'lognormal', got {family!r}")

    def problem(self) -> Problem:
        m, p = self.model, self.payoffs
        try:
            return Problem.gbm_linear(m["mu"], m["sigma"], m["r"], p["I"], p["kappa"],
                                      self.cost_law(), p.get("bargaining", "nash"))
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def solver_settings(self) -> SolverSettings:
        try:
            return SolverSettings(**self.solver)
        except TypeError as exc:
            raise ConfigError(f"solver: {exc}") from None


def _only(section: dict, allowed: set, name: str):
    extra = set(section) - allowed
    if extra:
        raise ConfigError(f"{name}: unexpected key(s) {sorted(extra)}")


def _number(section: dict, key: str, name: str) -> float:
    if key not in section:
        raise ConfigError(f"{name}.{key}: missing")
    v = section[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{name}.{key}: expected a number, got {v!r}")
    return float(v)


def parse_config(doc: dict, name: str = "run") -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    extra = set(doc) - _SECTIONS
    if extra:
        raise ConfigError(f"unknown section(s) {sorted(extra)}")
    out = {}
    for sec in sorted(_SECTIONS):
        body = doc.get(sec, {})
        if not isinstance(body, dict):
            raise ConfigError(f"{sec}: expected an object")
        _only(body, _KEYS[sec], sec)
        missing = _REQUIRED.get(sec, set()) - set(body)
        if missing:
            raise ConfigError(f"{sec}: missing key(s) {sorted(missing)}")
        out[sec] = dict(body)
    kind = out["model"].pop("model", "gbm")
    if kind != "gbm":
        raise ConfigError(f"model.model: only 'gbm' is supported, got {kind!r}")
    for key in ("mu", "sigma", "r"):
        _number(out["model"], key, "model")
    for key in ("I", "kappa"):
        _number(out["payoffs"], key, "payoffs")
    return RunConfig(name, out["model"], out["payoffs"], out["costs"], out["solver"], out["sim"])


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    return parse_config(doc, path.stem)
