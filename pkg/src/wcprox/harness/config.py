"""Experiment configuration: JSON loading, defaulting and validation.

Every numeric precondition is checked here, before any run starts, so a bad
config fails with a message naming the violated inequality.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from ..algorithm import LocalityConfig, Schedule, make_locality, validate_schedule
from ..errors import ConfigurationError, ParameterError, PreconditionError, ScheduleError
from ..fixedpoint import derive_constants
from ..problems import PRESETS, ZOO, Problem, StationaryPoint, as_point, get_instance

KNOWN_KEYS = (
    "problem",
    "x0",
    "gamma",
    "lambda",
    "lambda_bar",
    "x_bar",
    "delta",
    "sigma",
    "beta",
    "rho",
    "eps",
    "max_iter",
    "inner_tol",
    "seed",
    "output",
)

DEFAULT_EPS = 1e-8
DEFAULT_MAX_ITER = 1000
DEFAULT_INNER_TOL = 1e-10


@dataclass
class ExperimentConfig:
    """A validated experiment.

    ``sigma`` is ``None`` for the default policy ``1/L^2``. ``gamma`` and
    ``lam`` are tuples; a scalar in the source becomes a one-element tuple.
    """

    problem_id: str
    x0: np.ndarray
    gamma: tuple
    lam: tuple
    lambda_bar: float
    x_bar: np.ndarray
    delta: float
    sigma: Optional[float] = None
    beta: Optional[float] = None
    rho: Optional[float] = None
    eps: float = DEFAULT_EPS
    max_iter: int = DEFAULT_MAX_ITER
    inner_tol: float = DEFAULT_INNER_TOL
    seed: int = 0
    output: Optional[str] = None
    problem: Problem = field(default=None, repr=False)
    stationary: StationaryPoint = field(default=None, repr=False)
    schedule: Schedule = field(default=None, repr=False)
    locality: LocalityConfig = field(default=None, repr=False)

    @property
    def sigma_policy(self) -> str:
        return "1/L^2" if self.sigma is None else "explicit"

    def to_dict(self) -> dict:
        return {
            "problem": self.problem_id,
            "x0": self.x0.tolist(),
            "gamma": list(self.gamma),
            "lambda": list(self.lam),
            "lambda_bar": self.lambda_bar,
            "x_bar": self.x_bar.tolist(),
            "delta": self.delta,
            "sigma": self.sigma,
            "beta": self.locality.beta if self.locality is not None else self.beta,
            "rho": self.problem.rho if self.problem is not None else self.rho,
            "eps": self.eps,
            "max_iter": self.max_iter,
            "inner_tol": self.inner_tol,
            "seed": self.seed,
            "output": self.output,
        }


def load_config(path) -> ExperimentConfig:
    """Read and validate a JSON config file.

    Relative sequence-file paths are resolved against the config's directory.
    """
    path = Path(path)
    return config_from_mapping(read_config_mapping(path), base_dir=path.parent)


def read_config_mapping(path) -> dict:
    """Parse a config file into a plain mapping without validating it."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc.strerror}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: JSON parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ConfigurationError(f"{path}: top level must be a JSON object")
    return data


def _read_sequence(value, key: str, base_dir: Path) -> tuple:
    if isinstance(value, str):
        p = Path(value)
        if not p.is_absolute():
            p = base_dir / p
        try:
            text = p.read_text()
        except OSError as exc:
            raise ConfigurationError(f"{key}: cannot read sequence file {p}: {exc.strerror}") from exc
        try:
            seq = json.loads(text)
        except json.JSONDecodeError:
            try:
                seq = [float(t) for t in text.replace(",", " ").split()]
            except ValueError as exc:
                raise ConfigurationError(f"{key}: sequence file {p} is neither JSON nor whitespace-separated numbers") from exc
        value = seq
    seq = np.atleast_1d(np.asarray(value, dtype=float)).ravel() if not isinstance(value, bool) else None
    if seq is None or seq.size == 0 or not np.all(np.isfinite(seq)):
        raise ConfigurationError(f"{key}: expected a positive number, a list, or a sequence file path")
    return tuple(float(v) for v in seq)


def _number(data, key, default, kind=float):
    v = data.get(key, default)
    if v is None:
        return None
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigurationError(f"{key}: expected a number, got {v!r}")
    if kind is int:
        if float(v) != int(v):
            raise ConfigurationError(f"{key}: expected an integer, got {v!r}")
        return int(v)
    return float(v)


def config_from_mapping(data: dict, base_dir=".") -> ExperimentConfig:
    """Build and validate a config from a parsed mapping (JSON object or CLI flags)."""
    unknown = sorted(set(data) - set(KNOWN_KEYS))
    if unknown:
        raise ConfigurationError(f"unknown config keys: {', '.join(unknown)}")
    pid = data.get("problem")
    if pid not in ZOO:
        raise ConfigurationError(f"problem: unknown instance {pid!r}; choose from {sorted(ZOO)}")
    base_dir = Path(base_dir)
    problem, stat = get_instance(pid)
    preset = PRESETS[pid]

    rho = _number(data, "rho", None)
    if rho is not None:
        # a larger modulus is always valid; a smaller one is a false claim
        if rho < problem.rho:
            raise ConfigurationError(f"rho: declared ρ={rho} is below the instance modulus {problem.rho}")
        problem = problem.with_rho(rho)

    try:
        x0 = as_point(data.get("x0", preset.x0), problem.dimension)
        x_bar = as_point(data.get("x_bar", stat.x_bar), problem.dimension)
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"x0/x_bar: {exc}") from exc
    gamma = _read_sequence(data.get("gamma", preset.gamma), "gamma", base_dir)
    lam = _read_sequence(data.get("lambda", preset.lam), "lambda", base_dir)
    cfg = ExperimentConfig(
        problem_id=pid,
        x0=x0,
        gamma=gamma,
        lam=lam,
        lambda_bar=_number(data, "lambda_bar", preset.lambda_bar),
        x_bar=x_bar,
        delta=_number(data, "delta", preset.delta),
        sigma=_number(data, "sigma", None),
        beta=_number(data, "beta", None),
        rho=rho,
        eps=_number(data, "eps", DEFAULT_EPS),
        max_iter=_number(data, "max_iter", DEFAULT_MAX_ITER, int),
        inner_tol=_number(data, "inner_tol", DEFAULT_INNER_TOL),
        seed=_number(data, "seed", 0, int),
        output=data.get("output"),
        problem=problem,
        stationary=stat,
    )
    validate_config(cfg)
    return cfg


def validate_config(cfg: ExperimentConfig) -> ExperimentConfig:
    """Check schedule, contraction and locality preconditions; fills ``schedule`` and ``locality``."""
    if not cfg.eps > 0.0:
        raise ParameterError(f"ε > 0 violated: ε={cfg.eps}")
    if not cfg.inner_tol > 0.0:
        raise ParameterError(f"inner_tol > 0 violated: inner_tol={cfg.inner_tol}")
    if cfg.max_iter < 1:
        raise ParameterError(f"max_iter ≥ 1 violated: max_iter={cfg.max_iter}")
    if not cfg.delta > 0.0:
        raise ParameterError(f"δ > 0 violated: δ={cfg.delta}")
    if cfg.output is not None and not isinstance(cfg.output, str):
        raise ConfigurationError("output: expected a path string")

    sched = Schedule(cfg.gamma, cfg.lam, cfg.lambda_bar, cfg.problem.rho)
    rep = validate_schedule(sched)
    if not rep.passed:
        w = rep.witness
        raise ScheduleError(
            f"schedule inequality {w['inequality']} violated at k={w['k']}: "
            f"γ={w['gamma']}, λ={w['lambda']}, λ̄={w['lambda_bar']}, ρ={w['rho']}"
        )
    for k in range(sched.length):
        # raises on σ and β bounds
        derive_constants(sched.gamma(k), sched.lam(k), sched.rho, cfg.delta, cfg.sigma, cfg.beta)
    if cfg.beta is not None:
        locality = LocalityConfig(cfg.x_bar, cfg.delta, cfg.beta)
    else:
        locality = make_locality(cfg.x_bar, cfg.delta, sched, cfg.sigma)
    d = float(np.linalg.norm(cfg.x0 - cfg.x_bar))
    if d > locality.beta:
        raise PreconditionError(f"x0 ∈ B[x̄, β] violated: ‖x0 − x̄‖={d:.6g} > β={locality.beta:.6g}")
    cfg.schedule = sched
    cfg.locality = locality
    return cfg


def default_output_dir() -> Path:
    """Directory for outputs when no path is given (``WCPROX_OUTPUT_DIR``, else the cwd)."""
    return Path(os.environ.get("WCPROX_OUTPUT_DIR", "."))


__all__ = [
    "ExperimentConfig",
    "KNOWN_KEYS",
    "config_from_mapping",
    "default_output_dir",
    "load_config",
    "read_config_mapping",
    "validate_config",
]
