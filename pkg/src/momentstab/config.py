"""Experiment configuration parsed from JSON.

Example::

    {
      "system": {"fixture": "exA", "noise": {"kind": "UH", "b2": 0.04}},
      "run": {"t_max": 40, "runs": 10000, "seed": 1, "p_list": [1, 2],
              "fit_window": [10, 40]},
      "analysis": {"methods": ["exact", "perturbation", "iteration"], "r": 6},
      "output": {"directory": "out"}
    }

The matrix is given by exactly one of ``A`` (row-major nested list),
``fixture`` (a name from :mod:`momentstab.fixtures`) or ``matrix_csv``
(path relative to the config file). ``x0`` defaults to a vector of ones.
"""

import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import fixtures
from .dynamics import SystemSpec
from .errors import ConfigError
from .io import read_matrix_csv
from .noise import NoiseModel

METHODS = ("mc", "exact", "perturbation", "iteration", "large_noise", "critical", "bounds")
_SECTIONS = {"system", "run", "analysis", "output", "ensemble", "_base_dir"}


@dataclass
class RunConfig:
    seed: int
    t_max: int = 40
    runs: int = 10_000
    p_list: list = field(default_factory=lambda: [2])
    fit_window: Optional[tuple] = None
    histogram_t: Optional[int] = None


@dataclass
class AnalysisConfig:
    methods: list = field(default_factory=lambda: list(METHODS))
    r: int = 6
    lambda_grid: int = 99


@dataclass
class ExperimentConfig:
    system: Optional[SystemSpec]
    run: RunConfig
    analysis: AnalysisConfig
    output_dir: Optional[str]
    raw: dict


def _matrix(sys_cfg: dict, base_dir: str) -> np.ndarray:
    given = [k for k in ("A", "fixture", "matrix_csv") if k in sys_cfg]
    if len(given) != 1:
        raise ConfigError("system needs exactly one of 'A', 'fixture', 'matrix_csv'")
    if "A" in sys_cfg:
        try:
            A = np.array(sys_cfg["A"], dtype=float)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad matrix: {exc}") from exc
    elif "fixture" in sys_cfg:
        try:
            A = fixtures.get(sys_cfg["fixture"])
        except KeyError as exc:
            raise ConfigError(str(exc)) from exc
    else:
        A = read_matrix_csv(os.path.join(base_dir, sys_cfg["matrix_csv"]))
    if A.ndim != 2 or A.shape[0] != A.shape[1] or not np.all(np.isfinite(A)):
        raise ConfigError("matrix must be square with finite entries")
    return A


def parse_system(sys_cfg: dict, base_dir: str = ".") -> SystemSpec:
    if not isinstance(sys_cfg, dict):
        raise ConfigError("'system' must be an object")
    unknown = set(sys_cfg) - {"A", "fixture", "matrix_csv", "noise", "x0"}
    if unknown:
        raise ConfigError(f"unknown system fields: {sorted(unknown)}")
    A = _matrix(sys_cfg, base_dir)
    if "noise" not in sys_cfg:
        raise ConfigError("system needs a 'noise' model")
    noise = NoiseModel.from_dict(sys_cfg["noise"])
    x0 = np.array(sys_cfg.get("x0", np.ones(A.shape[0])), dtype=float)
    try:
        return SystemSpec(A, noise, x0)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def parse_config(cfg: dict, seed: Optional[int] = None, need_system: bool = True) -> ExperimentConfig:
    """Validate a config dict; ``seed`` overrides ``run.seed``."""
    unknown = set(cfg) - _SECTIONS
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    base = cfg.get("_base_dir", ".")
    system = None
    if "system" in cfg:
        system = parse_system(cfg["system"], base)
    elif need_system:
        raise ConfigError("config needs a 'system' section")
    run_cfg = dict(cfg.get("run", {}))
    if seed is not None:
        run_cfg["seed"] = seed
    if "seed" not in run_cfg:
        raise ConfigError("run.seed is mandatory")
    unknown = set(run_cfg) - {"seed", "t_max", "runs", "p_list", "fit_window", "histogram_t"}
    if unknown:
        raise ConfigError(f"unknown run fields: {sorted(unknown)}")
    try:
        run = RunConfig(
            seed=int(run_cfg["seed"]),
            t_max=int(run_cfg.get("t_max", 40)),
            runs=int(run_cfg.get("runs", 10_000)),
            p_list=[float(p) if float(p) != int(p) else int(p) for p in run_cfg.get("p_list", [2])],
            fit_window=tuple(run_cfg["fit_window"]) if run_cfg.get("fit_window") is not None else None,
            histogram_t=run_cfg.get("histogram_t"),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad run section: {exc}") from exc
    if run.seed < 0 or run.t_max < 1 or run.runs < 1 or not run.p_list:
        raise ConfigError("seed must be >= 0, t_max and runs >= 1, p_list nonempty")
    if run.fit_window is not None:
        if len(run.fit_window) != 2 or run.fit_window[1] > run.t_max or run.fit_window[0] < 0:
            raise ConfigError("fit_window must be [t_lo, t_hi] with t_hi <= t_max")
    an = dict(cfg.get("analysis", {}))
    unknown = set(an) - {"methods", "r", "lambda_grid"}
    if unknown:
        raise ConfigError(f"unknown analysis fields: {sorted(unknown)}")
    analysis = AnalysisConfig(
        methods=list(an.get("methods", METHODS)),
        r=int(an.get("r", 6)),
        lambda_grid=int(an.get("lambda_grid", 99)),
    )
    bad = set(analysis.methods) - set(METHODS)
    if bad:
        raise ConfigError(f"unknown methods {sorted(bad)}; expected a subset of {METHODS}")
    out = cfg.get("output", {})
    out_dir = out.get("directory") if isinstance(out, dict) else None
    raw = {k: v for k, v in cfg.items() if not k.startswith("_")}
    if seed is not None:
        raw = {**raw, "run": {**raw.get("run", {}), "seed": seed}}
    return ExperimentConfig(system, run, analysis, out_dir, raw)
