"""Experiment configuration JSON and the dataset CSV format."""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Optional

import numpy as np

from .likelihood import StepStressSample
from .model import ModelParams, StressPlan, arrhenius_x, design_taus, inverse_power_x
from .schemes import CensoringScheme, parse_scheme

DATASET_COLUMNS = ("step", "time", "removed_after")

_LEVEL_KINDS = {
    "celsius": arrhenius_x,
    "x": lambda v: np.asarray(v, dtype=float),
    "inverse_power_v": inverse_power_x,
}


class ConfigError(ValueError):
    pass


def load_json(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: expected a JSON object")
    return doc


def params_from_config(cfg: dict) -> Optional[ModelParams]:
    keys = ("gamma0", "gamma1", "sigma")
    present = [k in cfg for k in keys]
    if not any(present):
        return None
    if not all(present):
        raise ConfigError("gamma0, gamma1 and sigma must be given together")
    try:
        return ModelParams(float(cfg["gamma0"]), float(cfg["gamma1"]), float(cfg["sigma"]))
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def levels_from_config(cfg: dict) -> list:
    given = cfg.get("levels")
    if not isinstance(given, dict):
        raise ConfigError('"levels" must be an object with one of: ' + ", ".join(_LEVEL_KINDS))
    kinds = [k for k in given if k in _LEVEL_KINDS]
    if len(kinds) != 1 or len(given) != 1:
        raise ConfigError('"levels" needs exactly one of: ' + ", ".join(_LEVEL_KINDS))
    try:
        return [float(v) for v in np.atleast_1d(_LEVEL_KINDS[kinds[0]](given[kinds[0]]))]
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad levels: {exc}") from None


def _target_probs(cfg: dict):
    taus = cfg.get("taus")
    top = cfg.get("target_cum_probs")
    nested = taus.get("target_cum_probs") if isinstance(taus, dict) else None
    explicit = isinstance(taus, list)
    given = sum(v is not None for v in (top, nested)) + explicit
    if given != 1:
        raise ConfigError('give exactly one of "taus" (a list) or "target_cum_probs"')
    return None if explicit else (top if top is not None else nested)


def plan_from_config(cfg: dict, params: Optional[ModelParams] = None) -> StressPlan:
    """Stress plan from a config, designing the change times when asked to."""
    levels = levels_from_config(cfg)
    probs = _target_probs(cfg)
    try:
        if probs is None:
            return StressPlan(levels, [float(v) for v in cfg["taus"]])
        params = params or params_from_config(cfg)
        if params is None:
            raise ConfigError('"target_cum_probs" needs gamma0, gamma1 and sigma')
        return StressPlan(levels, design_taus(params, levels, probs))
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad stress plan: {exc}") from None


def scheme_from_config(cfg: dict) -> CensoringScheme:
    if "n" not in cfg or "scheme" not in cfg:
        raise ConfigError('"n" and "scheme" are required')
    try:
        return parse_scheme(str(cfg["scheme"]), int(cfg["n"]))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def conf_levels(values) -> tuple:
    """Confidence levels given as fractions or percentages."""
    out = []
    for v in values:
        v = float(v)
        out.append(v / 100.0 if v > 1 else v)
    if not out or any(not 0 < v < 1 for v in out):
        raise ConfigError("confidence levels must lie in (0, 1) or (0, 100)")
    return tuple(out)


def resolved_plan_dict(plan: StressPlan) -> dict:
    return {"levels": {"x": list(plan.levels)}, "taus": list(plan.change_times)}


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def write_dataset(sample: StepStressSample, path, header: Optional[dict] = None) -> None:
    """One row per observed failure: 1-based step, time, units removed after it."""
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if header:
            for key, value in header.items():
                fh.write(f"# {key}: {json.dumps(value, sort_keys=True)}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(DATASET_COLUMNS)
        for q, t, rk in zip(sample.step, sample.times, sample.scheme.removals):
            w.writerow([int(q) + 1, _fmt(t), int(rk)])


def read_dataset(path, plan: StressPlan) -> StepStressSample:
    """Parse a dataset CSV; ``n`` is the row count plus all removals."""
    with open(path, encoding="utf-8") as fh:
        lines = [ln for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    reader = csv.DictReader(lines)
    if reader.fieldnames is None or set(DATASET_COLUMNS) - set(reader.fieldnames):
        raise ConfigError(f"{path}: expected columns {', '.join(DATASET_COLUMNS)}")
    steps, times, removed = [], [], []
    for lineno, row in enumerate(reader, start=2):
        try:
            steps.append(int(row["step"]))
            times.append(float(row["time"]))
            removed.append(int(row["removed_after"]))
        except (TypeError, ValueError):
            raise ConfigError(f"{path}: bad row {lineno}") from None
    if not times:
        raise ConfigError(f"{path}: no failures")
    try:
        scheme = CensoringScheme(len(times) + sum(removed), tuple(removed))
        sample = StepStressSample(plan, scheme, np.array(times))
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if np.any(sample.step + 1 != np.array(steps)):
        raise ConfigError(f"{path}: step column disagrees with the stress plan")
    return sample
