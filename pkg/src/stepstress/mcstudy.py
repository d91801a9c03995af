"""Monte Carlo evaluation of point estimates and interval coverage."""

from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .estimation import fit
from .inference import (
    PARAM_NAMES,
    BootstrapUnstableError,
    approx_ci,
    bootstrap_sample,
    percentile_ci,
)
from .likelihood import SingularInformationError
from .model import ModelParams, StressPlan
from .sampling import RngStream, simulate_dataset
from .schemes import CensoringScheme, render_scheme

METHODS = ("approximate", "percentile-bootstrap")
UNRELIABLE_FRACTION = 0.10
REPORT_COLUMNS = (
    "scenario_id", "param", "bias", "mse", "level", "method",
    "coverage_pct", "mean_length", "n_failed_fits",
)


@dataclass(frozen=True)
class Scenario:
    truth: ModelParams
    plan: StressPlan
    scheme: CensoringScheme
    replications: int
    bootstrap_B: int = 0  # 0 skips the bootstrap intervals
    levels: tuple = (0.90, 0.95, 0.99)
    seed: int = 0
    scenario_id: str = "scenario"

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(float(v) for v in self.levels))
        if self.replications < 1:
            raise ValueError("replications must be at least 1")
        if self.bootstrap_B < 0:
            raise ValueError("bootstrap_B must be nonnegative")
        if not self.levels or any(not 0 < v < 1 for v in self.levels):
            raise ValueError("confidence levels must lie strictly between 0 and 1")

    @property
    def methods(self) -> tuple:
        return METHODS if self.bootstrap_B > 0 else METHODS[:1]


@dataclass
class McReport:
    scenario_id: str
    levels: tuple
    methods: tuple
    bias: np.ndarray
    mse: np.ndarray
    coverage: dict  # method -> (levels, 3) percentages
    length: dict  # method -> (levels, 3) mean widths
    n_replications: int
    n_failed: int
    n_boot_failed: int = 0
    bootstrap_B: int = 0
    estimates: np.ndarray = field(default=None, repr=False)

    @property
    def unreliable(self) -> bool:
        return self.n_failed > UNRELIABLE_FRACTION * self.n_replications

    def failed_for(self, method: str) -> int:
        return self.n_failed + (self.n_boot_failed if method != "approximate" else 0)


def _replicate(scenario: Scenario, k: int) -> dict:
    gen = RngStream(scenario.seed, k).generator()
    data = simulate_dataset(scenario.truth, scenario.plan, scenario.scheme, gen)
    out = {"k": k, "status": "ok"}
    try:
        res = fit(data)
    except (SingularInformationError, ValueError, OverflowError):
        return {"k": k, "status": "fit_failed"}
    if not res.converged:
        return {"k": k, "status": "fit_failed"}
    truth = scenario.truth.as_array()
    out["theta"] = res.theta
    try:
        ci = approx_ci(res, scenario.levels)
    except (SingularInformationError, ValueError):
        return {"k": k, "status": "fit_failed"}
    out["approximate"] = _score_intervals(ci, truth)
    if scenario.bootstrap_B > 0:
        try:
            boot = bootstrap_sample(res, data, scenario.bootstrap_B, gen)
            out["percentile-bootstrap"] = _score_intervals(percentile_ci(boot, scenario.levels), truth)
        except (BootstrapUnstableError, ValueError):
            out["status"] = "boot_failed"
    return out


def _score_intervals(ci, truth):
    hits = (ci.lower <= truth) & (truth <= ci.upper)
    return hits, ci.upper - ci.lower


def _replicate_many(args):
    scenario, ks = args
    return [_replicate(scenario, k) for k in ks]


def run_scenario(scenario: Scenario, jobs: int = 1) -> McReport:
    """Simulate, fit and score every replication, then aggregate.

    Replication ``k`` draws from its own random stream, so the report does
    not depend on ``jobs``.  Replications whose fit fails or does not converge
    are left out of every aggregate and counted in ``n_failed``.
    """
    ks = list(range(scenario.replications))
    if jobs > 1:
        chunks = [ks[i::jobs] for i in range(jobs)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_replicate_many, [(scenario, c) for c in chunks]))
        results = sorted((r for part in parts for r in part), key=lambda r: r["k"])
    else:
        results = [_replicate(scenario, k) for k in ks]
    return aggregate(scenario, results)


def aggregate(scenario: Scenario, results: list) -> McReport:
    truth = scenario.truth.as_array()
    good = [r for r in results if r["status"] != "fit_failed"]
    L = len(scenario.levels)
    nan = np.full(3, np.nan)
    if good:
        est = np.array([r["theta"] for r in good])
        err = est - truth
        bias, mse = err.mean(axis=0), (err**2).mean(axis=0)
    else:
        est, bias, mse = np.empty((0, 3)), nan, nan
    coverage, length = {}, {}
    for method in scenario.methods:
        scored = [r[method] for r in good if method in r]
        if scored:
            coverage[method] = 100.0 * np.mean([h for h, _ in scored], axis=0)
            length[method] = np.mean([w for _, w in scored], axis=0)
        else:
            coverage[method] = np.full((L, 3), np.nan)
            length[method] = np.full((L, 3), np.nan)
    return McReport(
        scenario_id=scenario.scenario_id,
        levels=scenario.levels,
        methods=scenario.methods,
        bias=bias,
        mse=mse,
        coverage=coverage,
        length=length,
        n_replications=scenario.replications,
        n_failed=len(results) - len(good),
        n_boot_failed=sum(r["status"] == "boot_failed" for r in good),
        bootstrap_B=scenario.bootstrap_B,
        estimates=est,
    )


def _num(v: float) -> str:
    return repr(float(v))


def render_table(report: McReport, format: str = "csv") -> str:
    """Report as long-form CSV or as an aligned text table.

    The CSV has one row per (parameter, level, method) with the columns of
    ``REPORT_COLUMNS``.  The text table has one row per parameter: bias,
    MSE, then ``coverage (length)`` per level and method.
    """
    if format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(REPORT_COLUMNS)
        for j, name in enumerate(PARAM_NAMES):
            for i, lv in enumerate(report.levels):
                for method in report.methods:
                    w.writerow([
                        report.scenario_id, name, _num(report.bias[j]), _num(report.mse[j]),
                        _num(lv), method, _num(report.coverage[method][i, j]),
                        _num(report.length[method][i, j]), report.failed_for(method),
                    ])
        return buf.getvalue()
    if format not in ("text", "aligned-text"):
        raise ValueError(f"unknown format {format!r}")
    short = {"approximate": "App.", "percentile-bootstrap": "Boot."}
    header = ["param", "bias", "MSE"] + [
        f"{lv * 100:g}% {short[m]}" for lv in report.levels for m in report.methods
    ]
    rows = []
    for j, name in enumerate(PARAM_NAMES):
        cells = [name, f"{report.bias[j]:.3f}", f"{report.mse[j]:.3f}"]
        for i in range(len(report.levels)):
            for m in report.methods:
                cells.append(f"{report.coverage[m][i, j]:.1f} ({report.length[m][i, j]:.3f})")
        rows.append(cells)
    widths = [max(len(r[c]) for r in [header] + rows) for c in range(len(header))]
    lines = [
        f"# {report.scenario_id}: {report.n_replications} replications, "
        f"B={report.bootstrap_B}, failed fits={report.n_failed}"
        + (" [unreliable]" if report.unreliable else ""),
    ]
    for r in [header] + rows:
        lines.append("  ".join(cell.rjust(wd) for cell, wd in zip(r, widths)))
    return "\n".join(lines) + "\n"


def describe(scenario: Scenario) -> dict:
    return {
        "scenario_id": scenario.scenario_id,
        "gamma0": scenario.truth.gamma0,
        "gamma1": scenario.truth.gamma1,
        "sigma": scenario.truth.sigma,
        "x": list(scenario.plan.levels),
        "taus": list(scenario.plan.change_times),
        "n": scenario.scheme.n,
        "scheme": render_scheme(scenario.scheme),
        "replications": scenario.replications,
        "B": scenario.bootstrap_B,
        "conf_levels": list(scenario.levels),
        "seed": scenario.seed,
    }
