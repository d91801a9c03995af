"""Confidence intervals and the one-sided test on ``gamma1``."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.special import ndtr, ndtri

from .estimation import FitResult, fit
from .likelihood import SingularInformationError, StepStressSample
from .sampling import _as_generator, simulate_dataset

PARAM_NAMES = ("gamma0", "gamma1", "sigma")
MAX_FAILED_FRACTION = 0.2


class BootstrapUnstableError(RuntimeError):
    pass


@dataclass(frozen=True)
class IntervalSet:
    """Lower/upper bounds, shape ``(len(levels), 3)``, columns in parameter order."""

    method: str  # "approximate" or "percentile-bootstrap"
    levels: tuple
    point: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    B: Optional[int] = None
    seed: Optional[int] = None

    def interval(self, param: str, level: float) -> tuple:
        i = self._level_index(level)
        j = PARAM_NAMES.index(param)
        return float(self.lower[i, j]), float(self.upper[i, j])

    def _level_index(self, level: float) -> int:
        for i, lv in enumerate(self.levels):
            if abs(lv - level) < 1e-9:
                return i
        raise KeyError(f"level {level} not computed")

    def to_dict(self) -> dict:
        out = {"method": self.method}
        if self.B is not None:
            out["B"] = self.B
        if self.seed is not None:
            out["seed"] = self.seed
        out["intervals"] = {
            name: {f"{lv:g}": [float(self.lower[i, j]), float(self.upper[i, j])]
                   for i, lv in enumerate(self.levels)}
            for j, name in enumerate(PARAM_NAMES)
        }
        return out


@dataclass(frozen=True)
class BootstrapSample:
    """Refitted estimates, one row per successful replication in draw order."""

    estimates: np.ndarray
    B: int
    n_failed: int
    seed: Optional[int] = None

    @property
    def sorted(self) -> np.ndarray:
        """Each parameter's estimates in ascending order, shape ``(3, B_ok)``."""
        return np.sort(self.estimates, axis=0).T


def _check_levels(levels: Sequence[float]) -> tuple:
    levels = tuple(float(v) for v in levels)
    if not levels or any(not 0 < v < 1 for v in levels):
        raise ValueError("confidence levels must lie strictly between 0 and 1")
    return levels


def approx_ci(fit_result: FitResult, levels: Sequence[float] = (0.90, 0.95, 0.99)) -> IntervalSet:
    """Normal-approximation intervals ``theta_i +/- z_{1-alpha/2} sqrt(V_ii)``."""
    levels = _check_levels(levels)
    fisher = fit_result.fisher
    if fisher.singular:
        raise SingularInformationError("singular information: no approximate intervals", fisher.O)
    var = np.diag(fisher.V)
    for name, v in zip(PARAM_NAMES, var):
        if not v > 0:
            raise ValueError(f"non-positive variance estimate for {name}")
    se = np.sqrt(var)
    theta = fit_result.theta
    zq = ndtri(1.0 - (1.0 - np.asarray(levels)) / 2.0)[:, None]
    return IntervalSet("approximate", levels, theta, theta - zq * se, theta + zq * se)


def bootstrap_sample(fit_result: FitResult, sample: StepStressSample, B: int, rng) -> BootstrapSample:
    """Parametric bootstrap: simulate from the fit under the same plan and scheme, refit.

    Replications whose refit fails or does not converge are dropped and
    counted; more than 20% dropped raises :class:`BootstrapUnstableError`.
    """
    if B < 1:
        raise ValueError("B must be at least 1")
    gen = _as_generator(rng)
    params = fit_result.params_hat
    rows = []
    failed = 0
    for _ in range(B):
        data = simulate_dataset(params, sample.plan, sample.scheme, gen)
        try:
            res = fit(data)
        except (SingularInformationError, ValueError, OverflowError):
            failed += 1
            continue
        if not res.converged:
            failed += 1
            continue
        rows.append(res.theta)
    if failed > MAX_FAILED_FRACTION * B:
        raise BootstrapUnstableError(f"bootstrap unstable: {failed} of {B} refits failed")
    est = np.array(rows) if rows else np.empty((0, 3))
    seed = rng.seed if hasattr(rng, "seed") else None
    return BootstrapSample(est, B, failed, seed)


def _order_index(x: float) -> int:
    # ceiling that is not fooled by 100 * 0.05 == 5.000000000000001
    return int(math.ceil(round(x, 9)))


def percentile_ci(boot: BootstrapSample, levels: Sequence[float] = (0.90, 0.95, 0.99)) -> IntervalSet:
    """Percentile intervals from bootstrap order statistics.

    For ``B`` estimates the endpoints are the ``ceil(B alpha/2)``-th and
    ``ceil(B (1 - alpha/2))``-th smallest values (1-based).
    """
    levels = _check_levels(levels)
    srt = boot.sorted
    b = srt.shape[1]
    lower = np.empty((len(levels), 3))
    upper = np.empty((len(levels), 3))
    for i, lv in enumerate(levels):
        alpha = 1.0 - lv
        need = _order_index(2.0 / alpha)
        if b < need:
            raise ValueError(f"{lv:g} percentile interval needs at least B={need} estimates, have {b}")
        lo = max(_order_index(b * alpha / 2.0), 1)
        hi = _order_index(b * (1.0 - alpha / 2.0))
        lower[i] = srt[:, lo - 1]
        upper[i] = srt[:, hi - 1]
    if np.any(lower == upper):
        warnings.warn("degenerate bootstrap interval (all estimates equal)", RuntimeWarning)
    point = np.median(srt, axis=1)
    return IntervalSet("percentile-bootstrap", levels, point, lower, upper, B=boot.B, seed=boot.seed)


@dataclass(frozen=True)
class Gamma1Test:
    """p-values for ``H0: gamma1 <= 0`` against ``gamma1 > 0``."""

    t_pvalue: float
    boot_pvalue: Optional[float] = None
    n_boot: Optional[int] = None

    def to_dict(self) -> dict:
        out = {"t_pvalue": self.t_pvalue}
        if self.boot_pvalue is not None:
            out["boot_pvalue"] = self.boot_pvalue
            if self.boot_pvalue == 0:
                out["boot_pvalue_bound"] = f"< {1.0 / self.n_boot:g}"
        return out


def test_gamma1_positive(fit_result: FitResult, boot: Optional[BootstrapSample] = None) -> Gamma1Test:
    """One-sided test of a positive stress effect.

    The Wald statistic ``gamma1_hat / sqrt(V_22)`` is referred to the standard
    normal.  With a bootstrap sample, the p-value is the fraction of bootstrap
    slopes at or below zero.
    """
    fisher = fit_result.fisher
    if fisher.singular or not fisher.V[1, 1] > 0:
        raise ValueError("non-positive variance estimate for gamma1")
    stat = fit_result.params_hat.gamma1 / math.sqrt(fisher.V[1, 1])
    t_p = float(1.0 - ndtr(stat))
    if boot is None:
        return Gamma1Test(t_p)
    g1 = boot.estimates[:, 1]
    return Gamma1Test(t_p, float(np.mean(g1 <= 0.0)), int(g1.size))


test_gamma1_positive.__test__ = False  # keep pytest from collecting it
