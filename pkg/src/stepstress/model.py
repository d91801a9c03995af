"""Cumulative-exposure lognormal step-stress lifetime model.

Stress step ``q`` (0-based) covers the time interval ``(b_q, b_{q+1}]`` where
``b_0 = 0``, ``b_q = tau_q`` and ``b_m = inf``.  On that interval the lifetime
CDF is the lognormal CDF of ``t + s_q - b_q`` with location
``mu_q = gamma0 + gamma1 * x_q``, the shift ``s_q`` accounting for the
exposure accumulated in earlier steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import ndtr, ndtri

BOLTZMANN_EV = 8.6173e-5  # eV/K
KELVIN_OFFSET = 273.15

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


@dataclass(frozen=True)
class ModelParams:
    """Regression intercept, slope and lognormal scale."""

    gamma0: float
    gamma1: float
    sigma: float

    def __post_init__(self):
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise ValueError(f"sigma must be a positive finite number, got {self.sigma}")

    def as_array(self) -> np.ndarray:
        return np.array([self.gamma0, self.gamma1, self.sigma], dtype=float)

    @classmethod
    def from_array(cls, theta) -> "ModelParams":
        g0, g1, s = (float(v) for v in theta)
        return cls(g0, g1, s)


@dataclass(frozen=True)
class StressPlan:
    """Stress levels ``x_1..x_m`` and change times ``tau_1..tau_{m-1}``.

    Levels only need to be distinct; their order is whatever the experiment
    used (an Arrhenius covariate decreases as temperature rises).
    """

    levels: tuple
    change_times: tuple = ()

    def __post_init__(self):
        levels = tuple(float(v) for v in self.levels)
        taus = tuple(float(v) for v in self.change_times)
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "change_times", taus)
        m = len(levels)
        if m < 1:
            raise ValueError("a stress plan needs at least one level")
        if len(taus) != m - 1:
            raise ValueError(f"{m} levels need {m - 1} change times, got {len(taus)}")
        if not all(math.isfinite(v) for v in levels + taus):
            raise ValueError("levels and change times must be finite")
        if taus and taus[0] <= 0:
            raise ValueError("change times must be positive")
        if any(b <= a for a, b in zip(taus, taus[1:])):
            raise ValueError("change times must be strictly increasing")
        for i in range(m):
            for j in range(i + 1, m):
                if abs(levels[i] - levels[j]) <= 1e-12:
                    raise ValueError(f"stress levels {i + 1} and {j + 1} coincide")

    @property
    def m(self) -> int:
        return len(self.levels)

    @property
    def x(self) -> np.ndarray:
        return np.asarray(self.levels, dtype=float)

    @property
    def tau(self) -> np.ndarray:
        return np.asarray(self.change_times, dtype=float)

    @property
    def step_starts(self) -> np.ndarray:
        """Left end ``b_q`` of every step, ``b_0 = 0``."""
        return np.concatenate(([0.0], self.tau))

    def step_of(self, t, *, right_closed: bool = True) -> np.ndarray:
        """0-based step index of each time.

        With ``right_closed`` a time equal to ``tau_q`` belongs to the
        earlier step, matching the half-open pieces of the CDF.
        """
        side = "left" if right_closed else "right"
        return np.searchsorted(self.tau, np.asarray(t, dtype=float), side=side)


def mu_of_level(params: ModelParams, x):
    """Log-scale location ``gamma0 + gamma1 * x``."""
    if np.ndim(x):
        return params.gamma0 + params.gamma1 * np.asarray(x, dtype=float)
    return params.gamma0 + params.gamma1 * float(x)


def _shift_terms(gamma1: float, plan: StressPlan):
    """Return ``s``, ``ds/dgamma1`` and ``d2s/dgamma1^2`` for every step.

    Closed-form sum ``s_q = sum_{h<q} (b_{h+1} - b_h) exp(gamma1 (x_q - x_h))``.
    """
    x = plan.x
    widths = np.diff(plan.step_starts)  # b_{h+1} - b_h, h = 0..m-2
    m = plan.m
    s = np.zeros(m)
    ds = np.zeros(m)
    d2s = np.zeros(m)
    for q in range(1, m):
        dx = x[q] - x[:q]
        with np.errstate(over="raise"):
            try:
                e = widths[:q] * np.exp(gamma1 * dx)
            except FloatingPointError:
                raise OverflowError("numeric overflow in shift times") from None
        s[q] = e.sum()
        ds[q] = (e * dx).sum()
        d2s[q] = (e * dx * dx).sum()
    if not np.all(np.isfinite(s)):
        raise OverflowError("numeric overflow in shift times")
    return s, ds, d2s


def shift_times_recursive(params: ModelParams, plan: StressPlan) -> np.ndarray:
    """Shift times via ``s_q = (b_q + s_{q-1} - b_{q-1}) exp(mu_q - mu_{q-1})``."""
    mu = mu_of_level(params, plan.x)
    b = plan.step_starts
    s = np.zeros(plan.m)
    for q in range(1, plan.m):
        s[q] = (b[q] + s[q - 1] - b[q - 1]) * math.exp(mu[q] - mu[q - 1])
    return s


def shift_times(params: ModelParams, plan: StressPlan) -> np.ndarray:
    """Equivalent prior-exposure times ``s_0..s_{m-1}`` (``s_0 = 0``).

    Computed from the closed-form sum; when Python runs without ``-O`` the
    recursion is evaluated as well and the two are asserted to agree.
    """
    s = _shift_terms(params.gamma1, plan)[0]
    if __debug__ and plan.m > 1:
        rec = shift_times_recursive(params, plan)
        assert np.allclose(s, rec, rtol=1e-12, atol=0.0), (s, rec)
    return s


def _standardized(params: ModelParams, plan: StressPlan, t, step):
    s = shift_times(params, plan)
    mu = params.gamma0 + params.gamma1 * plan.x
    u = t + s[step] - plan.step_starts[step]
    return (np.log(u) - mu[step]) / params.sigma, u


def _check_times(t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if np.any(~(t > 0)):
        raise ValueError("times must be positive")
    return t


def cdf(params: ModelParams, plan: StressPlan, t):
    """Lifetime CDF ``G(t)``; vectorised over ``t``."""
    arr = _check_times(t)
    z, _ = _standardized(params, plan, arr, plan.step_of(arr))
    out = ndtr(z)
    return out if np.ndim(t) else float(out)


def pdf(params: ModelParams, plan: StressPlan, t):
    """Lifetime density ``g(t)``.

    At a change time the density of the step that starts there is returned.
    """
    arr = _check_times(t)
    z, u = _standardized(params, plan, arr, plan.step_of(arr, right_closed=False))
    out = np.exp(-0.5 * z * z - _LOG_SQRT_2PI) / (params.sigma * u)
    return out if np.ndim(t) else float(out)


def step_probabilities(params: ModelParams, plan: StressPlan) -> np.ndarray:
    """``G(tau_1), ..., G(tau_{m-1})``, evaluated on the left piece."""
    if plan.m == 1:
        return np.empty(0)
    return np.atleast_1d(cdf(params, plan, plan.tau))


def quantile(params: ModelParams, plan: StressPlan, p):
    """Inverse of :func:`cdf`, inverted piece by piece.

    A probability equal to ``G(tau_q)`` maps to ``tau_q`` in the earlier step.
    """
    arr = np.asarray(p, dtype=float)
    if np.any(~((arr > 0) & (arr < 1))):
        raise ValueError("probabilities must lie strictly between 0 and 1")
    step = np.searchsorted(step_probabilities(params, plan), arr, side="left")
    s = shift_times(params, plan)
    mu = params.gamma0 + params.gamma1 * plan.x
    t = plan.step_starts[step] - s[step] + np.exp(mu[step] + params.sigma * ndtri(arr))
    return t if np.ndim(p) else float(t)


def arrhenius_x(celsius):
    """Arrhenius covariate ``1 / (k V)`` with ``V`` the absolute temperature."""
    kelvin = np.asarray(celsius, dtype=float) + KELVIN_OFFSET
    if np.any(~(kelvin > 0)):
        raise ValueError("temperature must be above absolute zero")
    out = 1.0 / (BOLTZMANN_EV * kelvin)
    return out if np.ndim(celsius) else float(out)


def inverse_power_x(v):
    """Inverse-power-law covariate ``log(V)``."""
    arr = np.asarray(v, dtype=float)
    if np.any(~(arr > 0)):
        raise ValueError("stress must be positive")
    out = np.log(arr)
    return out if np.ndim(v) else float(out)


def design_taus(params: ModelParams, levels: Sequence[float], target_probs: Sequence[float]) -> list:
    """Change times at which the cumulative failure probability hits targets.

    ``target_probs`` holds ``G(tau_1), ..., G(tau_{m-1})`` and must be strictly
    increasing inside ``(0, 1)``.  Each change time depends on the earlier
    ones through the shift, so they are solved for in order.
    """
    levels = [float(v) for v in levels]
    probs = [float(p) for p in target_probs]
    if len(probs) != len(levels) - 1:
        raise ValueError(f"{len(levels)} levels need {len(levels) - 1} target probabilities")
    if any(not (0 < p < 1) for p in probs):
        raise ValueError("target probabilities must lie strictly between 0 and 1")
    if any(b <= a for a, b in zip(probs, probs[1:])):
        raise ValueError("target cumulative probabilities must be strictly increasing")
    taus: list = []
    for j, p in enumerate(probs):
        partial = StressPlan(levels[: j + 1], taus)
        s = shift_times(params, partial)[j]
        start = taus[-1] if taus else 0.0
        mu = params.gamma0 + params.gamma1 * levels[j]
        taus.append(start - s + math.exp(mu + params.sigma * float(ndtri(p))))
    return taus


def calibrate(pairs: Sequence[tuple], sd_first: float) -> ModelParams:
    """Model parameters from mean lifetimes per level and one standard deviation.

    Parameters
    ----------
    pairs : sequence of (x, mean_life)
        Covariate value and mean lifetime at each level; the first pair is
        the level whose standard deviation is ``sd_first``.
    sd_first : float
        Lifetime standard deviation at the first level.

    Notes
    -----
    The lognormal moments give ``sigma^2 = log(1 + (sd/mean)^2)`` and
    ``log(mean) = mu + sigma^2 / 2``; the intercept and slope are the least
    squares line through ``(x_i, log(mean_i) - sigma^2 / 2)``.
    """
    xs = np.array([float(p[0]) for p in pairs])
    means = np.array([float(p[1]) for p in pairs])
    if len(np.unique(xs)) < 2:
        raise ValueError("calibration needs at least two distinct stress levels")
    if np.any(means <= 0) or not sd_first > 0:
        raise ValueError("means and sd_first must be positive")
    sigma2 = math.log1p((sd_first / means[0]) ** 2)
    y = np.log(means) - 0.5 * sigma2
    design = np.column_stack([np.ones_like(xs), xs])
    (g0, g1), *_ = np.linalg.lstsq(design, y, rcond=None)
    return ModelParams(float(g0), float(g1), math.sqrt(sigma2))
