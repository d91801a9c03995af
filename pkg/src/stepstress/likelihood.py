"""Log-likelihood, score and observed information for step-stress samples.

The progressive Type-II likelihood is used throughout; Type-II censoring is
the scheme ``(0, ..., 0, n - r)`` and a complete sample has no removals.
Parameters are ordered ``(gamma0, gamma1, sigma)``.

Per failure ``(i, j)`` in step ``i``::

    t'   = log(t + s_{i-1} - tau_{i-1})
    z    = (t' - gamma0 - gamma1 x_i) / sigma
    b3   = d s_{i-1} / d gamma1
    b2   = d t' / d gamma1          = b3 / (t + s_{i-1} - tau_{i-1})
    b1   = d z / d gamma1           = (b2 - x_i) / sigma
    b5   = d b2 / d gamma1
    b4   = d b1 / d gamma1          = b5 / sigma

The constant ``log C`` of the likelihood is left out everywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import log_ndtr

from .model import ModelParams, StressPlan, _shift_terms
from .schemes import CensoringScheme, is_type2

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


@dataclass(frozen=True)
class StepStressSample:
    """Observed failures of a step-stress test, globally time-ordered.

    ``times[k]`` is the k-th failure and ``scheme.removals[k]`` the number of
    survivors withdrawn right after it.
    """

    plan: StressPlan
    scheme: CensoringScheme
    times: np.ndarray
    step: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        t = np.array(self.times, dtype=float)
        t.setflags(write=False)
        object.__setattr__(self, "times", t)
        if t.ndim != 1 or len(t) != self.scheme.r:
            raise ValueError(f"expected {self.scheme.r} failure times, got {t.size}")
        if np.any(~(t > 0)) or not np.all(np.isfinite(t)):
            raise ValueError("failure times must be positive and finite")
        if np.any(np.diff(t) < 0):
            raise ValueError("failure times must be sorted ascending")
        step = self.plan.step_of(t)
        step.setflags(write=False)
        object.__setattr__(self, "step", step)

    @classmethod
    def from_steps(cls, plan: StressPlan, scheme: CensoringScheme, times_by_step) -> "StepStressSample":
        """Build from per-step lists, checking every time lies in its step."""
        flat = []
        for q, ts in enumerate(times_by_step):
            ts = np.asarray(ts, dtype=float)
            if ts.size and np.any(plan.step_of(ts) != q):
                raise ValueError(f"a time listed under step {q + 1} lies outside that step")
            flat.append(ts)
        return cls(plan, scheme, np.concatenate(flat) if flat else np.empty(0))

    @property
    def r(self) -> int:
        return self.scheme.r

    @property
    def n(self) -> int:
        return self.scheme.n

    @property
    def step_counts(self) -> np.ndarray:
        return np.bincount(self.step, minlength=self.plan.m)

    @property
    def times_by_step(self) -> list:
        return [self.times[self.step == q] for q in range(self.plan.m)]

    @property
    def positions(self) -> np.ndarray:
        """1-based global position ``k(i, j) = n_1 + ... + n_{i-1} + j``."""
        return np.arange(1, self.r + 1)


@dataclass(frozen=True)
class LikelihoodWorkspace:
    """Per-failure intermediate quantities at one parameter point."""

    sigma: float
    R: np.ndarray
    tprime: np.ndarray
    z: np.ndarray
    beta1: np.ndarray
    beta2: np.ndarray
    beta3: np.ndarray  # per failure, d s / d gamma1 of its step
    beta4: np.ndarray
    beta5: np.ndarray
    log_sf: np.ndarray
    hazard: np.ndarray


@dataclass(frozen=True)
class FisherMatrix:
    """Observed information ``O = -d2l`` and, when invertible, ``V = O^-1``."""

    O: np.ndarray
    V: Optional[np.ndarray]

    @property
    def singular(self) -> bool:
        return self.V is None

    @property
    def positive_definite(self) -> bool:
        try:
            np.linalg.cholesky(self.O)
        except np.linalg.LinAlgError:
            return False
        return True

    @property
    def se(self) -> np.ndarray:
        if self.V is None:
            raise SingularInformationError("singular information: no standard errors", self.O)
        d = np.diag(self.V)
        return np.sqrt(np.where(d > 0, d, np.nan))


class SingularInformationError(ArithmeticError):
    """The observed information matrix cannot be inverted."""

    def __init__(self, message: str, O: Optional[np.ndarray] = None):
        super().__init__(message)
        self.O = O


def _theta(params) -> np.ndarray:
    if isinstance(params, ModelParams):
        return params.as_array()
    theta = np.asarray(params, dtype=float)
    if theta.shape != (3,):
        raise ValueError("parameters must be (gamma0, gamma1, sigma)")
    return theta


def log_sf_normal(z):
    """``log(1 - Phi(z))``, accurate in both tails."""
    return log_ndtr(-np.asarray(z, dtype=float))


def normal_hazard(z):
    """``phi(z) / (1 - Phi(z))`` computed on the log scale."""
    z = np.asarray(z, dtype=float)
    return np.exp(-0.5 * z * z - _LOG_SQRT_2PI - log_ndtr(-z))


def workspace(params, sample: StepStressSample) -> LikelihoodWorkspace:
    g0, g1, sigma = _theta(params)
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    plan = sample.plan
    step = sample.step
    s, ds, d2s = _shift_terms(g1, plan)
    x = plan.x[step]
    u = sample.times + s[step] - plan.step_starts[step]
    if np.any(~(u > 0)):
        raise ValueError("infeasible sample: t + s - tau must be positive")
    tprime = np.log(u)
    z = (tprime - g0 - g1 * x) / sigma
    beta3 = ds[step]
    beta2 = beta3 / u
    beta1 = (beta2 - x) / sigma
    beta5 = d2s[step] / u - beta3**2 / u**2
    beta4 = beta5 / sigma
    log_sf = log_sf_normal(z)
    hazard = np.exp(-0.5 * z * z - _LOG_SQRT_2PI - log_sf)
    return LikelihoodWorkspace(
        sigma, sample.scheme.R, tprime, z, beta1, beta2, beta3, beta4, beta5, log_sf, hazard
    )


def _loglik(ws: LikelihoodWorkspace) -> float:
    r = ws.z.size
    return float(
        -r * math.log(ws.sigma)
        - 0.5 * np.dot(ws.z, ws.z)
        - ws.tprime.sum()
        + np.dot(ws.R, ws.log_sf)
    )


def _score(ws: LikelihoodWorkspace) -> np.ndarray:
    z, R, h, b1 = ws.z, ws.R, ws.hazard, ws.beta1
    r = z.size
    return np.array([
        (z.sum() + np.dot(R, h)) / ws.sigma,
        -np.dot(z, b1) - ws.beta2.sum() - np.dot(R * h, b1),
        (-r + np.dot(z, z) + np.dot(R * h, z)) / ws.sigma,
    ])


def _hessian(ws: LikelihoodWorkspace) -> np.ndarray:
    z, R, h = ws.z, ws.R, ws.hazard
    b1, b4, b5 = ws.beta1, ws.beta4, ws.beta5
    r = z.size
    sig = ws.sigma
    Rh = R * h
    zh = z - h  # z - phi/(1-Phi)
    one_minus = 1.0 - z * zh
    H = np.empty((3, 3))
    H[0, 0] = (-r + np.dot(Rh, zh)) / sig**2
    H[1, 1] = -np.sum(b1**2 + z * b4 + b5) - np.dot(Rh, b4 - b1**2 * zh)
    H[2, 2] = -(-r + 3.0 * np.dot(z, z) + np.dot(Rh * z, 2.0 - z * zh)) / sig**2
    H[0, 1] = H[1, 0] = (b1.sum() - np.dot(Rh * b1, zh)) / sig
    H[0, 2] = H[2, 0] = -(np.dot(Rh, one_minus) + 2.0 * z.sum()) / sig**2
    H[1, 2] = H[2, 1] = (np.dot(Rh * b1, one_minus) + 2.0 * np.dot(z, b1)) / sig
    return H


def log_likelihood(params, sample: StepStressSample) -> float:
    """Log-likelihood up to the parameter-free constant ``log C``."""
    return _loglik(workspace(params, sample))


def gradient(params, sample: StepStressSample) -> np.ndarray:
    """Score vector ``(dl/dgamma0, dl/dgamma1, dl/dsigma)``."""
    return _score(workspace(params, sample))


def hessian(params, sample: StepStressSample) -> np.ndarray:
    return _hessian(workspace(params, sample))


def fisher_from_hessian(H: np.ndarray) -> FisherMatrix:
    O = -0.5 * (H + H.T)
    try:
        if not np.all(np.isfinite(O)) or np.linalg.cond(O) > 1e14:
            raise np.linalg.LinAlgError
        V = np.linalg.inv(O)
    except np.linalg.LinAlgError:
        return FisherMatrix(O, None)
    return FisherMatrix(O, 0.5 * (V + V.T))


def observed_fisher(params, sample: StepStressSample) -> FisherMatrix:
    """Observed information matrix with its inverse when it exists."""
    return fisher_from_hessian(hessian(params, sample))


def evaluate(params, sample: StepStressSample):
    """Log-likelihood, score and Hessian from a single workspace."""
    ws = workspace(params, sample)
    return _loglik(ws), _score(ws), _hessian(ws)


# Dedicated Type-II forms: only the last observed failure carries censored
# units, so every censoring sum collapses to the single (n - r) term at the
# r-th failure.


def _type2_terms(params, sample: StepStressSample):
    if not is_type2(sample.scheme):
        raise ValueError("sample is not Type-II censored")
    ws = workspace(params, sample)
    c = sample.n - sample.r
    zl, hl, b1l = ws.z[-1], ws.hazard[-1], ws.beta1[-1]
    return ws, c, zl, hl, b1l


def type2_log_likelihood(params, sample: StepStressSample) -> float:
    ws, c, *_ = _type2_terms(params, sample)
    r = ws.z.size
    return float(
        -r * math.log(ws.sigma) - 0.5 * np.sum(ws.z**2) - np.sum(ws.tprime) + c * ws.log_sf[-1]
    )


def type2_gradient(params, sample: StepStressSample) -> np.ndarray:
    ws, c, zl, hl, b1l = _type2_terms(params, sample)
    z, r, sig = ws.z, ws.z.size, ws.sigma
    return np.array([
        (np.sum(z) + c * hl) / sig,
        -np.sum(z * ws.beta1) - np.sum(ws.beta2) - c * hl * b1l,
        (-r + np.sum(z**2) + c * zl * hl) / sig,
    ])


def type2_observed_fisher(params, sample: StepStressSample) -> FisherMatrix:
    ws, c, zl, hl, b1l = _type2_terms(params, sample)
    z, r, sig = ws.z, ws.z.size, ws.sigma
    b1, b4, b5 = ws.beta1, ws.beta4, ws.beta5
    b4l = b4[-1]
    d = zl - hl
    H = np.empty((3, 3))
    H[0, 0] = (-r + c * hl * d) / sig**2
    H[1, 1] = -np.sum(b1**2 + z * b4 + b5) - c * hl * (b4l - b1l**2 * d)
    H[2, 2] = -(-r + 3 * np.sum(z**2) + c * zl * hl * (2 - zl * d)) / sig**2
    H[0, 1] = H[1, 0] = (np.sum(b1) - c * b1l * hl * d) / sig
    H[0, 2] = H[2, 0] = -(c * hl * (1 - zl * d) + 2 * np.sum(z)) / sig**2
    H[1, 2] = H[2, 1] = (c * b1l * hl * (1 - zl * d) + 2 * np.sum(z * b1)) / sig
    return fisher_from_hessian(H)
