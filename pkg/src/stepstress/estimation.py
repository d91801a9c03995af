"""Maximum-likelihood fitting by safeguarded Newton-Raphson."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .likelihood import (
    FisherMatrix,
    SingularInformationError,
    StepStressSample,
    evaluate,
    fisher_from_hessian,
    log_sf_normal,
)
from .model import ModelParams

SIGMA_FLOOR = 1e-3
MAX_HALVINGS = 30


@dataclass(frozen=True)
class FitResult:
    params_hat: ModelParams
    fisher: FisherMatrix
    loglik_at_max: float
    iterations: int
    converged: bool
    grad_norm: float

    @property
    def theta(self) -> np.ndarray:
        return self.params_hat.as_array()

    @property
    def se(self) -> np.ndarray:
        return self.fisher.se


def _check_identifiable(sample: StepStressSample) -> None:
    if sample.r < 3:
        raise ValueError(f"at least 3 failures are needed to fit 3 parameters, got {sample.r}")
    occupied = np.count_nonzero(sample.step_counts)
    if sample.plan.m < 2 or occupied < 2:
        raise SingularInformationError(
            "singular information: failures in fewer than two stress steps "
            "cannot separate gamma0 from gamma1"
        )


def initial_guess(sample: StepStressSample, n_grid: int = 161) -> ModelParams:
    """Starting point from a profile scan over ``gamma1``.

    For each trial slope the shifted log-lifetimes are formed, ``gamma0`` and
    ``sigma`` are set to the mean and spread of their residuals (censoring
    ignored), and the trial with the largest full log-likelihood wins.  The
    scan covers ``gamma1 * range(x)`` in ``[-8, 8]``.
    """
    plan, step, t = sample.plan, sample.step, sample.times
    x = plan.x
    span = float(np.ptp(x[np.unique(step)])) or float(np.ptp(x))
    g1 = np.linspace(-8.0, 8.0, n_grid) / span
    widths = np.diff(plan.step_starts)
    shifts = np.zeros((n_grid, plan.m))
    with np.errstate(over="ignore", invalid="ignore"):
        for q in range(1, plan.m):
            shifts[:, q] = np.exp(np.outer(g1, x[q] - x[:q])) @ widths[:q]
        u = t + shifts[:, step] - plan.step_starts[step]
        tprime = np.log(u)
        resid = tprime - np.outer(g1, x[step])
        g0 = resid.mean(axis=1)
        sigma = np.maximum(resid.std(axis=1), SIGMA_FLOOR)
        z = (resid - g0[:, None]) / sigma[:, None]
        ll = (
            -sample.r * np.log(sigma)
            - 0.5 * np.sum(z * z, axis=1)
            - tprime.sum(axis=1)
            + log_sf_normal(z) @ sample.scheme.R
        )
    ll = np.where(np.all(u > 0, axis=1) & np.isfinite(ll), ll, -np.inf)
    k = int(np.argmax(ll))
    if not np.isfinite(ll[k]):
        raise ValueError("no feasible starting point found")
    return ModelParams(float(g0[k]), float(g1[k]), float(sigma[k]))


def _to_internal(g, H, sigma):
    # (gamma0, gamma1, sigma) -> (gamma0, gamma1, log sigma)
    gi = g.copy()
    gi[2] = sigma * g[2]
    Hi = H.copy()
    Hi[:2, 2] = Hi[2, :2] = sigma * H[:2, 2]
    Hi[2, 2] = sigma**2 * H[2, 2] + sigma * g[2]
    return gi, Hi


def _ascent_direction(g, H):
    O = -H
    try:
        np.linalg.cholesky(O)
        return np.linalg.solve(O, g)
    except np.linalg.LinAlgError:
        pass
    # away from a maximum: flip negative curvature so the step still ascends
    w, Q = np.linalg.eigh(0.5 * (O + O.T))
    w = np.maximum(np.abs(w), 1e-8 * max(1.0, np.abs(w).max()))
    return Q @ ((Q.T @ g) / w)


def fit(
    sample: StepStressSample,
    init: Optional[ModelParams] = None,
    tol: float = 1e-8,
    max_iter: int = 200,
) -> FitResult:
    """Maximum-likelihood estimate of ``(gamma0, gamma1, sigma)``.

    Newton steps are taken in ``(gamma0, gamma1, log sigma)`` and halved up to
    30 times until the log-likelihood does not decrease.  Convergence means
    the sup-norm of the score in the original coordinates is at most ``tol``.

    Raises
    ------
    SingularInformationError
        If the design cannot identify the parameters (one stress step, or all
        failures in a single step).
    """
    _check_identifiable(sample)
    p0 = init if init is not None else initial_guess(sample)
    eta = np.array([p0.gamma0, p0.gamma1, math.log(p0.sigma)])

    def at(eta_):
        return evaluate((eta_[0], eta_[1], math.exp(eta_[2])), sample)

    ll, g, H = at(eta)
    it = 0
    converged = bool(np.max(np.abs(g)) <= tol)
    while not converged and it < max_iter:
        gi, Hi = _to_internal(g, H, math.exp(eta[2]))
        step = _ascent_direction(gi, Hi)
        lam = 1.0
        accepted = False
        for _ in range(MAX_HALVINGS + 1):
            cand = eta + lam * step
            try:
                ll_c, g_c, H_c = at(cand)
            except (ValueError, OverflowError, FloatingPointError):
                ll_c = -np.inf
            if np.isfinite(ll_c) and ll_c >= ll - 1e-12 and np.all(np.isfinite(g_c)):
                accepted = True
                break
            lam *= 0.5
        if not accepted:
            break
        it += 1
        moved = np.max(np.abs(cand - eta))
        eta, ll, g, H = cand, ll_c, g_c, H_c
        converged = bool(np.max(np.abs(g)) <= tol)
        if moved == 0.0:
            break

    params = ModelParams(float(eta[0]), float(eta[1]), math.exp(eta[2]))
    fisher = fisher_from_hessian(H)
    grad_norm = float(np.max(np.abs(g)))
    if converged and (fisher.singular or not fisher.positive_definite):
        converged = False
    return FitResult(params, fisher, float(ll), it, converged, grad_norm)
