"""Simulation of censored step-stress data."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .likelihood import StepStressSample
from .model import ModelParams, StressPlan, shift_times, step_probabilities
from .schemes import CensoringScheme


@dataclass(frozen=True)
class RngStream:
    """Reproducible random stream identified by ``(seed, stream_id)``.

    Streams with different ids are independent children of one
    :class:`numpy.random.SeedSequence`, so replication ``k`` draws the same
    numbers whatever order replications run in.
    """

    seed: int
    stream_id: int = 0

    def generator(self, *subkeys: int) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id, *subkeys))
        return np.random.Generator(np.random.PCG64(ss))


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def progressive_uniform_order_stats(scheme: CensoringScheme, rng) -> np.ndarray:
    """Progressively Type-II censored order statistics from Uniform(0, 1).

    Balakrishnan-Sandhu construction: with ``W_i`` iid uniform,
    ``V_i = W_i ** (1 / (i + R_r + ... + R_{r-i+1}))`` and
    ``U_{i:r} = 1 - V_r V_{r-1} ... V_{r-i+1}``.
    """
    gen = _as_generator(rng)
    r = scheme.r
    R = scheme.R
    i = np.arange(1, r + 1)
    expo = i + np.cumsum(R[::-1])  # i + R_r + ... + R_{r-i+1}
    w = 1.0 - gen.random(r)  # (0, 1]
    v = w ** (1.0 / expo)  # v[i-1] = V_i
    u = 1.0 - np.cumprod(v[::-1])
    return u


def uniforms_to_lifetimes(uniforms, params: ModelParams, plan: StressPlan) -> np.ndarray:
    """Map ascending uniforms to lifetimes through the inverse step-stress CDF.

    Each ``u`` is placed in the step whose CDF range ``(G(tau_{i-1}), G(tau_i)]``
    contains it and transformed as ``tau_{i-1} - s_{i-1} + exp(mu_i + sigma
    Phi^-1(u))``.  A value ``u = G(tau_i)`` lands on ``tau_i`` in step ``i``.
    """
    u = np.asarray(uniforms, dtype=float)
    if np.any(~((u > 0) & (u < 1))):
        raise ValueError("uniforms must lie strictly between 0 and 1")
    step = np.searchsorted(step_probabilities(params, plan), u, side="left")
    s = shift_times(params, plan)
    mu = params.gamma0 + params.gamma1 * plan.x
    t = plan.step_starts[step] - s[step] + np.exp(mu[step] + params.sigma * ndtri(u))
    # rounding can push a value a hair past its step boundary
    hi = np.append(plan.tau, np.inf)[step]
    return np.minimum(t, hi)


def simulate_dataset(
    params: ModelParams, plan: StressPlan, scheme: CensoringScheme, rng
) -> StepStressSample:
    """Draw one censored sample from the model."""
    u = progressive_uniform_order_stats(scheme, rng)
    t = uniforms_to_lifetimes(u, params, plan)
    return StepStressSample(plan, scheme, np.maximum.accumulate(t))


def censor_complete_sample(
    lifetimes, plan: StressPlan, scheme: CensoringScheme, rng
) -> StepStressSample:
    """Apply a progressive scheme to ``n`` fully observed lifetimes.

    At the k-th failure ``R_k`` of the surviving units are withdrawn at
    random.  A Type-II scheme just keeps the ``r`` smallest lifetimes.
    """
    t = np.sort(np.asarray(lifetimes, dtype=float))
    if t.size != scheme.n:
        raise ValueError(f"scheme is for n={scheme.n} units, got {t.size} lifetimes")
    gen = _as_generator(rng)
    alive = list(t)
    observed = []
    for k in range(scheme.r):
        observed.append(alive.pop(0))
        rk = scheme.removals[k]
        if rk:
            drop = set(gen.choice(len(alive), size=rk, replace=False).tolist())
            alive = [v for j, v in enumerate(alive) if j not in drop]
    return StepStressSample(plan, scheme, np.array(observed))
