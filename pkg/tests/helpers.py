"""Shared data and independent numerical oracles for the test suite."""

import math

import numpy as np
from scipy import stats

from stepstress.model import ModelParams, StressPlan, arrhenius_x, design_taus
from stepstress.sampling import simulate_dataset
from stepstress.schemes import CensoringScheme

# 3-step simulated data, n = 35, tau = (95, 97.5), truth (0.76, 0.107, 0.05)
TABLE_I = np.array([
    89.406, 92.317, 92.651, 93.755, 94.483, 94.985,
    95.018, 95.218, 95.352, 95.441, 95.461, 95.835, 95.854, 95.903,
    96.321, 96.430, 96.508, 96.568, 97.206, 97.463,
    97.509, 97.604, 97.971, 98.070, 98.104, 98.202, 98.278, 98.507,
    98.548, 98.549, 98.565, 98.710, 98.861, 98.880, 99.058,
])
TRUTH_005 = ModelParams(0.76, 0.107, 0.05)
TRUTH_02 = ModelParams(0.71, 0.108, 0.2)


def table1_plan() -> StressPlan:
    return StressPlan(arrhenius_x([50.0, 150.0, 300.0]), (95.0, 97.5))


def fd_gradient(f, theta, h=None):
    """Five-point central differences; step ``1e-5 (1 + |theta_i|)`` by default."""
    theta = np.asarray(theta, dtype=float)
    g = np.zeros_like(theta)
    for i in range(theta.size):
        hi = h if h is not None else 1e-5 * (1.0 + abs(theta[i]))
        e = np.zeros_like(theta)
        e[i] = hi
        g[i] = (-f(theta + 2 * e) + 8 * f(theta + e) - 8 * f(theta - e) + f(theta - 2 * e)) / (12 * hi)
    return g


def fd_jacobian(fvec, theta, h=None):
    theta = np.asarray(theta, dtype=float)
    cols = []
    for i in range(theta.size):
        hi = h if h is not None else 1e-5 * (1.0 + abs(theta[i]))
        e = np.zeros_like(theta)
        e[i] = hi
        cols.append((-fvec(theta + 2 * e) + 8 * fvec(theta + e) - 8 * fvec(theta - e) + fvec(theta - 2 * e)) / (12 * hi))
    return np.column_stack(cols)


def random_composition(rng, total, parts):
    """Uniformly random nonnegative integer vector of length ``parts`` summing to ``total``."""
    if parts == 1:
        return np.array([total])
    cuts = np.sort(rng.choice(total + parts - 1, size=parts - 1, replace=False))
    edges = np.concatenate(([-1], cuts, [total + parts - 1]))
    return np.diff(edges) - 1


def random_instance(rng, k, type2=False):
    """Random (truth, evaluation point, sample) triple with ``k`` steps.

    The sample is simulated at the truth; the evaluation point is a
    perturbation of it so that derivatives are not taken at a stationary point.
    """
    temps = np.sort(rng.uniform(40.0, 320.0, size=k))
    while np.any(np.diff(temps) < 10.0):
        temps = np.sort(rng.uniform(40.0, 320.0, size=k))
    x = arrhenius_x(temps)
    g1 = rng.uniform(0.08, 0.12)
    g0 = rng.uniform(4.0, 5.0) - g1 * x[0]
    sigma = rng.uniform(0.03, 0.3)
    truth = ModelParams(g0, g1, sigma)
    probs = np.sort(rng.uniform(0.1, 0.8, size=k - 1))
    while np.any(np.diff(probs) < 0.05):
        probs = np.sort(rng.uniform(0.1, 0.8, size=k - 1))
    plan = StressPlan(x, design_taus(truth, x, probs))
    n = int(rng.integers(12, 41))
    r = int(rng.integers(6, n + 1))
    if type2:
        scheme = CensoringScheme.type2(n, r)
    else:
        scheme = CensoringScheme(n, tuple(random_composition(rng, n - r, r)))
    sample = simulate_dataset(truth, plan, scheme, rng)
    point = truth.as_array() * (1.0 + rng.uniform(-0.02, 0.02, size=3))
    return truth, point, sample


def oracle_loglik(theta, sample):
    """Direct sum of log densities and log survivals, shifts from matched probabilities."""
    g0, g1, sigma = theta
    plan = sample.plan
    scale = [math.exp(g0 + g1 * x) for x in plan.levels]
    starts = [0.0] + list(plan.change_times)
    shifts = [0.0]
    for q in range(1, plan.m):
        # failure probability reached at the end of step q-1, re-expressed at level q
        p = stats.lognorm.cdf(starts[q] - starts[q - 1] + shifts[q - 1], sigma, scale=scale[q - 1])
        shifts.append(stats.lognorm.ppf(p, sigma, scale=scale[q]))
    out = 0.0
    for t, q, rk in zip(sample.times, sample.step, sample.scheme.removals):
        u = t - starts[q] + shifts[q]
        out += stats.lognorm.logpdf(u, sigma, scale=scale[q])
        if rk:
            out += rk * stats.lognorm.logsf(u, sigma, scale=scale[q])
    return out


def type2_table1_sample():
    from stepstress.likelihood import StepStressSample
    from stepstress.schemes import parse_scheme

    return StepStressSample(table1_plan(), parse_scheme("27*0,7", 35), TABLE_I[:28])


def naive_step_stress_lifetimes(params, plan, size, rng):
    """Complete lifetimes by stepping units through the plan.

    Within step ``q`` the residual life is drawn from the level-``q``
    lognormal conditioned to exceed the equivalent age, by plain rejection.
    The equivalent age at each change time comes from matching failure
    probabilities with scipy.
    """
    g0, g1, sigma = params.as_array()
    starts = [0.0] + list(plan.change_times) + [np.inf]
    scales = [math.exp(g0 + g1 * x) for x in plan.levels]
    ages = [0.0]
    for q in range(1, plan.m):
        p = stats.lognorm.cdf(ages[-1] + starts[q] - starts[q - 1], sigma, scale=scales[q - 1])
        ages.append(stats.lognorm.ppf(p, sigma, scale=scales[q]))
    out = np.full(size, np.nan)
    pending = np.arange(size)
    for q in range(plan.m):
        y = np.empty(pending.size)
        todo = np.arange(pending.size)
        while todo.size:
            draw = scales[q] * np.exp(sigma * rng.standard_normal(todo.size))
            ok = draw > ages[q]
            y[todo[ok]] = draw[ok]
            todo = todo[~ok]
        t = starts[q] + (y - ages[q])
        done = t <= starts[q + 1]
        out[pending[done]] = t[done]
        pending = pending[~done]
    return out


def naive_progressive_censor(lifetimes, removals, rng):
    """Observe failures in order, withdrawing ``removals[k]`` random survivors after the k-th."""
    alive = sorted(lifetimes)
    seen = []
    for rk in removals:
        seen.append(alive.pop(0))
        for _ in range(rk):
            alive.pop(int(rng.integers(len(alive))))
    return np.array(seen)
