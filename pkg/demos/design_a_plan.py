"""
Designing a step-stress plan
============================

Start from mean lifetimes at each temperature and the spread at the lowest
one, turn them into model parameters, then pick change times that give a
chosen share of failures in each step.
"""

import numpy as np

from stepstress import StressPlan, arrhenius_x, calibrate, cdf, design_taus, quantile

x = arrhenius_x([50.0, 150.0, 300.0])

# Mean lives 100, 40 and 20 with a standard deviation of 5 at 50 C.
params = calibrate(list(zip(x, [100.0, 40.0, 20.0])), sd_first=5.0)
print("calibrated:", params)

# %%
# Change times with 20% of units failing in step 1 and 40% in step 2.

taus = design_taus(params, x, [0.2, 0.6])
plan = StressPlan(x, taus)
print("change times:", np.round(taus, 3))
print("cdf at the change times:", cdf(params, plan, plan.tau))

# %%
# The lifetime distribution is continuous across the change times, and the
# quantile function inverts it step by step.

p = np.array([0.05, 0.2, 0.5, 0.6, 0.9])
print("quantiles:", np.round(quantile(params, plan, p), 3))
