"""
A small Monte Carlo study
=========================

Bias, MSE and interval coverage for 75 units on the three-step plan with
a balanced progressive scheme.  Pass the replication count and bootstrap
size on the command line; the defaults finish in a few seconds.

    python desk_monte_carlo.py 200 200
"""

import sys

from stepstress import ModelParams, Scenario, StressPlan, arrhenius_x, parse_scheme, render_table, run_scenario

reps = int(sys.argv[1]) if len(sys.argv) > 1 else 50
B = int(sys.argv[2]) if len(sys.argv) > 2 else 0

scenario = Scenario(
    truth=ModelParams(0.76, 0.107, 0.05),
    plan=StressPlan(arrhenius_x([50.0, 150.0, 300.0]), (95.0, 97.5)),
    scheme=parse_scheme("15*(0,0,1,0)", 75),
    replications=reps,
    bootstrap_B=B,
    seed=1,
    scenario_id="n75-progressive",
)
report = run_scenario(scenario)
print(render_table(report, "text"))
