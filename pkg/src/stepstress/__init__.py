"""Lognormal step-stress accelerated life tests under Type-II and
progressive Type-II censoring: model, likelihood, fitting, intervals and
Monte Carlo studies."""

__version__ = "0.1.0"

from .model import (
    ModelParams,
    StressPlan,
    arrhenius_x,
    calibrate,
    cdf,
    design_taus,
    inverse_power_x,
    mu_of_level,
    pdf,
    quantile,
    shift_times,
)
from .schemes import CensoringScheme, is_type2, normalization_constant_log, parse_scheme, render_scheme
from .likelihood import (
    FisherMatrix,
    SingularInformationError,
    StepStressSample,
    gradient,
    log_likelihood,
    observed_fisher,
)
from .estimation import FitResult, fit
from .sampling import (
    RngStream,
    censor_complete_sample,
    progressive_uniform_order_stats,
    simulate_dataset,
    uniforms_to_lifetimes,
)
from .inference import approx_ci, bootstrap_sample, percentile_ci, test_gamma1_positive
from .mcstudy import McReport, Scenario, render_table, run_scenario
