"""Stochastic discount factor models: rare disasters and long-run risk."""

from .common import check_s, cm_key, pi_running_average
from .disaster import (
    DisasterParams,
    disaster_conditional_moment,
    disaster_entropy,
    disaster_growth_moment,
    disaster_log_moment,
    disaster_mean_log_sdf,
    disaster_moment_mc,
    disaster_moment_plain_mc,
    disaster_pi,
    disaster_return_moment,
    disaster_short_rate,
    sim_disaster_market,
    sim_disaster_sdf,
)
from .lrr import (
    LrrDerived,
    LrrParams,
    MomentCoeffs,
    lrr_entropy,
    lrr_euler_mc,
    lrr_log_cond_moment,
    lrr_mean_short_rate,
    lrr_moment_coeffs,
    lrr_moment_mc,
    lrr_pi,
    lrr_solve_constants,
    lrr_stationary_states,
    sim_lrr_sdf,
)
