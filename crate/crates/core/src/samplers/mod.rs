//! Stochastic kernels used by the Gibbs driver.

mod ars;
mod hmc;
mod scale;
mod variance;

pub use ars::{
    ars_sample, bracket_abscissae, AdaptiveRejectionSampler, FnLogConcave, LogConcave,
    ENVELOPE_TOLERANCE,
};
pub use hmc::{
    compute_stepsizes, compute_stepsizes_with_rule, hmc_transition, hmc_update, leapfrog,
    leapfrog_trajectory, FnTarget, HamiltonianTarget, HmcOutcome, HmcStepsizes, HmcTransition,
    StepsizeRule,
};
pub use scale::{update_log_w, update_log_w_with_scale, LogWUpdate, LOG_W_PROPOSAL_SD};
pub use variance::{
    sample_sigma2, sample_sigma2_ghs, sample_sigma2_ig, sample_sigma2_neg, sigma2_conditional_ghs,
    sigma2_conditional_neg, GhsLogVariance, NegLogVariance,
};
