use rand::Rng;
use rand_distr::StandardNormal;

use crate::model::{PriorSpec, VarianceVector, LOG_W_PRIOR_VARIANCE};
use crate::model::log_prior_sigma2_unchecked;

/// Proposal standard deviation of the random-walk update on `log w`.
pub const LOG_W_PROPOSAL_SD: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogWUpdate {
    pub log_w: f64,
    pub accepted: bool,
}

fn log_target(sigma2: &VarianceVector, prior: &PriorSpec, log_w: f64) -> f64 {
    let lik: f64 = sigma2
        .as_slice()
        .iter()
        .map(|&s| log_prior_sigma2_unchecked(s, prior.family, prior.alpha, log_w))
        .sum();
    lik - 0.5 * log_w * log_w / LOG_W_PRIOR_VARIANCE
}

/// One random-walk Metropolis step on `log w` targeting
/// `Π_j p(σ_j² | α, w) × N(log w; 0, 100)`.
pub fn update_log_w<R: Rng + ?Sized>(
    sigma2: &VarianceVector,
    prior: &PriorSpec,
    current_log_w: f64,
    rng: &mut R,
) -> LogWUpdate {
    update_log_w_with_scale(sigma2, prior, current_log_w, LOG_W_PROPOSAL_SD, rng)
}

pub fn update_log_w_with_scale<R: Rng + ?Sized>(
    sigma2: &VarianceVector,
    prior: &PriorSpec,
    current_log_w: f64,
    proposal_sd: f64,
    rng: &mut R,
) -> LogWUpdate {
    let z: f64 = rng.sample(StandardNormal);
    let u: f64 = rng.random();
    let proposal = current_log_w + proposal_sd * z;
    let log_ratio = log_target(sigma2, prior, proposal) - log_target(sigma2, prior, current_log_w);
    if log_ratio.is_finite() && u < log_ratio.exp() || proposal == current_log_w {
        LogWUpdate {
            log_w: proposal,
            accepted: true,
        }
    } else {
        LogWUpdate {
            log_w: current_log_w,
            accepted: false,
        }
    }
}
