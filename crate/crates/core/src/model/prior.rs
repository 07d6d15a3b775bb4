use std::f64::consts::PI;

use statrs::function::gamma::ln_gamma;

use super::types::{PriorFamily, PriorSpec};
use crate::error::{Error, Result};

/// Normalized log density of the variance prior at `sigma2`.
///
/// - `t`: inverse-gamma with shape `α/2` and rate `αw/2`.
/// - `ghs`: the law of σ² when σ is half-t with `α` degrees of freedom and
///   scale `√w`.
/// - `neg`: `(κ/λ) (1 + σ²/λ)^-(κ+1)` with `κ = α/2`, `λ = αw/2`, the
///   exponential-mean mixture marginalized.
pub fn log_prior_sigma2(sigma2: f64, prior: &PriorSpec) -> Result<f64> {
    if !(sigma2 > 0.0) || !sigma2.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "variance must be positive and finite, got {sigma2}"
        )));
    }
    Ok(log_prior_sigma2_unchecked(sigma2, prior.family, prior.alpha, prior.log_w))
}

pub(crate) fn log_prior_sigma2_unchecked(
    sigma2: f64,
    family: PriorFamily,
    alpha: f64,
    log_w: f64,
) -> f64 {
    let w = log_w.exp();
    let ln_s = sigma2.ln();
    match family {
        PriorFamily::T => {
            let a = alpha / 2.0;
            let ln_b = (alpha / 2.0).ln() + log_w;
            a * ln_b - ln_gamma(a) - (a + 1.0) * ln_s - alpha * w / 2.0 / sigma2
        }
        PriorFamily::Ghs => {
            ln_gamma((alpha + 1.0) / 2.0)
                - ln_gamma(alpha / 2.0)
                - 0.5 * (alpha * PI).ln()
                - 0.5 * log_w
                - 0.5 * (alpha + 1.0) * (sigma2 / (alpha * w)).ln_1p()
                - 0.5 * ln_s
        }
        PriorFamily::Neg => {
            let kappa = alpha / 2.0;
            let ln_lambda = (alpha / 2.0).ln() + log_w;
            kappa.ln() - ln_lambda - (kappa + 1.0) * (sigma2 / ln_lambda.exp()).ln_1p()
        }
    }
}
