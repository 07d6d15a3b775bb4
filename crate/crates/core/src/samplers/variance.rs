//! Conditional draws of a feature's prior variance σ_j² given its
//! coefficient row.

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use super::ars::{AdaptiveRejectionSampler, LogConcave};
use crate::error::{Error, Result};
use crate::model::{v_of_delta, PriorFamily};

// Keeps the log-variance conditionals proper when a row is exactly zero.
const V_FLOOR: f64 = 1e-300;

fn clamp_positive(s: f64) -> f64 {
    if s.is_nan() {
        f64::MIN_POSITIVE
    } else {
        s.clamp(f64::MIN_POSITIVE, f64::MAX)
    }
}

fn check_params(alpha: f64, w: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha.is_finite() && w > 0.0 && w.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "alpha and w must be positive and finite, got alpha={alpha}, w={w}"
        )));
    }
    Ok(())
}

/// Conjugate draw `σ² ~ IG((α+K)/2, (αw + V(δ_j))/2)`.
pub fn sample_sigma2_ig<R: Rng + ?Sized>(
    delta_j: &[f64],
    n_classes: usize,
    alpha: f64,
    w: f64,
    rng: &mut R,
) -> Result<f64> {
    check_params(alpha, w)?;
    let v = v_of_delta(delta_j, n_classes)?;
    let shape = 0.5 * (alpha + delta_j.len() as f64);
    let rate = 0.5 * (alpha * w + v);
    let gamma = Gamma::new(shape, 1.0 / rate)
        .map_err(|e| Error::InvalidArgument(format!("gamma parameters: {e}")))?;
    Ok(clamp_positive(1.0 / gamma.sample(rng)))
}

#[inline]
fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

#[inline]
fn logistic(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// Generalized-horseshoe conditional of `ξ = log σ²` given `V(δ_j)`:
/// `((1−K)/2) ξ − (V/2) e^{−ξ} − ((α+1)/2) log(1 + e^ξ/(αw))`, Jacobian
/// included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GhsLogVariance {
    pub k: usize,
    pub v: f64,
    pub alpha: f64,
    pub log_alpha_w: f64,
}

impl LogConcave for GhsLogVariance {
    fn log_density(&self, xi: f64) -> f64 {
        0.5 * (1.0 - self.k as f64) * xi
            - 0.5 * self.v * (-xi).exp()
            - 0.5 * (self.alpha + 1.0) * softplus(xi - self.log_alpha_w)
    }

    fn derivative(&self, xi: f64) -> f64 {
        0.5 * (1.0 - self.k as f64) + 0.5 * self.v * (-xi).exp()
            - 0.5 * (self.alpha + 1.0) * logistic(xi - self.log_alpha_w)
    }
}

/// Normal-exponential-gamma conditional of `ξ = log σ²` given `V(δ_j)`:
/// `(1 − K/2) ξ − (V/2) e^{−ξ} − (α/2 + 1) log(1 + e^ξ/λ)` with `λ = αw/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NegLogVariance {
    pub k: usize,
    pub v: f64,
    pub alpha: f64,
    pub log_lambda: f64,
}

impl LogConcave for NegLogVariance {
    fn log_density(&self, xi: f64) -> f64 {
        (1.0 - 0.5 * self.k as f64) * xi
            - 0.5 * self.v * (-xi).exp()
            - (0.5 * self.alpha + 1.0) * softplus(xi - self.log_lambda)
    }

    fn derivative(&self, xi: f64) -> f64 {
        (1.0 - 0.5 * self.k as f64) + 0.5 * self.v * (-xi).exp()
            - (0.5 * self.alpha + 1.0) * logistic(xi - self.log_lambda)
    }
}

pub fn sigma2_conditional_ghs(
    delta_j: &[f64],
    n_classes: usize,
    alpha: f64,
    w: f64,
) -> Result<GhsLogVariance> {
    check_params(alpha, w)?;
    let v = v_of_delta(delta_j, n_classes)?;
    Ok(GhsLogVariance {
        k: delta_j.len(),
        v: v.max(V_FLOOR),
        alpha,
        log_alpha_w: alpha.ln() + w.ln(),
    })
}

pub fn sigma2_conditional_neg(
    delta_j: &[f64],
    n_classes: usize,
    alpha: f64,
    w: f64,
) -> Result<NegLogVariance> {
    check_params(alpha, w)?;
    let v = v_of_delta(delta_j, n_classes)?;
    Ok(NegLogVariance {
        k: delta_j.len(),
        v: v.max(V_FLOOR),
        alpha,
        log_lambda: (0.5 * alpha).ln() + w.ln(),
    })
}

/// ARS draw for a conditional `a ξ − (V/2) e^{−ξ} − b softplus(ξ − c)`.
/// The outer abscissae are placed where the derivative is at least 1 on the
/// left and at most `−(b − a)/2` on the right, so the hull tails are steep
/// enough to refine from.
fn sample_log_variance<T: LogConcave, R: Rng + ?Sized>(
    target: &T,
    (a, b, c): (f64, f64, f64),
    v: f64,
    k: usize,
    alpha: f64,
    w: f64,
    rng: &mut R,
) -> Result<f64> {
    let gap = b - a;
    let half_v = (0.5 * v).ln();
    let left = half_v - (gap.max(0.0) + 1.0).ln();
    let right = (c + (4.0 * b / gap).ln()).max(half_v + (4.0 / gap).ln());
    let center = (v / k as f64 + alpha * w).ln();
    let center = if center > left && center < right {
        center
    } else {
        0.5 * (left + right)
    };
    let xi = AdaptiveRejectionSampler::new(target, &[left, center, right])?.sample(rng)?;
    Ok(clamp_positive(xi.exp()))
}

/// Draw of σ² under the generalized horseshoe prior, via ARS on `log σ²`.
pub fn sample_sigma2_ghs<R: Rng + ?Sized>(
    delta_j: &[f64],
    n_classes: usize,
    alpha: f64,
    w: f64,
    rng: &mut R,
) -> Result<f64> {
    let t = sigma2_conditional_ghs(delta_j, n_classes, alpha, w)?;
    let shape = (0.5 * (1.0 - t.k as f64), 0.5 * (alpha + 1.0), t.log_alpha_w);
    sample_log_variance(&t, shape, t.v, t.k, alpha, w, rng)
}

/// Draw of σ² under the NEG prior, via ARS on `log σ²`.
pub fn sample_sigma2_neg<R: Rng + ?Sized>(
    delta_j: &[f64],
    n_classes: usize,
    alpha: f64,
    w: f64,
    rng: &mut R,
) -> Result<f64> {
    let t = sigma2_conditional_neg(delta_j, n_classes, alpha, w)?;
    let shape = (1.0 - 0.5 * t.k as f64, 0.5 * alpha + 1.0, t.log_lambda);
    sample_log_variance(&t, shape, t.v, t.k, alpha, w, rng)
}

/// Family dispatch used by the Gibbs sweep.
pub fn sample_sigma2<R: Rng + ?Sized>(
    family: PriorFamily,
    delta_j: &[f64],
    n_classes: usize,
    alpha: f64,
    w: f64,
    rng: &mut R,
) -> Result<f64> {
    match family {
        PriorFamily::T => sample_sigma2_ig(delta_j, n_classes, alpha, w, rng),
        PriorFamily::Ghs => sample_sigma2_ghs(delta_j, n_classes, alpha, w, rng),
        PriorFamily::Neg => sample_sigma2_neg(delta_j, n_classes, alpha, w, rng),
    }
}
