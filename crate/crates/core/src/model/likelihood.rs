use std::f64::consts::PI;

use ndarray::Array2;

use super::types::{ActiveSet, CoefMatrix, Dataset, PriorSpec, VarianceVector};
use crate::error::{Error, Result};

/// Sum of squared deviations of `(0, δ_1, …, δ_K)` from its mean, i.e. the
/// spread of the implicit per-class coefficients. No validation.
#[inline]
pub(crate) fn row_v(delta_j: &[f64], n_classes: usize) -> f64 {
    let (sum, sum_sq) = delta_j
        .iter()
        .fold((0.0, 0.0), |(s, ss), &d| (s + d, ss + d * d));
    (sum_sq - sum * sum / n_classes as f64).max(0.0)
}

fn check_row(delta_j: &[f64], n_classes: usize) -> Result<()> {
    if n_classes < 2 || delta_j.len() + 1 != n_classes {
        return Err(Error::InvalidArgument(format!(
            "row of length {} does not match {} classes",
            delta_j.len(),
            n_classes
        )));
    }
    if delta_j.iter().any(|d| !d.is_finite()) {
        return Err(Error::InvalidArgument("non-finite coefficient".into()));
    }
    Ok(())
}

/// `V(δ_j) = Σ_k δ_jk² − (Σ_k δ_jk)² / C`.
pub fn v_of_delta(delta_j: &[f64], n_classes: usize) -> Result<f64> {
    check_row(delta_j, n_classes)?;
    Ok(row_v(delta_j, n_classes))
}

/// Standard deviation of the implicit per-class coefficients,
/// `sqrt(V(δ_j) / C)`. For two classes this is `|δ_j1| / 2`.
pub fn sdb(delta_j: &[f64], n_classes: usize) -> Result<f64> {
    check_row(delta_j, n_classes)?;
    Ok((row_v(delta_j, n_classes) / n_classes as f64).sqrt())
}

/// Writes class probabilities for linear predictors `eta` (class 1 has the
/// implicit predictor 0) into `probs` and returns the log normalizer.
#[inline]
pub(crate) fn softmax_baseline(eta: &[f64], probs: &mut [f64]) -> f64 {
    debug_assert_eq!(probs.len(), eta.len() + 1);
    let max = eta.iter().copied().fold(0.0_f64, f64::max);
    probs[0] = (-max).exp();
    let mut total = probs[0];
    for (p, &e) in probs[1..].iter_mut().zip(eta) {
        *p = (e - max).exp();
        total += *p;
    }
    for p in probs.iter_mut() {
        *p /= total;
    }
    max + total.ln()
}

fn linear_predictors(x_row: &[f64], delta: &CoefMatrix) -> Vec<f64> {
    let mut eta = delta.row(0).to_vec();
    for (j, &xj) in x_row.iter().enumerate() {
        if xj != 0.0 {
            for (e, &d) in eta.iter_mut().zip(delta.row(j + 1)) {
                *e += xj * d;
            }
        }
    }
    eta
}

/// Class probabilities `P(y = c | x, δ)` for `c = 1..=C`.
pub fn class_probs(x_row: &[f64], delta: &CoefMatrix) -> Result<Vec<f64>> {
    if x_row.len() != delta.n_features() {
        return Err(Error::DimensionMismatch(format!(
            "row has {} features, coefficients have {}",
            x_row.len(),
            delta.n_features()
        )));
    }
    let eta = linear_predictors(x_row, delta);
    if eta.iter().any(|e| !e.is_finite()) {
        return Err(Error::Numeric("non-finite linear predictor".into()));
    }
    let mut probs = vec![0.0; eta.len() + 1];
    softmax_baseline(&eta, &mut probs);
    Ok(probs)
}

fn check_shapes(data: &Dataset, delta: &CoefMatrix) -> Result<()> {
    if data.n_features() != delta.n_features() || data.n_classes() != delta.n_classes() {
        return Err(Error::DimensionMismatch(format!(
            "data is {} features / {} classes, coefficients are {} features / {} classes",
            data.n_features(),
            data.n_classes(),
            delta.n_features(),
            delta.n_classes()
        )));
    }
    Ok(())
}

fn check_sigma2(delta: &CoefMatrix, sigma2: &VarianceVector) -> Result<()> {
    if sigma2.len() != delta.n_features() {
        return Err(Error::DimensionMismatch(format!(
            "{} variances for {} features",
            sigma2.len(),
            delta.n_features()
        )));
    }
    Ok(())
}

/// `Σ_i log P(y_i | x_i, δ)`, evaluated in log space.
pub fn log_likelihood(data: &Dataset, delta: &CoefMatrix) -> Result<f64> {
    check_shapes(data, delta)?;
    let mut probs = vec![0.0; data.n_classes()];
    let mut total = 0.0;
    for (i, &y) in data.y().iter().enumerate() {
        let row = data.row(i);
        let eta = linear_predictors(row.as_slice().expect("standard layout"), delta);
        let lse = softmax_baseline(&eta, &mut probs);
        let eta_y = if y == 1 { 0.0 } else { eta[y - 2] };
        total += eta_y - lse;
    }
    if !total.is_finite() {
        return Err(Error::Numeric("non-finite log likelihood".into()));
    }
    Ok(total)
}

/// Minus log of the Gaussian coefficient prior given the variances,
/// `Σ_{j=0..p} [(K/2) log(2πσ_j²) + V(δ_j) / (2σ_j²)]`, with σ₀² on the
/// intercept row. The `|I_K + J_K|` determinant is a constant and is dropped.
pub fn neg_log_prior_delta(
    delta: &CoefMatrix,
    sigma2: &VarianceVector,
    prior: &PriorSpec,
) -> Result<f64> {
    check_sigma2(delta, sigma2)?;
    if !(prior.sigma0_sq > 0.0) {
        return Err(Error::InvalidArgument("sigma0_sq must be positive".into()));
    }
    let k = delta.n_cols() as f64;
    let c = delta.n_classes();
    let total = (0..=delta.n_features())
        .map(|j| {
            let s2 = sigma2.row_variance(j, prior.sigma0_sq);
            0.5 * k * (2.0 * PI * s2).ln() + row_v(delta.row(j), c) / (2.0 * s2)
        })
        .sum();
    Ok(total)
}

/// Gradient of `U = −log L − log P(δ | σ²)` restricted to the rows in
/// `active`, returned as an `|active| × K` matrix in the order of
/// `active.rows()`.
pub fn grad_u(
    data: &Dataset,
    delta: &CoefMatrix,
    sigma2: &VarianceVector,
    prior: &PriorSpec,
    active: &ActiveSet,
) -> Result<Array2<f64>> {
    check_shapes(data, delta)?;
    check_sigma2(delta, sigma2)?;
    let p = delta.n_features();
    if active.rows().iter().any(|&j| j > p) || !active.contains(0) {
        return Err(Error::InvalidArgument(
            "active set must contain row 0 and rows within 0..=p".into(),
        ));
    }
    let k = delta.n_cols();
    let c = delta.n_classes();
    let mut grad = Array2::zeros((active.len(), k));
    let mut probs = vec![0.0; c];
    for (i, &y) in data.y().iter().enumerate() {
        let row = data.row(i);
        let x = row.as_slice().expect("standard layout");
        let eta = linear_predictors(x, delta);
        softmax_baseline(&eta, &mut probs);
        for (a, &j) in active.rows().iter().enumerate() {
            let xij = if j == 0 { 1.0 } else { x[j - 1] };
            if xij == 0.0 {
                continue;
            }
            for kk in 0..k {
                let indicator = if y == kk + 2 { 1.0 } else { 0.0 };
                grad[[a, kk]] += xij * (probs[kk + 1] - indicator);
            }
        }
    }
    for (a, &j) in active.rows().iter().enumerate() {
        let s2 = sigma2.row_variance(j, prior.sigma0_sq);
        let row = delta.row(j);
        let mean = row.iter().sum::<f64>() / c as f64;
        for kk in 0..k {
            grad[[a, kk]] += (row[kk] - mean) / s2;
        }
    }
    Ok(grad)
}

/// Coordinate-wise second-derivative estimate of `U` that does not depend on
/// the current coefficients: `Σ_i x_ij²/4 + ((C−1)/C)/σ_j²`, the same for
/// every column `k`.
pub fn curvature_estimate(
    data: &Dataset,
    sigma2: &VarianceVector,
    prior: &PriorSpec,
) -> Array2<f64> {
    let p = data.n_features();
    let k = data.n_coef_cols();
    let c = data.n_classes() as f64;
    let mut sum_sq = vec![0.0; p + 1];
    sum_sq[0] = data.n_cases() as f64;
    for row in data.x().rows() {
        for (s, &v) in sum_sq[1..].iter_mut().zip(row.iter()) {
            *s += v * v;
        }
    }
    Array2::from_shape_fn((p + 1, k), |(j, _)| {
        sum_sq[j] / 4.0 + ((c - 1.0) / c) / sigma2.row_variance(j, prior.sigma0_sq)
    })
}
