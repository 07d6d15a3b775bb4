use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::{row_v, CoefMatrix, Dataset, PriorSpec, VarianceVector};

/// Starting coefficients from a Gaussian discriminant rule: per-class sample
/// means and a covariance blended half-and-half from the pooled within-class
/// covariance and the identity. With `p >= n` only the diagonal of the
/// pooled covariance is used.
pub fn init_delta(data: &Dataset, _prior: &PriorSpec) -> Result<CoefMatrix> {
    let n = data.n_cases();
    let p = data.n_features();
    let c = data.n_classes();
    let counts = data.class_counts();
    if let Some(empty) = counts.iter().position(|&m| m == 0) {
        return Err(Error::Initialization(format!(
            "class {} has no training cases",
            empty + 1
        )));
    }

    let mut means = vec![vec![0.0; p]; c];
    for (i, &y) in data.y().iter().enumerate() {
        for (m, &v) in means[y - 1].iter_mut().zip(data.row(i).iter()) {
            *m += v;
        }
    }
    for (m, &count) in means.iter_mut().zip(&counts) {
        m.iter_mut().for_each(|v| *v /= count as f64);
    }
    let dof = if n > c { (n - c) as f64 } else { n as f64 };

    let slopes: Vec<Vec<f64>> = if p < n {
        let mut cov = DMatrix::<f64>::zeros(p, p);
        for (i, &y) in data.y().iter().enumerate() {
            let r = DVector::from_iterator(
                p,
                data.row(i).iter().zip(&means[y - 1]).map(|(x, m)| x - m),
            );
            cov.ger(1.0, &r, &r, 1.0);
        }
        let blended = cov * (0.5 / dof) + DMatrix::<f64>::identity(p, p) * 0.5;
        let chol = blended.cholesky().ok_or_else(|| {
            Error::Initialization("regularized covariance is not positive definite".into())
        })?;
        means
            .iter()
            .map(|m| chol.solve(&DVector::from_column_slice(m)).as_slice().to_vec())
            .collect()
    } else {
        let mut var = vec![0.0; p];
        for (i, &y) in data.y().iter().enumerate() {
            for ((s, &x), m) in var.iter_mut().zip(data.row(i).iter()).zip(&means[y - 1]) {
                *s += (x - m) * (x - m);
            }
        }
        let blended: Vec<f64> = var.iter().map(|s| 0.5 * s / dof + 0.5).collect();
        means
            .iter()
            .map(|m| m.iter().zip(&blended).map(|(mu, v)| mu / v).collect())
            .collect()
    };

    let intercepts: Vec<f64> = (0..c)
        .map(|cls| {
            let quad: f64 = means[cls].iter().zip(&slopes[cls]).map(|(m, b)| m * b).sum();
            -0.5 * quad + (counts[cls] as f64 / n as f64).ln()
        })
        .collect();

    let k = c - 1;
    let mut delta = CoefMatrix::zeros(p, k);
    for kk in 0..k {
        delta.row_mut(0)[kk] = intercepts[kk + 1] - intercepts[0];
        for j in 0..p {
            delta.row_mut(j + 1)[kk] = slopes[kk + 1][j] - slopes[0][j];
        }
    }
    if !delta.is_finite() {
        return Err(Error::Initialization("non-finite initial coefficients".into()));
    }
    Ok(delta)
}

/// `σ_j² = max(V(δ_j)/K, w)`.
pub fn init_sigma2(delta: &CoefMatrix, prior: &PriorSpec) -> VarianceVector {
    let k = delta.n_cols() as f64;
    let c = delta.n_classes();
    let w = prior.w();
    let s2 = (1..=delta.n_features())
        .map(|j| (row_v(delta.row(j), c) / k).max(w).max(f64::MIN_POSITIVE))
        .collect();
    VarianceVector::new(s2).expect("floored variances are positive")
}
