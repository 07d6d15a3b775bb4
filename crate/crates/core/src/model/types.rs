use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Feature matrix with class labels in `1..=C`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: Array2<f64>,
    y: Vec<usize>,
    n_classes: usize,
}

impl Dataset {
    /// Builds a dataset with an explicit class count. Classes may be absent
    /// from `y` (a training fold can lose a class), but every label must lie
    /// in `1..=n_classes`.
    pub fn new(x: Array2<f64>, y: Vec<usize>, n_classes: usize) -> Result<Self> {
        if n_classes < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least 2 classes, got {n_classes}"
            )));
        }
        if x.nrows() != y.len() {
            return Err(Error::DimensionMismatch(format!(
                "x has {} rows but y has {} labels",
                x.nrows(),
                y.len()
            )));
        }
        if x.nrows() == 0 || x.ncols() == 0 {
            return Err(Error::InvalidArgument(
                "dataset needs at least one case and one feature".into(),
            ));
        }
        if let Some(bad) = y.iter().find(|&&c| c == 0 || c > n_classes) {
            return Err(Error::InvalidArgument(format!(
                "label {bad} outside 1..={n_classes}"
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("x contains non-finite values".into()));
        }
        let x = x.as_standard_layout().into_owned();
        Ok(Self { x, y, n_classes })
    }

    /// Class count taken from the largest label.
    pub fn from_labels(x: Array2<f64>, y: Vec<usize>) -> Result<Self> {
        let c = y.iter().copied().max().unwrap_or(0);
        Self::new(x, y, c)
    }

    pub fn x(&self) -> ArrayView2<'_, f64> {
        self.x.view()
    }

    pub fn y(&self) -> &[usize] {
        &self.y
    }

    pub fn n_cases(&self) -> usize {
        self.x.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.x.ncols()
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    /// Number of identifiable coefficient columns, `C - 1`.
    pub fn n_coef_cols(&self) -> usize {
        self.n_classes - 1
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.x.row(i)
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes];
        for &c in &self.y {
            counts[c - 1] += 1;
        }
        counts
    }

    /// Keeps the listed cases (0-based row indices), preserving the class count.
    pub fn select_cases(&self, rows: &[usize]) -> Dataset {
        Dataset {
            x: self.x.select(Axis(0), rows),
            y: rows.iter().map(|&i| self.y[i]).collect(),
            n_classes: self.n_classes,
        }
    }

    /// Keeps the listed features (1-based), in the given order.
    pub fn select_features(&self, features: &[usize]) -> Result<Dataset> {
        if features.is_empty() {
            return Err(Error::InvalidArgument("empty feature subset".into()));
        }
        let p = self.n_features();
        if let Some(bad) = features.iter().find(|&&j| j == 0 || j > p) {
            return Err(Error::InvalidArgument(format!(
                "feature {bad} outside 1..={p}"
            )));
        }
        let cols: Vec<usize> = features.iter().map(|j| j - 1).collect();
        Ok(Dataset {
            x: self.x.select(Axis(1), &cols),
            y: self.y.clone(),
            n_classes: self.n_classes,
        })
    }

    /// Replaces the feature matrix, keeping labels.
    pub fn with_x(&self, x: Array2<f64>) -> Result<Dataset> {
        Dataset::new(x, self.y.clone(), self.n_classes)
    }
}

/// Identifiable coefficients: row 0 holds intercepts, rows `1..=p` the
/// features, and column `k` (0-based) contrasts class `k + 2` against class 1.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefMatrix(Array2<f64>);

impl CoefMatrix {
    pub fn zeros(n_features: usize, n_cols: usize) -> Self {
        Self(Array2::zeros((n_features + 1, n_cols)))
    }

    pub fn from_array(delta: Array2<f64>) -> Result<Self> {
        if delta.nrows() < 1 || delta.ncols() < 1 {
            return Err(Error::InvalidArgument(
                "coefficient matrix needs at least one row and one column".into(),
            ));
        }
        if delta.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "coefficient matrix contains non-finite values".into(),
            ));
        }
        Ok(Self(delta.as_standard_layout().into_owned()))
    }

    pub fn n_features(&self) -> usize {
        self.0.nrows() - 1
    }

    /// `K = C - 1`.
    pub fn n_cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn n_classes(&self) -> usize {
        self.0.ncols() + 1
    }

    /// Coefficients of row `j` (0 = intercept).
    pub fn row(&self, j: usize) -> &[f64] {
        let k = self.n_cols();
        &self.0.as_slice().expect("standard layout")[j * k..(j + 1) * k]
    }

    pub fn row_mut(&mut self, j: usize) -> &mut [f64] {
        let k = self.n_cols();
        &mut self.0.as_slice_mut().expect("standard layout")[j * k..(j + 1) * k]
    }

    pub fn as_array(&self) -> &Array2<f64> {
        &self.0
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice().expect("standard layout")
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

/// Per-feature prior variances σ²_1..σ²_p. The intercept variance lives in
/// [`PriorSpec::sigma0_sq`].
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceVector(Vec<f64>);

impl VarianceVector {
    pub fn new(sigma2: Vec<f64>) -> Result<Self> {
        if let Some(bad) = sigma2.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "variances must be positive and finite, got {bad}"
            )));
        }
        Ok(Self(sigma2))
    }

    pub fn filled(p: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; p])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// σ²_j for feature `j` in `1..=p`.
    pub fn feature(&self, j: usize) -> f64 {
        self.0[j - 1]
    }

    /// Prior variance of coefficient row `j`, with row 0 mapped to σ₀².
    pub fn row_variance(&self, j: usize, sigma0_sq: f64) -> f64 {
        if j == 0 {
            sigma0_sq
        } else {
            self.0[j - 1]
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub(crate) fn set_feature(&mut self, j: usize, value: f64) {
        debug_assert!(value > 0.0 && value.is_finite());
        self.0[j - 1] = value;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PriorFamily {
    /// Inverse-gamma variances; Student-t coefficients.
    T,
    /// Generalized horseshoe: half-t on σ_j.
    Ghs,
    /// Normal-exponential-gamma.
    Neg,
}

impl fmt::Display for PriorFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PriorFamily::T => "t",
            PriorFamily::Ghs => "ghs",
            PriorFamily::Neg => "neg",
        })
    }
}

impl FromStr for PriorFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "t" => Ok(PriorFamily::T),
            "ghs" => Ok(PriorFamily::Ghs),
            "neg" => Ok(PriorFamily::Neg),
            other => Err(Error::InvalidArgument(format!("unknown prior family {other:?}"))),
        }
    }
}

/// Prior family with degrees of freedom `alpha` and log square-scale `log_w`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec {
    pub family: PriorFamily,
    pub alpha: f64,
    pub log_w: f64,
    /// When set, `log_w` is a sampled hyperparameter with a N(0, 100) prior.
    pub w_sampled: bool,
    pub sigma0_sq: f64,
}

/// Variance of the vague normal prior on `log_w` when it is sampled.
pub const LOG_W_PRIOR_VARIANCE: f64 = 100.0;

impl Default for PriorSpec {
    fn default() -> Self {
        Self {
            family: PriorFamily::T,
            alpha: 1.0,
            log_w: -10.0,
            w_sampled: false,
            sigma0_sq: 2000.0,
        }
    }
}

impl PriorSpec {
    pub fn new(family: PriorFamily, alpha: f64, log_w: f64) -> Result<Self> {
        let spec = Self {
            family,
            alpha,
            log_w,
            ..Self::default()
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "alpha must be positive, got {}",
                self.alpha
            )));
        }
        if !(self.sigma0_sq.is_finite() && self.sigma0_sq > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "sigma0_sq must be positive, got {}",
                self.sigma0_sq
            )));
        }
        if !self.log_w.is_finite() {
            return Err(Error::InvalidArgument("log_w must be finite".into()));
        }
        Ok(())
    }

    pub fn w(&self) -> f64 {
        self.log_w.exp()
    }

    pub fn with_log_w(self, log_w: f64) -> Self {
        Self { log_w, ..self }
    }
}

/// Coefficient rows updated by HMC in one sweep. Always contains the
/// intercept row 0; indices are sorted and unique.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActiveSet(Vec<usize>);

impl ActiveSet {
    pub fn all(n_features: usize) -> Self {
        Self((0..=n_features).collect())
    }

    pub fn intercept_only() -> Self {
        Self(vec![0])
    }

    pub fn from_indices(mut rows: Vec<usize>, n_features: usize) -> Result<Self> {
        rows.push(0);
        rows.sort_unstable();
        rows.dedup();
        if let Some(&last) = rows.last() {
            if last > n_features {
                return Err(Error::InvalidArgument(format!(
                    "active row {last} outside 0..={n_features}"
                )));
            }
        }
        Ok(Self(rows))
    }

    pub fn rows(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, j: usize) -> bool {
        self.0.binary_search(&j).is_ok()
    }

    pub(crate) fn from_sorted_unchecked(rows: Vec<usize>) -> Self {
        debug_assert!(rows.first() == Some(&0));
        Self(rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn dataset_rejects_out_of_range_labels() {
        let x = array![[1.0], [2.0]];
        assert!(Dataset::new(x.clone(), vec![1, 3], 2).is_err());
        assert!(Dataset::new(x.clone(), vec![0, 1], 2).is_err());
        assert!(Dataset::new(x, vec![1, 2], 2).is_ok());
    }

    #[test]
    fn dataset_rejects_non_finite() {
        let x = array![[1.0], [f64::NAN]];
        assert!(matches!(
            Dataset::new(x, vec![1, 2], 2),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn select_features_is_one_based() {
        let x = array![[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]];
        let d = Dataset::new(x, vec![1, 2], 2).unwrap();
        let s = d.select_features(&[3, 1]).unwrap();
        assert_eq!(s.x(), array![[3.0, 1.0], [6.0, 4.0]]);
        assert!(d.select_features(&[0]).is_err());
        assert!(d.select_features(&[4]).is_err());
    }

    #[test]
    fn active_set_always_has_intercept() {
        let a = ActiveSet::from_indices(vec![3, 1, 3], 5).unwrap();
        assert_eq!(a.rows(), &[0, 1, 3]);
        assert!(ActiveSet::from_indices(vec![6], 5).is_err());
    }

    #[test]
    fn prior_family_parses() {
        assert_eq!("GHS".parse::<PriorFamily>().unwrap(), PriorFamily::Ghs);
        assert_eq!(PriorFamily::Neg.to_string(), "neg");
        assert!("laplace".parse::<PriorFamily>().is_err());
    }

    #[test]
    fn variance_vector_positive() {
        assert!(VarianceVector::new(vec![1.0, 0.0]).is_err());
        let v = VarianceVector::new(vec![2.0, 3.0]).unwrap();
        assert_eq!(v.feature(2), 3.0);
        assert_eq!(v.row_variance(0, 2000.0), 2000.0);
    }
}
