use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Dataset;

/// Per-column centering and scaling fitted on training data only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizeTransform {
    pub means: Vec<f64>,
    /// Sample standard deviations (`n − 1` denominator), or 1 for
    /// degenerate columns.
    pub scales: Vec<f64>,
    /// 1-based indices of columns with (numerically) zero training variance.
    pub degenerate: Vec<usize>,
}

impl StandardizeTransform {
    pub fn fit(train: &Dataset) -> Self {
        let x = train.x();
        let n = x.nrows();
        let mut means = Vec::with_capacity(x.ncols());
        let mut scales = Vec::with_capacity(x.ncols());
        let mut degenerate = Vec::new();
        for (j, col) in x.columns().into_iter().enumerate() {
            let mean = if n > 0 { col.sum() / n as f64 } else { 0.0 };
            let ss: f64 = col.iter().map(|v| (v - mean) * (v - mean)).sum();
            let sd = if n > 1 { (ss / (n - 1) as f64).sqrt() } else { 0.0 };
            means.push(mean);
            if sd > 1e-12 * mean.abs().max(1.0) && sd.is_finite() {
                scales.push(sd);
            } else {
                scales.push(1.0);
                degenerate.push(j + 1);
            }
        }
        Self {
            means,
            scales,
            degenerate,
        }
    }

    pub fn n_features(&self) -> usize {
        self.means.len()
    }

    pub fn apply_x(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.n_features() {
            return Err(Error::DimensionMismatch(format!(
                "transform fitted on {} features, data has {}",
                self.n_features(),
                x.ncols()
            )));
        }
        let mut out = x.to_owned();
        for mut row in out.rows_mut() {
            for ((v, m), s) in row.iter_mut().zip(&self.means).zip(&self.scales) {
                *v = (*v - m) / s;
            }
        }
        Ok(out)
    }

    pub fn apply(&self, data: &Dataset) -> Result<Dataset> {
        data.with_x(self.apply_x(data.x())?)
    }
}

/// Fits the transform on `train` and applies it to `train` and every set in
/// `apply_to`.
pub fn standardize(
    train: &Dataset,
    apply_to: &[&Dataset],
) -> Result<(Dataset, Vec<Dataset>, StandardizeTransform)> {
    let t = StandardizeTransform::fit(train);
    let train_std = t.apply(train)?;
    let others = apply_to
        .iter()
        .map(|d| t.apply(d))
        .collect::<Result<Vec<_>>>()?;
    Ok((train_std, others, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn train_columns_are_standardized() {
        let x = array![[1.0, 10.0, 3.0], [2.0, 30.0, 3.0], [4.0, -5.0, 3.0], [7.5, 0.25, 3.0]];
        let d = Dataset::new(x, vec![1, 2, 1, 2], 2).unwrap();
        let (s, _, t) = standardize(&d, &[]).unwrap();
        assert_eq!(t.degenerate, vec![3]);
        for j in 0..2 {
            let col = s.x().column(j).to_owned();
            let mean = col.sum() / 4.0;
            let sd = (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 3.0).sqrt();
            assert!(mean.abs() < 1e-12 && (sd - 1.0).abs() < 1e-12);
        }
        assert!(s.x().column(2).iter().all(|v| *v == 0.0));

        let again = StandardizeTransform::fit(&s);
        let twice = again.apply(&s).unwrap();
        for (a, b) in twice.x().iter().zip(s.x().iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn test_sets_use_training_parameters() {
        let train = Dataset::new(array![[0.0], [2.0]], vec![1, 2], 2).unwrap();
        let test = Dataset::new(array![[1.0], [3.0]], vec![1, 1], 2).unwrap();
        let (_, out, t) = standardize(&train, &[&test]).unwrap();
        assert_eq!(t.means, vec![1.0]);
        let sd = 2.0_f64.sqrt();
        assert_eq!(out[0].x().column(0).to_vec(), vec![0.0, 2.0 / sd]);
        let wrong = Dataset::new(array![[1.0, 2.0]], vec![1], 2).unwrap();
        assert!(t.apply(&wrong).is_err());
    }
}
