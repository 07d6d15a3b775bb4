use ndarray::{Array2, Axis};

use super::likelihood::{row_v, softmax_baseline};
use super::types::{ActiveSet, CoefMatrix, Dataset, PriorSpec, VarianceVector};
use crate::samplers::HamiltonianTarget;

/// Feature-major copy of a dataset tuned for the sampler's inner loops:
/// each feature column is contiguous.
#[derive(Debug, Clone)]
pub struct Design {
    xt: Array2<f64>,
    labels: Vec<usize>,
    n_classes: usize,
}

impl Design {
    pub fn new(data: &Dataset) -> Self {
        Self {
            xt: data.x().t().as_standard_layout().into_owned(),
            labels: data.y().iter().map(|c| c - 1).collect(),
            n_classes: data.n_classes(),
        }
    }

    pub fn n_cases(&self) -> usize {
        self.xt.ncols()
    }

    pub fn n_features(&self) -> usize {
        self.xt.nrows()
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    /// Column of feature `j` in `1..=p`.
    pub fn column(&self, j: usize) -> &[f64] {
        let n = self.n_cases();
        &self.xt.as_slice().expect("standard layout")[(j - 1) * n..j * n]
    }

    /// Computes `η_ik = δ_0k + x_i·δ_{1:p,k}` from scratch.
    pub fn linear_predictors(&self, delta: &CoefMatrix) -> LinearPredictors {
        let k = delta.n_cols();
        let mut eta = Array2::zeros((k, self.n_cases()));
        for (kk, mut row) in eta.axis_iter_mut(Axis(0)).enumerate() {
            row.fill(delta.row(0)[kk]);
        }
        for j in 1..=self.n_features() {
            add_column(&mut eta, self.column(j), delta.row(j));
        }
        LinearPredictors(eta)
    }

    /// Log likelihood given cached linear predictors.
    pub fn log_likelihood(&self, eta: &LinearPredictors) -> f64 {
        let k = self.n_classes - 1;
        let mut col = vec![0.0; k];
        let mut probs = vec![0.0; self.n_classes];
        let mut total = 0.0;
        for (i, &y) in self.labels.iter().enumerate() {
            for kk in 0..k {
                col[kk] = eta.0[[kk, i]];
            }
            let lse = softmax_baseline(&col, &mut probs);
            total += if y == 0 { 0.0 } else { col[y - 1] } - lse;
        }
        total
    }
}

fn add_column(eta: &mut Array2<f64>, x: &[f64], coefs: &[f64]) {
    for (kk, &c) in coefs.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        let row = eta.row_mut(kk).into_slice().expect("standard layout");
        for (e, &xi) in row.iter_mut().zip(x) {
            *e += c * xi;
        }
    }
}

/// Cached `K × n` matrix of linear predictors owned by one chain.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearPredictors(Array2<f64>);

impl LinearPredictors {
    pub fn as_array(&self) -> &Array2<f64> {
        &self.0
    }
}

/// Conditional posterior of the active coefficient rows given σ², exposed as
/// a potential `U(q)` over the flattened active block (row-major, `K` entries
/// per active row). Inactive rows enter only through a fixed offset on the
/// linear predictors.
pub struct RestrictedPosterior<'a> {
    design: &'a Design,
    rows: &'a [usize],
    k: usize,
    inv_var: Vec<f64>,
    base: Array2<f64>,
    eta: Array2<f64>,
    resid: Array2<f64>,
    cached_q: Vec<f64>,
    cached: bool,
    log_lik: f64,
}

impl<'a> RestrictedPosterior<'a> {
    pub fn new(
        design: &'a Design,
        active: &'a ActiveSet,
        delta: &CoefMatrix,
        sigma2: &VarianceVector,
        prior: &PriorSpec,
        eta: &LinearPredictors,
    ) -> Self {
        let k = delta.n_cols();
        let mut base = eta.0.clone();
        for &j in active.rows() {
            let neg: Vec<f64> = delta.row(j).iter().map(|d| -d).collect();
            if j == 0 {
                for (kk, mut row) in base.axis_iter_mut(Axis(0)).enumerate() {
                    row += neg[kk];
                }
            } else {
                add_column(&mut base, design.column(j), &neg);
            }
        }
        let inv_var = active
            .rows()
            .iter()
            .map(|&j| 1.0 / sigma2.row_variance(j, prior.sigma0_sq))
            .collect();
        let n = design.n_cases();
        Self {
            design,
            rows: active.rows(),
            k,
            inv_var,
            base,
            eta: Array2::zeros((k, n)),
            resid: Array2::zeros((k, n)),
            cached_q: Vec::new(),
            cached: false,
            log_lik: 0.0,
        }
    }

    /// Packs the active rows of `delta` into a flat position vector.
    pub fn pack(&self, delta: &CoefMatrix) -> Vec<f64> {
        self.rows
            .iter()
            .flat_map(|&j| delta.row(j).iter().copied())
            .collect()
    }

    /// Writes a flat position vector back into the active rows of `delta`.
    pub fn unpack_into(&self, q: &[f64], delta: &mut CoefMatrix) {
        for (a, &j) in self.rows.iter().enumerate() {
            delta.row_mut(j).copy_from_slice(&q[a * self.k..(a + 1) * self.k]);
        }
    }

    /// Linear predictors at `q` (all rows, inactive ones fixed).
    pub fn linear_predictors_at(&mut self, q: &[f64]) -> LinearPredictors {
        self.evaluate(q);
        LinearPredictors(self.eta.clone())
    }

    pub fn log_likelihood_at(&mut self, q: &[f64]) -> f64 {
        self.evaluate(q);
        self.log_lik
    }

    fn evaluate(&mut self, q: &[f64]) {
        if self.cached && self.cached_q.as_slice() == q {
            return;
        }
        let k = self.k;
        self.eta.assign(&self.base);
        for (a, &j) in self.rows.iter().enumerate() {
            let coefs = &q[a * k..(a + 1) * k];
            if j == 0 {
                for (kk, mut row) in self.eta.axis_iter_mut(Axis(0)).enumerate() {
                    row += coefs[kk];
                }
            } else {
                add_column(&mut self.eta, self.design.column(j), coefs);
            }
        }

        let mut col = vec![0.0; k];
        let mut probs = vec![0.0; k + 1];
        let mut total = 0.0;
        for (i, &y) in self.design.labels.iter().enumerate() {
            for kk in 0..k {
                col[kk] = self.eta[[kk, i]];
            }
            let lse = softmax_baseline(&col, &mut probs);
            total += if y == 0 { 0.0 } else { col[y - 1] } - lse;
            for kk in 0..k {
                let indicator = if y == kk + 1 { 1.0 } else { 0.0 };
                self.resid[[kk, i]] = probs[kk + 1] - indicator;
            }
        }
        self.log_lik = total;
        self.cached_q.clear();
        self.cached_q.extend_from_slice(q);
        self.cached = true;
    }
}

impl HamiltonianTarget for RestrictedPosterior<'_> {
    fn potential(&mut self, q: &[f64]) -> f64 {
        self.evaluate(q);
        let c = self.k + 1;
        let prior: f64 = q
            .chunks_exact(self.k)
            .zip(&self.inv_var)
            .map(|(row, iv)| 0.5 * row_v(row, c) * iv)
            .sum();
        -self.log_lik + prior
    }

    fn gradient(&mut self, q: &[f64], grad: &mut [f64]) {
        self.evaluate(q);
        let k = self.k;
        let c = (k + 1) as f64;
        for (a, &j) in self.rows.iter().enumerate() {
            let row = &q[a * k..(a + 1) * k];
            let mean = row.iter().sum::<f64>() / c;
            for kk in 0..k {
                let r = self.resid.row(kk);
                let r = r.as_slice().expect("standard layout");
                let lik = if j == 0 {
                    r.iter().sum::<f64>()
                } else {
                    self.design
                        .column(j)
                        .iter()
                        .zip(r)
                        .map(|(x, r)| x * r)
                        .sum::<f64>()
                };
                grad[a * k + kk] = lik + (row[kk] - mean) * self.inv_var[a];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{grad_u, log_likelihood, neg_log_prior_delta};
    use approx::assert_relative_eq;
    use ndarray::array;

    fn fixture() -> (Dataset, CoefMatrix, VarianceVector) {
        let x = array![[0.2, -1.0, 0.5], [1.2, 0.3, -0.7], [-0.4, 0.8, 1.1], [0.9, -0.2, 0.0]];
        let data = Dataset::new(x, vec![1, 3, 2, 3], 3).unwrap();
        let delta = CoefMatrix::from_array(array![
            [0.1, -0.2],
            [0.5, 0.3],
            [-0.4, 0.9],
            [0.05, -0.6]
        ])
        .unwrap();
        let s2 = VarianceVector::new(vec![0.7, 1.3, 2.0]).unwrap();
        (data, delta, s2)
    }

    #[test]
    fn cached_predictors_match_direct_likelihood() {
        let (data, delta, _) = fixture();
        let design = Design::new(&data);
        let eta = design.linear_predictors(&delta);
        assert_relative_eq!(
            design.log_likelihood(&eta),
            log_likelihood(&data, &delta).unwrap(),
            epsilon = 1e-13
        );
    }

    #[test]
    fn restricted_gradient_matches_grad_u() {
        let (data, delta, s2) = fixture();
        let prior = PriorSpec::default();
        let design = Design::new(&data);
        let eta = design.linear_predictors(&delta);
        let active = ActiveSet::from_indices(vec![2], 3).unwrap();
        let mut post = RestrictedPosterior::new(&design, &active, &delta, &s2, &prior, &eta);
        let q = post.pack(&delta);
        let mut g = vec![0.0; q.len()];
        post.gradient(&q, &mut g);
        let expected = grad_u(&data, &delta, &s2, &prior, &active).unwrap();
        for (a, b) in g.iter().zip(expected.iter()) {
            assert_relative_eq!(*a, *b, epsilon = 1e-12);
        }
    }

    #[test]
    fn restricted_potential_differences_match_full_u() {
        let (data, delta, s2) = fixture();
        let prior = PriorSpec::default();
        let design = Design::new(&data);
        let eta = design.linear_predictors(&delta);
        let active = ActiveSet::from_indices(vec![1, 3], 3).unwrap();
        let mut post = RestrictedPosterior::new(&design, &active, &delta, &s2, &prior, &eta);
        let q0 = post.pack(&delta);
        let mut q1 = q0.clone();
        q1[2] += 0.3;
        q1[5] -= 0.2;
        let mut moved = delta.clone();
        post.unpack_into(&q1, &mut moved);
        let full = |d: &CoefMatrix| {
            -log_likelihood(&data, d).unwrap() + neg_log_prior_delta(d, &s2, &prior).unwrap()
        };
        let du = post.potential(&q1) - post.potential(&q0);
        assert_relative_eq!(du, full(&moved) - full(&delta), epsilon = 1e-12);
    }
}
