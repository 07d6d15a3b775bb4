//! Posterior summaries: coefficient means, SDB feature ranking, predictive
//! probabilities and the prediction / selection metrics built on them.

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gibbs::ChainRecord;
use crate::model::{class_probs, row_v, CoefMatrix};

/// Post-burn-in draws: the first `floor(burnin_frac · m)` of `m` recorded
/// draws are dropped.
pub fn retained_draws(record: &ChainRecord, burnin_frac: f64) -> Result<&[CoefMatrix]> {
    if !(0.0..1.0).contains(&burnin_frac) {
        return Err(Error::InvalidArgument(format!(
            "burn-in fraction must be in [0, 1), got {burnin_frac}"
        )));
    }
    let m = record.delta_draws.len();
    let skip = (burnin_frac * m as f64).floor() as usize;
    if skip >= m {
        return Err(Error::EmptyChain);
    }
    Ok(&record.delta_draws[skip..])
}

/// Elementwise mean of retained coefficient draws, accumulated in one pass.
pub fn coefficient_means(record: &ChainRecord, burnin_frac: f64) -> Result<CoefMatrix> {
    mean_of_draws(retained_draws(record, burnin_frac)?)
}

pub fn mean_of_draws(draws: &[CoefMatrix]) -> Result<CoefMatrix> {
    let first = draws.first().ok_or(Error::EmptyChain)?;
    let mut mean = first.as_array().clone();
    for (t, d) in draws.iter().enumerate().skip(1) {
        if d.as_array().dim() != mean.dim() {
            return Err(Error::DimensionMismatch("draws differ in shape".into()));
        }
        let w = 1.0 / (t + 1) as f64;
        mean.zip_mut_with(d.as_array(), |m, &x| *m += (x - *m) * w);
    }
    CoefMatrix::from_array(mean)
}

/// Features ranked by the SDB of their mean coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRanking {
    /// SDB of feature `j` at position `j − 1`.
    pub sdb: Vec<f64>,
    /// `sdb / max(sdb)`, or all zeros when every SDB is zero.
    pub relative_sdb: Vec<f64>,
    /// 1-based feature indices by descending SDB; ties keep index order.
    pub order: Vec<usize>,
}

impl FeatureRanking {
    /// 1-based rank of each feature (feature `j` at position `j − 1`).
    pub fn ranks(&self) -> Vec<usize> {
        let mut ranks = vec![0; self.order.len()];
        for (r, &j) in self.order.iter().enumerate() {
            ranks[j - 1] = r + 1;
        }
        ranks
    }

    /// The `n` highest-ranked features.
    pub fn top(&self, n: usize) -> &[usize] {
        &self.order[..n.min(self.order.len())]
    }

    /// Features whose relative SDB is at least `threshold`.
    pub fn retained(&self, threshold: f64) -> Vec<usize> {
        self.relative_sdb
            .iter()
            .enumerate()
            .filter(|(_, &r)| r >= threshold)
            .map(|(i, _)| i + 1)
            .collect()
    }
}

pub fn feature_ranking(delta_hat: &CoefMatrix, n_classes: usize) -> FeatureRanking {
    let c = n_classes as f64;
    let sdb: Vec<f64> = (1..=delta_hat.n_features())
        .map(|j| (row_v(delta_hat.row(j), n_classes) / c).sqrt())
        .collect();
    ranking_from_sdb(sdb)
}

pub fn ranking_from_sdb(sdb: Vec<f64>) -> FeatureRanking {
    let max = sdb.iter().copied().fold(0.0, f64::max);
    let relative_sdb = if max > 0.0 {
        sdb.iter().map(|s| s / max).collect()
    } else {
        vec![0.0; sdb.len()]
    };
    let mut order: Vec<usize> = (1..=sdb.len()).collect();
    order.sort_by(|&a, &b| sdb[b - 1].total_cmp(&sdb[a - 1]).then(a.cmp(&b)));
    FeatureRanking {
        sdb,
        relative_sdb,
        order,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictionMode {
    /// Mean over retained draws of the class probabilities.
    #[default]
    BayesAverage,
    /// Class probabilities at the posterior-mean coefficients.
    PluginMean,
}

impl std::str::FromStr for PredictionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bayes_average" => Ok(Self::BayesAverage),
            "plugin_mean" => Ok(Self::PluginMean),
            other => Err(Error::InvalidArgument(format!(
                "unknown prediction mode {other:?}"
            ))),
        }
    }
}

impl std::fmt::Display for PredictionMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::BayesAverage => "bayes_average",
            Self::PluginMean => "plugin_mean",
        })
    }
}

/// Predictive class probabilities (`n_test × C`) for standardized test rows.
pub fn predict(
    record: &ChainRecord,
    burnin_frac: f64,
    x_test: ArrayView2<'_, f64>,
    mode: PredictionMode,
) -> Result<Array2<f64>> {
    predict_with_draws(retained_draws(record, burnin_frac)?, x_test, mode)
}

pub fn predict_with_draws(
    draws: &[CoefMatrix],
    x_test: ArrayView2<'_, f64>,
    mode: PredictionMode,
) -> Result<Array2<f64>> {
    let first = draws.first().ok_or(Error::EmptyChain)?;
    if x_test.ncols() != first.n_features() {
        return Err(Error::DimensionMismatch(format!(
            "test rows have {} features, model has {}",
            x_test.ncols(),
            first.n_features()
        )));
    }
    let c = first.n_classes();
    let rows: Vec<Vec<f64>> = x_test.rows().into_iter().map(|r| r.to_vec()).collect();
    let mut probs = Array2::zeros((rows.len(), c));
    match mode {
        PredictionMode::PluginMean => {
            let mean = mean_of_draws(draws)?;
            for (i, x) in rows.iter().enumerate() {
                for (c, v) in class_probs(x, &mean)?.into_iter().enumerate() {
                    probs[[i, c]] = v;
                }
            }
        }
        PredictionMode::BayesAverage => {
            for d in draws {
                for (i, x) in rows.iter().enumerate() {
                    for (c, v) in class_probs(x, d)?.into_iter().enumerate() {
                        probs[[i, c]] += v;
                    }
                }
            }
            probs /= draws.len() as f64;
        }
    }
    Ok(probs)
}

fn check_labels(probs: &Array2<f64>, y_true: &[usize]) -> Result<()> {
    if probs.nrows() != y_true.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} probability rows for {} labels",
            probs.nrows(),
            y_true.len()
        )));
    }
    if let Some(bad) = y_true.iter().find(|&&y| y == 0 || y > probs.ncols()) {
        return Err(Error::InvalidArgument(format!(
            "label {bad} outside 1..={}",
            probs.ncols()
        )));
    }
    Ok(())
}

/// Average minus log predictive probability at the true labels. A zero
/// probability at a true label gives `+∞`.
pub fn amlp(probs: &Array2<f64>, y_true: &[usize]) -> Result<f64> {
    check_labels(probs, y_true)?;
    if y_true.is_empty() {
        return Err(Error::InvalidArgument("no cases".into()));
    }
    let total: f64 = y_true
        .iter()
        .enumerate()
        .map(|(i, &y)| -probs[[i, y - 1]].ln())
        .sum();
    Ok(total / y_true.len() as f64)
}

/// Fraction of rows whose most probable class differs from the label; ties
/// go to the lowest class index.
pub fn error_rate(probs: &Array2<f64>, y_true: &[usize]) -> Result<f64> {
    check_labels(probs, y_true)?;
    if y_true.is_empty() {
        return Err(Error::InvalidArgument("no cases".into()));
    }
    let wrong = probs
        .rows()
        .into_iter()
        .zip(y_true)
        .filter(|(row, &y)| argmax(row.iter().copied()) + 1 != y)
        .count();
    Ok(wrong as f64 / y_true.len() as f64)
}

fn argmax(values: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in values.enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionResult {
    pub probs: Array2<f64>,
    pub amlp: f64,
    pub error_rate: f64,
}

impl PredictionResult {
    pub fn new(probs: Array2<f64>, y_true: &[usize]) -> Result<Self> {
        Ok(Self {
            amlp: amlp(&probs, y_true)?,
            error_rate: error_rate(&probs, y_true)?,
            probs,
        })
    }
}

/// Ground truth for selection metrics. Features sharing a `Useful` unit id
/// form a group that counts as one useful feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeatureTruth {
    Useful(usize),
    Noise,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionMetrics {
    pub threshold: f64,
    pub n_retained: usize,
    pub fpr: f64,
    pub sensitivity: f64,
    pub fdr: f64,
}

/// Retains features with relative SDB `>= t` for each threshold and scores
/// the retained set against `truth`. FDR uses `max(1, retained)` as its
/// denominator.
pub fn selection_metrics(
    ranking: &FeatureRanking,
    truth: &[FeatureTruth],
    thresholds: &[f64],
) -> Result<Vec<SelectionMetrics>> {
    if truth.is_empty() {
        return Err(Error::InvalidArgument("empty truth labeling".into()));
    }
    if truth.len() != ranking.relative_sdb.len() {
        return Err(Error::DimensionMismatch(format!(
            "truth covers {} features, ranking {}",
            truth.len(),
            ranking.relative_sdb.len()
        )));
    }
    let n_noise = truth.iter().filter(|t| **t == FeatureTruth::Noise).count();
    let mut units: Vec<usize> = truth
        .iter()
        .filter_map(|t| match t {
            FeatureTruth::Useful(u) => Some(*u),
            FeatureTruth::Noise => None,
        })
        .collect();
    units.sort_unstable();
    units.dedup();

    Ok(thresholds
        .iter()
        .map(|&t| {
            let mut retained = 0;
            let mut noise = 0;
            let mut detected: Vec<usize> = Vec::new();
            for (r, truth) in ranking.relative_sdb.iter().zip(truth) {
                if *r < t {
                    continue;
                }
                retained += 1;
                match truth {
                    FeatureTruth::Noise => noise += 1,
                    FeatureTruth::Useful(u) => detected.push(*u),
                }
            }
            detected.sort_unstable();
            detected.dedup();
            SelectionMetrics {
                threshold: t,
                n_retained: retained,
                fpr: if n_noise > 0 {
                    noise as f64 / n_noise as f64
                } else {
                    0.0
                },
                // With no useful units there is nothing to miss.
                sensitivity: if units.is_empty() {
                    1.0
                } else {
                    detected.len() as f64 / units.len() as f64
                },
                fdr: noise as f64 / retained.max(1) as f64,
            }
        })
        .collect())
}
