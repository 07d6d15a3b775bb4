use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::standardize::StandardizeTransform;
use crate::error::{Error, Result};
use crate::gibbs::{run_chain_with_sink, ChainRecord, ChainSink, ChainState, SamplerSettings, SweepDiagnostics};
use crate::inference::{
    coefficient_means, feature_ranking, predict, FeatureRanking, PredictionMode,
    PredictionResult,
};
use crate::model::{CoefMatrix, Dataset, PriorSpec};

/// Everything one pipeline run needs besides data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub prior: PriorSpec,
    pub settings: SamplerSettings,
    pub burnin_frac: f64,
    pub mode: PredictionMode,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            prior: PriorSpec::default(),
            settings: SamplerSettings::default(),
            burnin_frac: 0.2,
            mode: PredictionMode::default(),
        }
    }
}

impl FitConfig {
    pub fn with_seed(self, seed: u64) -> Self {
        Self {
            settings: SamplerSettings {
                seed,
                ..self.settings
            },
            ..self
        }
    }
}

/// A fitted chain together with its training transform and summaries.
#[derive(Debug, Clone)]
pub struct FitSummary {
    pub transform: StandardizeTransform,
    pub record: ChainRecord,
    pub delta_hat: CoefMatrix,
    pub ranking: FeatureRanking,
    pub burnin_frac: f64,
}

impl FitSummary {
    /// Predictive probabilities for raw (untransformed) test data.
    pub fn predict(&self, test: &Dataset, mode: PredictionMode) -> Result<Array2<f64>> {
        let x = self.transform.apply_x(test.x())?;
        predict(&self.record, self.burnin_frac, x.view(), mode)
    }

    pub fn evaluate(&self, test: &Dataset, mode: PredictionMode) -> Result<PredictionResult> {
        PredictionResult::new(self.predict(test, mode)?, test.y())
    }
}

/// Standardizes `train`, runs the chain and summarizes it.
pub fn fit(train: &Dataset, cfg: &FitConfig) -> Result<FitSummary> {
    fit_with_sink(train, cfg, &mut ())
}

/// [`fit`] that also forwards every sweep and draw to `extra`.
pub fn fit_with_sink(
    train: &Dataset,
    cfg: &FitConfig,
    extra: &mut dyn ChainSink,
) -> Result<FitSummary> {
    let transform = StandardizeTransform::fit(train);
    fit_standardized(&transform.apply(train)?, transform, cfg, extra)
}

/// Runs and summarizes a chain on data already transformed by `transform`.
pub fn fit_standardized(
    std_train: &Dataset,
    transform: StandardizeTransform,
    cfg: &FitConfig,
    extra: &mut dyn ChainSink,
) -> Result<FitSummary> {
    let mut tee = Tee {
        record: ChainRecord::default(),
        extra,
    };
    run_chain_with_sink(std_train, &cfg.prior, &cfg.settings, &mut tee)?;
    let record = tee.record;
    let delta_hat = coefficient_means(&record, cfg.burnin_frac)?;
    let ranking = feature_ranking(&delta_hat, std_train.n_classes());
    Ok(FitSummary {
        transform,
        record,
        delta_hat,
        ranking,
        burnin_frac: cfg.burnin_frac,
    })
}

struct Tee<'a> {
    record: ChainRecord,
    extra: &'a mut dyn ChainSink,
}

impl ChainSink for Tee<'_> {
    fn on_sweep(&mut self, diag: &SweepDiagnostics) -> Result<()> {
        self.record.on_sweep(diag)?;
        self.extra.on_sweep(diag)
    }

    fn on_draw(&mut self, draw: usize, state: &ChainState) -> Result<()> {
        self.record.on_draw(draw, state)?;
        self.extra.on_draw(draw, state)
    }
}

/// Runs `f` on a dedicated pool of `jobs` worker threads (at least one).
pub fn with_pool<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("worker pool: {e}")))?;
    Ok(pool.install(f))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoocvFold {
    /// 0-based index of the held-out case.
    pub case: usize,
    pub seed: u64,
    pub label: usize,
    pub probs: Option<Vec<f64>>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoocvOutcome {
    pub folds: Vec<LoocvFold>,
    /// Metrics over the folds that completed, in case order; `None` when
    /// every fold failed.
    pub result: Option<PredictionResult>,
}

impl LoocvOutcome {
    pub fn failed(&self) -> impl Iterator<Item = &LoocvFold> {
        self.folds.iter().filter(|f| f.failure.is_some())
    }
}

fn loocv_fold(data: &Dataset, cfg: &FitConfig, case: usize) -> LoocvFold {
    let seed = cfg.settings.seed.wrapping_add(case as u64);
    let label = data.y()[case];
    let rows: Vec<usize> = (0..data.n_cases()).filter(|&i| i != case).collect();
    let train = data.select_cases(&rows);
    let held_out = data.select_cases(&[case]);
    let outcome = if let Some(c) = train.class_counts().iter().position(|&n| n == 0) {
        Err(format!("training set has no case of class {}", c + 1))
    } else {
        fit(&train, &cfg.with_seed(seed))
            .and_then(|s| s.predict(&held_out, cfg.mode))
            .map(|p| p.row(0).to_vec())
            .map_err(|e| e.to_string())
    };
    let (probs, failure) = match outcome {
        Ok(p) => (Some(p), None),
        Err(e) => (None, Some(e)),
    };
    LoocvFold {
        case,
        seed,
        label,
        probs,
        failure,
    }
}

/// Leave-one-out predictive probabilities. Fold `i` standardizes on the
/// other cases and runs its chain with seed `seed + i`, so results do not
/// depend on `jobs`.
pub fn loocv_driver(data: &Dataset, cfg: &FitConfig, jobs: usize) -> Result<LoocvOutcome> {
    if data.n_cases() < 2 {
        return Err(Error::InvalidArgument("LOOCV needs at least 2 cases".into()));
    }
    let folds: Vec<LoocvFold> = with_pool(jobs, || {
        (0..data.n_cases())
            .into_par_iter()
            .map(|i| loocv_fold(data, cfg, i))
            .collect()
    })?;
    let ok: Vec<&LoocvFold> = folds.iter().filter(|f| f.probs.is_some()).collect();
    let result = if ok.is_empty() {
        None
    } else {
        let c = data.n_classes();
        let mut probs = Array2::zeros((ok.len(), c));
        for (r, f) in ok.iter().enumerate() {
            for (k, v) in f.probs.as_ref().expect("completed fold").iter().enumerate() {
                probs[[r, k]] = *v;
            }
        }
        let labels: Vec<usize> = ok.iter().map(|f| f.label).collect();
        Some(PredictionResult::new(probs, &labels)?)
    };
    Ok(LoocvOutcome { folds, result })
}

/// One grid point of a scale sweep.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub log_w: f64,
    pub seed: u64,
    pub summary: FitSummary,
    /// Test-set AMLP when a test set was supplied.
    pub amlp: Option<f64>,
}

/// Configuration of grid point `g`: `log w` replaced, seed `seed + g`.
pub fn sweep_point_config(base: &FitConfig, log_w: f64, g: usize) -> FitConfig {
    FitConfig {
        prior: base.prior.with_log_w(log_w),
        ..base.with_seed(base.settings.seed.wrapping_add(g as u64))
    }
}

/// Independent chains over a grid of `log w` values; grid point `g` uses
/// seed `seed + g`.
pub fn scale_sweep(
    train: &Dataset,
    test: Option<&Dataset>,
    base: &FitConfig,
    log_w_grid: &[f64],
    jobs: usize,
) -> Result<Vec<SweepPoint>> {
    if log_w_grid.is_empty() {
        return Err(Error::InvalidArgument("empty log w grid".into()));
    }
    with_pool(jobs, || {
        log_w_grid
            .par_iter()
            .enumerate()
            .map(|(g, &log_w)| {
                let cfg = sweep_point_config(base, log_w, g);
                let seed = cfg.settings.seed;
                let summary = fit(train, &cfg)?;
                let amlp = test
                    .map(|t| summary.evaluate(t, cfg.mode).map(|r| r.amlp))
                    .transpose()?;
                Ok(SweepPoint {
                    log_w,
                    seed,
                    summary,
                    amlp,
                })
            })
            .collect()
    })?
}
