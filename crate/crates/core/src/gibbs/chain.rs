use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::init::{init_delta, init_sigma2};
use super::settings::SamplerSettings;
use crate::error::{Error, Result};
use crate::model::{
    neg_log_prior_delta, ActiveSet, CoefMatrix, Dataset, Design, LinearPredictors, PriorSpec, RestrictedPosterior, VarianceVector,
};
use crate::samplers::{compute_stepsizes_with_rule, hmc_update, sample_sigma2, update_log_w};

/// Chains abort after this many consecutive HMC rejections.
pub const ABORT_AFTER_REJECTIONS: usize = 1000;

// Linear predictors are rebuilt from scratch at this sweep interval so that
// incremental updates do not accumulate rounding error.
const ETA_REFRESH_INTERVAL: usize = 64;

pub type ChainRng = ChaCha8Rng;

/// The RNG stream owned by one chain.
pub fn chain_rng(seed: u64) -> ChainRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Initial,
    Sampling,
}

/// Current Markov chain state plus the cached linear predictors.
#[derive(Debug, Clone)]
pub struct ChainState {
    pub delta: CoefMatrix,
    pub sigma2: VarianceVector,
    pub log_w: f64,
    eta: LinearPredictors,
}

impl ChainState {
    pub fn new(
        design: &Design,
        delta: CoefMatrix,
        sigma2: VarianceVector,
        log_w: f64,
    ) -> Result<Self> {
        if delta.n_features() != design.n_features() || delta.n_classes() != design.n_classes() {
            return Err(Error::DimensionMismatch(
                "coefficients do not match the data".into(),
            ));
        }
        if sigma2.len() != delta.n_features() {
            return Err(Error::DimensionMismatch(
                "variance vector does not match the coefficients".into(),
            ));
        }
        let eta = design.linear_predictors(&delta);
        Ok(Self {
            delta,
            sigma2,
            log_w,
            eta,
        })
    }

    pub fn linear_predictors(&self) -> &LinearPredictors {
        &self.eta
    }

    fn refresh(&mut self, design: &Design) {
        self.eta = design.linear_predictors(&self.delta);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepDiagnostics {
    pub sweep: usize,
    pub phase: Phase,
    pub accepted: bool,
    pub delta_h: f64,
    pub divergent: bool,
    pub active_size: usize,
    /// `−log L(δ) − log P(δ | σ²)` at the end of the sweep.
    pub u: f64,
    pub log_w: f64,
}

/// Rows updated by HMC: the intercept plus features with `σ_j > ζ`.
pub fn active_set(sigma2: &VarianceVector, zeta: f64) -> ActiveSet {
    let mut rows = vec![0];
    rows.extend(
        sigma2
            .as_slice()
            .iter()
            .enumerate()
            .filter(|(_, s2)| s2.sqrt() > zeta)
            .map(|(i, _)| i + 1),
    );
    ActiveSet::from_sorted_unchecked(rows)
}

/// Precomputed per-chain context for Gibbs sweeps.
pub struct GibbsSampler {
    design: Design,
    // Σ_i x_ij² with row 0 = n, the data part of the curvature estimate.
    sum_sq: Vec<f64>,
    prior: PriorSpec,
    settings: SamplerSettings,
}

impl GibbsSampler {
    pub fn new(data: &Dataset, prior: PriorSpec, settings: SamplerSettings) -> Result<Self> {
        prior.validate()?;
        settings.validate()?;
        let design = Design::new(data);
        let mut sum_sq = vec![data.n_cases() as f64];
        sum_sq.extend((1..=design.n_features()).map(|j| {
            design.column(j).iter().map(|x| x * x).sum::<f64>()
        }));
        Ok(Self {
            design,
            sum_sq,
            prior,
            settings,
        })
    }

    pub fn design(&self) -> &Design {
        &self.design
    }

    /// Initial state from the discriminant-rule coefficients.
    pub fn initial_state(&self, data: &Dataset) -> Result<ChainState> {
        let delta = init_delta(data, &self.prior)?;
        let sigma2 = init_sigma2(&delta, &self.prior);
        ChainState::new(&self.design, delta, sigma2, self.prior.log_w)
    }

    fn curvature(&self, sigma2: &VarianceVector) -> ndarray::Array2<f64> {
        let c = self.design.n_classes() as f64;
        let k = self.design.n_classes() - 1;
        ndarray::Array2::from_shape_fn((self.sum_sq.len(), k), |(j, _)| {
            self.sum_sq[j] / 4.0
                + ((c - 1.0) / c) / sigma2.row_variance(j, self.prior.sigma0_sq)
        })
    }

    /// Step 1 (HMC on the active rows) followed by Step 2 (σ² draws) and the
    /// optional `log w` update. `sweep` only labels the diagnostics.
    pub fn sweep(
        &self,
        state: &mut ChainState,
        phase: Phase,
        sweep: usize,
        rng: &mut ChainRng,
    ) -> Result<SweepDiagnostics> {
        let ell = match phase {
            Phase::Initial => self.settings.ell1,
            Phase::Sampling => self.settings.ell2,
        };
        let active = active_set(&state.sigma2, self.settings.zeta);
        let steps = compute_stepsizes_with_rule(
            &self.curvature(&state.sigma2),
            self.settings.adjust,
            self.settings.stepsize_rule,
        )?;
        let outcome = {
            let mut target = RestrictedPosterior::new(
                &self.design,
                &active,
                &state.delta,
                &state.sigma2,
                &self.prior,
                &state.eta,
            );
            let outcome = hmc_update(&state.delta, &active, ell, &steps, &mut target, rng)?;
            if outcome.accepted {
                let q = target.pack(&outcome.new_delta);
                state.eta = target.linear_predictors_at(&q);
            }
            outcome
        };
        if outcome.accepted {
            state.delta = outcome.new_delta;
        }

        let c = self.design.n_classes();
        let w = state.log_w.exp();
        for j in 1..=self.design.n_features() {
            let s2 = sample_sigma2(self.prior.family, state.delta.row(j), c, self.prior.alpha, w, rng)?;
            state.sigma2.set_feature(j, s2);
        }

        if self.prior.w_sampled {
            state.log_w = update_log_w(&state.sigma2, &self.prior, state.log_w, rng).log_w;
        }

        let u = -self.design.log_likelihood(&state.eta)
            + neg_log_prior_delta(&state.delta, &state.sigma2, &self.prior)?;
        Ok(SweepDiagnostics {
            sweep,
            phase,
            accepted: outcome.accepted,
            delta_h: outcome.hamiltonian_delta,
            divergent: outcome.divergent,
            active_size: active.len(),
            u,
            log_w: state.log_w,
        })
    }
}

/// One Gibbs sweep built from scratch. Long runs should hold a
/// [`GibbsSampler`] instead.
pub fn gibbs_sweep(
    state: &mut ChainState,
    data: &Dataset,
    prior: &PriorSpec,
    settings: &SamplerSettings,
    phase: Phase,
    rng: &mut ChainRng,
) -> Result<SweepDiagnostics> {
    GibbsSampler::new(data, *prior, *settings)?.sweep(state, phase, 0, rng)
}

/// Receives sweep diagnostics and recorded draws as a chain runs.
pub trait ChainSink {
    fn on_sweep(&mut self, diag: &SweepDiagnostics) -> Result<()>;
    fn on_draw(&mut self, draw: usize, state: &ChainState) -> Result<()>;
}

/// Discards everything.
impl ChainSink for () {
    fn on_sweep(&mut self, _diag: &SweepDiagnostics) -> Result<()> {
        Ok(())
    }

    fn on_draw(&mut self, _draw: usize, _state: &ChainState) -> Result<()> {
        Ok(())
    }
}

/// In-memory chain output. Draws come from the sampling phase only;
/// diagnostics cover every sweep of both phases.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ChainRecord {
    pub delta_draws: Vec<CoefMatrix>,
    pub sigma2_draws: Vec<VarianceVector>,
    pub log_w_draws: Vec<f64>,
    pub diagnostics: Vec<SweepDiagnostics>,
}

impl ChainRecord {
    pub fn n_draws(&self) -> usize {
        self.delta_draws.len()
    }

    /// Mean HMC acceptance over the given phase.
    pub fn acceptance_rate(&self, phase: Phase) -> Option<f64> {
        let (acc, n) = self
            .diagnostics
            .iter()
            .filter(|d| d.phase == phase)
            .fold((0usize, 0usize), |(a, n), d| (a + d.accepted as usize, n + 1));
        (n > 0).then(|| acc as f64 / n as f64)
    }
}

impl ChainSink for ChainRecord {
    fn on_sweep(&mut self, diag: &SweepDiagnostics) -> Result<()> {
        self.diagnostics.push(*diag);
        Ok(())
    }

    fn on_draw(&mut self, _draw: usize, state: &ChainState) -> Result<()> {
        self.delta_draws.push(state.delta.clone());
        self.sigma2_draws.push(state.sigma2.clone());
        self.log_w_draws.push(state.log_w);
        Ok(())
    }
}

/// Runs a full chain: discriminant-rule initialization, `n1` unrecorded
/// sweeps with `ell1`, then `n2` sweeps with `ell2` recording every
/// `thin`-th state. Deterministic given data, prior and settings.
pub fn run_chain(
    data: &Dataset,
    prior: &PriorSpec,
    settings: &SamplerSettings,
) -> Result<ChainRecord> {
    let mut record = ChainRecord::default();
    run_chain_with_sink(data, prior, settings, &mut record)?;
    Ok(record)
}

pub fn run_chain_with_sink(
    data: &Dataset,
    prior: &PriorSpec,
    settings: &SamplerSettings,
    sink: &mut dyn ChainSink,
) -> Result<()> {
    let sampler = GibbsSampler::new(data, *prior, *settings)?;
    let mut state = sampler.initial_state(data)?;
    let mut rng = chain_rng(settings.seed);
    let mut rejections = 0usize;
    let mut draw = 0usize;
    let total = settings.n1 + settings.n2;
    for sweep in 0..total {
        if sweep > 0 && sweep % ETA_REFRESH_INTERVAL == 0 {
            state.refresh(sampler.design());
        }
        let phase = if sweep < settings.n1 {
            Phase::Initial
        } else {
            Phase::Sampling
        };
        let diag = sampler.sweep(&mut state, phase, sweep, &mut rng)?;
        sink.on_sweep(&diag)?;
        if diag.accepted {
            rejections = 0;
        } else {
            rejections += 1;
            if rejections > ABORT_AFTER_REJECTIONS {
                return Err(Error::ChainAborted { sweep, rejections });
            }
        }
        if phase == Phase::Sampling && (sweep - settings.n1 + 1) % settings.thin == 0 {
            sink.on_draw(draw, &state)?;
            draw += 1;
        }
    }
    Ok(())
}
