use std::path::{Path, PathBuf};

use hyperlasso::gibbs::SamplerSettings;
use hyperlasso::inference::PredictionMode;
use hyperlasso::samplers::StepsizeRule;
use hyperlasso::simgen::{FitConfig, GeneratorSpec, GeneratorVariant};
use hyperlasso::{PriorFamily, PriorSpec};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, io_error, CliResult};

/// Environment variable naming the output directory used when neither the
/// command line nor the config file gives one.
pub const OUT_DIR_ENV: &str = "HYPERLASSO_OUT_DIR";
const DEFAULT_OUT_DIR: &str = "hyperlasso-out";

/// Flat configuration shared by all subcommands. Unknown keys are rejected.
/// Relative paths are resolved against the working directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub prior: PriorFamily,
    pub alpha: f64,
    pub log_w: f64,
    /// Treat `log_w` as a hyperparameter with a N(0, 100) prior.
    pub sample_w: bool,
    pub sigma0_sq: f64,

    pub n1: usize,
    pub l1: usize,
    pub n2: usize,
    pub l2: usize,
    pub eps: f64,
    pub zeta: f64,
    pub stepsize_rule: StepsizeRule,
    pub seed: u64,
    pub thin: usize,

    pub burnin_frac: f64,
    pub mode: PredictionMode,
    pub thresholds: Vec<f64>,
    pub grid: Vec<f64>,

    pub train: Option<PathBuf>,
    pub test: Option<PathBuf>,
    pub truth: Option<PathBuf>,
    pub chain_dir: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    /// Feature subset by column name; all features when absent.
    pub features: Option<Vec<String>>,
    pub jobs: usize,

    pub generator: GeneratorVariant,
    pub n_train: usize,
    pub n_test: usize,
    pub p: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let prior = PriorSpec::default();
        let s = SamplerSettings::default();
        Self {
            prior: prior.family,
            alpha: prior.alpha,
            log_w: prior.log_w,
            sample_w: prior.w_sampled,
            sigma0_sq: prior.sigma0_sq,
            n1: s.n1,
            l1: s.ell1,
            n2: s.n2,
            l2: s.ell2,
            eps: s.adjust,
            zeta: s.zeta,
            stepsize_rule: s.stepsize_rule,
            seed: s.seed,
            thin: s.thin,
            burnin_frac: 0.2,
            mode: PredictionMode::default(),
            thresholds: vec![0.1],
            grid: Vec::new(),
            train: None,
            test: None,
            truth: None,
            chain_dir: None,
            out_dir: None,
            features: None,
            jobs: 1,
            generator: GeneratorVariant::TwoClass,
            n_train: 100,
            n_test: 1000,
            p: 200,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
        Self::parse(&text).map_err(|e| invalid(path, e))
    }

    pub fn parse(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn prior_spec(&self) -> CliResult<PriorSpec> {
        let spec = PriorSpec {
            family: self.prior,
            alpha: self.alpha,
            log_w: self.log_w,
            w_sampled: self.sample_w,
            sigma0_sq: self.sigma0_sq,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn sampler_settings(&self) -> CliResult<SamplerSettings> {
        let s = SamplerSettings {
            n1: self.n1,
            ell1: self.l1,
            n2: self.n2,
            ell2: self.l2,
            adjust: self.eps,
            zeta: self.zeta,
            thin: self.thin,
            seed: self.seed,
            stepsize_rule: self.stepsize_rule,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn fit_config(&self) -> CliResult<FitConfig> {
        if !(0.0..1.0).contains(&self.burnin_frac) {
            return Err(crate::CliError::Validation(format!(
                "burnin_frac must be in [0, 1), got {}",
                self.burnin_frac
            )));
        }
        Ok(FitConfig {
            prior: self.prior_spec()?,
            settings: self.sampler_settings()?,
            burnin_frac: self.burnin_frac,
            mode: self.mode,
        })
    }

    pub fn generator_spec(&self) -> CliResult<GeneratorSpec> {
        let spec = GeneratorSpec {
            variant: self.generator,
            n_train: self.n_train,
            n_test: self.n_test,
            p: self.p,
            seed: self.seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Output directory from `flag`, then the config, then the environment.
    pub fn resolve_out_dir(&self, flag: Option<&Path>) -> PathBuf {
        flag.map(Path::to_path_buf)
            .or_else(|| self.out_dir.clone())
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
    }
}
