//! Synthetic data generators, train-only standardization and the
//! experiment drivers (single fits, leave-one-out CV, scale sweeps).

mod experiments;
mod generators;
mod standardize;

pub use experiments::{
    fit, fit_standardized, fit_with_sink, loocv_driver, scale_sweep, sweep_point_config, with_pool,
    FitConfig, FitSummary, LoocvFold, LoocvOutcome, SweepPoint,
};
pub use generators::{
    gen_three_class, gen_two_class, generate, GeneratorSpec, GeneratorVariant, TruthGroup,
    TruthLabeling, TWO_CLASS_TRUE_DELTA,
};
pub use standardize::{standardize, StandardizeTransform};
