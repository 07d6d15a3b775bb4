//! Two-phase restricted Gibbs sampler: HMC on the active coefficient rows,
//! then fresh draws of every feature variance, then (optionally) the scale.

mod chain;
mod init;
mod settings;

pub use chain::{
    active_set, chain_rng, gibbs_sweep, run_chain, run_chain_with_sink, ChainRecord, ChainSink,
    ChainState, GibbsSampler, Phase, SweepDiagnostics, ABORT_AFTER_REJECTIONS,
};
pub use init::{init_delta, init_sigma2};
pub use settings::SamplerSettings;
