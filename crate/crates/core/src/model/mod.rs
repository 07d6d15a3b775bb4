//! Data model and the deterministic mathematics of the posterior: likelihood,
//! coefficient and variance priors, gradients and curvature estimates.
//!
//! Features are addressed `1..=p` and the intercept as row `0` of every
//! coefficient matrix. The last class is never special: class 1 is the
//! baseline of the identifiable parameterization, so a model with `C`
//! classes carries `K = C - 1` coefficient columns.

mod likelihood;
mod posterior;
mod prior;
mod types;

pub use likelihood::{
    class_probs, curvature_estimate, grad_u, log_likelihood, neg_log_prior_delta, sdb, v_of_delta,
};
pub use posterior::{Design, LinearPredictors, RestrictedPosterior};
pub use prior::log_prior_sigma2;
pub(crate) use prior::log_prior_sigma2_unchecked;
pub use types::{
    ActiveSet, CoefMatrix, Dataset, PriorFamily, PriorSpec, VarianceVector, LOG_W_PRIOR_VARIANCE,
};

pub(crate) use likelihood::row_v;
