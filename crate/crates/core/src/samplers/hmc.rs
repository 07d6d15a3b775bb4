use ndarray::Array2;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ActiveSet, CoefMatrix};

/// A differentiable potential `U(q)`; HMC samples from `exp(-U)`.
pub trait HamiltonianTarget {
    fn potential(&mut self, q: &[f64]) -> f64;
    fn gradient(&mut self, q: &[f64], grad: &mut [f64]);
}

/// Adapts a pair of closures into a [`HamiltonianTarget`].
pub struct FnTarget<U, G> {
    pub potential: U,
    pub gradient: G,
}

impl<U, G> HamiltonianTarget for FnTarget<U, G>
where
    U: FnMut(&[f64]) -> f64,
    G: FnMut(&[f64], &mut [f64]),
{
    fn potential(&mut self, q: &[f64]) -> f64 {
        (self.potential)(q)
    }

    fn gradient(&mut self, q: &[f64], grad: &mut [f64]) {
        (self.gradient)(q, grad)
    }
}

/// How the per-coordinate stepsize is derived from the curvature estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepsizeRule {
    /// `adjust / sqrt(curvature)`.
    #[default]
    InverseSqrt,
    /// `adjust / curvature`.
    Inverse,
}

/// Per-coordinate leapfrog stepsizes, shaped like the coefficient matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HmcStepsizes(Array2<f64>);

impl HmcStepsizes {
    pub fn as_array(&self) -> &Array2<f64> {
        &self.0
    }

    /// Stepsizes of the active rows, flattened in the same layout as the
    /// packed position vector.
    pub fn gather(&self, active: &ActiveSet) -> Vec<f64> {
        active
            .rows()
            .iter()
            .flat_map(|&j| self.0.row(j).to_vec())
            .collect()
    }
}

pub fn compute_stepsizes(curvature: &Array2<f64>, adjust: f64) -> Result<HmcStepsizes> {
    compute_stepsizes_with_rule(curvature, adjust, StepsizeRule::InverseSqrt)
}

pub fn compute_stepsizes_with_rule(
    curvature: &Array2<f64>,
    adjust: f64,
    rule: StepsizeRule,
) -> Result<HmcStepsizes> {
    if !(adjust > 0.0 && adjust.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "stepsize adjustment must be positive, got {adjust}"
        )));
    }
    if let Some(bad) = curvature.iter().find(|c| !(c.is_finite() && **c > 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "curvature must be positive and finite, got {bad}"
        )));
    }
    let eps = curvature.mapv(|c| match rule {
        StepsizeRule::InverseSqrt => adjust / c.sqrt(),
        StepsizeRule::Inverse => adjust / c,
    });
    Ok(HmcStepsizes(eps))
}

/// One leapfrog step with coordinate-specific stepsizes. Returns `false` if
/// the state became non-finite.
pub fn leapfrog<T: HamiltonianTarget + ?Sized>(
    q: &mut [f64],
    p_mom: &mut [f64],
    eps: &[f64],
    target: &mut T,
) -> bool {
    leapfrog_trajectory(q, p_mom, eps, 1, target)
}

/// `n_steps` leapfrog steps. The gradient at the end of each step is reused
/// as the first half-kick of the next, which is exactly equivalent to
/// calling [`leapfrog`] repeatedly.
pub fn leapfrog_trajectory<T: HamiltonianTarget + ?Sized>(
    q: &mut [f64],
    p_mom: &mut [f64],
    eps: &[f64],
    n_steps: usize,
    target: &mut T,
) -> bool {
    debug_assert!(q.len() == p_mom.len() && q.len() == eps.len());
    let mut grad = vec![0.0; q.len()];
    target.gradient(q, &mut grad);
    for _ in 0..n_steps {
        for ((p, g), e) in p_mom.iter_mut().zip(&grad).zip(eps) {
            *p -= 0.5 * e * g;
        }
        for ((q, p), e) in q.iter_mut().zip(p_mom.iter()).zip(eps) {
            *q += e * p;
        }
        target.gradient(q, &mut grad);
        for ((p, g), e) in p_mom.iter_mut().zip(&grad).zip(eps) {
            *p -= 0.5 * e * g;
        }
        if !q.iter().chain(p_mom.iter()).all(|v| v.is_finite()) {
            return false;
        }
    }
    true
}

/// Result of one HMC transition on a flat position vector.
#[derive(Debug, Clone, PartialEq)]
pub struct HmcTransition {
    pub accepted: bool,
    /// `H(q*, p*) − H(q, −p)`; infinite or NaN for divergent trajectories.
    pub delta_h: f64,
    pub divergent: bool,
    /// Potential at the returned position.
    pub potential: f64,
}

/// One HMC transition. `q` is replaced by the proposal when accepted and left
/// untouched otherwise.
pub fn hmc_transition<T, R>(
    q: &mut [f64],
    eps: &[f64],
    ell: usize,
    target: &mut T,
    rng: &mut R,
) -> HmcTransition
where
    T: HamiltonianTarget + ?Sized,
    R: Rng + ?Sized,
{
    let mut p_mom: Vec<f64> = (0..q.len()).map(|_| rng.sample(StandardNormal)).collect();
    let u0 = target.potential(q);
    let h0 = u0 + kinetic(&p_mom);

    let mut q_new = q.to_vec();
    let finite = leapfrog_trajectory(&mut q_new, &mut p_mom, eps, ell, target);
    let (delta_h, u1) = if finite {
        let u1 = target.potential(&q_new);
        (u1 + kinetic(&p_mom) - h0, u1)
    } else {
        (f64::INFINITY, f64::NAN)
    };
    let divergent = !delta_h.is_finite();
    let u: f64 = rng.random();
    let accepted = !divergent && u < (-delta_h).exp();
    if accepted {
        q.copy_from_slice(&q_new);
        HmcTransition {
            accepted,
            delta_h,
            divergent,
            potential: u1,
        }
    } else {
        HmcTransition {
            accepted,
            delta_h,
            divergent,
            potential: u0,
        }
    }
}

fn kinetic(p_mom: &[f64]) -> f64 {
    0.5 * p_mom.iter().map(|p| p * p).sum::<f64>()
}

/// Outcome of an HMC update of the active rows of a coefficient matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HmcOutcome {
    pub new_delta: CoefMatrix,
    pub accepted: bool,
    pub hamiltonian_delta: f64,
    pub trajectory_length: usize,
    pub divergent: bool,
}

/// HMC on the rows of `delta` listed in `active`; the other rows are carried
/// over untouched. `target` must be a potential over the packed active block
/// (row-major, `K` entries per active row).
pub fn hmc_update<T, R>(
    delta: &CoefMatrix,
    active: &ActiveSet,
    ell: usize,
    stepsizes: &HmcStepsizes,
    target: &mut T,
    rng: &mut R,
) -> Result<HmcOutcome>
where
    T: HamiltonianTarget + ?Sized,
    R: Rng + ?Sized,
{
    if ell == 0 {
        return Err(Error::InvalidArgument("trajectory length must be >= 1".into()));
    }
    if stepsizes.0.dim() != delta.as_array().dim() {
        return Err(Error::DimensionMismatch(
            "stepsizes do not match coefficient shape".into(),
        ));
    }
    let mut q: Vec<f64> = active
        .rows()
        .iter()
        .flat_map(|&j| delta.row(j).iter().copied())
        .collect();
    let eps = stepsizes.gather(active);
    let t = hmc_transition(&mut q, &eps, ell, target, rng);
    let mut new_delta = delta.clone();
    if t.accepted {
        let k = delta.n_cols();
        for (a, &j) in active.rows().iter().enumerate() {
            new_delta.row_mut(j).copy_from_slice(&q[a * k..(a + 1) * k]);
        }
    }
    Ok(HmcOutcome {
        new_delta,
        accepted: t.accepted,
        hamiltonian_delta: t.delta_h,
        trajectory_length: ell,
        divergent: t.divergent,
    })
}
