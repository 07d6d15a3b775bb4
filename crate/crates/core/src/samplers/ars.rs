//! Derivative-based adaptive rejection sampling for log-concave densities.

use rand::Rng;

use crate::error::{Error, Result};

/// A univariate log-concave density known up to a constant.
pub trait LogConcave {
    fn log_density(&self, x: f64) -> f64;
    fn derivative(&self, x: f64) -> f64;
    /// Open support interval; either end may be infinite.
    fn domain(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }
}

/// Closure-backed [`LogConcave`] target.
pub struct FnLogConcave<F, G> {
    pub log_density: F,
    pub derivative: G,
    pub domain: (f64, f64),
}

impl<F, G> FnLogConcave<F, G>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    pub fn new(log_density: F, derivative: G) -> Self {
        Self {
            log_density,
            derivative,
            domain: (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    pub fn on(mut self, lo: f64, hi: f64) -> Self {
        self.domain = (lo, hi);
        self
    }
}

impl<F, G> LogConcave for FnLogConcave<F, G>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    fn log_density(&self, x: f64) -> f64 {
        (self.log_density)(x)
    }

    fn derivative(&self, x: f64) -> f64 {
        (self.derivative)(x)
    }

    fn domain(&self) -> (f64, f64) {
        self.domain
    }
}

/// Log-scale slack allowed between an evaluated log density and the upper hull.
pub const ENVELOPE_TOLERANCE: f64 = 1e-8;

const MAX_ABSCISSAE: usize = 64;
const MAX_TRIALS: usize = 100_000;
const MAX_BRACKET_DOUBLINGS: usize = 64;

/// Finds three abscissae `{left, center, right}` with a positive derivative
/// at `left` and a negative one at `right` (where the domain is unbounded on
/// that side), doubling the offsets from `center` until both hold.
pub fn bracket_abscissae<T: LogConcave + ?Sized>(
    target: &T,
    center: f64,
    half_width: f64,
) -> Result<[f64; 3]> {
    let (lo, hi) = target.domain();
    if !(center > lo && center < hi) || !(half_width > 0.0) {
        return Err(Error::Bracketing(format!(
            "center {center} not inside ({lo}, {hi}) or non-positive width"
        )));
    }
    let mut left = center - half_width;
    let mut width = half_width;
    for _ in 0..MAX_BRACKET_DOUBLINGS {
        if left <= lo {
            left = 0.5 * (lo + center);
            if lo.is_finite() {
                break;
            }
        }
        let d = target.derivative(left);
        if d.is_nan() {
            return Err(Error::Bracketing(format!("NaN derivative at {left}")));
        }
        if d > 0.0 || lo.is_finite() {
            break;
        }
        width *= 2.0;
        left = center - width;
    }
    let mut right = center + half_width;
    let mut width = half_width;
    for _ in 0..MAX_BRACKET_DOUBLINGS {
        if right >= hi {
            right = 0.5 * (hi + center);
            if hi.is_finite() {
                break;
            }
        }
        let d = target.derivative(right);
        if d.is_nan() {
            return Err(Error::Bracketing(format!("NaN derivative at {right}")));
        }
        if d < 0.0 || hi.is_finite() {
            break;
        }
        width *= 2.0;
        right = center + width;
    }
    let xs = [left, center, right];
    check_bracket(target, &xs)?;
    Ok(xs)
}

fn check_bracket<T: LogConcave + ?Sized>(target: &T, xs: &[f64]) -> Result<()> {
    let (lo, hi) = target.domain();
    if lo.is_infinite() && !(target.derivative(xs[0]) > 0.0) {
        return Err(Error::Bracketing(format!(
            "derivative at leftmost abscissa {} is not positive",
            xs[0]
        )));
    }
    let last = xs[xs.len() - 1];
    if hi.is_infinite() && !(target.derivative(last) < 0.0) {
        return Err(Error::Bracketing(format!(
            "derivative at rightmost abscissa {last} is not negative"
        )));
    }
    Ok(())
}

/// Piecewise-exponential upper hull (tangents) and piecewise-linear lower
/// hull (chords) over a sorted set of abscissae. The hull keeps refining
/// across draws, so repeated sampling gets cheaper.
pub struct AdaptiveRejectionSampler<'a, T: LogConcave + ?Sized> {
    target: &'a T,
    lo: f64,
    hi: f64,
    xs: Vec<f64>,
    hs: Vec<f64>,
    ds: Vec<f64>,
    // z[i] is the right edge of segment i; the last one equals `hi`.
    z: Vec<f64>,
    log_mass: Vec<f64>,
    cum: Vec<f64>,
}

impl<'a, T: LogConcave + ?Sized> AdaptiveRejectionSampler<'a, T> {
    pub fn new(target: &'a T, init_abscissae: &[f64]) -> Result<Self> {
        let (lo, hi) = target.domain();
        let mut xs = init_abscissae.to_vec();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        if xs.is_empty() {
            return Err(Error::Bracketing("no initial abscissae".into()));
        }
        if xs.iter().any(|&x| !(x > lo && x < hi)) {
            return Err(Error::Bracketing(format!(
                "initial abscissae {xs:?} not inside ({lo}, {hi})"
            )));
        }
        check_bracket(target, &xs)?;
        let mut hs = Vec::with_capacity(xs.len());
        let mut ds = Vec::with_capacity(xs.len());
        for &x in &xs {
            let (h, d) = (target.log_density(x), target.derivative(x));
            if !h.is_finite() || !d.is_finite() {
                return Err(Error::Numeric(format!(
                    "log density or derivative not finite at {x}"
                )));
            }
            hs.push(h);
            ds.push(d);
        }
        let mut s = Self {
            target,
            lo,
            hi,
            xs,
            hs,
            ds,
            z: Vec::new(),
            log_mass: Vec::new(),
            cum: Vec::new(),
        };
        s.rebuild()?;
        Ok(s)
    }

    pub fn n_abscissae(&self) -> usize {
        self.xs.len()
    }

    fn rebuild(&mut self) -> Result<()> {
        let k = self.xs.len();
        self.z.clear();
        for i in 0..k - 1 {
            let (x0, x1) = (self.xs[i], self.xs[i + 1]);
            let (d0, d1) = (self.ds[i], self.ds[i + 1]);
            let slope_gap = d0 - d1;
            let z = if slope_gap > 1e-12 * (d0.abs() + d1.abs()).max(1e-300) {
                (self.hs[i + 1] - self.hs[i] - x1 * d1 + x0 * d0) / slope_gap
            } else {
                0.5 * (x0 + x1)
            };
            self.z.push(if z.is_finite() { z.clamp(x0, x1) } else { 0.5 * (x0 + x1) });
        }
        self.z.push(self.hi);

        self.log_mass.clear();
        for i in 0..k {
            let a = if i == 0 { self.lo } else { self.z[i - 1] };
            let b = self.z[i];
            let lm = segment_log_mass(self.hs[i], self.ds[i], self.xs[i], a, b);
            if lm.is_nan() || lm == f64::INFINITY {
                return Err(Error::Bracketing(format!(
                    "upper hull is not integrable on ({a}, {b})"
                )));
            }
            self.log_mass.push(lm);
        }
        let max = self.log_mass.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return Err(Error::Numeric("upper hull has no mass".into()));
        }
        self.cum.clear();
        let mut acc = 0.0;
        for lm in &self.log_mass {
            acc += (lm - max).exp();
            self.cum.push(acc);
        }
        Ok(())
    }

    fn upper(&self, i: usize, x: f64) -> f64 {
        self.hs[i] + self.ds[i] * (x - self.xs[i])
    }

    fn lower(&self, x: f64) -> f64 {
        let k = self.xs.len();
        if k < 2 || x < self.xs[0] || x > self.xs[k - 1] {
            return f64::NEG_INFINITY;
        }
        let i = match self.xs.partition_point(|&v| v <= x) {
            0 => 0,
            n if n >= k => k - 2,
            n => n - 1,
        };
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        ((x1 - x) * self.hs[i] + (x - x0) * self.hs[i + 1]) / (x1 - x0)
    }

    fn draw_from_hull<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, f64) {
        let total = *self.cum.last().expect("non-empty hull");
        loop {
            let r = rng.random::<f64>() * total;
            let i = self.cum.partition_point(|&c| c <= r).min(self.cum.len() - 1);
            let a = if i == 0 { self.lo } else { self.z[i - 1] };
            let b = self.z[i];
            let u = open_unit(rng);
            let s = self.ds[i];
            let len = b - a;
            let x = if s.abs() * len.min(1e300) < 1e-12 && len.is_finite() {
                a + u * len
            } else if s > 0.0 {
                b + (u + (1.0 - u) * (-s * len).exp()).ln() / s
            } else {
                a + (u * (s * len).exp_m1()).ln_1p() / s
            };
            let x = x.clamp(a, b);
            if x > self.lo && x < self.hi && x.is_finite() {
                return (i, x);
            }
        }
    }

    /// One exact draw from the normalized target.
    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<f64> {
        for _ in 0..MAX_TRIALS {
            let (i, x) = self.draw_from_hull(rng);
            let u_x = self.upper(i, x);
            let log_u = open_unit(rng).ln();
            let l_x = self.lower(x);
            if l_x > u_x + ENVELOPE_TOLERANCE * u_x.abs().max(1.0) {
                return Err(Error::LogConcavityViolated {
                    x,
                    observed: l_x,
                    envelope: u_x,
                });
            }
            if log_u <= l_x - u_x {
                return Ok(x);
            }
            let h = self.target.log_density(x);
            if h.is_nan() {
                return Err(Error::Numeric(format!("NaN log density at {x}")));
            }
            if h > u_x + ENVELOPE_TOLERANCE * u_x.abs().max(1.0) {
                return Err(Error::LogConcavityViolated {
                    x,
                    observed: h,
                    envelope: u_x,
                });
            }
            let accept = log_u <= h - u_x;
            let d = self.target.derivative(x);
            if self.xs.len() < MAX_ABSCISSAE && h.is_finite() && d.is_finite() {
                let pos = self.xs.partition_point(|&v| v < x);
                if self.xs.get(pos) != Some(&x) {
                    self.xs.insert(pos, x);
                    self.hs.insert(pos, h);
                    self.ds.insert(pos, d);
                    self.rebuild()?;
                }
            }
            if accept {
                return Ok(x);
            }
        }
        Err(Error::Numeric(format!(
            "adaptive rejection sampling made no acceptance in {MAX_TRIALS} trials"
        )))
    }
}

fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

/// Log of `∫_a^b exp(h + s (x − x0)) dx`.
fn segment_log_mass(h: f64, s: f64, x0: f64, a: f64, b: f64) -> f64 {
    let len = b - a;
    if !(len > 0.0) {
        return f64::NEG_INFINITY;
    }
    if len.is_finite() && s.abs() * len < 1e-12 {
        return h + s * (a - x0) + len.ln();
    }
    if s > 0.0 {
        if b.is_infinite() {
            return f64::INFINITY;
        }
        h + s * (b - x0) + (-(-s * len).exp_m1()).ln() - s.ln()
    } else if s < 0.0 {
        if a.is_infinite() {
            return f64::INFINITY;
        }
        h + s * (a - x0) + (-(s * len).exp_m1()).ln() - (-s).ln()
    } else {
        f64::INFINITY
    }
}

/// One draw from `target` starting from fresh hull abscissae.
pub fn ars_sample<T, R>(target: &T, init_abscissae: [f64; 3], rng: &mut R) -> Result<f64>
where
    T: LogConcave + ?Sized,
    R: Rng + ?Sized,
{
    AdaptiveRejectionSampler::new(target, &init_abscissae)?.sample(rng)
}
