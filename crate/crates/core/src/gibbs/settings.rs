use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::samplers::StepsizeRule;

/// MCMC settings: sweep counts and trajectory lengths for the initial and
/// sampling phases, stepsize adjustment, restriction threshold on σ_j,
/// recording stride and seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerSettings {
    pub n1: usize,
    pub ell1: usize,
    pub n2: usize,
    pub ell2: usize,
    pub adjust: f64,
    /// `inf` restricts HMC to the intercept; serialized as the string
    /// `"inf"` since JSON has no infinity.
    #[serde(with = "zeta_serde")]
    pub zeta: f64,
    pub thin: usize,
    pub seed: u64,
    #[serde(default)]
    pub stepsize_rule: StepsizeRule,
}

impl Default for SamplerSettings {
    fn default() -> Self {
        Self {
            n1: 5_000,
            ell1: 10,
            n2: 10_000,
            ell2: 50,
            adjust: 0.3,
            zeta: 0.05,
            thin: 1,
            seed: 0,
            stepsize_rule: StepsizeRule::InverseSqrt,
        }
    }
}

impl SamplerSettings {
    pub fn validate(&self) -> Result<()> {
        if self.ell1 == 0 || self.ell2 == 0 {
            return Err(Error::InvalidArgument("trajectory lengths must be >= 1".into()));
        }
        if self.thin == 0 {
            return Err(Error::InvalidArgument("thin must be >= 1".into()));
        }
        if !(self.adjust > 0.0 && self.adjust.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "stepsize adjustment must be positive, got {}",
                self.adjust
            )));
        }
        if !(self.zeta >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "zeta must be non-negative, got {}",
                self.zeta
            )));
        }
        Ok(())
    }

    /// Number of recorded draws, `floor(n2 / thin)`.
    pub fn n_draws(&self) -> usize {
        self.n2 / self.thin
    }
}

mod zeta_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(zeta: &f64, s: S) -> Result<S::Ok, S::Error> {
        if zeta.is_infinite() && *zeta > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*zeta)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Number(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Number(v) => Ok(v),
            Repr::Text(t) if t == "inf" => Ok(f64::INFINITY),
            Repr::Text(t) => Err(serde::de::Error::custom(format!("invalid zeta {t:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infinite_zeta_round_trips_through_json() {
        for zeta in [0.0, 0.05, f64::INFINITY] {
            let s = SamplerSettings { zeta, ..Default::default() };
            let json = serde_json::to_string(&s).unwrap();
            let back: SamplerSettings = serde_json::from_str(&json).unwrap();
            assert_eq!(back, s);
        }
    }

    #[test]
    fn validation() {
        assert!(SamplerSettings::default().validate().is_ok());
        assert!(SamplerSettings { thin: 0, ..Default::default() }.validate().is_err());
        assert!(SamplerSettings { ell2: 0, ..Default::default() }.validate().is_err());
        assert!(SamplerSettings { zeta: -1.0, ..Default::default() }.validate().is_err());
        assert_eq!(SamplerSettings { n2: 10, thin: 3, ..Default::default() }.n_draws(), 3);
    }
}
