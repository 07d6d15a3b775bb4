use ndarray::Array2;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gibbs::chain_rng;
use crate::inference::FeatureTruth;
use crate::model::{CoefMatrix, Dataset};

/// Bayes-rule coefficients `(intercept, x1, x2)` of the two-class generator,
/// in standardized feature units.
pub const TWO_CLASS_TRUE_DELTA: [f64; 3] = [0.0, 2.60, -1.22];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorVariant {
    /// Two classes; `x1` carries the signal, `x2` is correlated with it.
    TwoClass,
    /// Three classes; `x1`, `x2` and a correlated block `x3..x10`.
    ThreeClass,
}

impl std::str::FromStr for GeneratorVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two_class" => Ok(Self::TwoClass),
            "three_class" => Ok(Self::ThreeClass),
            other => Err(Error::InvalidArgument(format!("unknown generator {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub variant: GeneratorVariant,
    pub n_train: usize,
    pub n_test: usize,
    pub p: usize,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn validate(&self) -> Result<()> {
        let min_p = match self.variant {
            GeneratorVariant::TwoClass => 2,
            GeneratorVariant::ThreeClass => 10,
        };
        if self.p < min_p {
            return Err(Error::InvalidArgument(format!(
                "{:?} needs p >= {min_p}, got {}",
                self.variant, self.p
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruthGroup {
    X1Signal,
    X2CorrelatedSignal,
    CorrGroup,
    Noise,
}

impl TruthGroup {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::X1Signal => "x1_signal",
            Self::X2CorrelatedSignal => "x2_correlated_signal",
            Self::CorrGroup => "corr_group",
            Self::Noise => "noise",
        }
    }
}

impl std::str::FromStr for TruthGroup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x1_signal" => Ok(Self::X1Signal),
            "x2_correlated_signal" => Ok(Self::X2CorrelatedSignal),
            "corr_group" => Ok(Self::CorrGroup),
            "noise" => Ok(Self::Noise),
            other => Err(Error::InvalidArgument(format!("unknown truth group {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruthLabeling {
    /// Group of feature `j` at position `j − 1`.
    pub groups: Vec<TruthGroup>,
    pub true_delta: Option<CoefMatrix>,
}

impl TruthLabeling {
    /// Selection-metric truth: `x1` and `x2` are useful singletons, the
    /// correlated block counts as one useful unit.
    pub fn feature_truth(&self) -> Vec<FeatureTruth> {
        self.groups
            .iter()
            .map(|g| match g {
                TruthGroup::X1Signal => FeatureTruth::Useful(0),
                TruthGroup::X2CorrelatedSignal => FeatureTruth::Useful(1),
                TruthGroup::CorrGroup => FeatureTruth::Useful(2),
                TruthGroup::Noise => FeatureTruth::Noise,
            })
            .collect()
    }

    pub fn count(&self, group: TruthGroup) -> usize {
        self.groups.iter().filter(|g| **g == group).count()
    }
}

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Draws `n_train + n_test` cases with `case(rng, y, row)` and splits them
/// in draw order.
fn draw_split<R, F>(
    spec: &GeneratorSpec,
    n_classes: usize,
    rng: &mut R,
    mut case: F,
) -> Result<(Dataset, Dataset)>
where
    R: Rng + ?Sized,
    F: FnMut(&mut R, usize, &mut [f64]),
{
    let mut part = |n: usize, rng: &mut R| -> Result<Dataset> {
        let mut x = Array2::zeros((n, spec.p));
        let mut y = Vec::with_capacity(n);
        for mut row in x.rows_mut() {
            let label = rng.random_range(1..=n_classes);
            case(rng, label, row.as_slice_mut().expect("standard layout"));
            y.push(label);
        }
        Dataset::new(x, y, n_classes)
    };
    let train = part(spec.n_train, rng)?;
    let test = part(spec.n_test, rng)?;
    Ok((train, test))
}

/// Two classes with `x1 | y = μ_y + z1 + ε1` (`μ = 0, 2`),
/// `x2 = 2 z1 + z2 + ε2` and pure noise beyond.
pub fn gen_two_class<R: Rng + ?Sized>(
    spec: &GeneratorSpec,
    rng: &mut R,
) -> Result<(Dataset, Dataset, TruthLabeling)> {
    spec.validate()?;
    let (train, test) = draw_split(spec, 2, rng, |rng, y, row| {
        let mu = if y == 2 { 2.0 } else { 0.0 };
        let z1 = normal(rng);
        let z2 = normal(rng);
        row[0] = mu + z1 + normal(rng);
        row[1] = 2.0 * z1 + z2 + normal(rng);
        for v in &mut row[2..] {
            *v = normal(rng);
        }
    })?;
    let mut groups = vec![TruthGroup::Noise; spec.p];
    groups[0] = TruthGroup::X1Signal;
    groups[1] = TruthGroup::X2CorrelatedSignal;
    let mut delta = CoefMatrix::zeros(spec.p, 1);
    for (j, v) in TWO_CLASS_TRUE_DELTA.iter().enumerate() {
        delta.row_mut(j)[0] = *v;
    }
    Ok((
        train,
        test,
        TruthLabeling {
            groups,
            true_delta: Some(delta),
        },
    ))
}

/// Class means of the first ten features in the three-class generator.
const THREE_CLASS_MU: [[f64; 10]; 3] = [
    [0.0; 10],
    [2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 2.0, 2.0, 2.0, 2.0, 2.0, 2.0, 2.0, 2.0],
];

/// Three classes with `x1 = μ + z1 + ε/2`, `x2 = μ + 2 z1 + z2 + ε/2`,
/// `x3..x10 = μ + z3 + ε/2` sharing `z3`, and pure noise beyond.
pub fn gen_three_class<R: Rng + ?Sized>(
    spec: &GeneratorSpec,
    rng: &mut R,
) -> Result<(Dataset, Dataset, TruthLabeling)> {
    spec.validate()?;
    let (train, test) = draw_split(spec, 3, rng, |rng, y, row| {
        let mu = &THREE_CLASS_MU[y - 1];
        let z1 = normal(rng);
        let z2 = normal(rng);
        let z3 = normal(rng);
        row[0] = mu[0] + z1 + 0.5 * normal(rng);
        row[1] = mu[1] + 2.0 * z1 + z2 + 0.5 * normal(rng);
        for j in 2..10 {
            row[j] = mu[j] + z3 + 0.5 * normal(rng);
        }
        for v in &mut row[10..] {
            *v = normal(rng);
        }
    })?;
    let mut groups = vec![TruthGroup::Noise; spec.p];
    groups[0] = TruthGroup::X1Signal;
    groups[1] = TruthGroup::X2CorrelatedSignal;
    for g in &mut groups[2..10] {
        *g = TruthGroup::CorrGroup;
    }
    Ok((
        train,
        test,
        TruthLabeling {
            groups,
            true_delta: None,
        },
    ))
}

/// Runs the generator named by `spec` on the chain RNG seeded with `spec.seed`.
pub fn generate(spec: &GeneratorSpec) -> Result<(Dataset, Dataset, TruthLabeling)> {
    let mut rng = chain_rng(spec.seed);
    match spec.variant {
        GeneratorVariant::TwoClass => gen_two_class(spec, &mut rng),
        GeneratorVariant::ThreeClass => gen_three_class(spec, &mut rng),
    }
}
