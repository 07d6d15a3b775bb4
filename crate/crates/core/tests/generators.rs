use hyperlasso::simgen::{generate, standardize, GeneratorSpec, GeneratorVariant, TWO_CLASS_TRUE_DELTA};
use hyperlasso::Dataset;

fn spec(variant: GeneratorVariant, n: usize, p: usize) -> GeneratorSpec {
    GeneratorSpec {
        variant,
        n_train: n,
        n_test: 1,
        p,
        seed: 7,
    }
}

fn class_column(data: &Dataset, class: usize, j: usize) -> Vec<f64> {
    data.y()
        .iter()
        .enumerate()
        .filter(|(_, &y)| y == class)
        .map(|(i, _)| data.x()[[i, j]])
        .collect()
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn cov(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / (a.len() - 1) as f64
}

fn corr(a: &[f64], b: &[f64]) -> f64 {
    cov(a, b) / (cov(a, a) * cov(b, b)).sqrt()
}

#[test]
fn two_class_moments() {
    let (train, _, _) = generate(&spec(GeneratorVariant::TwoClass, 40_000, 4)).unwrap();
    for class in 1..=2 {
        let x1 = class_column(&train, class, 0);
        let x2 = class_column(&train, class, 1);
        let noise = class_column(&train, class, 3);
        let shift = if class == 2 { 2.0 } else { 0.0 };
        assert!((mean(&x1) - shift).abs() < 0.05);
        assert!((cov(&x1, &x1) - 2.0).abs() < 0.05);
        assert!((cov(&x2, &x2) - 6.0).abs() < 0.15, "{}", cov(&x2, &x2));
        assert!((corr(&x1, &x2) - 2.0 / 12f64.sqrt()).abs() < 0.02);
        assert!((cov(&noise, &noise) - 1.0).abs() < 0.03);
    }
}

#[test]
fn three_class_moments() {
    let (train, _, _) = generate(&spec(GeneratorVariant::ThreeClass, 60_000, 12)).unwrap();
    let x5 = class_column(&train, 3, 4);
    assert!((mean(&x5) - 2.0).abs() < 0.03);
    let x1 = class_column(&train, 2, 0);
    assert!((mean(&x1) - 2.0).abs() < 0.03);
    let x3 = class_column(&train, 1, 2);
    let x4 = class_column(&train, 1, 3);
    assert!((corr(&x3, &x4) - 0.8).abs() < 0.02);
    let noise = class_column(&train, 1, 11);
    assert!((cov(&noise, &noise) - 1.0).abs() < 0.03);
}

/// Within-class covariance `[[2, 2], [2, 6]]` and mean shift `(2, 0)` give
/// raw Bayes-rule slopes `Σ⁻¹ (2, 0)`; standardizing multiplies each by the
/// marginal standard deviation.
#[test]
fn true_coefficients_follow_from_bayes_rule() {
    let (s11, s12, s22) = (2.0f64, 2.0f64, 6.0f64);
    let det = s11 * s22 - s12 * s12;
    let raw = [s22 * 2.0 / det, -s12 * 2.0 / det];
    let marginal_sd = [(s11 + 1.0).sqrt(), s22.sqrt()];
    for j in 0..2 {
        let standardized = raw[j] * marginal_sd[j];
        assert!((standardized - TWO_CLASS_TRUE_DELTA[j + 1]).abs() < 0.01, "{standardized}");
    }

    let (train, _, _) = generate(&spec(GeneratorVariant::TwoClass, 40_000, 2)).unwrap();
    let (std_train, _, t) = standardize(&train, &[]).unwrap();
    for (j, sd) in marginal_sd.iter().enumerate() {
        assert!((t.scales[j] - sd).abs() < 0.05);
        let col: Vec<f64> = std_train.x().column(j).to_vec();
        assert!(mean(&col).abs() < 1e-10);
    }
}

#[test]
fn generation_is_seeded() {
    let s = spec(GeneratorVariant::ThreeClass, 30, 15);
    let (a, ta, _) = generate(&s).unwrap();
    let (b, tb, _) = generate(&s).unwrap();
    assert_eq!(a.x(), b.x());
    assert_eq!(a.y(), b.y());
    assert_eq!(ta.x(), tb.x());
    let (c, _, _) = generate(&GeneratorSpec { seed: 8, ..s }).unwrap();
    assert_ne!(a.x(), c.x());
}
