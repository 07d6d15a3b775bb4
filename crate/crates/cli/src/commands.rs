use std::path::{Path, PathBuf};

use hyperlasso::gibbs::run_chain_with_sink;
use hyperlasso::inference::{
    coefficient_means, feature_ranking, predict, selection_metrics, FeatureRanking,
    PredictionMode, PredictionResult, SelectionMetrics,
};
use hyperlasso::simgen::{
    fit_standardized, generate, loocv_driver, sweep_point_config, with_pool, StandardizeTransform,
    TruthLabeling,
};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::chain_dir::{
    load_chain, write_json, write_ranking, ChainDirWriter, ChainManifest, MANIFEST, RANKING,
    TRANSFORM,
};
use crate::config::RunConfig;
use crate::data::{
    default_names, read_dataset, read_truth, write_dataset, write_row, write_truth, writer,
    NamedDataset,
};
use crate::error::{io_error, CliError, CliResult};

fn create_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))
}

fn required<'a>(value: Option<&'a PathBuf>, what: &str) -> CliResult<&'a PathBuf> {
    value.ok_or_else(|| CliError::Validation(format!("no {what} given")))
}

/// JSON has no infinity; an infinite AMLP (zero probability at a true
/// label) is written as the string "inf".
fn metric(v: f64) -> serde_json::Value {
    if v.is_finite() {
        json!(v)
    } else {
        json!(v.to_string())
    }
}

fn load_training(cfg: &RunConfig) -> CliResult<(PathBuf, NamedDataset)> {
    let path = required(cfg.train.as_ref(), "training data (train)")?.clone();
    let mut data = read_dataset(&path, None)?;
    if let Some(features) = &cfg.features {
        data = data.select(features)?;
    }
    Ok((path, data))
}

#[derive(Serialize)]
struct GenManifest<'a> {
    generator: &'a hyperlasso::simgen::GeneratorSpec,
    files: [&'static str; 3],
}

/// Writes `train.csv`, `test.csv`, `truth.csv` and `manifest.json`.
pub fn cmd_gen(cfg: &RunConfig, out: &Path) -> CliResult<TruthLabeling> {
    let spec = cfg.generator_spec()?;
    let (train, test, truth) = generate(&spec)?;
    create_dir(out)?;
    let names = default_names(spec.p);
    for (file, data) in [("train.csv", train), ("test.csv", test)] {
        write_dataset(
            &out.join(file),
            &NamedDataset {
                data,
                names: names.clone(),
            },
        )?;
    }
    write_truth(&out.join("truth.csv"), &truth)?;
    write_json(
        &out.join(MANIFEST),
        &GenManifest {
            generator: &spec,
            files: ["train.csv", "test.csv", "truth.csv"],
        },
    )?;
    Ok(truth)
}

/// Standardizes the training data, runs one chain streaming into `out`, and
/// writes the transform and manifest.
pub fn cmd_fit(cfg: &RunConfig, out: &Path) -> CliResult<ChainManifest> {
    let fit = cfg.fit_config()?;
    let (path, train) = load_training(cfg)?;
    let transform = StandardizeTransform::fit(&train.data);
    let std_train = transform.apply(&train.data)?;
    let manifest = ChainManifest::new(
        Some(&path),
        train.names.clone(),
        train.data.n_cases(),
        train.data.n_classes(),
        fit.prior,
        fit.settings,
        fit.burnin_frac,
        fit.mode,
        &transform,
    );
    let mut sink = ChainDirWriter::create(out, manifest.n_features(), manifest.n_classes)?;
    write_json(&out.join(TRANSFORM), &transform)?;
    run_chain_with_sink(&std_train, &fit.prior, &fit.settings, &mut sink)?;
    sink.finish()?;
    write_json(&out.join(MANIFEST), &manifest)?;
    Ok(manifest)
}

/// Reloads an existing chain directory without sampling, rewrites its
/// manifest and, when draws exist, its ranking.
pub fn cmd_resume_summarize(chain_dir: &Path) -> CliResult<ChainManifest> {
    let chain = load_chain(chain_dir)?;
    write_json(&chain_dir.join(MANIFEST), &chain.manifest)?;
    if chain.record.n_draws() > 0 {
        let delta_hat = coefficient_means(&chain.record, chain.manifest.burnin_frac)?;
        let ranking = feature_ranking(&delta_hat, chain.manifest.n_classes);
        write_ranking(&chain_dir.join(RANKING), &ranking)?;
    }
    Ok(chain.manifest)
}

pub fn write_selection(path: &Path, metrics: &[SelectionMetrics]) -> CliResult<()> {
    let mut w = writer(path)?;
    write_row(
        &mut w,
        path,
        ["threshold", "n_retained", "fpr", "sensitivity", "fdr"].map(String::from),
    )?;
    for m in metrics {
        write_row(
            &mut w,
            path,
            [
                m.threshold.to_string(),
                m.n_retained.to_string(),
                m.fpr.to_string(),
                m.sensitivity.to_string(),
                m.fdr.to_string(),
            ],
        )?;
    }
    w.flush().map_err(|e| io_error(path, e))
}

/// Ranks features by SDB of the posterior-mean coefficients; with a truth
/// file also scores the retained sets at each threshold.
pub fn cmd_rank(
    chain_dir: &Path,
    burnin_frac: f64,
    truth: Option<&Path>,
    thresholds: &[f64],
    out: &Path,
) -> CliResult<FeatureRanking> {
    let chain = load_chain(chain_dir)?;
    let delta_hat = coefficient_means(&chain.record, burnin_frac)?;
    let ranking = feature_ranking(&delta_hat, chain.manifest.n_classes);
    create_dir(out)?;
    write_ranking(&out.join(RANKING), &ranking)?;
    if let Some(truth_path) = truth {
        let groups = read_truth(truth_path)?;
        let labeling = TruthLabeling {
            groups,
            true_delta: None,
        };
        let metrics = selection_metrics(&ranking, &labeling.feature_truth(), thresholds)?;
        write_selection(&out.join("selection.csv"), &metrics)?;
    }
    Ok(ranking)
}

pub fn write_predictions(
    path: &Path,
    labels: &[usize],
    probs: &ndarray::Array2<f64>,
) -> CliResult<()> {
    let mut w = writer(path)?;
    let header = ["case", "y", "predicted"]
        .into_iter()
        .map(String::from)
        .chain((1..=probs.ncols()).map(|c| format!("p{c}")));
    write_row(&mut w, path, header)?;
    for (i, (y, row)) in labels.iter().zip(probs.rows()).enumerate() {
        let predicted = row
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |b, (c, &v)| if v > b.1 { (c, v) } else { b })
            .0
            + 1;
        let fields = [i.to_string(), y.to_string(), predicted.to_string()]
            .into_iter()
            .chain(row.iter().map(|v| v.to_string()));
        write_row(&mut w, path, fields)?;
    }
    w.flush().map_err(|e| io_error(path, e))
}

/// Predicts raw test data through the stored training transform and writes
/// `predictions.csv` and `metrics.json`.
pub fn cmd_predict(
    chain_dir: &Path,
    test_path: &Path,
    mode: PredictionMode,
    burnin_frac: f64,
    out: &Path,
) -> CliResult<PredictionResult> {
    let chain = load_chain(chain_dir)?;
    let test = read_dataset(test_path, Some(chain.manifest.n_classes))?
        .select(&chain.manifest.feature_names)
        .map_err(|e| CliError::Validation(format!("test data does not match the fit: {e}")))?;
    let x = chain.transform.apply_x(test.data.x())?;
    let probs = predict(&chain.record, burnin_frac, x.view(), mode)?;
    let result = PredictionResult::new(probs, test.data.y())?;
    create_dir(out)?;
    write_predictions(&out.join("predictions.csv"), test.data.y(), &result.probs)?;
    write_json(
        &out.join("metrics.json"),
        &json!({
            "amlp": metric(result.amlp),
            "error_rate": result.error_rate,
            "n_cases": test.data.n_cases(),
            "mode": mode,
            "burnin_frac": burnin_frac,
        }),
    )?;
    Ok(result)
}

/// One row of `paths.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathRow {
    pub log_w: f64,
    pub feature: usize,
    /// Class whose coefficient column (against class 1) this row holds.
    pub class: usize,
    pub coefficient_mean: f64,
    pub sdb: f64,
    pub amlp: Option<f64>,
}

/// Runs one chain per `log w` grid point under `out/chains/point_NNN` and
/// writes the long-format solution paths to `out/paths.csv`.
pub fn cmd_sweep(cfg: &RunConfig, out: &Path) -> CliResult<Vec<PathRow>> {
    if cfg.grid.is_empty() {
        return Err(CliError::Validation("empty log w grid".into()));
    }
    let base = cfg.fit_config()?;
    let (path, train) = load_training(cfg)?;
    let test = cfg
        .test
        .as_ref()
        .map(|t| read_dataset(t, Some(train.data.n_classes()))?.select(&train.names))
        .transpose()?;
    let transform = StandardizeTransform::fit(&train.data);
    let std_train = transform.apply(&train.data)?;
    create_dir(out)?;

    let points: Vec<CliResult<Vec<PathRow>>> = with_pool(cfg.jobs, || {
        cfg.grid
            .par_iter()
            .enumerate()
            .map(|(g, &log_w)| {
                let point = sweep_point_config(&base, log_w, g);
                let dir = out.join("chains").join(format!("point_{g:03}"));
                let manifest = ChainManifest::new(
                    Some(&path),
                    train.names.clone(),
                    train.data.n_cases(),
                    train.data.n_classes(),
                    point.prior,
                    point.settings,
                    point.burnin_frac,
                    point.mode,
                    &transform,
                );
                let mut sink =
                    ChainDirWriter::create(&dir, manifest.n_features(), manifest.n_classes)?;
                write_json(&dir.join(TRANSFORM), &transform)?;
                let summary = fit_standardized(&std_train, transform.clone(), &point, &mut sink)?;
                sink.finish()?;
                write_json(&dir.join(MANIFEST), &manifest)?;
                let amlp = match &test {
                    Some(t) => Some(summary.evaluate(&t.data, point.mode)?.amlp),
                    None => None,
                };
                let k = summary.delta_hat.n_cols();
                let mut rows = Vec::with_capacity(summary.delta_hat.n_features() * k);
                for j in 1..=summary.delta_hat.n_features() {
                    for (c, &v) in summary.delta_hat.row(j).iter().enumerate() {
                        rows.push(PathRow {
                            log_w,
                            feature: j,
                            class: c + 2,
                            coefficient_mean: v,
                            sdb: summary.ranking.sdb[j - 1],
                            amlp,
                        });
                    }
                }
                Ok(rows)
            })
            .collect()
    })?;
    let mut rows = Vec::new();
    for p in points {
        rows.extend(p?);
    }
    let file = out.join("paths.csv");
    let mut w = writer(&file)?;
    write_row(
        &mut w,
        &file,
        ["log_w", "feature", "class", "coefficient_mean", "sdb", "amlp"].map(String::from),
    )?;
    for r in &rows {
        write_row(
            &mut w,
            &file,
            [
                r.log_w.to_string(),
                r.feature.to_string(),
                r.class.to_string(),
                r.coefficient_mean.to_string(),
                r.sdb.to_string(),
                r.amlp.map_or_else(String::new, |a| a.to_string()),
            ],
        )?;
    }
    w.flush().map_err(|e| io_error(&file, e))?;
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoocvManifest {
    pub train: String,
    pub features: Vec<String>,
    pub p: usize,
    pub n_cases: usize,
    pub n_classes: usize,
    pub prior: hyperlasso::PriorSpec,
    pub settings: hyperlasso::SamplerSettings,
    pub burnin_frac: f64,
    pub mode: PredictionMode,
}

/// Leave-one-out predictions with per-fold seeds; writes
/// `loocv_predictions.csv`, `loocv_metrics.json` and `manifest.json`.
pub fn cmd_loocv(cfg: &RunConfig, out: &Path) -> CliResult<hyperlasso::simgen::LoocvOutcome> {
    let fit = cfg.fit_config()?;
    let (path, data) = load_training(cfg)?;
    let outcome = loocv_driver(&data.data, &fit, cfg.jobs)?;
    create_dir(out)?;
    for f in outcome.failed() {
        eprintln!(
            "warning: fold {} excluded: {}",
            f.case,
            f.failure.as_deref().unwrap_or_default()
        );
    }

    let file = out.join("loocv_predictions.csv");
    let mut w = writer(&file)?;
    let c = data.data.n_classes();
    let header = ["case", "y", "seed", "status"]
        .into_iter()
        .map(String::from)
        .chain((1..=c).map(|k| format!("p{k}")));
    write_row(&mut w, &file, header)?;
    for f in &outcome.folds {
        let status = if f.probs.is_some() { "ok" } else { "failed" };
        let probs: Vec<String> = match &f.probs {
            Some(p) => p.iter().map(|v| v.to_string()).collect(),
            None => vec![String::new(); c],
        };
        let fields = [f.case.to_string(), f.label.to_string(), f.seed.to_string(), status.into()]
            .into_iter()
            .chain(probs);
        write_row(&mut w, &file, fields)?;
    }
    w.flush().map_err(|e| io_error(&file, e))?;

    let failed: Vec<usize> = outcome.failed().map(|f| f.case).collect();
    write_json(
        &out.join("loocv_metrics.json"),
        &json!({
            "n_folds": outcome.folds.len(),
            "n_failed": failed.len(),
            "failed_cases": failed,
            "amlp": outcome.result.as_ref().map(|r| metric(r.amlp)),
            "error_rate": outcome.result.as_ref().map(|r| r.error_rate),
        }),
    )?;
    write_json(
        &out.join(MANIFEST),
        &LoocvManifest {
            train: path.display().to_string(),
            features: data.names.clone(),
            p: data.names.len(),
            n_cases: data.data.n_cases(),
            n_classes: c,
            prior: fit.prior,
            settings: fit.settings,
            burnin_frac: fit.burnin_frac,
            mode: fit.mode,
        },
    )?;
    Ok(outcome)
}
