//! On-disk chain directories: thinned draws as CSV, per-sweep diagnostics,
//! the training transform and a JSON manifest.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use hyperlasso::gibbs::{ChainRecord, ChainSink, ChainState, Phase, SamplerSettings, SweepDiagnostics};
use hyperlasso::inference::{FeatureRanking, PredictionMode};
use hyperlasso::simgen::StandardizeTransform;
use hyperlasso::{CoefMatrix, PriorSpec, VarianceVector};
use serde::{Deserialize, Serialize};

use crate::data::{line_of, write_row, writer};
use crate::error::{invalid, io_error, CliError, CliResult};

pub const MANIFEST: &str = "manifest.json";
pub const TRANSFORM: &str = "transform.json";
pub const DELTA: &str = "delta.csv";
pub const SIGMA2: &str = "sigma2.csv";
pub const LOG_W: &str = "logw.csv";
pub const DIAGNOSTICS: &str = "diagnostics.csv";
pub const RANKING: &str = "ranking.csv";

const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainManifest {
    pub format_version: u32,
    /// Training data path as given on the command line or in the config.
    pub train: Option<String>,
    pub feature_names: Vec<String>,
    pub n_cases: usize,
    pub n_classes: usize,
    pub prior: PriorSpec,
    pub settings: SamplerSettings,
    pub burnin_frac: f64,
    pub mode: PredictionMode,
    pub n_draws: usize,
    /// 1-based features with zero training variance.
    pub degenerate_features: Vec<usize>,
}

impl ChainManifest {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        train: Option<&Path>,
        feature_names: Vec<String>,
        n_cases: usize,
        n_classes: usize,
        prior: PriorSpec,
        settings: SamplerSettings,
        burnin_frac: f64,
        mode: PredictionMode,
        transform: &StandardizeTransform,
    ) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            train: train.map(|p| p.display().to_string()),
            feature_names,
            n_cases,
            n_classes,
            prior,
            settings,
            burnin_frac,
            mode,
            n_draws: settings.n_draws(),
            degenerate_features: transform.degenerate.clone(),
        }
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Runtime(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| io_error(path, e))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    serde_json::from_str(&text).map_err(|e| invalid(path, e))
}

fn delta_header(p: usize, k: usize) -> Vec<String> {
    let mut h = vec!["draw".to_string()];
    for j in 0..=p {
        for c in 1..=k {
            h.push(format!("delta_{j}_{c}"));
        }
    }
    h
}

fn sigma2_header(p: usize) -> Vec<String> {
    std::iter::once("draw".to_string())
        .chain((1..=p).map(|j| format!("sigma2_{j}")))
        .collect()
}

const DIAGNOSTICS_HEADER: [&str; 8] = [
    "sweep",
    "phase",
    "accepted",
    "delta_h",
    "divergent",
    "active_size",
    "u",
    "log_w",
];

fn phase_name(phase: Phase) -> &'static str {
    match phase {
        Phase::Initial => "initial",
        Phase::Sampling => "sampling",
    }
}

struct CsvFile {
    path: PathBuf,
    out: BufWriter<File>,
}

impl CsvFile {
    fn create(path: PathBuf, header: &[String]) -> CliResult<Self> {
        let file = File::create(&path).map_err(|e| io_error(&path, e))?;
        let mut f = Self {
            path,
            out: BufWriter::new(file),
        };
        f.line(header.iter().map(String::as_str))?;
        Ok(f)
    }

    fn line<'a>(&mut self, fields: impl IntoIterator<Item = &'a str>) -> CliResult<()> {
        let mut first = true;
        for field in fields {
            if !first {
                self.out.write_all(b",").map_err(|e| io_error(&self.path, e))?;
            }
            first = false;
            self.out
                .write_all(field.as_bytes())
                .map_err(|e| io_error(&self.path, e))?;
        }
        self.out.write_all(b"\n").map_err(|e| io_error(&self.path, e))
    }

    fn numbers(&mut self, lead: usize, values: &[f64]) -> CliResult<()> {
        let fields: Vec<String> = std::iter::once(lead.to_string())
            .chain(values.iter().map(|v| v.to_string()))
            .collect();
        self.line(fields.iter().map(String::as_str))
    }

    fn finish(mut self) -> CliResult<()> {
        self.out.flush().map_err(|e| io_error(&self.path, e))
    }
}

/// Streams a running chain into a directory.
pub struct ChainDirWriter {
    delta: CsvFile,
    sigma2: CsvFile,
    log_w: CsvFile,
    diagnostics: CsvFile,
}

fn sink_error(e: CliError) -> hyperlasso::Error {
    hyperlasso::Error::Sink(e.to_string())
}

impl ChainDirWriter {
    pub fn create(dir: &Path, p: usize, n_classes: usize) -> CliResult<Self> {
        std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
        let header: Vec<String> = DIAGNOSTICS_HEADER.iter().map(|s| s.to_string()).collect();
        Ok(Self {
            delta: CsvFile::create(dir.join(DELTA), &delta_header(p, n_classes - 1))?,
            sigma2: CsvFile::create(dir.join(SIGMA2), &sigma2_header(p))?,
            log_w: CsvFile::create(dir.join(LOG_W), &["draw".into(), "log_w".into()])?,
            diagnostics: CsvFile::create(dir.join(DIAGNOSTICS), &header)?,
        })
    }

    pub fn finish(self) -> CliResult<()> {
        self.delta.finish()?;
        self.sigma2.finish()?;
        self.log_w.finish()?;
        self.diagnostics.finish()
    }
}

impl ChainSink for ChainDirWriter {
    fn on_sweep(&mut self, d: &SweepDiagnostics) -> hyperlasso::Result<()> {
        let fields = [
            d.sweep.to_string(),
            phase_name(d.phase).to_string(),
            u8::from(d.accepted).to_string(),
            d.delta_h.to_string(),
            u8::from(d.divergent).to_string(),
            d.active_size.to_string(),
            d.u.to_string(),
            d.log_w.to_string(),
        ];
        self.diagnostics
            .line(fields.iter().map(String::as_str))
            .map_err(sink_error)
    }

    fn on_draw(&mut self, draw: usize, state: &ChainState) -> hyperlasso::Result<()> {
        self.delta.numbers(draw, state.delta.as_slice()).map_err(sink_error)?;
        self.sigma2.numbers(draw, state.sigma2.as_slice()).map_err(sink_error)?;
        self.log_w.numbers(draw, &[state.log_w]).map_err(sink_error)
    }
}

/// Numeric table with a leading integer index column.
fn read_table(path: &Path, expected_header: &[String]) -> CliResult<Vec<Vec<f64>>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| io_error(path, e))?;
    let header = rdr.headers().map_err(|e| invalid(path, e))?;
    if header.iter().ne(expected_header.iter().map(String::as_str)) {
        return Err(invalid(path, "line 1: unexpected header"));
    }
    let mut rows = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| invalid(path, e))?;
        let line = line_of(&record);
        if record[0].parse::<usize>().ok() != Some(i) {
            return Err(invalid(path, format!("line {line}: draws must be numbered from 0")));
        }
        let row = record
            .iter()
            .skip(1)
            .map(|f| f.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| invalid(path, format!("line {line}: {e}")))?;
        rows.push(row);
    }
    Ok(rows)
}

pub fn read_diagnostics(path: &Path) -> CliResult<Vec<SweepDiagnostics>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| io_error(path, e))?;
    let header = rdr.headers().map_err(|e| invalid(path, e))?;
    if header.iter().ne(DIAGNOSTICS_HEADER) {
        return Err(invalid(path, "line 1: unexpected header"));
    }
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| invalid(path, e))?;
        let line = line_of(&record);
        let bad = |what: &str| invalid(path, format!("line {line}: bad {what}"));
        let flag = |s: &str, what: &str| match s {
            "0" => Ok(false),
            "1" => Ok(true),
            _ => Err(bad(what)),
        };
        out.push(SweepDiagnostics {
            sweep: record[0].parse().map_err(|_| bad("sweep"))?,
            phase: match &record[1] {
                "initial" => Phase::Initial,
                "sampling" => Phase::Sampling,
                _ => return Err(bad("phase")),
            },
            accepted: flag(&record[2], "accepted")?,
            delta_h: record[3].parse().map_err(|_| bad("delta_h"))?,
            divergent: flag(&record[4], "divergent")?,
            active_size: record[5].parse().map_err(|_| bad("active_size"))?,
            u: record[6].parse().map_err(|_| bad("u"))?,
            log_w: record[7].parse().map_err(|_| bad("log_w"))?,
        });
    }
    Ok(out)
}

/// A chain directory read back into memory.
#[derive(Debug, Clone)]
pub struct LoadedChain {
    pub manifest: ChainManifest,
    pub transform: StandardizeTransform,
    pub record: ChainRecord,
}

pub fn load_chain(dir: &Path) -> CliResult<LoadedChain> {
    let manifest: ChainManifest = read_json(&dir.join(MANIFEST))?;
    let transform: StandardizeTransform = read_json(&dir.join(TRANSFORM))?;
    let p = manifest.n_features();
    let k = manifest.n_classes.saturating_sub(1);
    if transform.n_features() != p || k == 0 {
        return Err(invalid(dir, "manifest and transform disagree on the feature count"));
    }
    let delta_rows = read_table(&dir.join(DELTA), &delta_header(p, k))?;
    let sigma2_rows = read_table(&dir.join(SIGMA2), &sigma2_header(p))?;
    let log_w_rows = read_table(&dir.join(LOG_W), &["draw".into(), "log_w".into()])?;
    let mut record = ChainRecord {
        diagnostics: read_diagnostics(&dir.join(DIAGNOSTICS))?,
        ..Default::default()
    };
    for row in delta_rows {
        let a = ndarray::Array2::from_shape_vec((p + 1, k), row)
            .map_err(|e| invalid(&dir.join(DELTA), e))?;
        record.delta_draws.push(CoefMatrix::from_array(a)?);
    }
    for row in sigma2_rows {
        record.sigma2_draws.push(VarianceVector::new(row)?);
    }
    record.log_w_draws = log_w_rows.into_iter().map(|r| r[0]).collect();
    if record.delta_draws.len() != manifest.n_draws
        || record.sigma2_draws.len() != manifest.n_draws
        || record.log_w_draws.len() != manifest.n_draws
    {
        return Err(invalid(
            dir,
            format!("manifest promises {} draws", manifest.n_draws),
        ));
    }
    Ok(LoadedChain {
        manifest,
        transform,
        record,
    })
}

/// `feature_index,sdb,relative_sdb,rank`, best feature first.
pub fn write_ranking(path: &Path, ranking: &FeatureRanking) -> CliResult<()> {
    let mut w = writer(path)?;
    write_row(
        &mut w,
        path,
        ["feature_index", "sdb", "relative_sdb", "rank"].map(String::from),
    )?;
    for (r, &j) in ranking.order.iter().enumerate() {
        write_row(
            &mut w,
            path,
            [
                j.to_string(),
                ranking.sdb[j - 1].to_string(),
                ranking.relative_sdb[j - 1].to_string(),
                (r + 1).to_string(),
            ],
        )?;
    }
    w.flush().map_err(|e| io_error(path, e))
}

pub fn read_ranking(path: &Path) -> CliResult<FeatureRanking> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| io_error(path, e))?;
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| invalid(path, e))?;
        let line = line_of(&record);
        let parse = |i: usize| -> CliResult<f64> {
            record[i]
                .parse()
                .map_err(|_| invalid(path, format!("line {line}: bad number")))
        };
        rows.push((parse(0)? as usize, parse(1)?, parse(2)?));
    }
    let p = rows.len();
    let mut sdb = vec![0.0; p];
    let mut relative_sdb = vec![0.0; p];
    let mut order = Vec::with_capacity(p);
    for (j, s, r) in rows {
        if j == 0 || j > p {
            return Err(invalid(path, format!("feature index {j} out of range")));
        }
        sdb[j - 1] = s;
        relative_sdb[j - 1] = r;
        order.push(j);
    }
    Ok(FeatureRanking {
        sdb,
        relative_sdb,
        order,
    })
}
