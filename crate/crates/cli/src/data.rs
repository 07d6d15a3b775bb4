//! Dataset and truth CSV files: header `y,x1,...,xp`, integer labels in
//! `1..=C`, one case per line.

use std::path::Path;

use hyperlasso::simgen::{TruthGroup, TruthLabeling};
use hyperlasso::Dataset;
use ndarray::Array2;

use crate::error::{invalid, io_error, CliError, CliResult};

/// A dataset with its feature column names.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedDataset {
    pub data: Dataset,
    pub names: Vec<String>,
}

impl NamedDataset {
    /// Keeps the named columns, in the given order.
    pub fn select(&self, names: &[String]) -> CliResult<NamedDataset> {
        let idx = names
            .iter()
            .map(|n| {
                self.names
                    .iter()
                    .position(|m| m == n)
                    .map(|i| i + 1)
                    .ok_or_else(|| CliError::Validation(format!("no feature column named {n:?}")))
            })
            .collect::<CliResult<Vec<_>>>()?;
        Ok(NamedDataset {
            data: self.data.select_features(&idx)?,
            names: names.to_vec(),
        })
    }
}

pub fn default_names(p: usize) -> Vec<String> {
    (1..=p).map(|j| format!("x{j}")).collect()
}

fn reader(path: &Path) -> CliResult<csv::Reader<std::fs::File>> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| io_error(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    match e.kind() {
        csv::ErrorKind::Io(_) => io_error(path, e),
        _ => invalid(path, e),
    }
}

pub(crate) fn line_of(record: &csv::StringRecord) -> u64 {
    record.position().map_or(0, |p| p.line())
}

/// Reads a labeled dataset. With `n_classes` unset the labels must cover
/// exactly `1..=C` for some `C >= 2`; otherwise they must lie in
/// `1..=n_classes`.
pub fn read_dataset(path: &Path, n_classes: Option<usize>) -> CliResult<NamedDataset> {
    let mut rdr = reader(path)?;
    let header = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    if header.get(0).map(str::trim) != Some("y") {
        return Err(invalid(path, "line 1: first column must be named y"));
    }
    let names: Vec<String> = header.iter().skip(1).map(|s| s.trim().to_string()).collect();
    let p = names.len();
    let mut values = Vec::new();
    let mut labels = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = line_of(&record);
        let label: usize = record[0]
            .trim()
            .parse()
            .ok()
            .filter(|&y| y >= 1)
            .ok_or_else(|| {
                invalid(path, format!("line {line}: label {:?} is not an integer >= 1", &record[0]))
            })?;
        labels.push(label);
        for field in record.iter().skip(1) {
            let v: f64 = field.trim().parse().ok().filter(|v: &f64| v.is_finite()).ok_or_else(|| {
                invalid(path, format!("line {line}: {field:?} is not a finite number"))
            })?;
            values.push(v);
        }
    }
    let max = labels.iter().copied().max().unwrap_or(0);
    let c = match n_classes {
        Some(c) => {
            if max > c {
                return Err(invalid(path, format!("label {max} exceeds the {c} fitted classes")));
            }
            c
        }
        None => {
            let mut seen = vec![false; max];
            for &y in &labels {
                seen[y - 1] = true;
            }
            if let Some(k) = seen.iter().position(|s| !s) {
                return Err(invalid(
                    path,
                    format!("class labels must cover 1..{max}; class {} is missing", k + 1),
                ));
            }
            if max < 2 {
                return Err(invalid(path, "need at least two classes"));
            }
            max
        }
    };
    let x = Array2::from_shape_vec((labels.len(), p), values)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    Ok(NamedDataset {
        data: Dataset::new(x, labels, c).map_err(|e| invalid(path, e))?,
        names,
    })
}

pub(crate) fn writer(path: &Path) -> CliResult<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).map_err(|e| io_error(path, e))
}

pub(crate) fn write_row<W: std::io::Write>(
    w: &mut csv::Writer<W>,
    path: &Path,
    row: impl IntoIterator<Item = String>,
) -> CliResult<()> {
    w.write_record(row.into_iter().collect::<Vec<_>>())
        .map_err(|e| io_error(path, e))
}

pub fn write_dataset(path: &Path, data: &NamedDataset) -> CliResult<()> {
    let mut w = writer(path)?;
    write_row(&mut w, path, std::iter::once("y".to_string()).chain(data.names.iter().cloned()))?;
    for (y, row) in data.data.y().iter().zip(data.data.x().rows()) {
        write_row(&mut w, path, std::iter::once(y.to_string()).chain(row.iter().map(|v| v.to_string())))?;
    }
    w.flush().map_err(|e| io_error(path, e))
}

/// Truth sidecar: `feature_index,group`.
pub fn write_truth(path: &Path, truth: &TruthLabeling) -> CliResult<()> {
    let mut w = writer(path)?;
    write_row(&mut w, path, ["feature_index".into(), "group".into()])?;
    for (j, g) in truth.groups.iter().enumerate() {
        write_row(&mut w, path, [(j + 1).to_string(), g.as_str().to_string()])?;
    }
    w.flush().map_err(|e| io_error(path, e))
}

pub fn read_truth(path: &Path) -> CliResult<Vec<TruthGroup>> {
    let mut rdr = reader(path)?;
    let mut groups = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = line_of(&record);
        let j: usize = record[0]
            .trim()
            .parse()
            .map_err(|_| invalid(path, format!("line {line}: bad feature index")))?;
        if j != groups.len() + 1 {
            return Err(invalid(path, format!("line {line}: features must be listed in order")));
        }
        groups.push(
            record[1]
                .trim()
                .parse()
                .map_err(|e| invalid(path, format!("line {line}: {e}")))?,
        );
    }
    Ok(groups)
}
