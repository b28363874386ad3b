//! CSV samples and JSON Gaussian summaries.

use std::path::{Path, PathBuf};

use gaussdiv::{GaussianSummary64, Matrix, Sample64, SymMatrix64};
use serde::{Deserialize, Serialize};

use crate::args::DataArgs;
use crate::error::{CliError, Result};

#[derive(Debug, Clone)]
pub struct DatasetCsv {
    pub path: PathBuf,
    pub has_header: bool,
    pub class_column: Option<usize>,
    pub delimiter: u8,
}

/// One sample per class label in order of first appearance; a single
/// unlabeled sample without a class column.
pub fn load_csv(cfg: &DatasetCsv) -> Result<Vec<(Option<String>, Sample64)>> {
    let path = &cfg.path;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(cfg.has_header)
        .delimiter(cfg.delimiter)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let mut groups: Vec<(Option<String>, Vec<f64>, usize)> = Vec::new();
    let mut arity = None;
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let row = record.position().map_or(0, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        let expected = *arity.get_or_insert(record.len());
        if record.len() != expected {
            return Err(CliError::InconsistentArity {
                path: path.clone(),
                row,
                expected,
                found: record.len(),
            });
        }
        if let Some(c) = cfg.class_column {
            if c >= record.len() {
                return Err(CliError::Usage(format!(
                    "class column {c} out of range for {} columns in {}",
                    record.len(),
                    path.display()
                )));
            }
        }
        let label = cfg.class_column.map(|c| record[c].to_string());
        let pos = match groups.iter().position(|g| g.0 == label) {
            Some(p) => p,
            None => {
                groups.push((label, Vec::new(), 0));
                groups.len() - 1
            }
        };
        let group = &mut groups[pos];
        for (j, cell) in record.iter().enumerate() {
            if Some(j) == cfg.class_column {
                continue;
            }
            let v: f64 = cell
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| CliError::Parse {
                    path: path.clone(),
                    row,
                    column: j + 1,
                    value: cell.to_string(),
                })?;
            group.1.push(v);
        }
        group.2 += 1;
    }
    if groups.is_empty() {
        return Err(CliError::Csv {
            path: path.clone(),
            message: "no data rows".into(),
        });
    }
    let d = arity.unwrap_or(0) - usize::from(cfg.class_column.is_some());
    groups
        .into_iter()
        .map(|(label, data, n)| {
            let m = Matrix::from_row_major(n, d, data)?;
            Ok((label, Sample64::new(m)?))
        })
        .collect()
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    match e.kind() {
        csv::ErrorKind::Io(_) => CliError::Read {
            path: path.to_path_buf(),
            source: std::io::Error::other(e.to_string()),
        },
        _ => CliError::Csv {
            path: path.to_path_buf(),
            message: e.to_string(),
        },
    }
}

/// `{"mean": [...], "cov": [[...], ...]}`.
#[derive(Debug, Serialize, Deserialize)]
pub struct SummaryJson {
    pub mean: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
}

impl From<&GaussianSummary64> for SummaryJson {
    fn from(g: &GaussianSummary64) -> Self {
        Self {
            mean: g.mean().to_vec(),
            cov: g.cov().matrix().to_rows(),
        }
    }
}

pub fn load_summary(path: &Path) -> Result<GaussianSummary64> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let raw: SummaryJson = serde_json::from_str(&text).map_err(|e| CliError::Summary {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let cov = SymMatrix64::from_rows(&raw.cov)?;
    Ok(GaussianSummary64::new(raw.mean, cov)?)
}

/// A resolved input: raw observations or moments only.
#[derive(Debug, Clone)]
pub enum Input {
    Sample(Sample64),
    Summary(GaussianSummary64),
}

impl Input {
    pub fn summary(&self) -> Result<GaussianSummary64> {
        match self {
            Input::Sample(s) => Ok(gaussdiv::empirical::sample_moments(s)?),
            Input::Summary(g) => Ok(g.clone()),
        }
    }

    pub fn into_sample(self, which: &str) -> Result<Sample64> {
        match self {
            Input::Sample(s) => Ok(s),
            Input::Summary(_) => Err(CliError::Usage(format!(
                "{which} input is a Gaussian summary; resampling commands need CSV samples"
            ))),
        }
    }
}

fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

fn pick(groups: Vec<(Option<String>, Sample64)>, label: Option<&str>, path: &Path) -> Result<Sample64> {
    match label {
        Some(l) => {
            let known: Vec<String> = groups.iter().filter_map(|g| g.0.clone()).collect();
            groups
                .into_iter()
                .find(|g| g.0.as_deref() == Some(l))
                .map(|g| g.1)
                .ok_or_else(|| {
                    CliError::Usage(format!(
                        "class `{l}` not found in {} (labels: {})",
                        path.display(),
                        known.join(", ")
                    ))
                })
        }
        None if groups.len() == 1 => Ok(groups.into_iter().next().expect("one group").1),
        None => Err(CliError::Usage(format!(
            "{} holds {} classes; choose one with --x-class/--y-class",
            path.display(),
            groups.len()
        ))),
    }
}

/// The two inputs described by the data flags.
pub fn resolve_inputs(args: &DataArgs) -> Result<(Input, Input)> {
    if !args.delimiter.is_ascii() {
        return Err(CliError::Usage("delimiter must be an ASCII character".into()));
    }
    let csv_cfg = |path: &Path| DatasetCsv {
        path: path.to_path_buf(),
        has_header: args.header,
        class_column: args.class_column,
        delimiter: args.delimiter as u8,
    };
    let y_path = args.y.as_deref().unwrap_or(&args.x);
    if args.y.is_none() && args.y_class.is_none() {
        return Err(CliError::Usage(
            "give --y, or --y-class to take both samples from --x".into(),
        ));
    }
    let load = |path: &Path, label: Option<&str>| -> Result<Input> {
        if is_json(path) {
            Ok(Input::Summary(load_summary(path)?))
        } else {
            Ok(Input::Sample(pick(load_csv(&csv_cfg(path))?, label, path)?))
        }
    };
    Ok((
        load(&args.x, args.x_class.as_deref())?,
        load(y_path, args.y_class.as_deref())?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn file(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    fn cfg(path: &Path, header: bool, class: Option<usize>) -> DatasetCsv {
        DatasetCsv {
            path: path.to_path_buf(),
            has_header: header,
            class_column: class,
            delimiter: b',',
        }
    }

    #[test]
    fn headerless_single_class() {
        let f = file("1,2\n3,4\n5,6\n");
        let out = load_csv(&cfg(f.path(), false, None)).unwrap();
        assert_eq!(out.len(), 1);
        let (label, s) = &out[0];
        assert!(label.is_none());
        assert_eq!((s.n(), s.dim()), (3, 2));
        assert_eq!(s.row(2), &[5.0, 6.0]);
    }

    #[test]
    fn three_labels_three_samples_in_order() {
        let f = file("c,x,y\n2,0,1\n1,1,1\n3,2,2\n1,0,0\n2,5,1\n3,4,4\n2,1,0\n1,2,2\n3,0,9\n");
        let out = load_csv(&cfg(f.path(), true, Some(0))).unwrap();
        let labels: Vec<_> = out.iter().map(|(l, _)| l.clone().unwrap()).collect();
        assert_eq!(labels, ["2", "1", "3"]);
        assert_eq!(out[0].1.n(), 3);
        assert_eq!(out[0].1.row(1), &[5.0, 1.0]);
    }

    #[test]
    fn class_column_anywhere_and_other_delimiters() {
        let f = file("0.5;a;1\n1.5;b;2\n2.5;a;3\n3.5;b;4\n");
        let mut c = cfg(f.path(), false, Some(1));
        c.delimiter = b';';
        let out = load_csv(&c).unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!(out[1].1.row(0), &[1.5, 2.0]);
    }

    #[test]
    fn bad_cell_is_located() {
        let f = file("1,2\n3,NaN\n");
        match load_csv(&cfg(f.path(), false, None)) {
            Err(CliError::Parse { row, column, .. }) => assert_eq!((row, column), (2, 2)),
            other => panic!("unexpected {other:?}"),
        }
    }
}
