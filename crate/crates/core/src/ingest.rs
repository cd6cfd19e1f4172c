//! Delimited-file input and JSON persistence.
//!
//! Covariate positions in files and in all user-facing output are 1-based.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::Dataset;
use crate::select::SelectionTrace;
use crate::sim::MetricsReport;

/// A column given by header name or by 1-based position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnRef {
    Name(String),
    Position(usize),
}

impl std::str::FromStr for ColumnRef {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.parse::<usize>() {
            Ok(0) => Err(Error::Config("column positions are 1-based".into())),
            Ok(p) => Ok(ColumnRef::Position(p)),
            Err(_) if s.is_empty() => Err(Error::Config("empty column reference".into())),
            Err(_) => Ok(ColumnRef::Name(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ResponseSource {
    Column(ColumnRef),
    /// A one-column file with the same delimiter and header convention.
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableSource {
    pub path: PathBuf,
    pub delimiter: u8,
    pub header: bool,
    /// Rows of the file are variables and columns are observations.
    pub transpose: bool,
    pub response: Option<ResponseSource>,
}

impl TableSource {
    /// Comma-separated with a header, or tab-separated for `.tsv` and `.txt`.
    pub fn new(path: impl Into<PathBuf>) -> Self {
        let path = path.into();
        let tab = matches!(
            path.extension().and_then(|e| e.to_str()),
            Some("tsv") | Some("txt")
        );
        Self {
            path,
            delimiter: if tab { b'\t' } else { b',' },
            header: true,
            transpose: false,
            response: None,
        }
    }
}

/// A parsed numeric table: `rows × cols` with optional column names.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub values: DMatrix<f64>,
    pub names: Option<Vec<String>>,
}

#[derive(Debug, Clone)]
pub struct Loaded {
    pub data: Dataset,
    /// Integer class labels when every response value is a whole number.
    pub labels: Option<Vec<i64>>,
    /// 1-based positions of covariates that are constant over the observations.
    pub constant_columns: Vec<usize>,
}

fn parse_cell(text: &str, line: u64, column: usize) -> Result<f64> {
    let t = text.trim();
    let v: f64 = t.parse().map_err(|_| Error::Parse {
        line,
        column,
        message: format!("'{t}' is not a number"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            line,
            column,
            message: format!("non-finite value '{t}'"),
        });
    }
    Ok(v)
}

/// Reads a rectangular numeric table.
pub fn read_table(path: &Path, delimiter: u8, header: bool) -> Result<Table> {
    let file = File::open(path)
        .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(false)
        .flexible(true)
        .from_reader(BufReader::new(file));
    let mut names = None;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() == 1 && rec[0].trim().is_empty() {
            continue;
        }
        match width {
            None => width = Some(rec.len()),
            Some(w) if w != rec.len() => {
                return Err(Error::Parse {
                    line,
                    column: rec.len().min(w) + 1,
                    message: format!("expected {w} fields, found {}", rec.len()),
                })
            }
            _ => {}
        }
        if header && names.is_none() {
            names = Some(rec.iter().map(|s| s.trim().to_string()).collect::<Vec<_>>());
            continue;
        }
        let row = rec
            .iter()
            .enumerate()
            .map(|(c, s)| parse_cell(s, line, c + 1))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    let cols = width.unwrap_or(0);
    if rows.is_empty() || cols == 0 {
        return Err(Error::InvalidData(format!("{} holds no data rows", path.display())));
    }
    let values = DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]);
    Ok(Table { values, names })
}

fn resolve(col: &ColumnRef, names: Option<&[String]>, width: usize) -> Result<usize> {
    let j = match col {
        ColumnRef::Position(p) => p - 1,
        ColumnRef::Name(n) => names
            .and_then(|ns| ns.iter().position(|x| x == n))
            .ok_or_else(|| Error::Config(format!("no column named '{n}'")))?,
    };
    if j >= width {
        return Err(Error::Config(format!(
            "column {} out of range; the table has {width} columns",
            j + 1
        )));
    }
    Ok(j)
}

/// Loads the table as observations × variables, applying `transpose`.
/// Column names are kept only when the file is not transposed.
pub fn load_matrix(src: &TableSource) -> Result<Table> {
    let t = read_table(&src.path, src.delimiter, src.header)?;
    if src.transpose {
        Ok(Table {
            values: t.values.transpose(),
            names: None,
        })
    } else {
        Ok(t)
    }
}

/// Loads a dataset. The response is one of the table's columns or a separate file.
pub fn load(src: &TableSource) -> Result<Loaded> {
    let table = load_matrix(src)?;
    let (n, width) = table.values.shape();
    let (y, keep): (DVector<f64>, Vec<usize>) = match &src.response {
        None => return Err(Error::Config("no response column or file given".into())),
        Some(ResponseSource::Column(c)) => {
            let j = resolve(c, table.names.as_deref(), width)?;
            (
                table.values.column(j).into_owned(),
                (0..width).filter(|&k| k != j).collect(),
            )
        }
        Some(ResponseSource::File(p)) => {
            let r = read_table(p, src.delimiter, src.header)?;
            let v = if r.values.ncols() == 1 {
                r.values.column(0).into_owned()
            } else if r.values.nrows() == 1 {
                r.values.row(0).transpose()
            } else {
                return Err(Error::InvalidData(format!(
                    "response file {} must hold a single row or column",
                    p.display()
                )));
            };
            (v, (0..width).collect())
        }
    };
    if y.len() != n {
        return Err(Error::InvalidData(format!(
            "response has {} values but the table has {n} observations",
            y.len()
        )));
    }
    if keep.is_empty() {
        return Err(Error::InvalidData("no covariate columns".into()));
    }
    let x = table.values.select_columns(&keep);
    let constant_columns: Vec<usize> = (0..x.ncols())
        .filter(|&j| x.column(j).iter().all(|v| *v == x[(0, j)]))
        .map(|j| j + 1)
        .collect();
    let labels = y
        .iter()
        .all(|v| v.fract() == 0.0 && v.abs() < 1e15)
        .then(|| y.iter().map(|v| *v as i64).collect());
    let mut data = Dataset::new(y, x)?;
    if let Some(names) = &table.names {
        data = data.with_names(keep.iter().map(|&k| names[k].clone()).collect())?;
    }
    Ok(Loaded {
        data,
        labels,
        constant_columns,
    })
}

/// Writes `value` as pretty-printed JSON. Floats use the shortest
/// representation that parses back to the same double.
pub fn save_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}

pub fn save_trace(trace: &SelectionTrace, path: &Path) -> Result<()> {
    save_json(trace, path)
}

pub fn load_trace(path: &Path) -> Result<SelectionTrace> {
    load_json(path)
}

pub fn save_report(report: &MetricsReport, path: &Path) -> Result<()> {
    save_json(report, path)
}

pub fn load_report(path: &Path) -> Result<MetricsReport> {
    load_json(path)
}
