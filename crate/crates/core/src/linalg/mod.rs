//! Datasets and the numerical engine behind every selection procedure.

mod ols;
mod precondition;
mod score;
mod sweep;

pub use ols::{ols, weighted_lstsq, OlsFit};
pub use precondition::svd_precondition;
pub(crate) use score::best_weighted_candidate;
pub use sweep::{SweepBest, SweepState};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative squared-norm below which a column counts as zero.
pub(crate) const ZERO_COLUMN_TOL: f64 = 1e-24;

/// A response of length `n` with an `n × q` covariate matrix stored column-major.
///
/// Columns flagged in `dropped` (all-zero after standardization) stay in place so
/// that covariate indices never shift; the selection procedures skip them.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    y: DVector<f64>,
    x: DMatrix<f64>,
    column_norms: Vec<f64>,
    standardized: bool,
    dropped: Vec<bool>,
    names: Option<Vec<String>>,
}

fn norms(x: &DMatrix<f64>) -> Vec<f64> {
    x.column_iter().map(|c| c.norm()).collect()
}

impl Dataset {
    pub fn new(y: DVector<f64>, x: DMatrix<f64>) -> Result<Self> {
        let n = y.len();
        if n < 3 {
            return Err(Error::InvalidData(format!("need at least 3 observations, got {n}")));
        }
        if x.ncols() == 0 {
            return Err(Error::InvalidData("no covariates".into()));
        }
        if x.nrows() != n {
            return Err(Error::InvalidData(format!(
                "response has {n} entries but the covariate matrix has {} rows",
                x.nrows()
            )));
        }
        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidData(format!("response entry {} is not finite", i + 1)));
        }
        if let Some(k) = x.iter().position(|v| !v.is_finite()) {
            let (row, col) = (k % n, k / n);
            return Err(Error::InvalidData(format!(
                "covariate entry (row {}, column {}) is not finite",
                row + 1,
                col + 1
            )));
        }
        let column_norms = norms(&x);
        let q = x.ncols();
        Ok(Self {
            y,
            x,
            column_norms,
            standardized: false,
            dropped: vec![false; q],
            names: None,
        })
    }

    /// Builds a dataset from a response and a list of columns.
    pub fn from_columns(y: Vec<f64>, columns: &[Vec<f64>]) -> Result<Self> {
        let n = y.len();
        if columns.iter().any(|c| c.len() != n) {
            return Err(Error::InvalidData("columns must all have the response length".into()));
        }
        let x = DMatrix::from_fn(n, columns.len(), |i, j| columns[j][i]);
        Self::new(DVector::from_vec(y), x)
    }

    pub fn with_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.q() {
            return Err(Error::InvalidData(format!(
                "{} column names for {} covariates",
                names.len(),
                self.q()
            )));
        }
        self.names = Some(names);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn q(&self) -> usize {
        self.x.ncols()
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn column_norms(&self) -> &[f64] {
        &self.column_norms
    }

    pub fn is_standardized(&self) -> bool {
        self.standardized
    }

    pub fn names(&self) -> Option<&[String]> {
        self.names.as_deref()
    }

    pub fn is_dropped(&self, j: usize) -> bool {
        self.dropped[j]
    }

    pub fn dropped(&self) -> Vec<usize> {
        (0..self.q()).filter(|&j| self.dropped[j]).collect()
    }

    /// Number of covariates that take part in selection.
    pub fn usable_count(&self) -> usize {
        self.dropped.iter().filter(|d| !**d).count()
    }

    /// Scales every column to squared norm `n`. All-zero columns are flagged as
    /// dropped; a matrix with no nonzero column is an error.
    pub fn standardize(&self) -> Result<Dataset> {
        let n = self.n() as f64;
        let scale_ref = self.column_norms.iter().cloned().fold(0.0_f64, f64::max);
        let mut x = self.x.clone();
        let mut dropped = self.dropped.clone();
        for (j, mut col) in x.column_iter_mut().enumerate() {
            let norm = self.column_norms[j];
            if norm == 0.0 || norm * norm <= ZERO_COLUMN_TOL * scale_ref * scale_ref {
                dropped[j] = true;
                col.fill(0.0);
            } else {
                col *= n.sqrt() / norm;
            }
        }
        if dropped.iter().all(|d| *d) {
            return Err(Error::InvalidData("every covariate column is constant zero".into()));
        }
        Ok(Dataset {
            y: self.y.clone(),
            column_norms: self.column_norms.clone(),
            x,
            standardized: true,
            dropped,
            names: self.names.clone(),
        })
    }

    /// Standardizes unless already standardized.
    pub fn ensure_standardized(&self) -> Result<std::borrow::Cow<'_, Dataset>> {
        if self.standardized {
            Ok(std::borrow::Cow::Borrowed(self))
        } else {
            self.standardize().map(std::borrow::Cow::Owned)
        }
    }

    /// Same covariates with a different response.
    pub fn with_response(&self, y: DVector<f64>) -> Result<Dataset> {
        if y.len() != self.n() {
            return Err(Error::InvalidData("response length mismatch".into()));
        }
        let mut d = self.clone();
        d.y = y;
        Ok(d)
    }

    /// The `n × k` design holding the given columns in order.
    pub fn design(&self, columns: &[usize]) -> DMatrix<f64> {
        self.x.select_columns(columns)
    }

    /// Keeps the given rows, in order (rows may repeat).
    pub fn select_rows(&self, rows: &[usize]) -> Result<Dataset> {
        let y = DVector::from_iterator(rows.len(), rows.iter().map(|&i| self.y[i]));
        let x = self.x.select_rows(rows);
        let mut d = Dataset::new(y, x)?;
        d.names = self.names.clone();
        if self.standardized {
            d = d.standardize()?;
        }
        Ok(d)
    }
}
