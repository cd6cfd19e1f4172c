//! Forward-stepwise least squares by lazy modified Gram-Schmidt.
//!
//! Every live candidate column is kept orthogonal to the span of the active
//! columns, so the residual sum of squares after adding candidate `k` is
//! `ss0 - (r'z_k)^2 / |z_k|^2` with `z_k` the orthogonalized column.

use nalgebra::{DMatrix, DVector};

use super::Dataset;
use crate::error::{Error, Result};
use crate::parallel::Workers;

/// Fraction of a column's original squared norm below which it is treated as
/// lying in the span of the active set.
pub(crate) const COLLINEAR_TOL: f64 = 1e-10;

/// Candidates scored per parallel task.
const CHUNK: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Live,
    Active,
    Excluded,
}

/// The best candidate for the next step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepBest {
    pub index: usize,
    /// Residual sum of squares after adding `index`.
    pub ss01: f64,
}

#[derive(Debug, Clone)]
pub struct SweepState {
    residual: DVector<f64>,
    initial_ss: f64,
    cand: DMatrix<f64>,
    cand_norm2: Vec<f64>,
    orig_norm2: Vec<f64>,
    status: Vec<Status>,
    active: Vec<usize>,
    basis: Vec<DVector<f64>>,
    collinear: Vec<usize>,
}

impl SweepState {
    /// Starts from the empty model; `skip` lists columns that never enter.
    pub fn new(data: &Dataset, skip: &[usize]) -> Self {
        let cand = data.x().clone();
        let orig_norm2: Vec<f64> = cand.column_iter().map(|c| c.norm_squared()).collect();
        let mut status: Vec<Status> = (0..data.q())
            .map(|j| {
                if data.is_dropped(j) || orig_norm2[j] == 0.0 {
                    Status::Excluded
                } else {
                    Status::Live
                }
            })
            .collect();
        for &j in skip {
            if j < status.len() {
                status[j] = Status::Excluded;
            }
        }
        let residual = data.y().clone();
        let initial_ss = residual.norm_squared();
        Self {
            residual,
            initial_ss,
            cand_norm2: orig_norm2.clone(),
            orig_norm2,
            cand,
            status,
            active: Vec::new(),
            basis: Vec::new(),
            collinear: Vec::new(),
        }
    }

    /// Starts from the empty model and includes `columns` in order.
    pub fn with_active(data: &Dataset, columns: &[usize]) -> Result<Self> {
        let mut s = Self::new(data, &[]);
        for &j in columns {
            s.include(j)?;
        }
        Ok(s)
    }

    /// Current residual sum of squares.
    pub fn ss0(&self) -> f64 {
        self.residual.norm_squared()
    }

    pub fn initial_ss(&self) -> f64 {
        self.initial_ss
    }

    pub fn residual(&self) -> &DVector<f64> {
        &self.residual
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }

    /// Columns dropped because they fell into the span of the active set.
    pub fn collinear(&self) -> &[usize] {
        &self.collinear
    }

    pub fn is_live(&self, j: usize) -> bool {
        self.status[j] == Status::Live
    }

    pub fn live_count(&self) -> usize {
        self.status.iter().filter(|s| **s == Status::Live).count()
    }

    /// Orthonormal basis of the active span, in inclusion order.
    pub fn basis(&self) -> &[DVector<f64>] {
        &self.basis
    }

    /// Candidate column `j` orthogonalized against the active set.
    pub fn orthogonal_column(&self, j: usize) -> DVector<f64> {
        self.cand.column(j).into_owned()
    }

    /// Squared norm of the orthogonalized candidate `j`.
    pub fn orthogonal_norm2(&self, j: usize) -> f64 {
        self.cand_norm2[j]
    }

    /// Reduction in the residual sum of squares from adding live candidate `j`.
    pub fn reduction(&self, j: usize) -> f64 {
        let z = self.cand.column(j);
        let d = z.dot(&self.residual);
        d * d / self.cand_norm2[j]
    }

    /// Residual sum of squares after adding candidate `j`.
    pub fn ss_with(&self, j: usize) -> f64 {
        (self.ss0() - self.reduction(j)).max(0.0)
    }

    /// Finds the live candidate with the largest reduction; the smallest index
    /// wins ties. The answer does not depend on the number of workers.
    pub fn sweep_best(&self, workers: &Workers) -> Result<SweepBest> {
        let q = self.status.len();
        let chunks = q.div_ceil(CHUNK);
        let bests = workers.map(chunks, |c| {
            let mut best: Option<(f64, usize)> = None;
            for j in c * CHUNK..((c + 1) * CHUNK).min(q) {
                if self.status[j] != Status::Live {
                    continue;
                }
                let r = self.reduction(j);
                if best.is_none_or(|(b, _)| r > b) {
                    best = Some((r, j));
                }
            }
            best
        });
        let mut best: Option<(f64, usize)> = None;
        for (r, j) in bests.into_iter().flatten() {
            if best.is_none_or(|(b, _)| r > b) {
                best = Some((r, j));
            }
        }
        let (r, index) = best.ok_or(Error::Exhausted)?;
        Ok(SweepBest {
            index,
            ss01: (self.ss0() - r).max(0.0),
        })
    }

    /// Moves live candidate `j` into the active set and re-orthogonalizes the
    /// remaining candidates.
    pub fn include(&mut self, j: usize) -> Result<()> {
        self.include_with(j, &Workers::sequential())
    }

    pub fn include_with(&mut self, j: usize, workers: &Workers) -> Result<()> {
        if j >= self.status.len() {
            return Err(Error::InvalidData(format!("covariate index {j} out of range")));
        }
        if self.status[j] != Status::Live {
            return Err(Error::InvalidData(format!(
                "covariate {} is not an available candidate",
                j + 1
            )));
        }
        let norm = self.cand_norm2[j].sqrt();
        let u: DVector<f64> = self.cand.column(j) / norm;
        let coef = u.dot(&self.residual);
        self.residual.axpy(-coef, &u, 1.0);
        self.status[j] = Status::Active;
        self.active.push(j);

        // Project u out of every live candidate.
        let n = self.cand.nrows();
        let status = &self.status;
        workers.for_each_column(self.cand.as_mut_slice(), n, &mut self.cand_norm2, |k, col, nn| {
            if status[k] != Status::Live {
                return;
            }
            let d: f64 = col.iter().zip(u.iter()).map(|(c, v)| c * v).sum();
            for (c, v) in col.iter_mut().zip(u.iter()) {
                *c -= d * v;
            }
            *nn = col.iter().map(|c| c * c).sum();
        });
        for k in 0..self.status.len() {
            if self.status[k] == Status::Live && self.cand_norm2[k] < COLLINEAR_TOL * self.orig_norm2[k] {
                self.status[k] = Status::Excluded;
                self.collinear.push(k);
            }
        }
        self.basis.push(u);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> Dataset {
        Dataset::from_columns(
            vec![1.0, 2.0, 3.0, 5.0, 4.0],
            &[
                vec![1.0, 0.0, 1.0, 0.0, 1.0],
                vec![0.5, 1.5, 2.5, 4.0, 4.5],
                vec![-1.0, 2.0, 0.0, 1.0, 3.0],
            ],
        )
        .unwrap()
        .standardize()
        .unwrap()
    }

    #[test]
    fn residual_matches_norm_and_orthogonality() {
        let d = toy();
        let mut s = SweepState::new(&d, &[]);
        let b = s.sweep_best(&Workers::sequential()).unwrap();
        assert_eq!(b.index, 1);
        s.include(b.index).unwrap();
        assert!((s.ss0() - b.ss01).abs() < 1e-10);
        for k in 0..3 {
            if s.is_live(k) {
                let z = s.orthogonal_column(k);
                assert!(z.dot(&s.basis()[0]).abs() < 1e-12);
            }
        }
        let r = s.residual().clone();
        assert!(r.dot(&d.x().column(1)).abs() < 1e-10);
    }

    #[test]
    fn duplicated_column_is_dropped() {
        let d = Dataset::from_columns(
            vec![1.0, 2.0, 0.0, 4.0],
            &[vec![1.0, 2.0, 3.0, 4.0], vec![2.0, 4.0, 6.0, 8.0], vec![1.0, -1.0, 1.0, 0.0]],
        )
        .unwrap()
        .standardize()
        .unwrap();
        let mut s = SweepState::new(&d, &[]);
        // Equal reductions: the smaller index wins.
        let b = s.sweep_best(&Workers::sequential()).unwrap();
        assert_eq!(b.index, 0);
        s.include(0).unwrap();
        assert!(!s.is_live(1));
        assert_eq!(s.collinear(), &[1]);
        assert!(s.include(1).is_err());
    }

    #[test]
    fn exhausted_after_all_columns() {
        let d = toy();
        let mut s = SweepState::new(&d, &[2]);
        s.include(0).unwrap();
        s.include(1).unwrap();
        assert!(matches!(s.sweep_best(&Workers::sequential()), Err(Error::Exhausted)));
    }
}
