//! One-step quadratic scoring of candidate covariates for the iteratively
//! reweighted procedures.

use nalgebra::{DMatrix, DVector};

use super::sweep::COLLINEAR_TOL;
use crate::error::{Error, Result};
use crate::parallel::Workers;

const CHUNK: usize = 256;

/// Picks the candidate `j` maximizing `(g'x_j)^2 / |P (s * x_j)|^2`, where `s * x_j`
/// is the row-scaled column and `P` projects off the span of the row-scaled
/// columns of `base`. Candidates whose projected norm is negligible are skipped.
/// Returns the winner and its score; ties go to the smallest index.
pub(crate) fn best_weighted_candidate(
    x: &DMatrix<f64>,
    live: &[bool],
    base: &DMatrix<f64>,
    g: &DVector<f64>,
    s: &DVector<f64>,
    workers: &Workers,
) -> Result<(usize, f64)> {
    let n = x.nrows();
    let k = base.ncols();
    let q_basis: Option<DMatrix<f64>> = if k == 0 {
        None
    } else {
        let scaled = DMatrix::from_fn(n, k, |i, j| base[(i, j)] * s[i]);
        Some(scaled.qr().q())
    };
    let q = x.ncols();
    let bests = workers.map(q.div_ceil(CHUNK), |c| {
        let mut best: Option<(f64, usize)> = None;
        let mut xt = DVector::<f64>::zeros(n);
        for j in c * CHUNK..((c + 1) * CHUNK).min(q) {
            if !live[j] {
                continue;
            }
            let col = x.column(j);
            for i in 0..n {
                xt[i] = col[i] * s[i];
            }
            let total = xt.norm_squared();
            if total == 0.0 {
                continue;
            }
            let proj = q_basis.as_ref().map_or(0.0, |qb| (qb.transpose() * &xt).norm_squared());
            let resid = total - proj;
            if resid < COLLINEAR_TOL * total {
                continue;
            }
            let num = g.dot(&col);
            let score = num * num / resid;
            if best.is_none_or(|(b, _)| score > b) {
                best = Some((score, j));
            }
        }
        best
    });
    let mut best: Option<(f64, usize)> = None;
    for (sc, j) in bests.into_iter().flatten() {
        if best.is_none_or(|(b, _)| sc > b) {
            best = Some((sc, j));
        }
    }
    best.map(|(sc, j)| (j, sc)).ok_or(Error::Exhausted)
}
