//! Decorrelating preconditioner: with `X = U D V'`, map `(y, X)` to
//! `(F y, F X)` where `F = U D^{-1} U'`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::Dataset;
use crate::error::{Error, Result};

/// Eigenvalues of the Gram matrix below this fraction of the largest (times
/// the matrix dimension) count as zero.
fn rank_tolerance(dim: usize) -> f64 {
    (dim as f64 * f64::EPSILON).max(1e-20)
}

/// Applies the preconditioner. Requires full rank `min(n, q)`.
pub fn svd_precondition(data: &Dataset) -> Result<Dataset> {
    let x = data.x();
    let (n, q) = x.shape();
    let (xt, yt) = if q >= n {
        // F = (X X')^{-1/2}.
        let eig = SymmetricEigen::new(x * x.transpose());
        let lambda = check_rank(&eig.eigenvalues, n)?;
        let inv_sqrt = DVector::from_iterator(n, lambda.iter().map(|l| 1.0 / l.sqrt()));
        let f = &eig.eigenvectors
            * DMatrix::from_diagonal(&inv_sqrt)
            * eig.eigenvectors.transpose();
        (&f * x, &f * data.y())
    } else {
        // X'X = V D^2 V': F X = X V D^{-1} V' and F y = U D^{-1} U' y with U = X V D^{-1}.
        let eig = SymmetricEigen::new(x.transpose() * x);
        let lambda = check_rank(&eig.eigenvalues, q)?;
        let v = &eig.eigenvectors;
        let d_inv = DVector::from_iterator(q, lambda.iter().map(|l| 1.0 / l.sqrt()));
        let u = x * v * DMatrix::from_diagonal(&d_inv);
        let xt = &u * v.transpose();
        let yt = &u * DMatrix::from_diagonal(&d_inv) * (u.transpose() * data.y());
        (xt, yt)
    };
    let mut out = Dataset::new(yt, xt)?;
    if let Some(names) = data.names() {
        out = out.with_names(names.to_vec())?;
    }
    Ok(out)
}

fn check_rank(eigenvalues: &DVector<f64>, expected: usize) -> Result<Vec<f64>> {
    let max = eigenvalues.max();
    let tol = rank_tolerance(expected) * max;
    let rank = eigenvalues.iter().filter(|&&l| l > tol).count();
    if max <= 0.0 || rank < expected {
        return Err(Error::RankDeficient { rank, expected });
    }
    Ok(eigenvalues.iter().copied().collect())
}
