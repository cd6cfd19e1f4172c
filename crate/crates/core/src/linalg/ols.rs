use nalgebra::{DMatrix, DVector};

use crate::distfn::{student_t_two_sided_p, student_t_two_sided_quantile};
use crate::error::{Error, Result};

/// Ordinary least squares fit with classical standard errors.
#[derive(Debug, Clone)]
pub struct OlsFit {
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub residuals: DVector<f64>,
    pub rss: f64,
    /// Residual degrees of freedom `n - k`.
    pub df: usize,
}

/// Fits `y ~ x` (no implicit intercept) by Householder QR.
pub fn ols(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<OlsFit> {
    let (n, k) = x.shape();
    if y.len() != n {
        return Err(Error::InvalidData("response length mismatch".into()));
    }
    if k == 0 {
        let rss = y.norm_squared();
        return Ok(OlsFit {
            coefficients: Vec::new(),
            std_errors: Vec::new(),
            residuals: y.clone(),
            rss,
            df: n,
        });
    }
    if n <= k {
        return Err(Error::Singular(format!("{k} columns need more than {n} observations")));
    }
    let qr = x.clone().qr();
    let r = qr.r();
    let scale = r.diagonal().amax();
    if r.diagonal().iter().any(|d| d.abs() <= 1e-12 * scale) {
        return Err(Error::Singular("design columns are linearly dependent".into()));
    }
    let qty = qr.q().transpose() * y;
    let beta = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| Error::Singular("triangular solve failed".into()))?;
    let residuals = y - x * &beta;
    let rss = residuals.norm_squared();
    let df = n - k;
    let sigma2 = rss / df as f64;
    let rinv = r
        .solve_upper_triangular(&DMatrix::identity(k, k))
        .ok_or_else(|| Error::Singular("triangular solve failed".into()))?;
    let std_errors = (0..k).map(|j| (sigma2 * rinv.row(j).norm_squared()).sqrt()).collect();
    Ok(OlsFit {
        coefficients: beta.iter().copied().collect(),
        std_errors,
        residuals,
        rss,
        df,
    })
}

/// Solves `min sum_i w_i (y_i - x_i'b)^2` by QR of the row-scaled design.
pub fn weighted_lstsq(x: &DMatrix<f64>, y: &DVector<f64>, w: &[f64]) -> Result<DVector<f64>> {
    let (n, k) = x.shape();
    if k == 0 {
        return Ok(DVector::zeros(0));
    }
    let sw: Vec<f64> = w.iter().map(|v| v.max(0.0).sqrt()).collect();
    let xs = DMatrix::from_fn(n, k, |i, j| x[(i, j)] * sw[i]);
    let ys = DVector::from_fn(n, |i, _| y[i] * sw[i]);
    let qr = xs.qr();
    let r = qr.r();
    let scale = r.diagonal().amax();
    if scale == 0.0 || r.diagonal().iter().any(|d| d.abs() <= 1e-12 * scale) {
        return Err(Error::Singular("weighted design is rank deficient".into()));
    }
    let qty = qr.q().transpose() * ys;
    r.solve_upper_triangular(&qty)
        .ok_or_else(|| Error::Singular("triangular solve failed".into()))
}

impl OlsFit {
    pub fn sigma(&self) -> f64 {
        (self.rss / self.df as f64).sqrt()
    }

    pub fn t_statistics(&self) -> Vec<f64> {
        self.coefficients
            .iter()
            .zip(&self.std_errors)
            .map(|(b, s)| b / s)
            .collect()
    }

    /// Two-sided p-values of the individual t-tests.
    pub fn p_values(&self) -> Result<Vec<f64>> {
        self.t_statistics()
            .into_iter()
            .map(|t| {
                if t.is_finite() {
                    student_t_two_sided_p(t, self.df as f64)
                } else {
                    Ok(0.0)
                }
            })
            .collect()
    }

    /// Two-sided interval of coverage `gamma` for coefficient `j`.
    pub fn interval(&self, j: usize, gamma: f64) -> Result<(f64, f64)> {
        let t = student_t_two_sided_quantile(gamma, self.df as f64)?;
        let h = t * self.std_errors[j];
        Ok((self.coefficients[j] - h, self.coefficients[j] + h))
    }
}
