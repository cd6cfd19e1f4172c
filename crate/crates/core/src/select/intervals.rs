use serde::{Deserialize, Serialize};

use crate::distfn::student_t_two_sided_quantile;
use crate::error::{Error, Result};
use crate::index_serde::one_based;
use crate::linalg::{ols, Dataset, SweepState};

/// t-interval for one coefficient. Inactive covariates are fitted together
/// with the active set; `error` is set when that fit is singular.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefInterval {
    #[serde(with = "one_based")]
    pub index: usize,
    pub active: bool,
    pub estimate: f64,
    pub std_error: f64,
    pub lower: f64,
    pub upper: f64,
    pub df: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl CoefInterval {
    pub fn length(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn covers(&self, value: f64) -> bool {
        self.error.is_none() && self.lower <= value && value <= self.upper
    }

    fn failed(index: usize, active: bool, msg: String) -> Self {
        Self {
            index,
            active,
            estimate: f64::NAN,
            std_error: f64::NAN,
            lower: f64::NAN,
            upper: f64::NAN,
            df: 0,
            error: Some(msg),
        }
    }
}

/// Coverage-`gamma` intervals for every covariate on the scale of `d`.
pub fn confidence_intervals(d: &Dataset, active: &[usize], gamma: f64) -> Result<Vec<CoefInterval>> {
    let n = d.n();
    let k = active.len();
    if k + 3 > n {
        return Err(Error::InvalidData(format!("{k} active covariates need n >= {}", k + 3)));
    }
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::Config(format!("coverage must lie in [0, 1], got {gamma}")));
    }
    let mut out: Vec<Option<CoefInterval>> = vec![None; d.q()];

    let t_active = student_t_two_sided_quantile(gamma, (n - k) as f64)?;
    match ols(&d.design(active), d.y()) {
        Ok(fit) => {
            for (pos, &j) in active.iter().enumerate() {
                let (b, se) = (fit.coefficients[pos], fit.std_errors[pos]);
                out[j] = Some(CoefInterval {
                    index: j,
                    active: true,
                    estimate: b,
                    std_error: se,
                    lower: b - t_active * se,
                    upper: b + t_active * se,
                    df: fit.df,
                    error: None,
                });
            }
        }
        Err(e) => {
            for &j in active {
                out[j] = Some(CoefInterval::failed(j, true, e.to_string()));
            }
        }
    }

    // Inactive covariates via the partialled-out regression on the active set.
    let state = SweepState::with_active(d, active)?;
    let r = state.residual();
    let rss0 = state.ss0();
    let df = n - k - 1;
    let t = student_t_two_sided_quantile(gamma, df as f64)?;
    for (j, slot) in out.iter_mut().enumerate() {
        if slot.is_some() {
            continue;
        }
        if !state.is_live(j) {
            *slot = Some(CoefInterval::failed(
                j,
                false,
                "covariate is zero or collinear with the active set".into(),
            ));
            continue;
        }
        let z = state.orthogonal_column(j);
        let zz = state.orthogonal_norm2(j);
        let rz = r.dot(&z);
        let b = rz / zz;
        let rss = (rss0 - rz * rz / zz).max(0.0);
        let se = (rss / df as f64).sqrt() / zz.sqrt();
        *slot = Some(CoefInterval {
            index: j,
            active: false,
            estimate: b,
            std_error: se,
            lower: b - t * se,
            upper: b + t * se,
            df,
            error: None,
        });
    }
    Ok(out.into_iter().map(|c| c.expect("every covariate visited")).collect())
}
