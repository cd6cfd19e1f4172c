//! Nonlinear least-squares and Kullback-Leibler (logistic) stepwise selection.

mod kl;
mod nonlinear;

pub use kl::{kl_fit, kl_gradient, kl_objective, kl_select, kl_step_p_value, kl_value, KlFit};
pub use nonlinear::{nl_fit, nl_gradient, nl_objective, nl_select, nl_step_p_value, NlFit};

use std::fmt;

use nalgebra::DMatrix;

use crate::linalg::Dataset;

/// Linear predictors beyond this magnitude signal saturation or separation.
pub const SATURATION_ETA: f64 = 30.0;
/// Probabilities are kept inside `[PROB_CLAMP, 1 - PROB_CLAMP]`.
pub const PROB_CLAMP: f64 = 1e-12;

/// A smooth link `g` with its derivative.
#[derive(Clone, Copy)]
pub struct LinkSpec {
    pub name: &'static str,
    pub g: fn(f64) -> f64,
    pub g1: fn(f64) -> f64,
}

impl fmt::Debug for LinkSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LinkSpec({})", self.name)
    }
}

pub fn logistic(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

fn logistic_derivative(u: f64) -> f64 {
    let p = logistic(u);
    p * (1.0 - p)
}

impl LinkSpec {
    pub fn logistic() -> Self {
        Self {
            name: "logistic",
            g: logistic,
            g1: logistic_derivative,
        }
    }

    pub fn identity() -> Self {
        Self {
            name: "identity",
            g: |u| u,
            g1: |_| 1.0,
        }
    }
}

/// Design for the given columns, preceded by a column of ones when `intercept`.
pub fn glm_design(d: &Dataset, active: &[usize], intercept: bool) -> DMatrix<f64> {
    let x = d.design(active);
    if intercept {
        x.insert_column(0, 1.0)
    } else {
        x
    }
}
