use nalgebra::{DMatrix, DVector};

use super::{glm_design, LinkSpec, SATURATION_ETA};
use crate::distfn::{at_least_one, chisq1_sf};
use crate::error::{domain, Error, Result};
use crate::linalg::{best_weighted_candidate, Dataset};
use crate::select::{Method, SelectionTrace, SelectorConfig, Step, StopReason};

const GN_MAX_ITER: usize = 200;
const GN_TOL: f64 = 1e-9;
const MAX_HALVINGS: usize = 30;

/// Gauss-Newton fit of `y ~ g(X b)`.
#[derive(Debug, Clone)]
pub struct NlFit {
    /// Coefficients in design order (intercept first when present).
    pub coefficients: DVector<f64>,
    pub eta: DVector<f64>,
    pub residuals: DVector<f64>,
    /// Total squared residual.
    pub ss: f64,
    pub iterations: usize,
    pub converged: bool,
    pub saturated: bool,
    pub ss_trace: Vec<f64>,
}

pub fn nl_objective(x: &DMatrix<f64>, y: &DVector<f64>, beta: &DVector<f64>, link: &LinkSpec) -> f64 {
    let eta = x * beta;
    y.iter().zip(eta.iter()).map(|(yi, e)| (yi - (link.g)(*e)).powi(2)).sum()
}

/// Gradient of [`nl_objective`]: `-2 sum_i r_i g1(eta_i) x_i`.
pub fn nl_gradient(x: &DMatrix<f64>, y: &DVector<f64>, beta: &DVector<f64>, link: &LinkSpec) -> DVector<f64> {
    let eta = x * beta;
    let v = DVector::from_fn(y.len(), |i, _| -2.0 * (y[i] - (link.g)(eta[i])) * (link.g1)(eta[i]));
    x.transpose() * v
}

pub(crate) fn nl_fit_design(x: &DMatrix<f64>, y: &DVector<f64>, link: &LinkSpec) -> Result<NlFit> {
    let (n, k) = x.shape();
    if k + 3 > n {
        return domain(format!("{k} parameters need n >= {}", k + 3));
    }
    let mut beta = DVector::<f64>::zeros(k);
    let mut ss = nl_objective(x, y, &beta, link);
    let mut trace = vec![ss];
    let mut converged = k == 0;
    let mut iterations = 0;
    while !converged && iterations < GN_MAX_ITER {
        iterations += 1;
        let eta = x * &beta;
        let r = DVector::from_fn(n, |i, _| y[i] - (link.g)(eta[i]));
        let j = DMatrix::from_fn(n, k, |i, c| (link.g1)(eta[i]) * x[(i, c)]);
        let svd = j.svd(true, true);
        let tol = 1e-12 * svd.singular_values.max();
        let delta = svd
            .solve(&r, tol)
            .map_err(|e| Error::Singular(format!("Gauss-Newton step: {e}")))?;
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let cand = &beta + &delta * t;
            let s = nl_objective(x, y, &cand, link);
            if s <= ss {
                accepted = Some((cand, s));
                break;
            }
            t *= 0.5;
        }
        let Some((next, s)) = accepted else {
            // No descent along the Gauss-Newton direction: stationary point.
            converged = true;
            break;
        };
        let change = (&next - &beta).amax();
        beta = next;
        let old = ss;
        ss = s;
        trace.push(ss);
        if change < GN_TOL * (1.0 + beta.amax()) || old - ss <= 1e-15 * old {
            converged = true;
        }
    }
    if !converged {
        log::warn!("Gauss-Newton stopped after {GN_MAX_ITER} iterations without converging");
    }
    let eta = x * &beta;
    let saturated = eta.amax() > SATURATION_ETA;
    if saturated {
        log::warn!("nonlinear fit saturated: |linear predictor| exceeds {SATURATION_ETA}");
    }
    let residuals = DVector::from_fn(n, |i, _| y[i] - (link.g)(eta[i]));
    Ok(NlFit {
        coefficients: beta,
        eta,
        residuals,
        ss,
        iterations,
        converged,
        saturated,
        ss_trace: trace,
    })
}

/// Least-squares fit of `g` applied to the linear predictor on `active`.
pub fn nl_fit(d: &Dataset, active: &[usize], link: &LinkSpec, intercept: bool) -> Result<NlFit> {
    nl_fit_design(&glm_design(d, active, intercept), d.y(), link)
}

/// Chi-squared approximation for the nonlinear least-squares step;
/// `weights_num = sum r^2 g1^2` and `weights_den = sum g1^2` at the current fit.
pub fn nl_step_p_value(
    ss0: f64,
    ss1: f64,
    weights_num: f64,
    weights_den: f64,
    q: usize,
    nu0: usize,
) -> Result<f64> {
    if q <= nu0 {
        return domain(format!("q = {q} must exceed nu0 = {nu0}"));
    }
    if ss1 > ss0 * (1.0 + 1e-12) + 1e-300 {
        return domain(format!("ss1 = {ss1} exceeds ss0 = {ss0}"));
    }
    if !(weights_den > 0.0) || !(weights_num > 0.0) {
        log::warn!("degenerate link derivative weights; step p-value set to 1");
        return Ok(1.0);
    }
    let chi = (ss0 - ss1).max(0.0) * weights_den / weights_num;
    Ok(at_least_one(chisq1_sf(chi)?, (q - nu0) as f64))
}

/// Greedy nonlinear least-squares selection.
pub fn nl_select(d: &Dataset, cfg: &SelectorConfig, link: &LinkSpec) -> Result<SelectionTrace> {
    cfg.validate(d.n())?;
    let d = d.ensure_standardized()?;
    let n = d.n();
    let q = d.usable_count();
    let alpha = cfg.alpha();
    let extra = usize::from(cfg.intercept);
    let mut trace = SelectionTrace::new(Method::NonLinear, n, q, alpha);
    let mut live: Vec<bool> = (0..d.q()).map(|j| !d.is_dropped(j)).collect();
    let mut active: Vec<usize> = Vec::new();
    let limit = cfg.step_limit(n).min(n.saturating_sub(3 + extra));
    let mut fit0 = nl_fit(&d, &active, link, cfg.intercept)?;
    loop {
        let nu0 = active.len();
        if nu0 >= limit {
            trace.stop_reason = StopReason::MaxSteps;
            break;
        }
        if fit0.ss <= 1e-24 * d.y().norm_squared() {
            trace.stop_reason = StopReason::PerfectFit;
            break;
        }
        let g1 = fit0.eta.map(|e| (link.g1)(e));
        let num: f64 = (0..n).map(|i| (fit0.residuals[i] * g1[i]).powi(2)).sum();
        let den: f64 = g1.norm_squared();
        let grad = fit0.residuals.component_mul(&g1);
        let base = glm_design(&d, &active, cfg.intercept);
        let winner = match best_weighted_candidate(d.x(), &live, &base, &grad, &g1, &cfg.workers) {
            Ok((j, _)) => j,
            Err(Error::Exhausted) => {
                trace.stop_reason = StopReason::Exhausted;
                break;
            }
            Err(e) => return Err(e),
        };
        let mut cols = active.clone();
        cols.push(winner);
        let fit1 = nl_fit(&d, &cols, link, cfg.intercept)?;
        let ss1 = fit1.ss.min(fit0.ss);
        let p_value = nl_step_p_value(fit0.ss, ss1, num, den, q, nu0)?;
        let step = Step {
            index: winner,
            ss0: fit0.ss,
            ss01: ss1,
            p_value,
        };
        if p_value > alpha {
            trace.stop_reason = StopReason::PValueExceeded;
            trace.stopped_at = Some(step);
            break;
        }
        trace.push(step);
        if fit1.saturated {
            trace.warn(format!("fit saturated after including covariate {}", winner + 1));
        }
        live[winner] = false;
        active.push(winner);
        fit0 = fit1;
    }
    Ok(trace)
}
