use nalgebra::{DMatrix, DVector};

use super::{glm_design, logistic, PROB_CLAMP, SATURATION_ETA};
use crate::distfn::{at_least_one, chisq1_sf};
use crate::error::{domain, Error, Result};
use crate::linalg::{best_weighted_candidate, Dataset};
use crate::select::{Method, SelectionTrace, SelectorConfig, Step, StopReason};

const NEWTON_MAX_ITER: usize = 200;
const NEWTON_TOL: f64 = 1e-9;
const MAX_HALVINGS: usize = 30;

fn clamp_prob(p: f64) -> f64 {
    p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP)
}

fn check_binary(y: &DVector<f64>) -> Result<()> {
    if let Some(i) = y.iter().position(|v| *v != 0.0 && *v != 1.0) {
        return Err(Error::InvalidData(format!(
            "response entry {} is {}; the logistic procedures need 0/1 responses",
            i + 1,
            y[i]
        )));
    }
    Ok(())
}

/// Kullback-Leibler discrepancy `-sum (y log p + (1 - y) log(1 - p))` with
/// probabilities clamped away from 0 and 1.
pub fn kl_value(y: &[f64], p: &[f64]) -> Result<f64> {
    if y.len() != p.len() {
        return domain("response and probability lengths differ");
    }
    let mut s = 0.0;
    for (yi, pi) in y.iter().zip(p) {
        if *yi != 0.0 && *yi != 1.0 {
            return domain(format!("response value {yi} is not 0 or 1"));
        }
        if !(0.0..=1.0).contains(pi) {
            return domain(format!("probability {pi} outside [0, 1]"));
        }
        let pc = clamp_prob(*pi);
        s -= if *yi == 1.0 { pc.ln() } else { (-pc).ln_1p() };
    }
    Ok(s)
}

/// Discrepancy at coefficients `beta` for design `x`.
pub fn kl_objective(x: &DMatrix<f64>, y: &DVector<f64>, beta: &DVector<f64>) -> f64 {
    let eta = x * beta;
    y.iter()
        .zip(eta.iter())
        .map(|(yi, e)| {
            let p = clamp_prob(logistic(*e));
            if *yi == 1.0 {
                -p.ln()
            } else {
                -(-p).ln_1p()
            }
        })
        .sum()
}

/// Gradient of [`kl_objective`] ignoring the clamp: `-X'(y - p)`.
pub fn kl_gradient(x: &DMatrix<f64>, y: &DVector<f64>, beta: &DVector<f64>) -> DVector<f64> {
    let eta = x * beta;
    let v = DVector::from_fn(y.len(), |i, _| logistic(eta[i]) - y[i]);
    x.transpose() * v
}

/// Logistic fit minimizing the Kullback-Leibler discrepancy.
#[derive(Debug, Clone)]
pub struct KlFit {
    /// Coefficients in design order (intercept first when present).
    pub coefficients: DVector<f64>,
    /// Fitted probabilities, clamped.
    pub probabilities: DVector<f64>,
    pub kl: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Set when the linear predictor exceeded the separation bound and the
    /// coefficients were frozen.
    pub separated: bool,
    pub kl_trace: Vec<f64>,
}

pub(crate) fn kl_fit_design(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<KlFit> {
    check_binary(y)?;
    let (n, k) = x.shape();
    if k + 2 > n {
        return domain(format!("{k} parameters need n >= {}", k + 2));
    }
    let mut beta = DVector::<f64>::zeros(k);
    let mut kl = kl_objective(x, y, &beta);
    let mut trace = vec![kl];
    let mut converged = k == 0;
    let mut separated = false;
    let mut iterations = 0;
    while !converged && iterations < NEWTON_MAX_ITER {
        iterations += 1;
        let eta = x * &beta;
        let p = eta.map(logistic);
        let w = p.map(|v| v * (1.0 - v));
        let score = x.transpose() * (y - &p);
        let mut h = DMatrix::<f64>::zeros(k, k);
        for i in 0..n {
            let xi = x.row(i);
            h += xi.transpose() * xi * w[i];
        }
        let delta = match h.clone().cholesky() {
            Some(ch) => ch.solve(&score),
            None => {
                // Flat likelihood in some direction; fall back to a pseudo-inverse step.
                h.pseudo_inverse(1e-12)
                    .map_err(|e| Error::Singular(format!("logistic Newton step: {e}")))?
                    * &score
            }
        };
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let cand = &beta + &delta * t;
            let v = kl_objective(x, y, &cand);
            if v <= kl {
                accepted = Some((cand, v));
                break;
            }
            t *= 0.5;
        }
        let Some((next, v)) = accepted else {
            converged = true;
            break;
        };
        let change = (&next - &beta).amax();
        let old = kl;
        beta = next;
        kl = v;
        trace.push(kl);
        if (x * &beta).amax() > SATURATION_ETA {
            separated = true;
            break;
        }
        if change < NEWTON_TOL * (1.0 + beta.amax()) || old - kl <= 1e-15 * old.max(1e-300) {
            converged = true;
        }
    }
    if separated {
        log::warn!("logistic fit separated: coefficients frozen at |linear predictor| > {SATURATION_ETA}");
    } else if !converged {
        log::warn!("logistic Newton iteration stopped after {NEWTON_MAX_ITER} iterations");
    }
    let probabilities = (x * &beta).map(|e| clamp_prob(logistic(e)));
    Ok(KlFit {
        coefficients: beta,
        probabilities,
        kl,
        iterations,
        converged,
        separated,
        kl_trace: trace,
    })
}

pub fn kl_fit(d: &Dataset, active: &[usize], intercept: bool) -> Result<KlFit> {
    kl_fit_design(&glm_design(d, active, intercept), d.y())
}

/// Chi-squared approximation for the Kullback-Leibler step; `p0` are the
/// fitted probabilities before the step.
pub fn kl_step_p_value(kl0: f64, kl1: f64, p0: &[f64], y: &[f64], q: usize, nu0: usize) -> Result<f64> {
    if q <= nu0 {
        return domain(format!("q = {q} must exceed nu0 = {nu0}"));
    }
    if p0.len() != y.len() {
        return domain("response and probability lengths differ");
    }
    if kl1 > kl0 * (1.0 + 1e-12) + 1e-300 {
        return domain(format!("kl1 = {kl1} exceeds kl0 = {kl0}"));
    }
    let var: f64 = p0.iter().map(|p| p * (1.0 - p)).sum();
    let res: f64 = p0.iter().zip(y).map(|(p, yi)| (yi - p).powi(2)).sum();
    if !(var > 0.0) || !(res > 0.0) {
        log::warn!("degenerate fitted probabilities; step p-value set to 1");
        return Ok(1.0);
    }
    let chi = 2.0 * var / res * (kl0 - kl1).max(0.0);
    Ok(at_least_one(chisq1_sf(chi)?, (q - nu0) as f64))
}

/// Greedy Kullback-Leibler selection for 0/1 responses.
pub fn kl_select(d: &Dataset, cfg: &SelectorConfig) -> Result<SelectionTrace> {
    cfg.validate(d.n())?;
    check_binary(d.y())?;
    let d = d.ensure_standardized()?;
    let n = d.n();
    let q = d.usable_count();
    let alpha = cfg.alpha();
    let extra = usize::from(cfg.intercept);
    let mut trace = SelectionTrace::new(Method::Kl, n, q, alpha);
    let mut live: Vec<bool> = (0..d.q()).map(|j| !d.is_dropped(j)).collect();
    let mut active: Vec<usize> = Vec::new();
    let limit = cfg.step_limit(n).min(n.saturating_sub(3 + extra));
    let mut fit0 = kl_fit(&d, &active, cfg.intercept)?;
    let y = d.y().as_slice().to_vec();
    loop {
        let nu0 = active.len();
        if nu0 >= limit {
            trace.stop_reason = StopReason::MaxSteps;
            break;
        }
        if fit0.kl <= 1e-9 {
            trace.stop_reason = StopReason::PerfectFit;
            break;
        }
        let p = &fit0.probabilities;
        let grad = DVector::from_fn(n, |i, _| y[i] - p[i]);
        let sw = p.map(|v| (v * (1.0 - v)).sqrt());
        let base = glm_design(&d, &active, cfg.intercept);
        let winner = match best_weighted_candidate(d.x(), &live, &base, &grad, &sw, &cfg.workers) {
            Ok((j, _)) => j,
            Err(Error::Exhausted) => {
                trace.stop_reason = StopReason::Exhausted;
                break;
            }
            Err(e) => return Err(e),
        };
        let mut cols = active.clone();
        cols.push(winner);
        let fit1 = kl_fit(&d, &cols, cfg.intercept)?;
        let kl1 = fit1.kl.min(fit0.kl);
        let p_value = kl_step_p_value(fit0.kl, kl1, p.as_slice(), &y, q, nu0)?;
        let step = Step {
            index: winner,
            ss0: fit0.kl,
            ss01: kl1,
            p_value,
        };
        if p_value > alpha {
            trace.stop_reason = StopReason::PValueExceeded;
            trace.stopped_at = Some(step);
            break;
        }
        trace.push(step);
        if fit1.separated {
            trace.warn(format!("separation after including covariate {}", winner + 1));
        }
        live[winner] = false;
        active.push(winner);
        fit0 = fit1;
    }
    Ok(trace)
}
