//! Stepwise selection under Huber M-regression.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::distfn::{at_least_one, chisq1_sf, normal_cdf, normal_pdf};
use crate::error::{domain, Error, Result};
use crate::linalg::{best_weighted_candidate, ols, weighted_lstsq, Dataset};
use crate::select::{Method, SelectionTrace, SelectorConfig, Step, StopReason};

/// Consistency factor turning the median absolute deviation into a Gaussian scale.
pub const MAD_FACTOR: f64 = 1.4826;

const IRLS_MAX_ITER: usize = 500;
const IRLS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HuberParams {
    c: f64,
    fisher_c_f: f64,
}

impl HuberParams {
    pub fn new(c: f64) -> Result<Self> {
        if !(c > 0.0) {
            return domain(format!("Huber tuning constant must be positive, got {c}"));
        }
        Ok(Self {
            c,
            fisher_c_f: fisher_consistency(c),
        })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// `E psi_c(Z)^2` for standard normal `Z`.
    pub fn fisher_c_f(&self) -> f64 {
        self.fisher_c_f
    }
}

impl Default for HuberParams {
    fn default() -> Self {
        Self::new(1.0).expect("valid")
    }
}

pub fn huber_rho(u: f64, c: f64) -> f64 {
    let a = u.abs();
    if a <= c {
        0.5 * u * u
    } else {
        c * a - 0.5 * c * c
    }
}

pub fn huber_psi(u: f64, c: f64) -> f64 {
    u.clamp(-c, c)
}

pub fn huber_psi_prime(u: f64, c: f64) -> f64 {
    if u.abs() <= c {
        1.0
    } else {
        0.0
    }
}

/// `E psi_c(Z)^2 = (2 Phi(c) - 1) - 2 c phi(c) + 2 c^2 (1 - Phi(c))`.
pub fn fisher_consistency(c: f64) -> f64 {
    if c.is_infinite() {
        return 1.0;
    }
    (2.0 * normal_cdf(c) - 1.0) - 2.0 * c * normal_pdf(c) + 2.0 * c * c * normal_cdf(-c)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobustScale {
    pub sigma: f64,
    /// Size of the largest group of tied responses used in the quantile level.
    pub atom_size: usize,
}

/// Linear-interpolation quantile of sorted data.
fn sorted_quantile(sorted: &[f64], prob: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * prob.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    sorted_quantile(&v, 0.5)
}

/// Size of the largest group of exactly equal values.
pub fn largest_atom(values: &[f64]) -> usize {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mut best = 0;
    let mut run = 0;
    for i in 0..v.len() {
        run = if i > 0 && v[i] == v[i - 1] { run + 1 } else { 1 };
        best = best.max(run);
    }
    best
}

/// Starting scale: `1.4826` times the `0.5 (n + n_atom) / n` quantile of the
/// absolute deviations from the median. The atom correction applies only when
/// the largest group of tied values exceeds `n / 4`.
pub fn initial_scale(y: &[f64]) -> Result<RobustScale> {
    let n = y.len();
    let atom = largest_atom(y);
    let atom_size = if atom >= 2 && 4 * atom > n { atom } else { 0 };
    initial_scale_with_atom(y, atom_size)
}

pub fn initial_scale_with_atom(y: &[f64], atom_size: usize) -> Result<RobustScale> {
    let n = y.len();
    if n < 3 {
        return Err(Error::InvalidData(format!("need at least 3 observations, got {n}")));
    }
    if atom_size > n {
        return domain("atom size exceeds the sample size");
    }
    let m = median(y);
    let mut dev: Vec<f64> = y.iter().map(|v| (v - m).abs()).collect();
    dev.sort_by(f64::total_cmp);
    let level = 0.5 * (n + atom_size) as f64 / n as f64;
    let sigma = MAD_FACTOR * sorted_quantile(&dev, level);
    if !(sigma > 0.0) {
        return Err(Error::ZeroScale(format!(
            "the {level} quantile of absolute deviations is zero"
        )));
    }
    Ok(RobustScale { sigma, atom_size })
}

/// `sigma1^2 = sigma0^2 sum psi(r / sigma0)^2 / ((n - nu0 - 1) c_f)`.
pub fn scale_update(residuals: &[f64], sigma0: f64, nu0: usize, p: &HuberParams) -> Result<RobustScale> {
    let n = residuals.len();
    if nu0 + 1 >= n {
        return domain(format!("{nu0} active covariates leave no residual degrees of freedom"));
    }
    if residuals.iter().all(|r| *r == 0.0) {
        return Err(Error::PerfectFit);
    }
    let s: f64 = residuals.iter().map(|r| huber_psi(r / sigma0, p.c).powi(2)).sum();
    let sigma2 = sigma0 * sigma0 * s / ((n - nu0 - 1) as f64 * p.fisher_c_f);
    let sigma = sigma2.sqrt();
    if !(sigma > 0.0) {
        return Err(Error::ZeroScale("updated scale is zero".into()));
    }
    Ok(RobustScale { sigma, atom_size: 0 })
}

/// Result of an M-regression fit at fixed scale.
#[derive(Debug, Clone)]
pub struct MFit {
    pub coefficients: Vec<f64>,
    pub residuals: DVector<f64>,
    /// Mean of `rho(r / sigma)` at the fit.
    pub s0_rho: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective after the starting fit and after every reweighting.
    pub objective_trace: Vec<f64>,
}

fn mean_rho(r: &DVector<f64>, sigma: f64, c: f64) -> f64 {
    r.iter().map(|v| huber_rho(v / sigma, c)).sum::<f64>() / r.len() as f64
}

/// Minimizes `(1/n) sum rho((y - X b) / sigma)` over `b` by iteratively
/// reweighted least squares started at the least-squares fit.
pub fn m_fit(d: &Dataset, active: &[usize], scale: &RobustScale, p: &HuberParams) -> Result<MFit> {
    m_fit_design(&d.design(active), d.y(), scale.sigma, p)
}

pub(crate) fn m_fit_design(x: &DMatrix<f64>, y: &DVector<f64>, sigma: f64, p: &HuberParams) -> Result<MFit> {
    let n = y.len();
    let k = x.ncols();
    if k + 3 > n {
        return domain(format!("{k} covariates need n >= {}", k + 3));
    }
    if !(sigma > 0.0) {
        return Err(Error::ZeroScale("M-fit scale must be positive".into()));
    }
    if k == 0 {
        let s0 = mean_rho(y, sigma, p.c);
        return Ok(MFit {
            coefficients: Vec::new(),
            residuals: y.clone(),
            s0_rho: s0,
            iterations: 0,
            converged: true,
            objective_trace: vec![s0],
        });
    }
    let start = ols(x, y)?;
    let mut beta = DVector::from_vec(start.coefficients);
    let mut r = start.residuals;
    let mut trace = vec![mean_rho(&r, sigma, p.c)];
    let mut converged = false;
    let mut iterations = 0;
    for it in 1..=IRLS_MAX_ITER {
        iterations = it;
        let w: Vec<f64> = r
            .iter()
            .map(|v| {
                let u = (v / sigma).abs();
                if u <= p.c {
                    1.0
                } else {
                    p.c / u
                }
            })
            .collect();
        let next = weighted_lstsq(x, y, &w)?;
        let change = (&next - &beta).amax();
        let size = next.amax();
        beta = next;
        r = y - x * &beta;
        trace.push(mean_rho(&r, sigma, p.c));
        if change < IRLS_TOL * (1.0 + size) {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!("M-regression stopped after {IRLS_MAX_ITER} iterations without converging");
    }
    Ok(MFit {
        coefficients: beta.iter().copied().collect(),
        s0_rho: *trace.last().expect("nonempty"),
        residuals: r,
        iterations,
        converged,
        objective_trace: trace,
    })
}

/// Chi-squared approximation to the probability that the best of `q - nu0`
/// Gaussian covariates lowers the mean ρ-sum from `s0_rho` to `s01_rho`.
/// `s0_psi2` is the mean of `psi^2` and `s0_psiprime` the sum of `psi'` at the
/// current residuals.
pub fn robust_step_p_value(
    s0_rho: f64,
    s01_rho: f64,
    s0_psi2: f64,
    s0_psiprime: f64,
    n: usize,
    nu0: usize,
    q: usize,
) -> Result<f64> {
    if nu0 + 3 > n || q <= nu0 {
        return domain(format!("invalid step sizes n = {n}, nu0 = {nu0}, q = {q}"));
    }
    if s01_rho > s0_rho * (1.0 + 1e-12) + 1e-300 {
        return domain(format!("s01 = {s01_rho} exceeds s0 = {s0_rho}"));
    }
    if !(s0_psiprime > 0.0) || !(s0_psi2 > 0.0) {
        log::warn!("no residual inside the quadratic region; step p-value set to 1");
        return Ok(1.0);
    }
    let chi = 2.0 * s0_psiprime / s0_psi2 * (s0_rho - s01_rho).max(0.0);
    Ok(at_least_one(chisq1_sf(chi)?, (q - nu0) as f64))
}

/// Greedy robust selection. Candidates are ranked by the one-step quadratic
/// approximation of the ρ-reduction; the winner is refitted exactly.
pub fn robust_select(d: &Dataset, cfg: &SelectorConfig, p: &HuberParams) -> Result<SelectionTrace> {
    cfg.validate(d.n())?;
    let d = d.ensure_standardized()?;
    let n = d.n();
    let q = d.usable_count();
    let alpha = cfg.alpha();
    let mut trace = SelectionTrace::new(Method::Huber, n, q, alpha);
    let mut scale = initial_scale(d.y().as_slice())?;
    let mut live: Vec<bool> = (0..d.q()).map(|j| !d.is_dropped(j)).collect();
    let mut active: Vec<usize> = Vec::new();
    let limit = cfg.step_limit(n);
    let y_ss = d.y().norm_squared();
    loop {
        let nu0 = active.len();
        if nu0 >= limit {
            trace.stop_reason = StopReason::MaxSteps;
            break;
        }
        let base = d.design(&active);
        let fit0 = m_fit_design(&base, d.y(), scale.sigma, p)?;
        if !fit0.converged {
            trace.warn(format!("M-fit on {nu0} covariates did not converge"));
        }
        if fit0.residuals.norm_squared() <= 1e-24 * y_ss {
            trace.stop_reason = StopReason::PerfectFit;
            break;
        }
        let u: Vec<f64> = fit0.residuals.iter().map(|r| r / scale.sigma).collect();
        let psi = DVector::from_iterator(n, u.iter().map(|v| huber_psi(*v, p.c)));
        let s0_psi2 = psi.norm_squared() / n as f64;
        let s0_psiprime: f64 = u.iter().map(|v| huber_psi_prime(*v, p.c)).sum();
        let sw = DVector::from_iterator(
            n,
            u.iter().map(|v| if v.abs() <= p.c { 1.0 } else { (p.c / v.abs()).sqrt() }),
        );
        let winner = match best_weighted_candidate(d.x(), &live, &base, &psi, &sw, &cfg.workers) {
            Ok((j, _)) => j,
            Err(Error::Exhausted) => {
                trace.stop_reason = StopReason::Exhausted;
                break;
            }
            Err(e) => return Err(e),
        };
        let mut cols = active.clone();
        cols.push(winner);
        let fit1 = m_fit_design(&d.design(&cols), d.y(), scale.sigma, p)?;
        let s01 = fit1.s0_rho.min(fit0.s0_rho);
        let p_value = robust_step_p_value(fit0.s0_rho, s01, s0_psi2, s0_psiprime, n, nu0, q)?;
        let step = Step {
            index: winner,
            ss0: fit0.s0_rho,
            ss01: s01,
            p_value,
        };
        if p_value > alpha {
            trace.stop_reason = StopReason::PValueExceeded;
            trace.stopped_at = Some(step);
            break;
        }
        trace.push(step);
        live[winner] = false;
        active.push(winner);
        match scale_update(fit1.residuals.as_slice(), scale.sigma, nu0, p) {
            Ok(s) => scale = s,
            Err(Error::PerfectFit) => {
                trace.stop_reason = StopReason::PerfectFit;
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rho_psi_examples() {
        assert_eq!(huber_rho(0.5, 1.0), 0.125);
        assert_eq!(huber_rho(2.0, 1.0), 1.5);
        assert_eq!(huber_rho(-2.0, 1.0), 1.5);
        assert_eq!(huber_rho(1.0, 1.0), 0.5);
        assert_eq!(huber_psi(3.0, 1.0), 1.0);
        assert_eq!(huber_psi(-0.3, 1.0), -0.3);
        assert_eq!(huber_psi_prime(1.5, 1.0), 0.0);
        assert_eq!(huber_psi_prime(-0.5, 1.0), 1.0);
    }

    #[test]
    fn fisher_factor_values() {
        // mpmath quadrature: E min(Z^2, 1) = 0.5160585509617133
        assert!((fisher_consistency(1.0) - 0.516_058_550_961_713_3).abs() < 1e-12);
        assert!((fisher_consistency(40.0) - 1.0).abs() < 1e-12);
        assert!(fisher_consistency(1e-8) < 1e-15);
    }

    #[test]
    fn initial_scale_examples() {
        let s = initial_scale(&[-1.0, 0.0, 1.0]).unwrap();
        assert!((s.sigma - MAD_FACTOR).abs() < 1e-15);
        assert_eq!(s.atom_size, 0);
        assert!(matches!(initial_scale(&[2.0; 5]), Err(Error::ZeroScale(_))));
        // Balanced binary n = 6: atom 3 > 6/4, level 0.75; all deviations 0.5.
        let s = initial_scale(&[0.0, 0.0, 0.0, 1.0, 1.0, 1.0]).unwrap();
        assert_eq!(s.atom_size, 3);
        assert!((s.sigma - 0.5 * MAD_FACTOR).abs() < 1e-15);
        // Heavy atom at zero: the plain MAD is zero but the shifted level is not.
        let y = [0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 2.0, 3.0];
        assert_eq!(initial_scale_with_atom(&y, 0).map(|_| ()).is_err(), true);
        let s = initial_scale(&y).unwrap();
        assert_eq!(s.atom_size, 5);
        // level 0.8125, h = 5.6875 over deviations (0,0,0,0,0,1,2,3)
        assert!((s.sigma - MAD_FACTOR * 1.6875).abs() < 1e-12);
    }

    #[test]
    fn saturated_scale_update() {
        let p = HuberParams::default();
        let r = [5.0, -7.0, 9.0, -11.0, 6.0];
        let s = scale_update(&r, 1.0, 1, &p).unwrap();
        let expect = (5.0 / (3.0 * p.fisher_c_f())).sqrt();
        assert!((s.sigma - expect).abs() < 1e-14);
        assert!(matches!(scale_update(&[0.0; 5], 1.0, 0, &p), Err(Error::PerfectFit)));
    }

    #[test]
    fn p_value_edges() {
        assert_eq!(robust_step_p_value(1.0, 1.0, 0.5, 10.0, 50, 0, 100).unwrap(), 1.0);
        assert_eq!(robust_step_p_value(1.0, 0.5, 0.5, 0.0, 50, 0, 100).unwrap(), 1.0);
        assert!(robust_step_p_value(1.0, 0.5, 0.5, 10.0, 50, 0, 100).unwrap() < 1e-3);
    }
}
