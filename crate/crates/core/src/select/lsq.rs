use super::{Method, Precondition, SelectionTrace, SelectorConfig, Step, StopReason};
use crate::distfn::{at_least_one, beta_cdf, beta_quantile, per_draw_tail, BetaParams};
use crate::error::{domain, Error, Result};
use crate::linalg::{ols, svd_precondition, Dataset, SweepState};

/// Residual sums below this fraction of the initial sum end the procedure.
pub(crate) const PERFECT_FIT_TOL: f64 = 1e-12;

fn check_step_args(n: usize, nu0: usize, q: usize) -> Result<()> {
    if nu0 + 3 > n {
        return domain(format!("{nu0} active covariates leave no residual degrees of freedom at n = {n}"));
    }
    if q <= nu0 {
        return domain(format!("q = {q} must exceed the {nu0} active covariates"));
    }
    Ok(())
}

/// Probability that the best of `q - nu0` standard Gaussian covariates reduces
/// the residual sum from `ss0` to `ss01` or below.
pub fn step_p_value(ss0: f64, ss01: f64, n: usize, nu0: usize, q: usize) -> Result<f64> {
    check_step_args(n, nu0, q)?;
    if !(ss0 >= 0.0) || !(ss01 >= 0.0) {
        return domain("residual sums must be nonnegative");
    }
    if ss0 == 0.0 {
        return Ok(1.0);
    }
    // Allow rounding noise in ss01 slightly above ss0.
    if ss01 > ss0 * (1.0 + 1e-12) {
        return domain(format!("ss01 = {ss01} exceeds ss0 = {ss0}"));
    }
    let ratio = (ss01 / ss0).min(1.0);
    // P(B_{1/2,b} >= 1 - ratio) = P(B_{b,1/2} <= ratio).
    let b = (n - nu0 - 1) as f64 / 2.0;
    let tail = beta_cdf(ratio, BetaParams::new(b, 0.5)?)?;
    Ok(at_least_one(tail, (q - nu0) as f64))
}

/// Residual sum at which the step p-value equals `alpha`; a step whose `ss01`
/// exceeds it is not significant.
pub fn stop_threshold_exact(ss0: f64, n: usize, nu0: usize, q: usize, alpha: f64) -> Result<f64> {
    check_step_args(n, nu0, q)?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!("alpha must lie strictly between 0 and 1, got {alpha}"));
    }
    let b = (n - nu0 - 1) as f64 / 2.0;
    let tail = per_draw_tail(alpha, (q - nu0) as f64);
    Ok(ss0 * beta_quantile(tail, BetaParams::new(b, 0.5)?)?)
}

/// Large-`n`, large-`q` approximation of [`stop_threshold_exact`].
pub fn stop_threshold_asymptotic(ss0: f64, n: usize, q: usize, alpha: f64) -> Result<f64> {
    if q < 3 {
        return domain("the asymptotic rule needs q >= 3");
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!("alpha must lie strictly between 0 and 1, got {alpha}"));
    }
    let lq = (q as f64).ln();
    let x = (2.0 * lq - lq.ln() - 2.0 * (-(-alpha).ln_1p()).ln()) / n as f64;
    Ok(ss0 * (1.0 - x).max(0.0))
}

/// Runs the procedure selected by `cfg.precondition`.
pub fn select(d: &Dataset, cfg: &SelectorConfig) -> Result<SelectionTrace> {
    match cfg.precondition {
        Precondition::None => select_progau(d, cfg, &[]),
        Precondition::Pre1 => select_pre1(d, cfg),
        Precondition::Pre2 => select_pre2(d, cfg),
    }
}

/// Greedy least-squares selection on the columns not listed in `skip`.
pub fn select_progau(d: &Dataset, cfg: &SelectorConfig, skip: &[usize]) -> Result<SelectionTrace> {
    cfg.validate(d.n())?;
    let d = d.ensure_standardized()?;
    let n = d.n();
    let alpha = cfg.alpha();
    let mut state = SweepState::new(&d, skip);
    let q = state.live_count();
    let mut trace = SelectionTrace::new(Method::Lsq, n, q, alpha);
    let limit = cfg.step_limit(n);
    let initial = state.initial_ss();
    loop {
        let nu0 = state.active().len();
        if nu0 >= limit {
            trace.stop_reason = StopReason::MaxSteps;
            break;
        }
        let ss0 = state.ss0();
        if ss0 <= PERFECT_FIT_TOL * initial {
            trace.stop_reason = StopReason::PerfectFit;
            break;
        }
        let best = match state.sweep_best(&cfg.workers) {
            Ok(b) => b,
            Err(Error::Exhausted) => {
                trace.stop_reason = StopReason::Exhausted;
                break;
            }
            Err(e) => return Err(e),
        };
        let p_value = step_p_value(ss0, best.ss01, n, nu0, q)?;
        let step = Step {
            index: best.index,
            ss0,
            ss01: best.ss01,
            p_value,
        };
        let stop = match cfg.rule {
            super::Rule::Exact => p_value > alpha,
            super::Rule::Asymptotic => best.ss01 > stop_threshold_asymptotic(ss0, n, q, alpha)?,
        };
        if stop {
            trace.stop_reason = StopReason::PValueExceeded;
            trace.stopped_at = Some(step);
            break;
        }
        state.include_with(best.index, &cfg.workers)?;
        trace.push(step);
    }
    Ok(trace)
}

/// Least-squares selection after decorrelating preconditioning.
pub fn select_pre1(d: &Dataset, cfg: &SelectorConfig) -> Result<SelectionTrace> {
    cfg.validate(d.n())?;
    let pre = svd_precondition(d)?;
    select_progau(&pre, cfg, &[])
}

/// Two-phase procedure: preconditioned selection at a liberal level produces
/// candidates, which are kept when their t-test p-value in a least-squares fit
/// on the original data is below the per-covariate cutoff.
pub fn select_pre2(d: &Dataset, cfg: &SelectorConfig) -> Result<SelectionTrace> {
    cfg.validate(d.n())?;
    let phase1_cfg = SelectorConfig {
        alpha: cfg.pre2_candidate_alpha,
        precondition: Precondition::Pre1,
        ..cfg.clone()
    };
    let phase1 = select_pre1(d, &phase1_cfg)?;
    let mut trace = SelectionTrace::new(Method::Lsq, d.n(), phase1.q, cfg.alpha());
    trace.stop_reason = phase1.stop_reason;
    trace.stopped_at = phase1.stopped_at;
    trace.warnings = phase1.warnings.clone();
    let mut candidates = phase1.steps.clone();
    if candidates.is_empty() {
        return Ok(trace);
    }
    let n = d.n();
    if candidates.len() + 1 >= n {
        trace.warn(format!(
            "{} candidates truncated to n - 2 = {}",
            candidates.len(),
            n - 2
        ));
        candidates.truncate(n - 2);
    }
    let cols: Vec<usize> = candidates.iter().map(|s| s.index).collect();
    let fit = ols(&d.design(&cols), d.y())?;
    let pvals = fit.p_values()?;
    let nu0 = cols.len();
    let cutoff = per_draw_tail(cfg.alpha(), phase1.q.saturating_sub(nu0).max(1) as f64);
    for (step, p) in candidates.iter().zip(pvals) {
        if p <= cutoff {
            trace.push(Step { p_value: p, ..*step });
        }
    }
    trace.candidates = candidates;
    Ok(trace)
}

/// Repeats least-squares selection, each time removing every covariate chosen
/// so far from the candidate pool, until a run selects nothing.
pub fn relevance_scan(d: &Dataset, cfg: &SelectorConfig) -> Result<Vec<SelectionTrace>> {
    let d = d.ensure_standardized()?;
    let mut removed: Vec<usize> = Vec::new();
    let mut traces = Vec::new();
    loop {
        let t = select_progau(&d, cfg, &removed)?;
        let done = t.is_empty();
        removed.extend(t.selected());
        traces.push(t);
        if done || removed.len() >= d.usable_count() {
            break;
        }
    }
    Ok(traces)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn step_p_value_examples() {
        assert_eq!(step_p_value(1.0, 1.0, 100, 0, 500).unwrap(), 1.0);
        assert_eq!(step_p_value(1.0, 0.0, 100, 0, 500).unwrap(), 0.0);
        assert_eq!(step_p_value(0.0, 0.0, 100, 0, 500).unwrap(), 1.0);
        // mpmath: 1 - (1 - I_0.8(49.5, 0.5))^500
        let p = step_p_value(1.0, 0.8, 100, 0, 500).unwrap();
        assert!(rel(p, 1.375_155_747_049_749e-3) < 1e-10, "{p}");
        assert!(step_p_value(1.0, 1.1, 100, 0, 500).is_err());
        assert!(step_p_value(1.0, 0.5, 10, 8, 500).is_err());
        assert!(step_p_value(1.0, 0.5, 10, 3, 3).is_err());
    }

    #[test]
    fn threshold_roundtrip() {
        for &(n, nu0, q, alpha) in &[
            (100, 0, 500, 0.01),
            (100, 7, 500, 0.05),
            (50, 2, 80, 0.3),
            (250, 3, 5000, 0.01),
            (5000, 0, 2000, 0.05),
            (20, 0, 3, 0.5),
        ] {
            let t = stop_threshold_exact(2.5, n, nu0, q, alpha).unwrap();
            assert!(t > 0.0 && t < 2.5);
            let p = step_p_value(2.5, t, n, nu0, q).unwrap();
            assert!((p - alpha).abs() < 1e-9, "{n} {nu0} {q} {alpha}: {p}");
        }
    }

    #[test]
    fn asymptotic_threshold_limits() {
        let t = stop_threshold_asymptotic(1.0, 1_000_000_000, 3, 0.01).unwrap();
        assert!((t - 1.0).abs() < 1e-7);
        let t = stop_threshold_asymptotic(1.0, 5, 100_000, 0.01).unwrap();
        assert_eq!(t, 0.0);
        assert!(stop_threshold_asymptotic(1.0, 100, 2, 0.01).is_err());
    }

    #[test]
    fn exact_column_is_found_first() {
        let n = 30;
        let cols: Vec<Vec<f64>> = (0..10)
            .map(|j| (0..n).map(|i| ((i * (j + 3) * 7919 + j * 31) % 101) as f64 / 50.0 - 1.0).collect())
            .collect();
        let y = cols[3].clone();
        let d = Dataset::from_columns(y, &cols).unwrap();
        let t = select_progau(&d, &SelectorConfig::default(), &[]).unwrap();
        assert_eq!(t.steps[0].index, 3);
        assert!(t.steps[0].p_value < 1e-10);
        assert_eq!(t.stop_reason, StopReason::PerfectFit);
    }

    #[test]
    fn duplicated_column_scan() {
        let n = 40;
        let x1: Vec<f64> = (0..n).map(|i| ((i * 37) % 17) as f64 - 8.0).collect();
        let other: Vec<f64> = (0..n).map(|i| ((i * 11) % 7) as f64 - 3.0).collect();
        let y: Vec<f64> = x1.iter().map(|v| 2.0 * v).collect();
        let d = Dataset::from_columns(y, &[x1.clone(), other, x1]).unwrap();
        let cfg = SelectorConfig::default();
        let traces = relevance_scan(&d, &cfg).unwrap();
        assert_eq!(traces[0].selected(), vec![0]);
        assert_eq!(traces[1].selected(), vec![2]);
    }
}
