//! Selection procedures: configuration, traces and the least-squares family.

mod intervals;
mod lsq;

pub use intervals::{confidence_intervals, CoefInterval};
pub use lsq::{
    relevance_scan, select, select_pre1, select_pre2, select_progau, step_p_value,
    stop_threshold_asymptotic, stop_threshold_exact,
};

use serde::{Deserialize, Serialize};

use crate::distfn::Probability;
use crate::error::{Error, Result};
use crate::index_serde::one_based;
use crate::parallel::Workers;

/// Which stopping rule decides the first non-significant step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    #[default]
    Exact,
    Asymptotic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Precondition {
    #[default]
    None,
    Pre1,
    Pre2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Lsq,
    Huber,
    NonLinear,
    Kl,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelectorConfig {
    pub alpha: Probability,
    pub rule: Rule,
    /// Upper bound on the number of included covariates; `None` means `n - 2`.
    pub max_steps: Option<usize>,
    pub precondition: Precondition,
    pub pre2_candidate_alpha: Probability,
    /// Fit an intercept in the logistic procedures.
    pub intercept: bool,
    #[serde(skip)]
    pub workers: Workers,
}

impl Default for SelectorConfig {
    fn default() -> Self {
        Self {
            alpha: Probability::new(0.01).expect("valid"),
            rule: Rule::Exact,
            max_steps: None,
            precondition: Precondition::None,
            pre2_candidate_alpha: Probability::new(0.5).expect("valid"),
            intercept: true,
            workers: Workers::sequential(),
        }
    }
}

fn open_unit(name: &str, p: Probability) -> Result<()> {
    let v = p.get();
    if v <= 0.0 || v >= 1.0 {
        return Err(Error::Config(format!("{name} must lie strictly between 0 and 1, got {v}")));
    }
    Ok(())
}

impl SelectorConfig {
    pub fn with_alpha(alpha: f64) -> Result<Self> {
        let p = Probability::new(alpha).map_err(|_| {
            Error::Config(format!("alpha must lie strictly between 0 and 1, got {alpha}"))
        })?;
        let cfg = Self {
            alpha: p,
            ..Self::default()
        };
        open_unit("alpha", cfg.alpha)?;
        Ok(cfg)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha.get()
    }

    /// Checks the configuration against a sample size `n`.
    pub fn validate(&self, n: usize) -> Result<()> {
        open_unit("alpha", self.alpha)?;
        open_unit("pre2 candidate alpha", self.pre2_candidate_alpha)?;
        if let Some(m) = self.max_steps {
            if m == 0 {
                return Err(Error::Config("max steps must be positive".into()));
            }
            if m + 2 > n {
                return Err(Error::Config(format!(
                    "max steps {m} exceeds n - 2 = {}",
                    n.saturating_sub(2)
                )));
            }
        }
        Ok(())
    }

    /// Step limit for a sample of size `n`.
    pub fn step_limit(&self, n: usize) -> usize {
        self.max_steps.unwrap_or(n - 2).min(n - 2)
    }
}

/// One inclusion. `ss0` and `ss01` are the objective before and after adding
/// the covariate: residual sums of squares for least squares, the ρ-sum for
/// Huber regression and the Kullback-Leibler discrepancy for logistic fits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Step {
    #[serde(with = "one_based")]
    pub index: usize,
    pub ss0: f64,
    pub ss01: f64,
    pub p_value: f64,
}

impl Step {
    pub fn ratio(&self) -> f64 {
        if self.ss0 > 0.0 {
            self.ss01 / self.ss0
        } else {
            1.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    PValueExceeded,
    MaxSteps,
    Exhausted,
    PerfectFit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionTrace {
    pub method: Method,
    pub n: usize,
    /// Number of candidate covariates the p-values account for.
    pub q: usize,
    pub alpha: f64,
    pub steps: Vec<Step>,
    /// Product of `1 - p` over the recorded steps.
    pub joint_relevance: f64,
    pub stop_reason: StopReason,
    /// The first step whose p-value exceeded alpha; not included.
    pub stopped_at: Option<Step>,
    /// Phase-one candidate list of the two-phase preconditioned procedure.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub candidates: Vec<Step>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl SelectionTrace {
    pub(crate) fn new(method: Method, n: usize, q: usize, alpha: f64) -> Self {
        Self {
            method,
            n,
            q,
            alpha,
            steps: Vec::new(),
            joint_relevance: 1.0,
            stop_reason: StopReason::Exhausted,
            stopped_at: None,
            candidates: Vec::new(),
            warnings: Vec::new(),
        }
    }

    pub(crate) fn push(&mut self, step: Step) {
        self.joint_relevance *= 1.0 - step.p_value;
        self.steps.push(step);
    }

    pub(crate) fn warn(&mut self, msg: String) {
        log::warn!("{msg}");
        self.warnings.push(msg);
    }

    /// Selected covariate indices (0-based) in order of inclusion.
    pub fn selected(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.index).collect()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}
