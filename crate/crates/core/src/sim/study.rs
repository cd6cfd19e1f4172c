use serde::{Deserialize, Serialize};

use super::scenario::{Generated, ScenarioSpec};
use crate::error::{Error, Result};
use crate::glm::{kl_select, nl_select, LinkSpec};
use crate::index_serde::one_based_vec;
use crate::parallel::Workers;
use crate::robust::{robust_select, HuberParams};
use crate::select::{confidence_intervals, select_pre1, select_pre2, select_progau, SelectionTrace, SelectorConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Procedure {
    Progau,
    Propre1,
    Propre2,
    Robust,
    Kl,
    /// Nonlinear least squares with the logistic link.
    LsqLogit,
}

impl Procedure {
    pub fn run(self, d: &crate::Dataset, cfg: &SelectorConfig) -> Result<SelectionTrace> {
        match self {
            Procedure::Progau => select_progau(d, cfg, &[]),
            Procedure::Propre1 => select_pre1(d, cfg),
            Procedure::Propre2 => select_pre2(d, cfg),
            Procedure::Robust => robust_select(d, cfg, &HuberParams::default()),
            Procedure::Kl => kl_select(d, cfg),
            Procedure::LsqLogit => nl_select(d, cfg, &LinkSpec::logistic()),
        }
    }
}

/// Outcome of one replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRecord {
    pub replication: u64,
    #[serde(with = "one_based_vec")]
    pub selected: Vec<usize>,
    pub true_pos: usize,
    pub false_pos: usize,
    pub false_neg: usize,
    /// Fraction of active covariates whose interval covers the coefficient.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cov_s0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub len_s0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cov_s0c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub len_s0c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl ReplicationRecord {
    fn failed(replication: u64, e: &Error) -> Self {
        Self {
            replication,
            selected: Vec::new(),
            true_pos: 0,
            false_pos: 0,
            false_neg: 0,
            cov_s0: None,
            len_s0: None,
            cov_s0c: None,
            len_s0c: None,
            error: Some(e.to_string()),
        }
    }
}

/// Aggregates over the successful replications.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricsReport {
    pub scenario: ScenarioSpec,
    pub procedure: Procedure,
    pub config: SelectorConfig,
    pub coverage: Option<f64>,
    /// Size of the true active set.
    pub s0: usize,
    pub completed: usize,
    pub failed: usize,
    pub power: f64,
    pub fwer: f64,
    pub true_pos_mean: f64,
    pub false_pos_mean: f64,
    pub false_neg_mean: f64,
    /// Mean of `false_pos / max(1, selected)`.
    pub false_discovery_mean: f64,
    pub avgcov_s0: Option<f64>,
    pub avglen_s0: Option<f64>,
    pub avgcov_s0c: Option<f64>,
    pub avglen_s0c: Option<f64>,
    pub records: Vec<ReplicationRecord>,
}

#[derive(Debug, Clone, Default)]
pub struct StudyOptions {
    /// Interval coverage; intervals are skipped when `None`.
    pub coverage: Option<f64>,
    /// Parallelism over replications.
    pub workers: Workers,
}

/// Set counts and interval summaries for one selection against the truth.
pub fn score_replication(
    replication: u64,
    g: &Generated,
    selected: Vec<usize>,
    coverage: Option<f64>,
) -> Result<ReplicationRecord> {
    let q = g.beta.len();
    let mut is_true = vec![false; q];
    for &j in &g.truth {
        is_true[j] = true;
    }
    let true_pos = selected.iter().filter(|&&j| is_true[j]).count();
    let mut rec = ReplicationRecord {
        replication,
        true_pos,
        false_pos: selected.len() - true_pos,
        false_neg: g.truth.len() - true_pos,
        selected,
        cov_s0: None,
        len_s0: None,
        cov_s0c: None,
        len_s0c: None,
        error: None,
    };
    if let Some(gamma) = coverage {
        let ci = confidence_intervals(&g.data, &rec.selected, gamma)?;
        let summary = |want: bool| {
            let (mut cov, mut len, mut m) = (0.0, 0.0, 0usize);
            for c in ci.iter().filter(|c| is_true[c.index] == want) {
                m += 1;
                if c.covers(g.beta[c.index]) {
                    cov += 1.0;
                }
                len += c.length();
            }
            (m > 0).then(|| (cov / m as f64, len / m as f64))
        };
        if let Some((c, l)) = summary(true) {
            rec.cov_s0 = Some(c);
            rec.len_s0 = Some(l);
        }
        if let Some((c, l)) = summary(false) {
            rec.cov_s0c = Some(c);
            rec.len_s0c = Some(l);
        }
    }
    Ok(rec)
}

fn mean_of(records: &[&ReplicationRecord], f: impl Fn(&ReplicationRecord) -> Option<f64>) -> Option<f64> {
    let vals: Vec<f64> = records.iter().filter_map(|r| f(r)).collect();
    (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
}

/// Aggregates per-replication records. Records carrying an error are excluded.
pub fn summarize(
    scenario: ScenarioSpec,
    procedure: Procedure,
    config: SelectorConfig,
    coverage: Option<f64>,
    s0: usize,
    records: Vec<ReplicationRecord>,
) -> MetricsReport {
    let ok: Vec<&ReplicationRecord> = records.iter().filter(|r| r.error.is_none()).collect();
    let m = ok.len().max(1) as f64;
    let avg = |f: &dyn Fn(&ReplicationRecord) -> f64| ok.iter().map(|r| f(r)).sum::<f64>() / m;
    let power = avg(&|r| {
        if s0 == 0 {
            1.0
        } else {
            r.true_pos as f64 / s0 as f64
        }
    });
    let fwer = avg(&|r| f64::from(u8::from(r.false_pos > 0)));
    MetricsReport {
        power,
        fwer,
        true_pos_mean: avg(&|r| r.true_pos as f64),
        false_pos_mean: avg(&|r| r.false_pos as f64),
        false_neg_mean: avg(&|r| r.false_neg as f64),
        false_discovery_mean: avg(&|r| r.false_pos as f64 / r.selected.len().max(1) as f64),
        avgcov_s0: mean_of(&ok, |r| r.cov_s0),
        avglen_s0: mean_of(&ok, |r| r.len_s0),
        avgcov_s0c: mean_of(&ok, |r| r.cov_s0c),
        avglen_s0c: mean_of(&ok, |r| r.len_s0c),
        completed: ok.len(),
        failed: records.len() - ok.len(),
        scenario,
        procedure,
        config,
        coverage,
        s0,
        records,
    }
}

/// Runs `procedure` on every replication of `spec`. Replications run on
/// `opts.workers`; each selection itself is sequential. Failures are recorded
/// per replication.
pub fn run_study(
    spec: &ScenarioSpec,
    procedure: Procedure,
    cfg: &SelectorConfig,
    opts: &StudyOptions,
) -> Result<MetricsReport> {
    spec.validate()?;
    cfg.validate(spec.n)?;
    if let Some(g) = opts.coverage {
        if !(0.0..=1.0).contains(&g) {
            return Err(Error::Config(format!("coverage must lie in [0, 1], got {g}")));
        }
    }
    let inner = SelectorConfig {
        workers: Workers::sequential(),
        ..cfg.clone()
    };
    let s0 = spec.coefficients(0).iter().filter(|b| **b != 0.0).count();
    let records = opts.workers.map(spec.replications, |r| {
        let rep = r as u64;
        let run = || -> Result<ReplicationRecord> {
            let g = spec.generate(rep)?;
            let trace = procedure.run(&g.data, &inner)?;
            score_replication(rep, &g, trace.selected(), opts.coverage)
        };
        run().unwrap_or_else(|e| ReplicationRecord::failed(rep, &e))
    });
    Ok(summarize(spec.clone(), procedure, inner, opts.coverage, s0, records))
}
