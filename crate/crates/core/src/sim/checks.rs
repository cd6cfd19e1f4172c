//! Monte Carlo checks of the false-discovery bound and of consistency under
//! orthogonal designs.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::rng::{SimRng, Stream};
use super::scenario::{Covariance, Noise, ScenarioSpec, Signal};
use crate::error::{Error, Result};
use crate::linalg::Dataset;
use crate::parallel::Workers;
use crate::select::{select_progau, SelectionTrace, SelectorConfig, StopReason};

/// Covariates a trace recorded at a larger level would have selected at
/// `alpha`: the leading steps whose p-values do not exceed it.
pub fn selected_at_level(trace: &SelectionTrace, alpha: f64) -> Vec<usize> {
    trace
        .steps
        .iter()
        .take_while(|s| s.p_value <= alpha)
        .map(|s| s.index)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FdrCheck {
    pub n: usize,
    pub q: usize,
    pub alpha: f64,
    pub replications: usize,
    pub mean_false: f64,
    pub std_error: f64,
    pub bound_low: f64,
    pub bound_high: f64,
    /// Whether the mean lies in the band widened by three standard errors.
    pub inside: bool,
}

impl FdrCheck {
    fn from_counts(n: usize, q: usize, alpha: f64, counts: &[f64]) -> Self {
        let m = counts.len() as f64;
        let mean = counts.iter().sum::<f64>() / m;
        let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (m - 1.0).max(1.0);
        let se = (var / m).sqrt();
        let (lo, hi) = (alpha, alpha / (1.0 - alpha));
        Self {
            n,
            q,
            alpha,
            replications: counts.len(),
            mean_false: mean,
            std_error: se,
            bound_low: lo,
            bound_high: hi,
            inside: mean >= lo - 3.0 * se && mean <= hi + 3.0 * se,
        }
    }
}

/// Pure-noise design: independent standard Gaussian covariates and response.
pub fn pure_noise(n: usize, q: usize, replications: usize, seed: u64) -> ScenarioSpec {
    ScenarioSpec {
        name: "pure-noise".into(),
        n,
        q,
        covariance: Covariance::Independent,
        signal: Signal::None,
        noise: Noise::Gauss { sigma: 1.0 },
        replications,
        seed,
    }
}

/// Number of false discoveries on pure-noise data for every level in `alphas`.
/// Each replication is selected once at the largest level.
pub fn fdr_bound_check(
    n: usize,
    q: usize,
    alphas: &[f64],
    replications: usize,
    seed: u64,
    workers: &Workers,
) -> Result<Vec<FdrCheck>> {
    let spec = pure_noise(n, q, replications, seed);
    spec.validate()?;
    let top = alphas.iter().copied().fold(f64::NAN, f64::max);
    let cfg = SelectorConfig::with_alpha(top)?;
    for &a in alphas {
        SelectorConfig::with_alpha(a)?;
    }
    let traces: Vec<Result<SelectionTrace>> = workers.map(replications, |r| {
        let g = spec.generate(r as u64)?;
        select_progau(&g.data, &cfg, &[])
    });
    let traces: Vec<SelectionTrace> = traces.into_iter().collect::<Result<_>>()?;
    Ok(alphas
        .iter()
        .map(|&a| {
            let counts: Vec<f64> = traces.iter().map(|t| selected_at_level(t, a).len() as f64).collect();
            FdrCheck::from_counts(n, q, a, &counts)
        })
        .collect())
}

/// Orthogonal design with `k` equal active coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyDesign {
    pub n: usize,
    pub q: usize,
    pub k: usize,
    pub tau: f64,
    /// Squared coefficient as a multiple of the boundary value.
    pub strength: f64,
    pub sigma: f64,
    pub alpha: f64,
    pub replications: usize,
    pub seed: u64,
}

impl ConsistencyDesign {
    /// The common `beta^2` at which, with `k` equal coefficients and
    /// orthogonal columns of squared norm `n`, the first inclusion meets
    /// `beta^2 = (sum of the other beta^2 + sigma^2) tau log q / n` with equality.
    pub fn boundary_beta2(&self) -> Result<f64> {
        let c = self.tau * (self.q as f64).ln() / self.n as f64;
        let denom = 1.0 - self.k.saturating_sub(1) as f64 * c;
        if !(denom > 0.0) {
            return Err(Error::Config(format!(
                "no coefficient satisfies the condition for k = {} at n = {}, q = {}",
                self.k, self.n, self.q
            )));
        }
        Ok(self.sigma * self.sigma * c / denom)
    }

    pub fn beta(&self) -> Result<f64> {
        Ok((self.strength * self.boundary_beta2()?).sqrt())
    }

    /// Active columns are orthonormalized and scaled to squared norm `n`; the
    /// remaining columns are projected off their span and rescaled likewise.
    pub fn generate(&self, replication: u64) -> Result<Dataset> {
        let (n, q, k) = (self.n, self.q, self.k);
        if k >= n || k > q {
            return Err(Error::Config(format!("k = {k} too large for n = {n}, q = {q}")));
        }
        let mut rng = SimRng::new(self.seed, replication, Stream::Design);
        let mut x = DMatrix::from_fn(n, q, |_, _| rng.gaussian());
        let root_n = (n as f64).sqrt();
        if k > 0 {
            let qmat = x.columns(0, k).into_owned().qr().q();
            for j in k..q {
                let c = x.column(j).into_owned();
                let proj = &qmat * (qmat.transpose() * &c);
                let r = c - proj;
                let s = root_n / r.norm();
                x.set_column(j, &(r * s));
            }
            x.columns_mut(0, k).copy_from(&(qmat * root_n));
        } else {
            for mut c in x.column_iter_mut() {
                let s = root_n / c.norm();
                c *= s;
            }
        }
        let beta = self.beta()?;
        let mut noise = SimRng::new(self.seed, replication, Stream::Noise);
        let y = DVector::from_fn(n, |i, _| {
            (0..k).map(|j| x[(i, j)]).sum::<f64>() * beta + self.sigma * noise.gaussian()
        });
        Dataset::new(y, x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyResult {
    pub design: ConsistencyDesign,
    pub beta: f64,
    pub recovered: usize,
    pub recovery_rate: f64,
    pub failures: usize,
}

/// Fraction of replications in which least-squares selection returns
/// exactly the active set.
pub fn consistency_check(design: &ConsistencyDesign, workers: &Workers) -> Result<ConsistencyResult> {
    let beta = design.beta()?;
    let cfg = SelectorConfig::with_alpha(design.alpha)?;
    let outcomes: Vec<Result<bool>> = workers.map(design.replications, |r| {
        let d = design.generate(r as u64)?;
        let t = select_progau(&d, &cfg, &[])?;
        let mut s = t.selected();
        s.sort_unstable();
        Ok(t.stop_reason != StopReason::MaxSteps && s == (0..design.k).collect::<Vec<_>>())
    });
    let failures = outcomes.iter().filter(|o| o.is_err()).count();
    let recovered = outcomes.iter().filter(|o| matches!(o, Ok(true))).count();
    Ok(ConsistencyResult {
        design: design.clone(),
        beta,
        recovered,
        recovery_rate: recovered as f64 / design.replications.max(1) as f64,
        failures,
    })
}
