use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::rng::{SimRng, Stream};
use crate::error::{Error, Result};
use crate::glm::logistic;
use crate::linalg::Dataset;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Covariance {
    Independent,
    /// All pairwise correlations equal `rho`, via one shared factor.
    EquiCorr { rho: f64 },
    /// Stationary AR(1) along the covariate index: correlation `rho^|i-j|`.
    Ar1 { rho: f64 },
    /// Independent AR(1) chains on consecutive blocks of `block` covariates.
    BlockAr1 { block: usize, rho: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Signal {
    None,
    /// `beta_j ~ U(lo, hi)` for the first `s0` covariates, redrawn per replication.
    UniformCoef { s0: usize, lo: f64, hi: f64 },
    /// `beta_j = value` for the first `k` covariates.
    FixedCoef { k: usize, value: f64 },
    /// `beta_j = coef` for covariates `offset .. offset + count`.
    LogitSum { offset: usize, count: usize, coef: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Noise {
    /// `y = X beta + sigma * eps`.
    Gauss { sigma: f64 },
    /// `y_i ~ Bernoulli(logistic(x_i' beta))`.
    BernoulliLogit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub name: String,
    pub n: usize,
    pub q: usize,
    pub covariance: Covariance,
    pub signal: Signal,
    pub noise: Noise,
    pub replications: usize,
    pub seed: u64,
}

/// One simulated data set.
#[derive(Debug, Clone)]
pub struct Generated {
    /// Unstandardized data.
    pub data: Dataset,
    pub beta: Vec<f64>,
    /// Indices of the nonzero coefficients.
    pub truth: Vec<usize>,
}

fn check_rho(rho: f64, lo_inclusive: bool) -> Result<()> {
    let ok = rho < 1.0 && if lo_inclusive { rho >= 0.0 } else { rho > -1.0 };
    if !ok || !rho.is_finite() {
        return Err(Error::Config(format!("correlation {rho} out of range")));
    }
    Ok(())
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::Config(format!("n = {} is below 3", self.n)));
        }
        if self.q == 0 {
            return Err(Error::Config("q must be positive".into()));
        }
        if self.replications == 0 {
            return Err(Error::Config("replications must be positive".into()));
        }
        match self.covariance {
            Covariance::Independent => {}
            Covariance::EquiCorr { rho } => check_rho(rho, true)?,
            Covariance::Ar1 { rho } => check_rho(rho, false)?,
            Covariance::BlockAr1 { block, rho } => {
                check_rho(rho, false)?;
                if block == 0 {
                    return Err(Error::Config("block size must be positive".into()));
                }
            }
        }
        let last = match self.signal {
            Signal::None => 0,
            Signal::UniformCoef { s0, lo, hi } => {
                if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
                    return Err(Error::Config(format!("empty coefficient range [{lo}, {hi}]")));
                }
                s0
            }
            Signal::FixedCoef { k, value } => {
                if !value.is_finite() {
                    return Err(Error::Config("coefficient must be finite".into()));
                }
                k
            }
            Signal::LogitSum { offset, count, coef } => {
                if !coef.is_finite() {
                    return Err(Error::Config("coefficient must be finite".into()));
                }
                offset + count
            }
        };
        if last > self.q {
            return Err(Error::Config(format!(
                "signal needs {last} covariates but q = {}",
                self.q
            )));
        }
        if let Noise::Gauss { sigma } = self.noise {
            if !(sigma >= 0.0) || !sigma.is_finite() {
                return Err(Error::Config(format!("noise scale {sigma} must be nonnegative")));
            }
        }
        Ok(())
    }

    /// Covariate matrix for one replication.
    pub fn design(&self, replication: u64) -> DMatrix<f64> {
        let (n, q) = (self.n, self.q);
        let mut rng = SimRng::new(self.seed, replication, Stream::Design);
        match self.covariance {
            Covariance::Independent => DMatrix::from_fn(n, q, |_, _| rng.gaussian()),
            Covariance::EquiCorr { rho } => {
                let z0: Vec<f64> = (0..n).map(|_| rng.gaussian()).collect();
                let (a, b) = (rho.sqrt(), (1.0 - rho).sqrt());
                // from_fn fills column-major, so draws are consumed column by column.
                DMatrix::from_fn(n, q, |i, _| a * z0[i] + b * rng.gaussian())
            }
            Covariance::Ar1 { rho } => ar1(n, q, q, rho, &mut rng),
            Covariance::BlockAr1 { block, rho } => ar1(n, q, block, rho, &mut rng),
        }
    }

    /// Coefficient vector for one replication.
    pub fn coefficients(&self, replication: u64) -> Vec<f64> {
        let mut beta = vec![0.0; self.q];
        match self.signal {
            Signal::None => {}
            Signal::UniformCoef { s0, lo, hi } => {
                let mut rng = SimRng::new(self.seed, replication, Stream::Coefficients);
                for b in beta.iter_mut().take(s0) {
                    *b = rng.uniform_range(lo, hi);
                }
            }
            Signal::FixedCoef { k, value } => beta[..k].fill(value),
            Signal::LogitSum { offset, count, coef } => beta[offset..offset + count].fill(coef),
        }
        beta
    }

    pub fn generate(&self, replication: u64) -> Result<Generated> {
        self.validate()?;
        let x = self.design(replication);
        let beta = self.coefficients(replication);
        let truth: Vec<usize> = (0..self.q).filter(|&j| beta[j] != 0.0).collect();
        let eta = &x * DVector::from_column_slice(&beta);
        let y = match self.noise {
            Noise::Gauss { sigma } => {
                let mut rng = SimRng::new(self.seed, replication, Stream::Noise);
                eta.map(|e| e + sigma * rng.gaussian())
            }
            Noise::BernoulliLogit => {
                let mut rng = SimRng::new(self.seed, replication, Stream::Response);
                eta.map(|e| if rng.bernoulli(logistic(e)) { 1.0 } else { 0.0 })
            }
        };
        Ok(Generated {
            data: Dataset::new(y, x)?,
            beta,
            truth,
        })
    }
}

fn ar1(n: usize, q: usize, block: usize, rho: f64, rng: &mut SimRng) -> DMatrix<f64> {
    let mut x = DMatrix::<f64>::zeros(n, q);
    let s = (1.0 - rho * rho).sqrt();
    for j in 0..q {
        for i in 0..n {
            let z = rng.gaussian();
            x[(i, j)] = if j % block == 0 { z } else { rho * x[(i, j - 1)] + s * z };
        }
    }
    x
}

/// Built-in designs: `equicorr-T2`, `ar1-logit-T1`, `jia-T4`, `toeplitz-logit-T5`.
/// `slow` enables the largest covariate count of the `jia-T4` design.
pub fn builtin(name: &str, seed: u64, slow: bool) -> Result<ScenarioSpec> {
    let spec = match name {
        "equicorr-T2" => ScenarioSpec {
            name: name.into(),
            n: 100,
            q: 500,
            covariance: Covariance::EquiCorr { rho: 0.8 },
            signal: Signal::UniformCoef { s0: 3, lo: 0.0, hi: 2.0 },
            noise: Noise::Gauss { sigma: 1.0 },
            replications: 500,
            seed,
        },
        "ar1-logit-T1" => ScenarioSpec {
            name: name.into(),
            n: 500,
            q: 200,
            covariance: Covariance::Ar1 { rho: 0.5 },
            signal: Signal::LogitSum {
                offset: 1,
                count: 20,
                coef: 0.08,
            },
            noise: Noise::BernoulliLogit,
            replications: 1000,
            seed,
        },
        "jia-T4" => ScenarioSpec {
            name: name.into(),
            n: 250,
            q: if slow { 30_000 } else { 5000 },
            covariance: Covariance::EquiCorr { rho: 0.85 },
            signal: Signal::FixedCoef { k: 20, value: 3.0 },
            noise: Noise::Gauss { sigma: 1.0 },
            replications: 100,
            seed,
        },
        "toeplitz-logit-T5" => ScenarioSpec {
            name: name.into(),
            n: 100,
            q: 500,
            covariance: Covariance::Ar1 { rho: 0.8 },
            signal: Signal::UniformCoef { s0: 3, lo: 0.0, hi: 1.0 },
            noise: Noise::BernoulliLogit,
            replications: 500,
            seed,
        },
        other => return Err(Error::Config(format!("unknown scenario '{other}'"))),
    };
    Ok(spec)
}

pub const BUILTIN_SCENARIOS: [&str; 4] = ["equicorr-T2", "ar1-logit-T1", "jia-T4", "toeplitz-logit-T5"];
