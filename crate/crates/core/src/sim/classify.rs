//! Classification by fitted values, Hampel outlier flags and the
//! cross-validation boosting loop.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index_serde::one_based;
use crate::linalg::{ols, Dataset};
use crate::select::{select_progau, SelectorConfig};

/// Threshold of the Hampel outlier rule.
pub const HAMPEL_CUTOFF: f64 = 5.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub predicted: Vec<f64>,
    pub misclassified: usize,
    /// Observations with a wrong prediction, 0-based.
    pub wrong: Vec<usize>,
}

fn sorted_labels(truth: &[f64]) -> Vec<f64> {
    let mut labels = truth.to_vec();
    labels.sort_by(f64::total_cmp);
    labels.dedup();
    labels
}

fn nearest_label(f: f64, labels: &[f64]) -> f64 {
    match labels.partition_point(|&l| l <= f) {
        0 => labels[0],
        p if p == labels.len() => labels[p - 1],
        p => {
            let (lo, hi) = (labels[p - 1], labels[p]);
            if f - lo < hi - f {
                lo
            } else {
                hi
            }
        }
    }
}

/// Maps each fitted value to the nearest label, ties going to the larger one.
/// Values outside the label range go to the extreme labels; for two labels
/// this is a threshold at their midpoint (0.5 for 0/1).
pub fn classify(fitted: &[f64], truth: &[f64]) -> Result<Classification> {
    if fitted.len() != truth.len() {
        return Err(Error::InvalidData("fitted values and labels differ in length".into()));
    }
    let labels = sorted_labels(truth);
    if labels.is_empty() {
        return Ok(Classification {
            predicted: Vec::new(),
            misclassified: 0,
            wrong: Vec::new(),
        });
    }
    let predicted: Vec<f64> = fitted.iter().map(|&f| nearest_label(f, &labels)).collect();
    let wrong: Vec<usize> = (0..truth.len()).filter(|&i| predicted[i] != truth[i]).collect();
    Ok(Classification {
        predicted,
        misclassified: wrong.len(),
        wrong,
    })
}

/// Least-squares fitted values on the given columns, with an optional intercept.
pub fn fitted_values(d: &Dataset, columns: &[usize], intercept: bool) -> Result<Vec<f64>> {
    let x = design(d.x(), columns, intercept);
    if x.ncols() == 0 {
        return Ok(vec![0.0; d.n()]);
    }
    let fit = ols(&x, d.y())?;
    Ok((d.y() - fit.residuals).iter().copied().collect())
}

fn design(x: &DMatrix<f64>, columns: &[usize], intercept: bool) -> DMatrix<f64> {
    let d = x.select_columns(columns);
    if intercept {
        d.insert_column(0, 1.0)
    } else {
        d
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outlier {
    #[serde(with = "one_based")]
    pub index: usize,
    pub score: f64,
}

/// Observations with `|r_i| / median|r| > 5.2`. All-zero residuals flag
/// nothing; a zero median with some nonzero residuals leaves the scores
/// undefined and is an error.
pub fn outlier_flags(residuals: &[f64]) -> Result<Vec<Outlier>> {
    if residuals.len() < 3 {
        return Err(Error::InvalidData("outlier scores need at least 3 residuals".into()));
    }
    if residuals.iter().any(|r| !r.is_finite()) {
        return Err(Error::InvalidData("non-finite residual".into()));
    }
    let mut abs: Vec<f64> = residuals.iter().map(|r| r.abs()).collect();
    if abs.iter().all(|a| *a == 0.0) {
        return Ok(Vec::new());
    }
    abs.sort_by(f64::total_cmp);
    let m = abs.len();
    let med = if m % 2 == 1 {
        abs[m / 2]
    } else {
        0.5 * (abs[m / 2 - 1] + abs[m / 2])
    };
    if med == 0.0 {
        return Err(Error::ZeroScale(
            "median absolute residual is zero; outlier scores are undefined".into(),
        ));
    }
    Ok(residuals
        .iter()
        .enumerate()
        .map(|(i, r)| Outlier {
            index: i,
            score: r.abs() / med,
        })
        .filter(|o| o.score > HAMPEL_CUTOFF)
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostRound {
    pub misclassified: usize,
    /// Observations in the sample during this round.
    pub sample_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvBoostResult {
    pub rounds: Vec<BoostRound>,
    /// Observations added by duplicating misclassified ones.
    pub added: usize,
    pub misclassified: usize,
}

/// Leave-one-out classification in which each held-out observation is
/// predicted from the `top` covariates most often selected across an inner
/// leave-one-out loop, refitted by least squares with an intercept.
/// Misclassified observations are duplicated and the loop repeats, at most
/// `max_rounds` times or until nothing is misclassified.
pub fn cv_boost(d: &Dataset, cfg: &SelectorConfig, top: usize, max_rounds: usize) -> Result<CvBoostResult> {
    let mut rows: Vec<usize> = (0..d.n()).collect();
    let mut rounds = Vec::new();
    for _ in 0..max_rounds {
        let sample = d.select_rows(&rows)?;
        let m = sample.n();
        let labels = sorted_labels(sample.y().as_slice());
        let mut wrong = Vec::new();
        for i in 0..m {
            let mut freq: BTreeMap<usize, usize> = BTreeMap::new();
            for l in (0..m).filter(|&l| l != i) {
                let keep: Vec<usize> = (0..m).filter(|&r| r != i && r != l).collect();
                let t = select_progau(&sample.select_rows(&keep)?, cfg, &[])?;
                for j in t.selected() {
                    *freq.entry(j).or_default() += 1;
                }
            }
            let mut ranked: Vec<(usize, usize)> = freq.into_iter().collect();
            ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
            let cols: Vec<usize> = ranked.into_iter().take(top).map(|(j, _)| j).collect();
            let keep: Vec<usize> = (0..m).filter(|&r| r != i).collect();
            let train = sample.select_rows(&keep)?;
            let x = design(train.x(), &cols, true);
            let fit = ols(&x, train.y())?;
            let pred = fit.coefficients[0]
                + cols
                    .iter()
                    .zip(&fit.coefficients[1..])
                    .map(|(&j, b)| b * sample.x()[(i, j)])
                    .sum::<f64>();
            if nearest_label(pred, &labels) != sample.y()[i] {
                wrong.push(rows[i]);
            }
        }
        rounds.push(BoostRound {
            misclassified: wrong.len(),
            sample_size: m,
        });
        if wrong.is_empty() {
            break;
        }
        rows.extend(wrong);
    }
    Ok(CvBoostResult {
        added: rows.len() - d.n(),
        misclassified: rounds.last().map_or(0, |r| r.misclassified),
        rounds,
    })
}
