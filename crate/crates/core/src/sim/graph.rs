//! Node-wise graph construction: each variable is regressed on all others.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index_serde::one_based;
use crate::linalg::Dataset;
use crate::parallel::Workers;
use crate::select::{select_progau, SelectorConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeRule {
    /// An edge when either regression selects the other variable.
    #[default]
    Or,
    /// An edge only when both regressions do.
    And,
}

/// Undirected edge `a < b` with the regressions that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    #[serde(with = "one_based")]
    pub a: usize,
    #[serde(with = "one_based")]
    pub b: usize,
    /// The regression of `a` selected `b`.
    pub from_a: bool,
    /// The regression of `b` selected `a`.
    pub from_b: bool,
}

impl Edge {
    pub fn kept(&self, rule: EdgeRule) -> bool {
        match rule {
            EdgeRule::Or => self.from_a || self.from_b,
            EdgeRule::And => self.from_a && self.from_b,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeFailure {
    #[serde(with = "one_based")]
    pub node: usize,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphResult {
    pub nodes: usize,
    pub alpha: f64,
    /// Cutoff used in each node regression, `alpha / nodes`.
    pub node_alpha: f64,
    pub rule: EdgeRule,
    /// Every pair discovered in at least one direction, sorted.
    pub edges: Vec<Edge>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<NodeFailure>,
}

impl GraphResult {
    pub fn edges_under(&self, rule: EdgeRule) -> Vec<(usize, usize)> {
        self.edges.iter().filter(|e| e.kept(rule)).map(|e| (e.a, e.b)).collect()
    }

    pub fn has_edge(&self, a: usize, b: usize, rule: EdgeRule) -> bool {
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        self.edges.iter().any(|e| e.a == a && e.b == b && e.kept(rule))
    }
}

fn node_neighbours(x: &DMatrix<f64>, j: usize, cfg: &SelectorConfig) -> Result<Vec<usize>> {
    let q = x.ncols();
    let others: Vec<usize> = (0..q).filter(|&k| k != j).collect();
    let y = DVector::from(x.column(j).into_owned());
    let d = Dataset::new(y, x.select_columns(&others))?;
    let t = select_progau(&d, cfg, &[])?;
    Ok(t.selected().into_iter().map(|k| others[k]).collect())
}

/// Regresses every column of `x` on the others by least-squares selection at
/// level `alpha / q`. Node regressions run on `workers`.
pub fn build_graph(x: &DMatrix<f64>, alpha: f64, rule: EdgeRule, workers: &Workers) -> Result<GraphResult> {
    let q = x.ncols();
    if q == 0 {
        return Err(Error::InvalidData("no variables".into()));
    }
    SelectorConfig::with_alpha(alpha)?;
    let node_alpha = alpha / q as f64;
    let mut result = GraphResult {
        nodes: q,
        alpha,
        node_alpha,
        rule,
        edges: Vec::new(),
        failures: Vec::new(),
    };
    if q == 1 {
        return Ok(result);
    }
    let cfg = SelectorConfig::with_alpha(node_alpha)?;
    let found = workers.map(q, |j| node_neighbours(x, j, &cfg));
    let mut adj = vec![vec![false; q]; q];
    for (j, f) in found.into_iter().enumerate() {
        match f {
            Ok(nb) => nb.into_iter().for_each(|k| adj[j][k] = true),
            Err(e) => result.failures.push(NodeFailure {
                node: j,
                error: e.to_string(),
            }),
        }
    }
    for a in 0..q {
        for b in a + 1..q {
            if adj[a][b] || adj[b][a] {
                result.edges.push(Edge {
                    a,
                    b,
                    from_a: adj[a][b],
                    from_b: adj[b][a],
                });
            }
        }
    }
    Ok(result)
}
