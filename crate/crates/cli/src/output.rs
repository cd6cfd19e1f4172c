//! Plain-text tables. Covariate positions are printed 1-based.

use std::fmt::Write;

use noisestep::select::{CoefInterval, Step};
use noisestep::sim::{EdgeRule, GraphResult, MetricsReport, Outlier};
use noisestep::SelectionTrace;

pub fn index_list(ix: &[usize]) -> String {
    ix.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(", ")
}

fn label(index: usize, names: Option<&[String]>) -> String {
    match names.and_then(|ns| ns.get(index)) {
        Some(n) => format!("{n} ({})", index + 1),
        None => (index + 1).to_string(),
    }
}

pub fn p_value(p: f64) -> String {
    if p < 5e-5 {
        "0.0000".to_string()
    } else {
        format!("{p:.2e}")
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or("-".to_string(), |x| format!("{x:.4}"))
}

/// Steps as columns: covariate, ss ratio and p-value rows.
pub fn step_table(t: &SelectionTrace, names: Option<&[String]>) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "method {:?}  n {}  q {}  alpha {}",
        t.method, t.n, t.q, t.alpha
    );
    for (title, steps) in [("candidates", &t.candidates), ("steps", &t.steps)] {
        if steps.is_empty() && title == "candidates" {
            continue;
        }
        if steps.is_empty() {
            let _ = writeln!(out, "no covariate selected");
            continue;
        }
        let cells: Vec<[String; 3]> = steps
            .iter()
            .map(|s: &Step| [label(s.index, names), format!("{:.4}", s.ratio()), p_value(s.p_value)])
            .collect();
        let width = cells.iter().flatten().map(String::len).max().unwrap_or(0);
        let _ = writeln!(out, "{title}");
        for (r, head) in ["covariate", "ss ratio", "p-value"].iter().enumerate() {
            let _ = write!(out, "{head:<10}");
            for c in &cells {
                let _ = write!(out, " {:>width$}", c[r]);
            }
            out.push('\n');
        }
    }
    match &t.stopped_at {
        Some(s) => {
            let _ = writeln!(
                out,
                "stopped at covariate {} with p-value {}",
                label(s.index, names),
                p_value(s.p_value)
            );
        }
        None => {
            let reason = serde_json::to_string(&t.stop_reason).unwrap_or_default();
            let _ = writeln!(out, "stopped: {}", reason.trim_matches('"'));
        }
    }
    let _ = writeln!(out, "selected: {}", index_list(&t.selected().iter().map(|i| i + 1).collect::<Vec<_>>()));
    for w in &t.warnings {
        let _ = writeln!(out, "warning: {w}");
    }
    out
}

pub fn interval_table(ci: &[CoefInterval], gamma: f64) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{gamma} intervals");
    let _ = writeln!(
        out,
        "{:>9} {:>6} {:>12} {:>12} {:>12} {:>12}",
        "covariate", "active", "estimate", "std error", "lower", "upper"
    );
    for c in ci {
        if let Some(e) = &c.error {
            let _ = writeln!(out, "{:>9} {:>6} {e}", c.index + 1, c.active);
            continue;
        }
        let _ = writeln!(
            out,
            "{:>9} {:>6} {:>12.5} {:>12.5} {:>12.5} {:>12.5}",
            c.index + 1,
            c.active,
            c.estimate,
            c.std_error,
            c.lower,
            c.upper
        );
    }
    out
}

pub fn outlier_table(flags: &[Outlier]) -> String {
    let mut out = String::new();
    if flags.is_empty() {
        let _ = writeln!(out, "no outliers");
    } else {
        let _ = writeln!(out, "outliers (observation: |r| / median |r|)");
        for o in flags {
            let _ = writeln!(out, "{:>6}: {:.3}", o.index + 1, o.score);
        }
    }
    out
}

pub fn metrics_table(r: &MetricsReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "scenario {}  procedure {:?}  n {}  q {}  s0 {}  alpha {}",
        r.scenario.name,
        r.procedure,
        r.scenario.n,
        r.scenario.q,
        r.s0,
        r.config.alpha()
    );
    let _ = writeln!(out, "replications {} completed, {} failed", r.completed, r.failed);
    let rows: [(&str, String); 9] = [
        ("power", format!("{:.4}", r.power)),
        ("fwer", format!("{:.4}", r.fwer)),
        ("true positives", format!("{:.4}", r.true_pos_mean)),
        ("false positives", format!("{:.4}", r.false_pos_mean)),
        ("false negatives", format!("{:.4}", r.false_neg_mean)),
        ("false discovery", format!("{:.4}", r.false_discovery_mean)),
        ("avgcov S0", opt(r.avgcov_s0)),
        ("avglen S0", opt(r.avglen_s0)),
        ("avgcov S0c", opt(r.avgcov_s0c)),
    ];
    for (k, v) in rows {
        let _ = writeln!(out, "{k:<16} {v:>10}");
    }
    let _ = writeln!(out, "{:<16} {:>10}", "avglen S0c", opt(r.avglen_s0c));
    out
}

pub fn graph_table(g: &GraphResult, names: Option<&[String]>) -> String {
    let mut out = String::new();
    let edges: Vec<_> = g.edges.iter().filter(|e| e.kept(g.rule)).collect();
    let rule = match g.rule {
        EdgeRule::Or => "or",
        EdgeRule::And => "and",
    };
    let _ = writeln!(
        out,
        "nodes {}  alpha {}  node alpha {:.3e}  rule {rule}",
        g.nodes, g.alpha, g.node_alpha
    );
    let _ = writeln!(out, "edges {}", edges.len());
    for e in edges {
        let _ = writeln!(out, "{} -- {}", label(e.a, names), label(e.b, names));
    }
    for f in &g.failures {
        let _ = writeln!(out, "node {} failed: {}", f.node + 1, f.error);
    }
    out
}
