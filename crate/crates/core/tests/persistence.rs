use noisestep::ingest::{load_report, load_trace, save_report, save_trace};
use noisestep::select::{select_progau, SelectorConfig};
use noisestep::sim::{builtin, run_study, Procedure, StudyOptions};
use noisestep::{Dataset, SelectionTrace};

fn five_step_trace() -> SelectionTrace {
    let n = 40;
    let cols: Vec<Vec<f64>> = (0..8)
        .map(|j| (0..n).map(|i| (((i + 1) * (j + 3) * 7919) % 101) as f64 / 50.0 - 1.0).collect())
        .collect();
    let y = (0..n)
        .map(|i| 3.0 * cols[0][i] - 2.0 * cols[3][i] + cols[5][i] + 0.7 * cols[6][i] - 0.5 * cols[1][i])
        .collect();
    let d = Dataset::from_columns(y, &cols).unwrap();
    let cfg = SelectorConfig {
        max_steps: Some(5),
        ..SelectorConfig::with_alpha(0.5).unwrap()
    };
    select_progau(&d, &cfg, &[]).unwrap()
}

#[test]
fn trace_roundtrip_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let t = five_step_trace();
    assert_eq!(t.len(), 5);
    let p = dir.path().join("t.json");
    save_trace(&t, &p).unwrap();
    let back = load_trace(&p).unwrap();
    assert_eq!(back, t);
    for (a, b) in back.steps.iter().zip(&t.steps) {
        assert_eq!(a.p_value.to_bits(), b.p_value.to_bits());
    }
    let text = std::fs::read_to_string(&p).unwrap();
    assert!(text.contains(&format!("\"index\": {}", t.steps[0].index + 1)));
}

#[test]
fn empty_trace_roundtrip() {
    let n = 12;
    let d = Dataset::from_columns(
        (0..n).map(|i| ((i * 5) % 7) as f64).collect(),
        &[(0..n).map(|i| ((i * 3) % 4) as f64).collect()],
    )
    .unwrap();
    let t = select_progau(&d, &SelectorConfig::with_alpha(1e-6).unwrap(), &[]).unwrap();
    assert!(t.is_empty());
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("e.json");
    save_trace(&t, &p).unwrap();
    assert_eq!(load_trace(&p).unwrap(), t);
}

#[test]
fn report_roundtrip_is_exact() {
    let spec = {
        let mut s = builtin("equicorr-T2", 3, false).unwrap();
        s.replications = 6;
        s
    };
    let opts = StudyOptions {
        coverage: Some(0.95),
        ..Default::default()
    };
    let r = run_study(&spec, Procedure::Progau, &SelectorConfig::default(), &opts).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("r.json");
    save_report(&r, &p).unwrap();
    let back = load_report(&p).unwrap();
    assert_eq!(back.records, r.records);
    assert_eq!(back.scenario, r.scenario);
    assert_eq!(serde_json::to_string(&back).unwrap(), serde_json::to_string(&r).unwrap());
}
