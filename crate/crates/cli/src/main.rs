//! `noisestep` command-line interface.

mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use noisestep::glm::{kl_fit, kl_select, nl_fit, nl_select, LinkSpec};
use noisestep::ingest::{load, load_json, load_matrix, save_json, ColumnRef, ResponseSource, TableSource};
use noisestep::linalg::{ols, Dataset};
use noisestep::robust::{initial_scale, m_fit, robust_select, HuberParams};
use noisestep::select::{confidence_intervals, relevance_scan, select, Precondition, Rule, SelectorConfig};
use noisestep::sim::{
    build_graph, builtin, outlier_flags, run_study, EdgeRule, GraphResult, MetricsReport, Procedure,
    ScenarioSpec, StudyOptions, BUILTIN_SCENARIOS,
};
use noisestep::{Error, SelectionTrace, Workers};

#[derive(Parser)]
#[command(name = "noisestep", version, about = "Stepwise covariate selection against Gaussian-noise covariates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Select covariates for one data set and print the step table.
    Select(SelectArgs),
    /// Run a simulation study and report power, FWER and false-discovery counts.
    Simulate(SimulateArgs),
    /// Build a graph by regressing every variable on all others.
    Graph(GraphArgs),
    /// Repeat least-squares selection, removing selected covariates, until nothing is selected.
    Scan(ScanArgs),
    /// Print the text tables of a saved JSON trace, report or graph.
    Report(ReportArgs),
}

#[derive(Args, Clone)]
struct DataArgs {
    /// Delimited data file; rows are observations unless --transpose is given.
    #[arg(long, value_name = "PATH")]
    data: PathBuf,
    /// Field delimiter [default: tab for .tsv/.txt files, comma otherwise].
    #[arg(long, value_name = "CHAR")]
    delimiter: Option<char>,
    /// The file has no header row [default: off].
    #[arg(long)]
    no_header: bool,
    /// Rows of the file are variables and columns are observations [default: off].
    #[arg(long)]
    transpose: bool,
}

impl DataArgs {
    fn source(&self) -> Result<TableSource, Error> {
        let mut src = TableSource::new(&self.data);
        if let Some(c) = self.delimiter {
            if !c.is_ascii() {
                return Err(Error::Config(format!("delimiter '{c}' must be a single ASCII character")));
            }
            src.delimiter = c as u8;
        }
        src.header = !self.no_header;
        src.transpose = self.transpose;
        Ok(src)
    }
}

#[derive(Args, Clone)]
struct ResponseArgs {
    /// Response column, by header name or 1-based position.
    #[arg(long, value_name = "COLUMN", default_value = "1", conflicts_with = "response_file")]
    response: String,
    /// Read the response from a separate one-column file instead [default: none].
    #[arg(long, value_name = "PATH")]
    response_file: Option<PathBuf>,
}

impl ResponseArgs {
    fn source(&self) -> Result<ResponseSource, Error> {
        Ok(match &self.response_file {
            Some(p) => ResponseSource::File(p.clone()),
            None => ResponseSource::Column(self.response.parse::<ColumnRef>()?),
        })
    }

    fn describe(&self) -> String {
        match &self.response_file {
            Some(p) => format!("file:{}", p.display()),
            None => self.response.clone(),
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum MethodArg {
    Lsq,
    Huber,
    LogitLs,
    Kl,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum RuleArg {
    Exact,
    Asymptotic,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum PreconditionArg {
    None,
    Pre1,
    Pre2,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum ProcedureArg {
    Progau,
    Propre1,
    Propre2,
    Robust,
    Kl,
    LsqLogit,
}

impl From<ProcedureArg> for Procedure {
    fn from(p: ProcedureArg) -> Self {
        match p {
            ProcedureArg::Progau => Procedure::Progau,
            ProcedureArg::Propre1 => Procedure::Propre1,
            ProcedureArg::Propre2 => Procedure::Propre2,
            ProcedureArg::Robust => Procedure::Robust,
            ProcedureArg::Kl => Procedure::Kl,
            ProcedureArg::LsqLogit => Procedure::LsqLogit,
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum EdgeRuleArg {
    Or,
    And,
}

#[derive(Args)]
struct SelectArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    response: ResponseArgs,
    /// Selection method.
    #[arg(long, value_enum, default_value = "lsq")]
    method: MethodArg,
    /// Stop at the first step whose p-value exceeds this level.
    #[arg(long, default_value_t = 0.01)]
    alpha: f64,
    /// Stopping rule for least squares.
    #[arg(long, value_enum, default_value = "exact")]
    rule: RuleArg,
    /// Preconditioning for least squares.
    #[arg(long, value_enum, default_value = "none")]
    precondition: PreconditionArg,
    /// Candidate level of the first phase of pre2.
    #[arg(long, default_value_t = 0.5)]
    pre2_alpha: f64,
    /// Maximum number of included covariates [default: n - 2].
    #[arg(long, value_name = "K")]
    max_steps: Option<usize>,
    /// Huber tuning constant.
    #[arg(long, default_value_t = 1.0)]
    huber_c: f64,
    /// Fit the logistic procedures without an intercept [default: off].
    #[arg(long)]
    no_intercept: bool,
    /// Print confidence intervals of this coverage for every covariate [default: none].
    #[arg(long, value_name = "GAMMA")]
    ci: Option<f64>,
    /// Flag outlying observations of the final fit by the Hampel 5.2 rule [default: off].
    #[arg(long)]
    outliers: bool,
    /// Worker threads for candidate scoring.
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Also write the results as JSON to this file [default: none].
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Built-in scenario name or a JSON scenario file.
    #[arg(long, value_name = "NAME|PATH")]
    scenario: String,
    /// Procedure [default: lsq-logit for ar1-logit-T1, kl for toeplitz-logit-T5, progau otherwise].
    #[arg(long, value_enum)]
    procedure: Option<ProcedureArg>,
    /// Number of replications [default: the scenario's].
    #[arg(long)]
    reps: Option<usize>,
    /// Random seed.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Override the sample size [default: the scenario's].
    #[arg(long)]
    n: Option<usize>,
    /// Override the number of covariates [default: the scenario's].
    #[arg(long)]
    q: Option<usize>,
    /// Selection level.
    #[arg(long, default_value_t = 0.01)]
    alpha: f64,
    /// Also compute intervals of this coverage and report cover and length [default: none].
    #[arg(long, value_name = "GAMMA")]
    ci: Option<f64>,
    /// Worker threads over replications.
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Allow the largest built-in designs [default: off].
    #[arg(long)]
    slow: bool,
    /// Also write the report as JSON to this file [default: none].
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GraphArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Overall level; each node regression uses alpha / q.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Edge rule combining the two regressions of a pair.
    #[arg(long, value_enum, default_value = "or")]
    rule: EdgeRuleArg,
    /// Worker threads over nodes.
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Also write the graph as JSON to this file [default: none].
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScanArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    response: ResponseArgs,
    /// Selection level of every run.
    #[arg(long, default_value_t = 0.01)]
    alpha: f64,
    /// Worker threads for candidate scoring.
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Also write the runs as JSON to this file [default: none].
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// JSON file written by --out of select, simulate, graph or scan.
    #[arg(long, value_name = "PATH")]
    input: PathBuf,
}

fn config(alpha: f64, threads: usize) -> Result<SelectorConfig, Error> {
    let mut cfg = SelectorConfig::with_alpha(alpha)?;
    cfg.workers = Workers::new(threads)?;
    Ok(cfg)
}

fn check_threads(threads: usize) -> Result<(), Error> {
    if threads == 0 {
        return Err(Error::Config("--threads must be at least 1".into()));
    }
    Ok(())
}

fn echo(value: &serde_json::Value) {
    println!("config {value}");
}

fn write_out<T: Serialize>(path: Option<&Path>, value: &T) -> Result<(), Error> {
    if let Some(p) = path {
        save_json(value, p)?;
        println!("wrote {}", p.display());
    }
    Ok(())
}

/// Residuals of the final fit of the chosen method.
fn final_residuals(d: &Dataset, a: &SelectArgs, trace: &SelectionTrace) -> Result<Vec<f64>, Error> {
    let s = d.standardize()?;
    let active = trace.selected();
    let r: Vec<f64> = match a.method {
        MethodArg::Lsq => {
            if active.is_empty() {
                s.y().iter().copied().collect()
            } else {
                ols(&s.design(&active), s.y())?.residuals.iter().copied().collect()
            }
        }
        MethodArg::Huber => {
            let p = HuberParams::new(a.huber_c)?;
            let scale = initial_scale(s.y().as_slice())?;
            m_fit(&s, &active, &scale, &p)?.residuals.iter().copied().collect()
        }
        MethodArg::LogitLs => nl_fit(&s, &active, &LinkSpec::logistic(), !a.no_intercept)?
            .residuals
            .iter()
            .copied()
            .collect(),
        MethodArg::Kl => {
            let f = kl_fit(&s, &active, !a.no_intercept)?;
            s.y().iter().zip(f.probabilities.iter()).map(|(y, p)| y - p).collect()
        }
    };
    Ok(r)
}

fn run_select(a: &SelectArgs) -> Result<(), Error> {
    check_threads(a.threads)?;
    if !(a.huber_c > 0.0) {
        return Err(Error::Config(format!("--huber-c must be positive, got {}", a.huber_c)));
    }
    let mut cfg = config(a.alpha, a.threads)?;
    cfg.rule = match a.rule {
        RuleArg::Exact => Rule::Exact,
        RuleArg::Asymptotic => Rule::Asymptotic,
    };
    cfg.precondition = match a.precondition {
        PreconditionArg::None => Precondition::None,
        PreconditionArg::Pre1 => Precondition::Pre1,
        PreconditionArg::Pre2 => Precondition::Pre2,
    };
    cfg.pre2_candidate_alpha = SelectorConfig::with_alpha(a.pre2_alpha)
        .map_err(|_| Error::Config(format!("--pre2-alpha must lie strictly between 0 and 1, got {}", a.pre2_alpha)))?
        .alpha;
    cfg.max_steps = a.max_steps;
    cfg.intercept = !a.no_intercept;
    let echo_value = json!({
        "command": "select",
        "data": a.data.data.display().to_string(),
        "response": a.response.describe(),
        "method": a.method,
        "alpha": a.alpha,
        "rule": a.rule,
        "precondition": a.precondition,
        "pre2_candidate_alpha": cfg.pre2_candidate_alpha.get(),
        "max_steps": a.max_steps,
        "huber_c": a.huber_c,
        "intercept": cfg.intercept,
        "ci": a.ci,
        "outliers": a.outliers,
        "threads": a.threads,
    });
    echo(&echo_value);

    let mut src = a.data.source()?;
    src.response = Some(a.response.source()?);
    let loaded = load(&src)?;
    let d = loaded.data;
    if !loaded.constant_columns.is_empty() {
        println!("constant covariates: {}", output::index_list(&loaded.constant_columns));
    }
    cfg.validate(d.n())?;
    let trace = match a.method {
        MethodArg::Lsq => select(&d, &cfg)?,
        MethodArg::Huber => robust_select(&d, &cfg, &HuberParams::new(a.huber_c)?)?,
        MethodArg::LogitLs => nl_select(&d, &cfg, &LinkSpec::logistic())?,
        MethodArg::Kl => kl_select(&d, &cfg)?,
    };
    print!("{}", output::step_table(&trace, d.names()));

    let intervals = match a.ci {
        Some(g) => {
            let ci = confidence_intervals(&d, &trace.selected(), g)?;
            print!("{}", output::interval_table(&ci, g));
            Some(ci)
        }
        None => None,
    };
    let outliers = if a.outliers {
        let r = final_residuals(&d, a, &trace)?;
        let flags = outlier_flags(&r)?;
        print!("{}", output::outlier_table(&flags));
        Some(flags)
    } else {
        None
    };
    write_out(
        a.out.as_deref(),
        &json!({
            "config": echo_value,
            "trace": trace,
            "intervals": intervals,
            "outliers": outliers,
        }),
    )
}

fn default_procedure(name: &str) -> Procedure {
    match name {
        "ar1-logit-T1" => Procedure::LsqLogit,
        "toeplitz-logit-T5" => Procedure::Kl,
        _ => Procedure::Progau,
    }
}

fn run_simulate(a: &SimulateArgs) -> Result<(), Error> {
    check_threads(a.threads)?;
    let (mut spec, default) = if BUILTIN_SCENARIOS.contains(&a.scenario.as_str()) {
        (builtin(&a.scenario, a.seed, a.slow)?, default_procedure(&a.scenario))
    } else if Path::new(&a.scenario).is_file() {
        let mut s: ScenarioSpec = load_json(Path::new(&a.scenario))?;
        s.seed = a.seed;
        (s, Procedure::Progau)
    } else {
        return Err(Error::Config(format!(
            "unknown scenario '{}'; built-in scenarios are {}",
            a.scenario,
            BUILTIN_SCENARIOS.join(", ")
        )));
    };
    if let Some(r) = a.reps {
        spec.replications = r;
    }
    if let Some(n) = a.n {
        spec.n = n;
    }
    if let Some(q) = a.q {
        spec.q = q;
    }
    if spec.q > 5000 && !a.slow {
        return Err(Error::Config(format!("q = {} needs --slow", spec.q)));
    }
    spec.validate()?;
    let procedure = a.procedure.map_or(default, Procedure::from);
    let cfg = SelectorConfig::with_alpha(a.alpha)?;
    echo(&json!({
        "command": "simulate",
        "scenario": spec,
        "procedure": procedure,
        "alpha": a.alpha,
        "ci": a.ci,
        "seed": spec.seed,
        "threads": a.threads,
        "slow": a.slow,
    }));
    let opts = StudyOptions {
        coverage: a.ci,
        workers: Workers::new(a.threads)?,
    };
    let report = run_study(&spec, procedure, &cfg, &opts)?;
    print!("{}", output::metrics_table(&report));
    write_out(a.out.as_deref(), &report)
}

fn run_graph(a: &GraphArgs) -> Result<(), Error> {
    check_threads(a.threads)?;
    let rule = match a.rule {
        EdgeRuleArg::Or => EdgeRule::Or,
        EdgeRuleArg::And => EdgeRule::And,
    };
    SelectorConfig::with_alpha(a.alpha)?;
    echo(&json!({
        "command": "graph",
        "data": a.data.data.display().to_string(),
        "alpha": a.alpha,
        "rule": a.rule,
        "threads": a.threads,
    }));
    let table = load_matrix(&a.data.source()?)?;
    let start = Instant::now();
    let g = build_graph(&table.values, a.alpha, rule, &Workers::new(a.threads)?)?;
    let elapsed = start.elapsed();
    print!("{}", output::graph_table(&g, table.names.as_deref()));
    println!("wall time {:.3}s", elapsed.as_secs_f64());
    write_out(a.out.as_deref(), &g)
}

fn run_scan(a: &ScanArgs) -> Result<(), Error> {
    check_threads(a.threads)?;
    let cfg = config(a.alpha, a.threads)?;
    echo(&json!({
        "command": "scan",
        "data": a.data.data.display().to_string(),
        "response": a.response.describe(),
        "alpha": a.alpha,
        "threads": a.threads,
    }));
    let mut src = a.data.source()?;
    src.response = Some(a.response.source()?);
    let d = load(&src)?.data;
    cfg.validate(d.n())?;
    let runs = relevance_scan(&d, &cfg)?;
    let mut total = 0;
    for (k, t) in runs.iter().enumerate() {
        if t.is_empty() {
            continue;
        }
        total += t.len();
        println!("run {}", k + 1);
        print!("{}", output::step_table(t, d.names()));
    }
    println!("possibly relevant covariates: {total}");
    write_out(a.out.as_deref(), &runs)
}

fn run_report(a: &ReportArgs) -> Result<(), Error> {
    let v: serde_json::Value = load_json(&a.input)?;
    if let Ok(r) = serde_json::from_value::<MetricsReport>(v.clone()) {
        print!("{}", output::metrics_table(&r));
    } else if let Ok(g) = serde_json::from_value::<GraphResult>(v.clone()) {
        print!("{}", output::graph_table(&g, None));
    } else if let Ok(t) = serde_json::from_value::<SelectionTrace>(v.clone()) {
        print!("{}", output::step_table(&t, None));
    } else if let Some(t) = v.get("trace").and_then(|t| serde_json::from_value::<SelectionTrace>(t.clone()).ok()) {
        print!("{}", output::step_table(&t, None));
    } else if let Ok(runs) = serde_json::from_value::<Vec<SelectionTrace>>(v) {
        for (k, t) in runs.iter().enumerate().filter(|(_, t)| !t.is_empty()) {
            println!("run {}", k + 1);
            print!("{}", output::step_table(t, None));
        }
    } else {
        return Err(Error::InvalidData(format!(
            "{} is not a saved trace, report or graph",
            a.input.display()
        )));
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Select(a) => run_select(a),
        Command::Simulate(a) => run_simulate(a),
        Command::Graph(a) => run_graph(a),
        Command::Scan(a) => run_scan(a),
        Command::Report(a) => run_report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_input_error() {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}
