//! Command-line front end.
//!
//! Data goes to `--out` (or stdout); the one-line run summary goes to stderr.
//! Exit codes: 0 success, 1 usage or validation error, 2 budget, convergence
//! or numeric failure.

pub mod config;
mod output;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::error::{Error, Result};
use crate::exec::init_thread_pool;
use crate::forkjoin_sim::{simulate_auxiliary, simulate_max_wait, simulate_steady_state, SimOptions, SteadyStateRun};
use crate::limit_process::{holder_profile, simulate_aux_limit, simulate_drifted_sup, GridSpec, LimitLaw, LimitLawKind};
use crate::scaling::scaling_for;
use crate::stats::{EmpiricalDistribution, KsReport};
use crate::trajectory::TimeGrid;

use config::{ExperimentConfig, OutputFormat};
use output::{batch_csv, batch_json, fmt_real, read_values};

#[derive(Parser, Debug)]
#[command(name = "fjlimit", version, about = "Extreme waiting times in fork-join queues")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Tabulate b_N and c_N.
    Scaling(ScalingArgs),
    /// Simulate the scaled maximum waiting time.
    SimulateFj(SimArgs),
    /// Simulate the scaled auxiliary (unreflected) process.
    SimulateAux(SimArgs),
    /// Sample the scaled maximum waiting time in steady state.
    SteadyState(SteadyArgs),
    /// Simulate the limiting process on a cell grid.
    SimulateLimit(LimitSimArgs),
    /// Tabulate a closed-form limit CDF.
    LimitLaw(LimitLawArgs),
    /// Evaluate the Holder profile of a vector.
    HolderProfile(HolderArgs),
    /// KS distance between two samples, or a sample and a limit law.
    Compare(CompareArgs),
}

#[derive(Args, Debug, Default)]
struct CommonArgs {
    /// Experiment config file (`section.key = value` lines).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    budget: Option<u64>,
    /// Write the resolved config here and exit.
    #[arg(long, value_name = "PATH")]
    dump_config: Option<PathBuf>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug, Default)]
struct OutArgs {
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args, Debug, Default)]
struct ModelArgs {
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// Slowly varying factor: const:<c>, log or expsqrtlog.
    #[arg(long = "L", value_name = "KIND")]
    slowly: Option<String>,
    #[arg(long)]
    mu: Option<f64>,
    /// Interarrival family: exp or det.
    #[arg(long)]
    interarrival: Option<String>,
    /// Number of servers (comma-separated list for `scaling`).
    #[arg(long, value_delimiter = ',')]
    n: Vec<u64>,
}

#[derive(Args, Debug, Default)]
struct GridArgs {
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    grid_step: Option<f64>,
}

#[derive(Args, Debug)]
struct ScalingArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Args, Debug)]
struct SimArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Args, Debug)]
struct SteadyArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    model: ModelArgs,
    /// Jobs discarded per chain (default ceil(10 c_N)).
    #[arg(long)]
    warmup: Option<u64>,
    /// Jobs between samples (default ceil(c_N)).
    #[arg(long)]
    gap: Option<u64>,
    #[arg(long, default_value_t = 1)]
    chains: usize,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum LimitProcess {
    DriftedSup,
    AuxLimit,
}

#[derive(Args, Debug)]
struct LimitSimArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, value_enum, default_value = "drifted-sup")]
    process: LimitProcess,
    /// Cell width of the discretized field.
    #[arg(long, default_value_t = 1e-3)]
    h: f64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum LawKind {
    Steady,
    Transient,
    Frechet,
}

#[derive(Args, Debug)]
struct LawArgs {
    #[arg(long, value_enum, default_value = "steady")]
    kind: LawKind,
    #[arg(long, default_value_t = 2.0)]
    beta: f64,
    #[arg(long, default_value_t = 1.0)]
    mu: f64,
    #[arg(long, default_value_t = 1.0)]
    t: f64,
}

impl LawArgs {
    fn build(&self) -> Result<LimitLaw> {
        let kind = match self.kind {
            LawKind::Steady => LimitLawKind::SteadyState,
            LawKind::Transient => LimitLawKind::Transient { t: self.t },
            LawKind::Frechet => LimitLawKind::FrechetMarginal { t: self.t },
        };
        LimitLaw::new(kind, self.beta, self.mu)
    }
}

#[derive(Args, Debug)]
struct LimitLawArgs {
    #[command(flatten)]
    law: LawArgs,
    #[arg(long, value_delimiter = ',', required = true)]
    x: Vec<f64>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug)]
struct HolderArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long, value_delimiter = ',', required = true)]
    b: Vec<f64>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug)]
struct CompareArgs {
    /// CSV with a `value` column (and optionally `t`).
    #[arg(long)]
    sample: PathBuf,
    /// Second CSV for a two-sample comparison.
    #[arg(long, conflicts_with = "kind")]
    against: Option<PathBuf>,
    /// Time column to select; defaults to the last time in each file.
    #[arg(long)]
    at: Option<f64>,
    #[arg(long, value_enum)]
    kind: Option<LawKind>,
    #[arg(long, default_value_t = 2.0)]
    beta: f64,
    #[arg(long, default_value_t = 1.0)]
    mu: f64,
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Parses `argv` (including the program name), runs the subcommand and
/// returns the process exit code.
pub fn run_command<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    init_thread_pool();
    let start = Instant::now();
    match dispatch(cli.command) {
        Ok(summary) => {
            eprintln!(
                "{}: seed={} runtime={:.3}s output={}",
                summary.command,
                summary.seed.map_or_else(|| "-".to_string(), |s| s.to_string()),
                start.elapsed().as_secs_f64(),
                summary.path.as_deref().map_or_else(|| "stdout".to_string(), |p| p.display().to_string()),
            );
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Maps a library error to the process exit code.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Budget { .. } | Error::Convergence { .. } | Error::Numeric { .. } => 2,
        Error::InvalidArgument(_) | Error::Parse(_) | Error::Io(_) => 1,
    }
}

struct Summary {
    command: &'static str,
    seed: Option<u64>,
    path: Option<PathBuf>,
}

fn resolve(common: &CommonArgs, model: &ModelArgs, grid: Option<&GridArgs>) -> Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(p) => ExperimentConfig::parse_text(&std::fs::read_to_string(p)?)?,
        None => ExperimentConfig::default(),
    };
    let m = &mut cfg.model;
    if let Some(v) = model.alpha {
        m.alpha = v;
    }
    if let Some(v) = model.q {
        m.q = v;
    }
    if let Some(v) = model.beta {
        m.beta = v;
    }
    if let Some(v) = &model.slowly {
        m.slowly = v.parse()?;
    }
    if let Some(v) = model.mu {
        m.mu = v;
    }
    if let Some(v) = &model.interarrival {
        m.interarrival = v.parse()?;
    }
    if let Some(&v) = model.n.first() {
        m.n = v;
    }
    if let Some(g) = grid {
        if let Some(v) = g.horizon {
            cfg.run.horizon = v;
        }
        if let Some(v) = g.grid_step {
            cfg.run.grid_step = v;
        }
    }
    let r = &mut cfg.run;
    if let Some(v) = common.seed {
        r.seed = v;
    }
    if let Some(v) = common.reps {
        r.replications = v;
    }
    if let Some(v) = common.budget {
        r.budget = v;
    }
    apply_out(&mut cfg, &common.out)?;
    cfg.validate()?;
    Ok(cfg)
}

fn apply_out(cfg: &mut ExperimentConfig, out: &OutArgs) -> Result<()> {
    if let Some(p) = &out.out {
        cfg.output.path = Some(p.clone());
    }
    if let Some(f) = &out.format {
        cfg.output.format = f.parse()?;
    }
    Ok(())
}

fn out_only(out: &OutArgs) -> Result<(Option<PathBuf>, OutputFormat)> {
    let mut cfg = ExperimentConfig::default();
    apply_out(&mut cfg, out)?;
    Ok((cfg.output.path, cfg.output.format))
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => {
            use std::io::Write;
            std::io::stdout().lock().write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

fn opts(cfg: &ExperimentConfig) -> SimOptions {
    SimOptions {
        replications: cfg.run.replications,
        seed: cfg.run.seed,
        budget: cfg.run.budget,
        ..SimOptions::default()
    }
}

/// Writes the config for `--dump-config`; returns whether the run should stop.
fn dump(command: &'static str, common: &CommonArgs, cfg: &ExperimentConfig) -> Result<Option<Summary>> {
    match &common.dump_config {
        Some(p) => {
            std::fs::write(p, cfg.to_text())?;
            Ok(Some(Summary {
                command,
                seed: Some(cfg.run.seed),
                path: Some(p.clone()),
            }))
        }
        None => Ok(None),
    }
}

fn grid_of(cfg: &ExperimentConfig) -> Result<TimeGrid> {
    TimeGrid::uniform(cfg.run.horizon, cfg.run.grid_step)
}

fn dispatch(command: Command) -> Result<Summary> {
    match command {
        Command::Scaling(a) => run_scaling(a),
        Command::SimulateFj(a) => run_sim("simulate-fj", a),
        Command::SimulateAux(a) => run_sim("simulate-aux", a),
        Command::SteadyState(a) => run_steady(a),
        Command::SimulateLimit(a) => run_limit_sim(a),
        Command::LimitLaw(a) => run_limit_law(a),
        Command::HolderProfile(a) => run_holder(a),
        Command::Compare(a) => run_compare(a),
    }
}

fn run_scaling(a: ScalingArgs) -> Result<Summary> {
    let cfg = resolve(&a.common, &a.model, None)?;
    if let Some(s) = dump("scaling", &a.common, &cfg)? {
        return Ok(s);
    }
    let ns = if a.model.n.is_empty() { vec![cfg.model.n] } else { a.model.n.clone() };
    let w = cfg.weibull()?;
    let reg = cfg.regvar()?;
    let mut rows = Vec::with_capacity(ns.len());
    for &n in &ns {
        rows.push(scaling_for(n, &w, &reg)?);
    }
    let text = match cfg.output.format {
        OutputFormat::Csv => {
            let mut s = String::from("N,b_N,c_N,residual,iterations\n");
            for r in &rows {
                s += &format!(
                    "{},{},{},{},{}\n",
                    r.n_servers,
                    fmt_real(r.b_n),
                    fmt_real(r.c_n),
                    fmt_real(r.residual),
                    r.iterations
                );
            }
            s
        }
        OutputFormat::Json => output::to_json(&json!({
            "schema_version": output::SCHEMA_VERSION,
            "command": "scaling",
            "model": cfg.model,
            "rows": rows,
        }))?,
    };
    emit(cfg.output.path.as_deref(), &text)?;
    Ok(Summary {
        command: "scaling",
        seed: None,
        path: cfg.output.path,
    })
}

fn run_sim(command: &'static str, a: SimArgs) -> Result<Summary> {
    let cfg = resolve(&a.common, &a.model, Some(&a.grid))?;
    if let Some(s) = dump(command, &a.common, &cfg)? {
        return Ok(s);
    }
    let params = cfg.model_params()?;
    let grid = grid_of(&cfg)?;
    let batch = if command == "simulate-fj" {
        simulate_max_wait(&params, &grid, &opts(&cfg))?
    } else {
        simulate_auxiliary(&params, &grid, &opts(&cfg))?
    };
    let text = match cfg.output.format {
        OutputFormat::Csv => batch_csv(&batch),
        OutputFormat::Json => batch_json(command, &cfg, &batch)?,
    };
    emit(cfg.output.path.as_deref(), &text)?;
    Ok(Summary {
        command,
        seed: Some(cfg.run.seed),
        path: cfg.output.path,
    })
}

fn run_steady(a: SteadyArgs) -> Result<Summary> {
    let cfg = resolve(&a.common, &a.model, None)?;
    if let Some(s) = dump("steady-state", &a.common, &cfg)? {
        return Ok(s);
    }
    let params = cfg.model_params()?;
    let run = SteadyStateRun {
        warmup_jobs: a.warmup,
        samples: cfg.run.replications,
        gap_jobs: a.gap,
        chains: a.chains,
        seed: cfg.run.seed,
        budget: cfg.run.budget,
        ..SteadyStateRun::default()
    };
    let sample = simulate_steady_state(&params, &run)?;
    let c = sample.scaling.c_n;
    let text = match cfg.output.format {
        OutputFormat::Csv => {
            let mut s = String::from("replication,t,value\n");
            let mut values = sample.sequence.iter();
            for (chain, &len) in sample.chain_lengths.iter().enumerate() {
                for i in 0..len as u64 {
                    let job = sample.warmup_jobs + i * sample.gap_jobs;
                    let v = values.next().expect("one value per recorded sample");
                    s += &format!("{chain},{},{}\n", fmt_real(job as f64 / c), fmt_real(*v));
                }
            }
            s
        }
        OutputFormat::Json => output::to_json(&json!({
            "schema_version": output::SCHEMA_VERSION,
            "command": "steady-state",
            "model": cfg.model,
            "run": cfg.run,
            "scaling": sample.scaling,
            "seed": cfg.run.seed,
            "warmup_jobs": sample.warmup_jobs,
            "gap_jobs": sample.gap_jobs,
            "chain_lengths": sample.chain_lengths,
            "effective_n": sample.distribution.effective_n(),
            "values": sample.sequence,
        }))?,
    };
    emit(cfg.output.path.as_deref(), &text)?;
    Ok(Summary {
        command: "steady-state",
        seed: Some(cfg.run.seed),
        path: cfg.output.path,
    })
}

fn run_limit_sim(a: LimitSimArgs) -> Result<Summary> {
    let cfg = resolve(&a.common, &a.model, Some(&a.grid))?;
    if let Some(s) = dump("simulate-limit", &a.common, &cfg)? {
        return Ok(s);
    }
    let cells = GridSpec::new(cfg.run.horizon, a.h)?;
    let grid = grid_of(&cfg)?;
    let (beta, mu) = (cfg.model.beta, cfg.model.mu);
    let batch = match a.process {
        LimitProcess::DriftedSup => simulate_drifted_sup(&cells, &grid, beta, mu, &opts(&cfg))?,
        LimitProcess::AuxLimit => simulate_aux_limit(&cells, &grid, beta, mu, &opts(&cfg))?,
    };
    let text = match cfg.output.format {
        OutputFormat::Csv => batch_csv(&batch),
        OutputFormat::Json => batch_json("simulate-limit", &cfg, &batch)?,
    };
    emit(cfg.output.path.as_deref(), &text)?;
    Ok(Summary {
        command: "simulate-limit",
        seed: Some(cfg.run.seed),
        path: cfg.output.path,
    })
}

fn run_limit_law(a: LimitLawArgs) -> Result<Summary> {
    let (path, format) = out_only(&a.out)?;
    let law = a.law.build()?;
    for &x in &a.x {
        if !(x.is_finite() && x > 0.0) {
            return Err(Error::invalid(format!("x must be finite and > 0, got {x}")));
        }
    }
    let text = match format {
        OutputFormat::Csv => {
            let mut s = String::from("x,cdf,survival\n");
            for &x in &a.x {
                s += &format!("{},{},{}\n", fmt_real(x), fmt_real(law.cdf(x)), fmt_real(law.survival(x)));
            }
            s
        }
        OutputFormat::Json => {
            let rows: Vec<_> = a
                .x
                .iter()
                .map(|&x| json!({"x": x, "cdf": law.cdf(x), "survival": law.survival(x)}))
                .collect();
            output::to_json(&json!({
                "schema_version": output::SCHEMA_VERSION,
                "command": "limit-law",
                "law": law,
                "rows": rows,
            }))?
        }
    };
    emit(path.as_deref(), &text)?;
    Ok(Summary {
        command: "limit-law",
        seed: None,
        path,
    })
}

fn run_holder(a: HolderArgs) -> Result<Summary> {
    let (path, format) = out_only(&a.out)?;
    let value = holder_profile(&a.b, a.alpha)?;
    let text = match format {
        OutputFormat::Csv => format!("alpha,profile\n{},{}\n", fmt_real(a.alpha), fmt_real(value)),
        OutputFormat::Json => output::to_json(&json!({
            "schema_version": output::SCHEMA_VERSION,
            "command": "holder-profile",
            "alpha": a.alpha,
            "b": a.b,
            "profile": value,
        }))?,
    };
    emit(path.as_deref(), &text)?;
    Ok(Summary {
        command: "holder-profile",
        seed: None,
        path,
    })
}

fn run_compare(a: CompareArgs) -> Result<Summary> {
    let first = EmpiricalDistribution::new(read_values(&a.sample, a.at)?)?;
    let (report, against): (KsReport, serde_json::Value) = match (&a.against, a.kind) {
        (Some(p), _) => {
            let second = EmpiricalDistribution::new(read_values(p, a.at)?)?;
            (first.two_sample_ks(&second), json!(p.display().to_string()))
        }
        (None, Some(kind)) => {
            let law = LawArgs {
                kind,
                beta: a.beta,
                mu: a.mu,
                t: a.t,
            }
            .build()?;
            (first.ks_against(|x| law.cdf(x)), serde_json::to_value(law).map_err(output::json_err)?)
        }
        (None, None) => return Err(Error::invalid("compare needs --against <csv> or --kind <law>")),
    };
    let text = output::to_json(&json!({
        "schema_version": output::SCHEMA_VERSION,
        "command": "compare",
        "sample": a.sample.display().to_string(),
        "against": against,
        "at": a.at,
        "report": report,
    }))?;
    emit(a.out.as_deref(), &text)?;
    Ok(Summary {
        command: "compare",
        seed: None,
        path: a.out,
    })
}
