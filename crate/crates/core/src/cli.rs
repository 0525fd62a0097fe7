//! Command-line front end.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::ccg::{self, CcgConfig, CcgResult, Mode};
use crate::error::{Error, Result};
use crate::experiment::{self, fmt_num, SweepConfig};
use crate::instance::{self, Instance, Variant};
use crate::lemmas;
use crate::netgen::{self, GenParams};
use crate::restructure::Side;

#[derive(Debug, Parser)]
#[command(name = "mfnipr", version, about = "Network interdiction with restructuring")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a seeded instance file.
    Generate(GenerateArgs),
    /// Solve one instance at one budget.
    Solve(SolveArgs),
    /// Sweep budgets and write result tables.
    Experiment(ExperimentArgs),
    /// Report where the minimum cut sits and which restructurings could raise flow.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 200)]
    pub users: usize,
    #[arg(long, default_value = "base")]
    pub variant: Variant,
    #[arg(long, default_value_t = 2)]
    pub organizations: u32,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long)]
    pub budget: f64,
    #[arg(long, default_value = "partial")]
    pub mode: Mode,
    #[arg(long, default_value_t = 1e-4)]
    pub epsilon: f64,
    /// Seconds.
    #[arg(long, default_value_t = 600.0)]
    pub time_limit: f64,
    #[arg(long)]
    pub leadership: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(long)]
    pub instance: PathBuf,
    /// `start:stop:step` or a comma-separated list.
    #[arg(long, default_value = "50:140:10")]
    pub budgets: String,
    #[arg(long, default_value = "partial,baseline")]
    pub modes: String,
    #[arg(long, default_value_t = 1e-4)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 600.0)]
    pub time_limit: f64,
    #[arg(long)]
    pub leadership: bool,
    /// Dataset label for the rows; defaults to the instance file stem.
    #[arg(long)]
    pub dataset: Option<String>,
    /// Results CSV; run times go to a sibling `*.timings.csv`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub instance: PathBuf,
    /// JSON file `{"interdicted": [ids]}`.
    #[arg(long)]
    pub plan: PathBuf,
}

fn time_limit(secs: f64) -> Result<Duration> {
    Duration::try_from_secs_f64(secs)
        .map_err(|_| Error::validation(format!("invalid time limit {secs}")))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

pub fn generate(args: &GenerateArgs) -> Result<String> {
    let params = GenParams {
        seed: args.seed,
        num_users: args.users,
        organizations: args.organizations,
        variant: args.variant,
        ..Default::default()
    };
    let inst = netgen::generate(&params)?;
    inst.write(&args.out)?;
    let net = &inst.network;
    Ok(format!(
        "wrote {}: {} nodes, {} arcs, {} restructurable arcs",
        args.out.display(),
        net.num_nodes(),
        net.arcs.len(),
        net.restructurable_arcs.len()
    ))
}

/// Solve result as written to `--out`.
pub fn result_json(inst: &Instance, budget: f64, res: &CcgResult) -> serde_json::Value {
    let arcs = &inst.network.restructurable_arcs;
    let side = |want: Side| -> Vec<[usize; 2]> {
        res.restructuring
            .activations()
            .into_iter()
            .filter(|&(_, s)| s == want)
            .map(|(r, _)| [arcs[r].tail, arcs[r].head])
            .collect()
    };
    json!({
        "budget": fmt_num(budget),
        "mode": res.mode.to_string(),
        "status": res.status.to_string(),
        "lower": fmt_num(res.lower),
        "upper": fmt_num(res.upper),
        "gap": fmt_num(res.relative_gap()),
        "interdicted": res.interdiction.interdicted(),
        "restructured_in": side(Side::In),
        "restructured_out": side(Side::Out),
        "plans_visited": res.plans_visited,
        "iterations": res.iterations.iter().map(|it| json!({
            "iteration": it.iteration,
            "eta": fmt_num(it.eta),
            "eta_hat": it.eta_hat.map(fmt_num),
            "lower": fmt_num(it.lower),
            "upper": fmt_num(it.upper),
            "interdicted": it.interdicted,
            "pool_size": it.pool_size,
            "new_plan": it.new_plan,
            "master_seconds": it.master_seconds,
            "subproblem_seconds": it.subproblem_seconds,
        })).collect::<Vec<_>>(),
        "wall_seconds": res.wall_seconds,
    })
}

pub fn solve(args: &SolveArgs) -> Result<String> {
    let inst = Instance::read(&args.instance)?;
    if !(args.budget >= 0.0) {
        return Err(Error::validation("budget must be non-negative"));
    }
    let config = CcgConfig {
        mode: args.mode,
        epsilon: args.epsilon,
        time_limit: Some(time_limit(args.time_limit)?),
        ..Default::default()
    };
    let irules = inst.interdiction_rules(args.budget, args.leadership);
    let res = ccg::solve(&inst.network, &irules, &inst.restructure_rules(), &config)?;
    if let Some(path) = &args.out {
        let mut text = serde_json::to_string_pretty(&result_json(&inst, args.budget, &res))
            .map_err(|e| Error::Internal(e.to_string()))?;
        text.push('\n');
        fs::write(path, text).map_err(|e| Error::io(path, e))?;
    }
    Ok(format!(
        "{} budget={} status={} lower={} upper={} iterations={} plans={} interdicted={:?} time={:.2}s",
        res.mode,
        fmt_num(args.budget),
        res.status,
        fmt_num(res.lower),
        fmt_num(res.upper),
        res.iterations.len(),
        res.plans_visited,
        res.interdiction.interdicted(),
        res.wall_seconds
    ))
}

pub fn timings_path(results: &Path) -> PathBuf {
    let stem = results.file_stem().and_then(|s| s.to_str()).unwrap_or("results");
    results.with_file_name(format!("{stem}.timings.csv"))
}

pub fn experiment(args: &ExperimentArgs) -> Result<String> {
    let inst = Instance::read(&args.instance)?;
    let dataset = args.dataset.clone().unwrap_or_else(|| {
        args.instance
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("instance")
            .to_string()
    });
    let config = SweepConfig {
        dataset,
        budgets: experiment::parse_budgets(&args.budgets)?,
        modes: experiment::parse_modes(&args.modes)?,
        epsilon: args.epsilon,
        time_limit: Some(time_limit(args.time_limit)?),
        leadership: args.leadership,
    };
    let out = create(&args.out)?;
    let (rows, timings) = experiment::run_sweep(&inst, &config, out)?;
    let tpath = timings_path(&args.out);
    let mut tout = create(&tpath)?;
    timings.write(&mut tout)?;
    tout.flush().map_err(|e| Error::io(&tpath, e))?;
    let broken = rows
        .iter()
        .filter(|r| r.status == ccg::CcgStatus::Optimal && !r.ordering_holds(1e-9))
        .count();
    if broken > 0 {
        return Err(Error::Internal(format!("{broken} optimal rows violate the bound ordering")));
    }
    Ok(format!(
        "wrote {} rows to {} and timings to {}",
        rows.len(),
        args.out.display(),
        tpath.display()
    ))
}

pub fn verify(args: &VerifyArgs) -> Result<String> {
    let inst = Instance::read(&args.instance)?;
    let net = &inst.network;
    let y = instance::read_plan(&args.plan, net.num_nodes())?;
    let rules = inst.restructure_rules();
    let report = crate::restructure::check_interdiction(net, &inst.interdiction_rules(f64::INFINITY, false), &y);
    let analysis = lemmas::analyze_plan(net, &rules, &y)?;
    let mut out = String::new();
    use std::fmt::Write as _;
    let _ = writeln!(out, "interdicted: {:?}", y.interdicted());
    for v in &report {
        let _ = writeln!(out, "warning: {} ({})", v.constraint, v.detail);
    }
    let _ = writeln!(out, "max flow: {}", fmt_num(analysis.flow));
    let _ = writeln!(out, "minimum cut:");
    if !analysis.cut_supply.is_empty() {
        let _ = writeln!(out, "  supply arcs of {:?}", analysis.cut_supply);
    }
    for (layer, nodes) in &analysis.cut_nodes_by_layer {
        let _ = writeln!(out, "  layer {layer}: {} nodes {:?}", nodes.len(), nodes);
    }
    if !analysis.cut_demand.is_empty() {
        let _ = writeln!(out, "  demand arcs of {} users", analysis.cut_demand.len());
    }
    let _ = writeln!(out, "permitted restructurable arcs: {}", analysis.permitted.len());
    for a in &analysis.permitted {
        let sides = match (a.via_in, a.via_out) {
            (true, true) => "in/out",
            (true, false) => "in",
            _ => "out",
        };
        let _ = writeln!(out, "  #{} ({} -> {}) [{sides}] {}", a.index, a.tail, a.head, a.class);
    }
    let _ = write!(
        out,
        "certificate: {}",
        if analysis.certified {
            "no restructuring can increase flow"
        } else {
            "restructuring may increase flow"
        }
    );
    Ok(out)
}

pub fn dispatch(cli: &Cli) -> Result<String> {
    match &cli.command {
        Command::Generate(a) => generate(a),
        Command::Solve(a) => solve(a),
        Command::Experiment(a) => experiment(a),
        Command::Verify(a) => verify(a),
    }
}

/// Runs the tool and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(&cli) {
        Ok(msg) => {
            let _ = writeln!(io::stdout(), "{msg}");
            0
        }
        Err(e) => {
            let _ = writeln!(io::stderr(), "error: {e}");
            e.exit_code()
        }
    }
}
