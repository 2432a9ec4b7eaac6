//! `myopic`: assumption checks, bound construction, grid solves, rollouts,
//! sweeps and Table 1 reproduction from the command line.
//!
//! Human-readable summaries go to standard output; machine-readable
//! artifacts are written only through `--out`.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use myopic_bounds::assumptions::check_all;
use myopic_bounds::bounds::{
    minimal_offset, optimize_f_two_action, optimized_region, overlap_region_two_action, per_belief_bounds, BoundKind,
    DEFAULT_EPS_STRICT,
};
use myopic_bounds::evaluation::{
    example4_theta_grid, simulate_policy, sweep_discount, sweep_example4, write_csv, BoundPolicy, ConstantPolicy,
    CostRule, GridOracle, OraclePolicy, OutsideAction, Policy, PolicyOracle, PolicyTag, Protocol, RolloutConfig,
    TildePolicy, DISCOUNT_LADDER,
};
use myopic_bounds::model::load_model;
use myopic_bounds::reproduce::{reproduce_table, TableId};
use myopic_bounds::solver::{default_resolution, grid_value_iteration, GridConfig};
use myopic_bounds::{Belief, BuiltinExample, Model};
use serde_json::json;

#[derive(Parser)]
#[command(name = "myopic", version, about = "Myopic policy bounds for discounted-cost POMDPs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the assumption checks and report each one.
    Check {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Construct the optimized bound offsets and overlap region.
    Bounds {
        #[command(flatten)]
        model: ModelArgs,
        /// Belief for a per-belief bound query, comma separated.
        #[arg(long, value_delimiter = ',')]
        belief: Option<Vec<f64>>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Solve for the optimal value function on a simplex grid.
    Solve {
        #[command(flatten)]
        model: ModelArgs,
        /// Grid resolution; defaults by state count.
        #[arg(long)]
        grid: Option<usize>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Estimate one policy's discounted cost by rollouts.
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        budget: BudgetArgs,
        #[arg(long, value_enum, default_value_t = PolicyArg::Tilde)]
        policy: PolicyArg,
        /// Action (0-based) for `--policy constant`.
        #[arg(long, default_value_t = 0)]
        action: usize,
        /// Initial belief, comma separated; defaults to the example's fixed prior.
        #[arg(long, value_delimiter = ',')]
        belief: Option<Vec<f64>>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Volume and loss metrics over a list of discount factors.
    Sweep {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        budget: BudgetArgs,
        /// θ lattice size for Example 4 when `--theta` is not given.
        #[arg(long, default_value_t = 5)]
        theta_grid: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Recompute one of tables 1a to 1d beside the reference values.
    Reproduce {
        /// 1a, 1b, 1c or 1d.
        #[arg(long)]
        table: String,
        #[command(flatten)]
        budget: BudgetArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Args, Clone)]
struct ModelArgs {
    /// Builtin example: 1, 2d, 2g, 3 or 4.
    #[arg(long)]
    example: Option<String>,
    /// JSON model document.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Example 4 parameters θ₁ θ₂.
    #[arg(long, num_args = 2, value_names = ["THETA1", "THETA2"])]
    theta: Option<Vec<f64>>,
    /// Discount factor; repeat for sweeps.
    #[arg(long)]
    rho: Vec<f64>,
}

#[derive(Args, Clone)]
struct BudgetArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    runs: usize,
    #[arg(long, default_value_t = 100)]
    horizon: usize,
    /// Volume samples; defaults to 10⁶ for up to three states, 10⁵ beyond.
    #[arg(long)]
    volume_samples: Option<usize>,
    /// Grid resolution of the optimal-policy oracle.
    #[arg(long)]
    grid: Option<usize>,
    /// Action of the loss policy outside the overlap region.
    #[arg(long, value_enum, default_value_t = OutsideArg::First)]
    outside: OutsideArg,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutsideArg {
    /// Action 1 (index 0).
    First,
    /// The grid oracle's action.
    Oracle,
}

#[derive(Args, Clone)]
struct OutputArgs {
    /// Artifact path, written atomically.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Exit with status 1 when any check or tolerance fails.
    #[arg(long)]
    strict: bool,
    /// Worker thread cap.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PolicyArg {
    Tilde,
    Upper,
    Lower,
    Optimal,
    Constant,
}

enum CliError {
    Usage(String),
    Compute(anyhow::Error),
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Compute(e)
    }
}

type CliResult<T> = Result<T, CliError>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(msg.into()))
}

/// Resolved model plus the builtin it came from, if any.
struct Source {
    model: Model,
    example: Option<BuiltinExample>,
    label: String,
}

fn theta_pair(args: &ModelArgs) -> Option<(f64, f64)> {
    args.theta.as_ref().map(|t| (t[0], t[1]))
}

fn load_source(args: &ModelArgs) -> CliResult<Source> {
    let mut source = match (&args.example, &args.model) {
        (Some(_), Some(_)) => return usage("give exactly one of --example and --model"),
        (None, None) => return usage("one of --example or --model is required"),
        (Some(id), None) => {
            let Some(example) = BuiltinExample::parse(id, theta_pair(args)) else {
                return usage(format!("unknown example {id:?}; expected 1, 2d, 2g, 3 or 4"));
            };
            if args.theta.is_some() && !matches!(example, BuiltinExample::Four { .. }) {
                return usage("--theta applies to example 4 only");
            }
            let model = example.model::<f64>().map_err(|e| CliError::Usage(e.to_string()))?;
            Source { model, example: Some(example), label: example.label() }
        }
        (None, Some(path)) => {
            if args.theta.is_some() {
                return usage("--theta applies to example 4 only");
            }
            let bytes = std::fs::read(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            let model = load_model(&bytes).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            Source { model, example: None, label: path.display().to_string() }
        }
    };
    if let Some(&rho) = args.rho.first() {
        if !(0.0..1.0).contains(&rho) {
            return usage(format!("discount {rho} outside [0, 1)"));
        }
        source.model = source.model.with_discount(rho);
    }
    Ok(source)
}

fn single_rho(args: &ModelArgs) -> CliResult<()> {
    if args.rho.len() > 1 {
        return usage("this command takes a single --rho");
    }
    Ok(())
}

fn rho_list(args: &ModelArgs) -> CliResult<Vec<f64>> {
    let rhos = if args.rho.is_empty() { DISCOUNT_LADDER.to_vec() } else { args.rho.clone() };
    if let Some(bad) = rhos.iter().find(|r| !(0.0..1.0).contains(*r)) {
        return usage(format!("discount {bad} outside [0, 1)"));
    }
    Ok(rhos)
}

fn check_budget(b: &BudgetArgs) -> CliResult<()> {
    if b.runs == 0 || b.horizon == 0 || b.volume_samples == Some(0) || b.grid == Some(0) {
        return usage("--runs, --horizon, --volume-samples and --grid must be positive");
    }
    Ok(())
}

fn protocol(b: &BudgetArgs) -> Protocol {
    Protocol {
        runs: b.runs,
        horizon: b.horizon,
        volume_samples: b.volume_samples,
        seed: b.seed,
        grid_resolution: b.grid,
        outside: match b.outside {
            OutsideArg::First => OutsideAction::Fixed(0),
            OutsideArg::Oracle => OutsideAction::Oracle,
        },
        ..Protocol::default()
    }
}

fn belief_arg(values: &[f64], x: usize) -> CliResult<Belief> {
    if values.len() != x {
        return usage(format!("belief has {} entries, model has {x} states", values.len()));
    }
    Belief::new(values.to_vec()).map_err(|e| CliError::Usage(e.to_string()))
}

fn json_only(out: &OutputArgs) -> CliResult<()> {
    if out.format == Some(Format::Csv) {
        return usage("this command writes JSON only");
    }
    Ok(())
}

/// Writes through a temporary file in the target directory, then renames.
fn write_atomic(path: &Path, contents: &str) -> anyhow::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp =
        tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating file in {}", dir.display()))?;
    tmp.write_all(contents.as_bytes())?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| anyhow!("writing {}: {}", path.display(), e.error))?;
    Ok(())
}

fn emit(out: &OutputArgs, artifact: impl FnOnce() -> String) -> CliResult<()> {
    if let Some(path) = &out.out {
        write_atomic(path, &artifact())?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn cmd_check(model: &ModelArgs, out: &OutputArgs) -> CliResult<bool> {
    single_rho(model)?;
    json_only(out)?;
    let src = load_source(model)?;
    let report = check_all(&src.model).map_err(|e| anyhow!(e))?;
    println!("model {} (rho = {})", src.label, src.model.discount());
    let status = |ok: bool| if ok { "holds" } else { "FAILS" };
    println!("  A1 {}", status(report.a1.is_some()));
    println!("  A2 {}", status(report.a2.is_some()));
    println!("  A3 {}", status(report.a3_holds()));
    println!("  A4 {} (margin {:.3e})", status(report.a4.holds), report.a4.margin);
    println!("  A5 {} (margin {:.3e})", status(report.a5.holds), report.a5.margin);
    println!("overall {}", report.overall);
    emit(out, || to_json(&report))?;
    Ok(report.overall)
}

fn cmd_bounds(model: &ModelArgs, belief: Option<&[f64]>, out: &OutputArgs) -> CliResult<bool> {
    single_rho(model)?;
    json_only(out)?;
    let src = load_source(model)?;
    let m = &src.model;
    println!("model {} (rho = {})", src.label, m.discount());
    let eps = DEFAULT_EPS_STRICT;
    let mut doc = serde_json::Map::new();
    doc.insert("model".into(), json!(src.label));
    doc.insert("rho".into(), json!(m.discount()));
    let mut ok = true;
    if m.num_actions() == 2 {
        let up = optimize_f_two_action(m, BoundKind::Upper, eps).map_err(|e| anyhow!(e))?;
        let lo = optimize_f_two_action(m, BoundKind::Lower, eps).map_err(|e| anyhow!(e))?;
        for r in [&up, &lo] {
            println!("  {} bound: {:?}, alpha = {:?}", r.kind.label(), r.status, r.alphas);
            if let Some(f) = &r.f_star {
                println!("    f* = {f:?}");
            }
        }
        if let (Some(fu), Some(fl)) = (&up.f_star, &lo.f_star) {
            let region = overlap_region_two_action(m, fu, fl).map_err(|e| anyhow!(e))?;
            println!("  normals: upper {:?}, lower {:?}", region.g_up, region.g_lo);
            doc.insert("region".into(), json!(region));
        } else {
            ok = false;
        }
        doc.insert("upper".into(), json!(up));
        doc.insert("lower".into(), json!(lo));
    } else {
        for kind in [BoundKind::Upper, BoundKind::Lower] {
            let f = minimal_offset(m, kind, eps).map_err(|e| anyhow!(e))?;
            match &f {
                Some(f) => println!("  {} offset = {f:?}", kind.label()),
                None => {
                    println!("  {} polytope empty", kind.label());
                    ok = false;
                }
            }
            doc.insert(format!("{}_offset", kind.label()), json!(f));
        }
    }
    if let Some(values) = belief {
        let pi = belief_arg(values, m.num_states())?;
        if m.num_actions() == 2 {
            let region = optimized_region(m, eps).map_err(|e| anyhow!(e))?;
            let b = region.bounds_at(m, &pi).map_err(|e| anyhow!(e))?;
            println!("  at {:?}: lower {}, upper {}", pi.as_slice(), b.lower, b.upper);
            doc.insert("belief_bounds".into(), json!(b));
        } else {
            let b = per_belief_bounds(m, &pi, eps).map_err(|e| anyhow!(e))?;
            println!("  at {:?}: lower {}, upper {}", pi.as_slice(), b.a_low, b.a_high);
            doc.insert("belief_bounds".into(), json!(b));
        }
    }
    emit(out, || to_json(&doc))?;
    Ok(ok)
}

fn cmd_solve(model: &ModelArgs, grid: Option<usize>, out: &OutputArgs) -> CliResult<bool> {
    single_rho(model)?;
    json_only(out)?;
    if grid == Some(0) {
        return usage("--grid must be positive");
    }
    let src = load_source(model)?;
    let d = grid.unwrap_or_else(|| default_resolution(&src.model));
    let vf = grid_value_iteration(&src.model, GridConfig::new(d)).map_err(|e| anyhow!(e))?;
    let unambiguous = (0..vf.len()).filter(|&g| vf.is_unambiguous(g)).count();
    println!("model {} (rho = {}), resolution {d}, {} points", src.label, src.model.discount(), vf.len());
    println!("  {} sweeps, residual {:.3e}, error bound {:.3e}", vf.iterations, vf.residual, vf.error_bound);
    println!("  {unambiguous} of {} points have an unambiguous greedy action", vf.len());
    emit(out, || {
        let mut s = vf.to_json();
        s.push('\n');
        s
    })?;
    Ok(true)
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    model: &ModelArgs,
    budget: &BudgetArgs,
    policy: PolicyArg,
    action: usize,
    belief: Option<&[f64]>,
    out: &OutputArgs,
) -> CliResult<bool> {
    single_rho(model)?;
    json_only(out)?;
    check_budget(budget)?;
    let src = load_source(model)?;
    let m = &src.model;
    let x = m.num_states();
    let pi0 = match (belief, src.example) {
        (Some(v), _) => belief_arg(v, x)?,
        (None, Some(e)) => Belief::unit(x, e.fixed_prior_state()),
        (None, None) => Belief::unit(x, 0),
    };
    if policy == PolicyArg::Constant && action >= m.num_actions() {
        return usage(format!("action {action} out of range for {} actions", m.num_actions()));
    }
    let cfg = RolloutConfig { horizon: budget.horizon, runs: budget.runs, seed: budget.seed };
    let needs_region = matches!(policy, PolicyArg::Tilde | PolicyArg::Upper | PolicyArg::Lower);
    let region =
        if needs_region { Some(optimized_region(m, DEFAULT_EPS_STRICT).map_err(|e| anyhow!(e))?) } else { None };
    let needs_oracle =
        policy == PolicyArg::Optimal || (policy == PolicyArg::Tilde && budget.outside == OutsideArg::Oracle);
    let oracle = if needs_oracle { Some(GridOracle::solve(m, budget.grid).map_err(|e| anyhow!(e))?) } else { None };
    let (rule, tag): (Box<dyn Policy>, PolicyTag) = match policy {
        PolicyArg::Tilde => {
            let oracle = oracle.as_ref().map(|o| o as &dyn PolicyOracle);
            (
                Box::new(TildePolicy { model: m, region: region.as_ref().unwrap(), default_action: 0, oracle }),
                PolicyTag::Tilde,
            )
        }
        PolicyArg::Upper => (
            Box::new(BoundPolicy { model: m, region: region.as_ref().unwrap(), kind: BoundKind::Upper }),
            PolicyTag::Upper,
        ),
        PolicyArg::Lower => (
            Box::new(BoundPolicy { model: m, region: region.as_ref().unwrap(), kind: BoundKind::Lower }),
            PolicyTag::Lower,
        ),
        PolicyArg::Optimal => (Box::new(OraclePolicy(oracle.as_ref().unwrap())), PolicyTag::Optimal),
        PolicyArg::Constant => (Box::new(ConstantPolicy(action)), PolicyTag::Constant),
    };
    let report = simulate_policy(m, rule.as_ref(), CostRule::Nominal, &pi0, &cfg, tag).map_err(|e| anyhow!(e))?;
    println!("model {} (rho = {}), pi0 = {:?}", src.label, m.discount(), pi0.as_slice());
    println!(
        "  mean discounted cost {:.6} ± {:.6} over {} runs × {} stages",
        report.mean_cost, report.std_error, report.runs, report.horizon
    );
    emit(out, || to_json(&report))?;
    Ok(true)
}

fn cmd_sweep(model: &ModelArgs, budget: &BudgetArgs, theta_grid: usize, out: &OutputArgs) -> CliResult<bool> {
    check_budget(budget)?;
    let rhos = rho_list(model)?;
    let format = out.format.unwrap_or(Format::Csv);
    let mut p = protocol(budget);
    let is_four_grid = model.example.as_deref().map(str::trim) == Some("4") && model.theta.is_none();
    if is_four_grid {
        if model.model.is_some() {
            return usage("give exactly one of --example and --model");
        }
        if theta_grid == 0 {
            return usage("--theta-grid must be positive");
        }
        p.fixed_prior = Some(0);
        let s = sweep_example4(&example4_theta_grid(theta_grid), &rhos, &p);
        println!("example 4 over {} theta cells", s.cells.len());
        for r in &s.ranges {
            println!(
                "  rho {}: vol {} .. {}, L1 {} .. {}, L2 {} .. {}",
                r.rho,
                pct(r.vol_worst),
                pct(r.vol_best),
                pct(r.l1_best),
                pct(r.l1_worst),
                pct(r.l2_best),
                pct(r.l2_worst)
            );
        }
        let clean = s.failures.is_empty() && s.cells.iter().all(|c| c.table.rows.iter().all(|r| r.notes.is_empty()));
        emit(out, || match format {
            Format::Csv => s.to_csv(),
            Format::Json => to_json(&s),
        })?;
        return Ok(clean);
    }
    let mut args = model.clone();
    args.rho.clear();
    let src = load_source(&args)?;
    p.fixed_prior = Some(src.example.map_or(0, |e| e.fixed_prior_state()));
    let table = sweep_discount(&src.model, &src.label, &rhos, &p);
    println!("model {}", src.label);
    for r in &table.rows {
        println!(
            "  rho {}: vol {}, L1 {}, L2 {}",
            r.rho,
            pct(r.vol_percent()),
            pct(r.l1_percent()),
            pct(r.l2_percent())
        );
        for n in &r.notes {
            println!("    note: {n}");
        }
    }
    let clean = table.rows.iter().all(|r| r.notes.is_empty());
    emit(out, || match format {
        Format::Csv => write_csv(&table),
        Format::Json => to_json(&table),
    })?;
    Ok(clean)
}

fn pct(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".into(), |x| format!("{x:.2}%"))
}

fn cmd_reproduce(table: &str, budget: &BudgetArgs, out: &OutputArgs) -> CliResult<bool> {
    check_budget(budget)?;
    let id: TableId =
        table.parse().map_err(|e: myopic_bounds::reproduce::ReproduceError| CliError::Usage(e.to_string()))?;
    let report = reproduce_table(id, &protocol(budget)).map_err(|e| anyhow!(e))?;
    print!("{}", report.summary_text());
    let within = report.deviation_summary().iter().all(|d| match (d.within, d.tolerance) {
        (Some(w), Some(_)) => w == d.compared && d.missing == 0,
        _ => true,
    });
    emit(out, || match out.format.unwrap_or(Format::Csv) {
        Format::Csv => report.to_csv(),
        Format::Json => to_json(&json!({
            "report": report,
            "deviations": report.deviation_summary(),
            "sweeps": report.sweeps,
        })),
    })?;
    Ok(within || !report.gating)
}

fn run(cli: Cli) -> CliResult<(bool, bool)> {
    let output = match &cli.command {
        Command::Check { output, .. }
        | Command::Bounds { output, .. }
        | Command::Solve { output, .. }
        | Command::Simulate { output, .. }
        | Command::Sweep { output, .. }
        | Command::Reproduce { output, .. } => output.clone(),
    };
    if let Some(n) = output.threads {
        if n == 0 {
            return usage("--threads must be positive");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| anyhow!(e))?;
    }
    let ok = match &cli.command {
        Command::Check { model, output } => cmd_check(model, output)?,
        Command::Bounds { model, belief, output } => cmd_bounds(model, belief.as_deref(), output)?,
        Command::Solve { model, grid, output } => cmd_solve(model, *grid, output)?,
        Command::Simulate { model, budget, policy, action, belief, output } => {
            cmd_simulate(model, budget, *policy, *action, belief.as_deref(), output)?
        }
        Command::Sweep { model, budget, theta_grid, output } => cmd_sweep(model, budget, *theta_grid, output)?,
        Command::Reproduce { table, budget, output } => cmd_reproduce(table, budget, output)?,
    };
    Ok((ok, output.strict))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok((ok, strict)) => {
            if strict && !ok {
                eprintln!("strict mode: a check or tolerance failed");
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Compute(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
