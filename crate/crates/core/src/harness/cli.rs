//! Command-line front end. Exit codes: 0 success, 1 usage or configuration
//! error, 2 runtime or assertion failure, 3 divergence.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use super::{
    emit_plot, grid_select, render_table, run_traces, write_traces, ExperimentConfig, PlotKind,
    PlotOptions, RunTrace, SelectionMetric, DEFAULT_ETA_GRID,
};
use crate::error::Error;
use crate::par::Execution;
use crate::problems::{generate_synthetic_classification, write_csv};
use crate::schedules::WeightSchedule;
use crate::theory::{
    corollary1_bound, lemma1_random_suite, lemma2_random_suite, theorem1_bound, BoundInputs,
};

/// Environment variable supplying a default output directory.
pub const OUTPUT_DIR_ENV: &str = "ADAUSM_OUTPUT_DIR";
pub const DEFAULT_OUTPUT_DIR: &str = "adausm-out";

#[derive(Debug, Parser)]
#[command(
    name = "adausm",
    version,
    about = "Adaptive unified-momentum optimizers and experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run every optimizer/seed in a config and write traces.
    Run(RunArgs),
    /// Grid-search eta per optimizer, then plot the best runs.
    Compare(CompareArgs),
    /// Evaluate the closed-form convergence bound.
    Bound(BoundArgs),
    /// Randomized checks of the two deterministic lemma inequalities.
    CheckLemmas(LemmaArgs),
    /// Write a synthetic two-class dataset as CSV.
    GenData(GenDataArgs),
    /// Plot trace CSV files as SVG.
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    config: PathBuf,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    sequential: bool,
    #[arg(long)]
    quiet: bool,
}

#[derive(Debug, Args)]
struct CompareArgs {
    config: PathBuf,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    sequential: bool,
    /// final-loss or min-grad-norm
    #[arg(long, default_value = "final-loss")]
    metric: String,
}

#[derive(Debug, Args)]
struct BoundArgs {
    #[arg(long = "T")]
    horizon: Option<u64>,
    /// Comma-separated horizons; prints one CSV row each.
    #[arg(long, value_delimiter = ',')]
    sweep: Vec<u64>,
    #[arg(long, default_value = "poly:1")]
    schedule: String,
    #[arg(long, default_value_t = 0.001)]
    eta: f64,
    #[arg(long, default_value_t = 0.9)]
    mu: f64,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long, default_value_t = 1e-8)]
    epsilon: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long = "lipschitz", default_value_t = 1.0)]
    lipschitz: f64,
    #[arg(long, default_value_t = 1)]
    d: usize,
    /// f(x_1) - f*
    #[arg(long, default_value_t = 1.0)]
    f_gap: f64,
    /// Use the AccAdaGrad specialization (needs --schedule accadagrad, --lambda 1).
    #[arg(long)]
    corollary: bool,
}

#[derive(Debug, Args)]
struct LemmaArgs {
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    sequential: bool,
}

#[derive(Debug, Args)]
struct GenDataArgs {
    #[arg(long, default_value_t = 500)]
    n: usize,
    #[arg(long, default_value_t = 10)]
    d: usize,
    #[arg(long, default_value_t = 2.0)]
    separation: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct PlotArgs {
    #[arg(required = true)]
    traces: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// loss or grad-norm
    #[arg(long, default_value = "loss")]
    kind: String,
    #[arg(long)]
    log_log: bool,
    /// Also print a summary table.
    #[arg(long)]
    table: bool,
}

/// A failed command and its exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Runtime(String),
    Diverged(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Runtime(_) => 2,
            Failure::Diverged(_) => 3,
        }
    }

    /// Single stderr line, e.g. `adausm: error[usage]: ...`.
    pub fn line(&self) -> String {
        let (tag, msg) = match self {
            Failure::Usage(m) => ("usage", m),
            Failure::Runtime(m) => ("runtime", m),
            Failure::Diverged(m) => ("diverged", m),
        };
        let flat = msg.split_whitespace().collect::<Vec<_>>().join(" ");
        format!("adausm: error[{tag}]: {flat}")
    }
}

fn usage(e: impl ToString) -> Failure {
    Failure::Usage(e.to_string())
}

fn runtime(e: impl ToString) -> Failure {
    Failure::Runtime(e.to_string())
}

fn exec(sequential: bool) -> Execution {
    if sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    }
}

/// Flag, then config, then environment, then the built-in default.
pub fn resolve_output_dir(
    flag: Option<&Path>,
    config: Option<&Path>,
    env: Option<OsString>,
) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| config.map(Path::to_path_buf))
        .or_else(|| env.filter(|v| !v.is_empty()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
}

fn load_config(path: &Path, flag: Option<&Path>) -> Result<ExperimentConfig, Failure> {
    let mut config = ExperimentConfig::load(path).map_err(usage)?;
    config.run.output_dir = Some(resolve_output_dir(
        flag,
        config.run.output_dir.as_deref(),
        std::env::var_os(OUTPUT_DIR_ENV),
    ));
    Ok(config)
}

fn cmd_run(args: RunArgs) -> Result<(), Failure> {
    let config = load_config(&args.config, args.output_dir.as_deref())?;
    let dir = config.run.output_dir.clone().expect("resolved above");
    let traces = run_traces(&config, exec(args.sequential)).map_err(runtime)?;
    write_traces(&traces, &dir).map_err(runtime)?;
    if !args.quiet {
        print!("{}", render_table(&traces));
        println!("traces written to {}", dir.display());
    }
    let diverged: Vec<String> = traces
        .iter()
        .filter(|t| t.diverged)
        .map(|t| format!("{} (eta={}, seed={})", t.optimizer, t.eta, t.seed))
        .collect();
    if diverged.is_empty() {
        Ok(())
    } else {
        Err(Failure::Diverged(format!(
            "runs diverged: {}",
            diverged.join(", ")
        )))
    }
}

fn cmd_compare(args: CompareArgs) -> Result<(), Failure> {
    let metric: SelectionMetric = args.metric.parse().map_err(usage)?;
    let mut config = load_config(&args.config, args.output_dir.as_deref())?;
    if config.run.eta_grid.is_none() {
        config.run.eta_grid = Some(DEFAULT_ETA_GRID.to_vec());
    }
    let dir = config.run.output_dir.clone().expect("resolved above");
    let traces = run_traces(&config, exec(args.sequential)).map_err(runtime)?;
    write_traces(&traces, &dir).map_err(runtime)?;
    let best = grid_select(&traces, metric).map_err(|e| match e {
        Error::NoFiniteRun => Failure::Diverged(e.to_string()),
        other => runtime(other),
    })?;
    let chosen: Vec<RunTrace> = traces
        .iter()
        .filter(|t| best.get(&t.optimizer).is_some_and(|b| b.eta == t.eta))
        .cloned()
        .collect();
    for (label, choice) in &best {
        println!(
            "best {label}: eta={} {:?}={}",
            choice.eta, metric, choice.value
        );
    }
    for spec in &config.optimizers {
        if !best.contains_key(&spec.label()) {
            println!("best {}: none (every step size diverged)", spec.label());
        }
    }
    print!("{}", render_table(&chosen));
    for (kind, name) in [
        (PlotKind::Loss, "loss.svg"),
        (PlotKind::GradNorm, "grad_norm.svg"),
    ] {
        let opts = PlotOptions {
            kind,
            log_log: true,
        };
        emit_plot(&chosen, opts, dir.join(name)).map_err(runtime)?;
    }
    println!("traces and plots written to {}", dir.display());
    Ok(())
}

fn cmd_bound(args: BoundArgs) -> Result<(), Failure> {
    let schedule: WeightSchedule = args.schedule.parse().map_err(usage)?;
    let horizons: Vec<u64> = match (args.horizon, args.sweep.is_empty()) {
        (Some(t), true) => vec![t],
        (None, false) => args.sweep.clone(),
        (Some(_), false) => return Err(usage("give either --T or --sweep, not both")),
        (None, true) => return Err(usage("one of --T or --sweep is required")),
    };
    let evaluate = |horizon| {
        let inputs = BoundInputs {
            f1_minus_fstar: args.f_gap,
            lipschitz: args.lipschitz,
            sigma: args.sigma,
            d: args.d,
            horizon,
            eta: args.eta,
            mu: args.mu,
            lambda: args.lambda,
            epsilon: args.epsilon,
            schedule,
        };
        inputs.validate().map_err(usage)?;
        let out = if args.corollary {
            corollary1_bound(&inputs)
        } else {
            theorem1_bound(&inputs)
        };
        out.map_err(|e| match e {
            Error::InvalidConfig(_) => usage(e),
            other => runtime(other),
        })
    };
    if args.sweep.is_empty() {
        let b = evaluate(horizons[0])?;
        println!("T={}", horizons[0]);
        println!("schedule={schedule}");
        println!("C1={}", b.c1);
        println!("C2={}", b.c2);
        println!("log_weight_sum={}", b.log_weight_sum);
        println!("log_term={}", b.log_term);
        println!("prefactor={}", b.prefactor);
        println!("bound={}", b.bound);
    } else {
        println!("T,bound,C1,C2,log_term,prefactor,log_weight_sum");
        for t in horizons {
            let b = evaluate(t)?;
            println!(
                "{t},{},{},{},{},{},{}",
                b.bound, b.c1, b.c2, b.log_term, b.prefactor, b.log_weight_sum
            );
        }
    }
    Ok(())
}

fn cmd_check_lemmas(args: LemmaArgs) -> Result<(), Failure> {
    if args.trials == 0 {
        return Err(usage("--trials must be >= 1"));
    }
    let e = exec(args.sequential);
    let reports = [
        ("lemma1", lemma1_random_suite(args.trials, args.seed, e)),
        ("lemma2", lemma2_random_suite(args.trials, args.seed, e)),
    ];
    let mut failed = Vec::new();
    for (name, r) in &reports {
        println!(
            "{name} trials={} violations={} worst_margin={}",
            r.trials, r.violations, r.worst_margin
        );
        if r.violations > 0 {
            failed.push(*name);
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(runtime(format!(
            "violations found in {}",
            failed.join(", ")
        )))
    }
}

fn cmd_gen_data(args: GenDataArgs) -> Result<(), Failure> {
    let ds = generate_synthetic_classification(args.n, args.d, args.separation, args.seed)
        .map_err(usage)?;
    write_csv(&ds, &args.out).map_err(runtime)?;
    println!(
        "wrote {} rows x {} features to {}",
        ds.n,
        ds.d,
        args.out.display()
    );
    Ok(())
}

fn cmd_plot(args: PlotArgs) -> Result<(), Failure> {
    let kind: PlotKind = args.kind.parse().map_err(usage)?;
    let traces = args
        .traces
        .iter()
        .map(RunTrace::read_csv)
        .collect::<Result<Vec<_>, _>>()
        .map_err(usage)?;
    emit_plot(
        &traces,
        PlotOptions {
            kind,
            log_log: args.log_log,
        },
        &args.out,
    )
    .map_err(runtime)?;
    if args.table {
        print!("{}", render_table(&traces));
    }
    Ok(())
}

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            let f = usage(first.trim_start_matches("error: "));
            eprintln!("{}", f.line());
            return f.code();
        }
    };
    let outcome = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Bound(a) => cmd_bound(a),
        Command::CheckLemmas(a) => cmd_check_lemmas(a),
        Command::GenData(a) => cmd_gen_data(a),
        Command::Plot(a) => cmd_plot(a),
    };
    match outcome {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("{}", f.line());
            f.code()
        }
    }
}
