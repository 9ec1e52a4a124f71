use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use groupsparse::bench::{
    gen_block_model, gen_instance, selftest, sweep, write_outputs, MatrixKind, OverlapMode, SweepConfig,
};
use groupsparse::benders::{benders_project_with, cut_log_csv, BendersOptions};
use groupsparse::dp::DpProjector;
use groupsparse::graphs::{incidence_graph, to_nice, TreeDecomposition};
use groupsparse::model::instance::{parse_instance, write_instance};
use groupsparse::model::{brute_force_projection, GroupModel, NormMode, ProjectionResult};
use groupsparse::recovery::{ProjectorKind, Recoverer, RecoveryConfig, Variant};
use groupsparse::rng;
use groupsparse::sensing::SensingMatrix;

#[derive(Parser)]
#[command(name = "groupsparse", version, about = "Group-sparse projection and recovery")]
struct Cli {
    /// Log verbosity (-v info, -vv debug, -vvv trace).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Project the weights of an instance file onto its group model.
    Project(ProjectArgs),
    /// Recover a signal from measurements, read from files or generated.
    Recover(RecoverArgs),
    /// Measurement sweep on block models; writes sweep.csv and plotdata/.
    Sweep(SweepArgs),
    /// Projector agreement, approximation guarantees and matrix checks.
    Selftest(SelftestArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Solver {
    Dp,
    Benders,
    Brute,
}

impl From<Solver> for ProjectorKind {
    fn from(s: Solver) -> Self {
        match s {
            Solver::Dp => ProjectorKind::Dp,
            Solver::Benders => ProjectorKind::Benders,
            Solver::Brute => ProjectorKind::Brute,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    ModelIht,
    Meiht,
    AmIht,
    AmEiht,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::ModelIht => Variant::ModelIht,
            VariantArg::Meiht => Variant::Meiht,
            VariantArg::AmIht => Variant::AmIht,
            VariantArg::AmEiht => Variant::AmEiht,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum OverlapArg {
    Half,
    Full,
}

impl From<OverlapArg> for OverlapMode {
    fn from(o: OverlapArg) -> Self {
        match o {
            OverlapArg::Half => OverlapMode::Half,
            OverlapArg::Full => OverlapMode::Full,
        }
    }
}

fn parse_p(s: &str) -> Result<NormMode, String> {
    s.parse::<u32>().ok().and_then(NormMode::from_p).ok_or_else(|| format!("p must be 1 or 2, got {s:?}"))
}

#[derive(Args)]
struct ProjectArgs {
    /// Instance file with a weight line.
    instance: PathBuf,
    #[arg(long, value_enum, default_value = "dp")]
    solver: Solver,
    /// Override the group budget G.
    #[arg(long = "G", alias = "g")]
    g: Option<usize>,
    /// Override the element budget K.
    #[arg(long = "K", alias = "k")]
    k: Option<usize>,
    /// Tree decomposition of the incidence graph for the dp solver.
    #[arg(long)]
    decomposition: Option<PathBuf>,
    /// Write the Benders cut log as CSV.
    #[arg(long)]
    cut_log: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct RecoverArgs {
    #[arg(long, value_enum, default_value = "model-iht")]
    variant: VariantArg,
    #[arg(long, value_enum, default_value = "dp")]
    solver: Solver,
    /// Instance file holding the group model (file mode).
    #[arg(long, requires_all = ["matrix", "measurements"])]
    instance: Option<PathBuf>,
    /// Binary matrix file (file mode).
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Whitespace-separated measurements y (file mode).
    #[arg(long)]
    measurements: Option<PathBuf>,
    /// Whitespace-separated ground truth, for the relative error.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Dimension of a generated block-model instance.
    #[arg(long = "N", alias = "n", default_value_t = 200)]
    n: usize,
    #[arg(long = "G", alias = "g", default_value_t = 5)]
    g: usize,
    #[arg(long, default_value_t = 140)]
    m: usize,
    #[arg(long, value_enum, default_value = "half")]
    overlap: OverlapArg,
    /// Expander degree for generated instances.
    #[arg(long)]
    d: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_parser = parse_p)]
    p: Option<NormMode>,
    #[arg(long, default_value_t = 0.95)]
    alpha: f64,
    #[arg(long, default_value_t = 1.05)]
    beta: f64,
    #[arg(long, default_value_t = 1000)]
    max_iterations: usize,
    /// Write x_hat (and a generated instance) here.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SweepArgs {
    /// Algorithms to run (repeatable); all four by default.
    #[arg(long, value_enum)]
    variant: Vec<VariantArg>,
    /// Dimensions (repeatable).
    #[arg(long = "N", alias = "n", default_values_t = [200])]
    n: Vec<usize>,
    /// Group budgets (repeatable); with several, d defaults to 7.
    #[arg(long = "G", alias = "g", default_values_t = [5])]
    g: Vec<usize>,
    #[arg(long, value_enum, default_value = "half")]
    overlap: Vec<OverlapArg>,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    m_step: usize,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long, value_enum, default_value = "dp")]
    solver: Solver,
    #[arg(long, value_parser = parse_p)]
    p: Option<NormMode>,
    #[arg(long, default_value_t = 0.95)]
    alpha: f64,
    #[arg(long, default_value_t = 1.05)]
    beta: f64,
    #[arg(long, default_value_t = 1000)]
    max_iterations: usize,
    /// Record per-trial seconds (the CSV is then not reproducible).
    #[arg(long)]
    timing: bool,
    /// Worker threads; defaults to the available cores.
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, default_value = "sweep-out")]
    out_dir: PathBuf,
    /// Also write sweep.json.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SelftestArgs {
    #[arg(long, default_value_t = 200)]
    instances: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    json: bool,
}

enum Failure {
    /// Bad input or arguments: exit 2.
    Usage(String),
    /// The computation failed: exit 1.
    Numeric(String),
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn numeric(e: impl std::fmt::Display) -> Failure {
    Failure::Numeric(e.to_string())
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn read_vector(path: &Path) -> Result<Vec<f64>, Failure> {
    read_text(path)?
        .split_whitespace()
        .map(|t| t.parse::<f64>().map_err(|_| usage(format!("{}: invalid number {t:?}", path.display()))))
        .collect()
}

fn write_vector(path: &Path, v: &[f64]) -> Result<(), Failure> {
    let text: String = v.iter().map(|x| format!("{x}\n")).collect();
    fs::write(path, text).map_err(|e| numeric(format!("{}: {e}", path.display())))
}

fn one_based(v: &[usize]) -> String {
    v.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(" ")
}

fn run_project(args: ProjectArgs) -> Result<(), Failure> {
    let inst = parse_instance(&read_text(&args.instance)?).map_err(usage)?;
    let mut model = inst.model;
    if let Some(g) = args.g {
        model = model.with_budget(g).map_err(usage)?;
    }
    if let Some(k) = args.k {
        model = model.with_sparsity(k).map_err(usage)?;
    }
    let w = inst.weights.ok_or_else(|| usage("instance file has no weight line"))?;
    let result: ProjectionResult = match args.solver {
        Solver::Dp => {
            let projector = match &args.decomposition {
                Some(path) => {
                    let inc = incidence_graph(&model);
                    let td = TreeDecomposition::load(&read_text(path)?, &inc.graph).map_err(usage)?;
                    DpProjector::with_decomposition(&model, to_nice(&td)).map_err(numeric)?
                }
                None => DpProjector::new(&model).map_err(numeric)?,
            };
            log::info!("dp over a nice decomposition of width {}", projector.width());
            projector.project(&w).map_err(numeric)?
        }
        Solver::Benders => {
            let options = BendersOptions { max_iterations: None, record_cuts: args.cut_log.is_some() };
            let outcome = benders_project_with(&model, &w, &options).map_err(numeric)?;
            log::info!("Benders finished after {} iterations", outcome.iterations);
            if let Some(path) = &args.cut_log {
                fs::write(path, cut_log_csv(&outcome.log)).map_err(|e| numeric(format!("{}: {e}", path.display())))?;
            }
            outcome.result
        }
        Solver::Brute => brute_force_projection(&model, &w).map_err(numeric)?,
    };
    if args.json {
        let groups: Vec<usize> = result.selected_groups.iter().map(|j| j + 1).collect();
        let support: Vec<usize> = result.support.iter().map(|i| i + 1).collect();
        println!("{}", json!({ "value": result.covered_weight, "groups": groups, "support": support }));
    } else {
        println!("value {}", result.covered_weight);
        println!("groups {}", one_based(&result.selected_groups));
        println!("support {}", one_based(&result.support));
    }
    Ok(())
}

fn run_recover(args: RecoverArgs) -> Result<(), Failure> {
    let variant: Variant = args.variant.into();
    let (model, a, y, truth): (GroupModel, SensingMatrix, Vec<f64>, Option<Vec<f64>>) = match &args.instance {
        Some(path) => {
            let model = parse_instance(&read_text(path)?).map_err(usage)?.model;
            let matrix = args.matrix.as_ref().expect("clap enforces --matrix");
            let a = SensingMatrix::load(matrix).map_err(|e| usage(format!("{}: {e}", matrix.display())))?;
            let y = read_vector(args.measurements.as_ref().expect("clap enforces --measurements"))?;
            let truth = args.truth.as_deref().map(read_vector).transpose()?;
            (model, a, y, truth)
        }
        None => {
            let model = gen_block_model(args.n, args.overlap.into()).map_err(usage)?.with_budget(args.g).map_err(usage)?;
            let kind = if variant.uses_expander() { MatrixKind::Expander } else { MatrixKind::Gaussian };
            let cfg = SweepConfig { d: args.d, ..SweepConfig::new(args.n, args.overlap.into(), args.g) };
            let d = cfg.degree().map_err(usage)?.min(args.m);
            let mut r = rng::stream(args.seed, &[args.n as u64, args.m as u64]);
            let inst = gen_instance(&model, args.g, args.m, kind, d, &mut r).map_err(usage)?;
            if let Some(dir) = &args.out_dir {
                fs::create_dir_all(dir).map_err(|e| numeric(format!("{}: {e}", dir.display())))?;
                fs::write(dir.join("instance.txt"), write_instance(&model, None))
                    .map_err(|e| numeric(format!("{}: {e}", dir.display())))?;
                inst.a.save(&dir.join("matrix.bin")).map_err(numeric)?;
                write_vector(&dir.join("y.txt"), &inst.y)?;
                write_vector(&dir.join("x.txt"), &inst.x)?;
            }
            (model, inst.a, inst.y, Some(inst.x))
        }
    };
    let config = RecoveryConfig {
        max_iterations: args.max_iterations,
        norm: args.p,
        alpha: args.alpha,
        beta: args.beta,
        projector: args.solver.into(),
        variant,
        ..RecoveryConfig::default()
    };
    let recoverer = Recoverer::new(&model, config).map_err(numeric)?;
    let result = recoverer.run(&a, &y, truth.as_deref()).map_err(numeric)?;
    if let Some(dir) = &args.out_dir {
        fs::create_dir_all(dir).map_err(|e| numeric(format!("{}: {e}", dir.display())))?;
        write_vector(&dir.join("x_hat.txt"), &result.x_hat)?;
    }
    if args.json {
        println!("{}", serde_json::to_string_pretty(&result).map_err(numeric)?);
    } else {
        let support: Vec<usize> = (0..result.x_hat.len()).filter(|&i| result.x_hat[i] != 0.0).collect();
        println!("variant {variant}");
        println!("iterations {}", result.iterations);
        println!("converged {}", result.converged);
        if result.diverged {
            println!("diverged true");
        }
        if let Some(e) = result.relative_error {
            println!("relative_error {e:e}");
        }
        if let Some(ok) = result.condition_holds {
            println!("accuracy_condition {ok}");
        }
        println!("support {}", one_based(&support));
    }
    Ok(())
}

fn run_sweep(args: SweepArgs) -> Result<(), Failure> {
    let variants: Vec<Variant> =
        if args.variant.is_empty() { Variant::ALL.to_vec() } else { args.variant.iter().map(|&v| v.into()).collect() };
    let d = args.d.or((args.g.len() > 1).then_some(7));
    let mut reports = Vec::new();
    for &overlap in &args.overlap {
        for &n in &args.n {
            for &g in &args.g {
                let base = SweepConfig::new(n, overlap.into(), g);
                let config = SweepConfig {
                    variants: variants.clone(),
                    trials: args.trials,
                    seed: args.seed,
                    m_step: args.m_step.max(1),
                    d,
                    projector: args.solver.into(),
                    alpha: args.alpha,
                    beta: args.beta,
                    norm: args.p,
                    max_iterations: args.max_iterations,
                    timing: args.timing,
                    workers: args.workers.unwrap_or(base.workers),
                    ..base
                };
                let report = sweep(&config).map_err(numeric)?;
                for (v, m) in &report.m_sharp {
                    match m {
                        Some(m) => println!("N={n} G={g} overlap={} {v}: m# = {m}", config.overlap),
                        None => println!("N={n} G={g} overlap={} {v}: m# not reached", config.overlap),
                    }
                }
                reports.push(report);
            }
        }
    }
    let written = write_outputs(&reports, &args.out_dir, args.json).map_err(numeric)?;
    log::info!("wrote {} files under {}", written.len(), args.out_dir.display());
    Ok(())
}

fn run_selftest(args: SelftestArgs) -> Result<(), Failure> {
    let report = selftest(args.instances, args.seed);
    if args.json {
        println!("{}", serde_json::to_string_pretty(&report).map_err(numeric)?);
    } else {
        for c in &report.checks {
            println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        }
    }
    if report.passed() {
        Ok(())
    } else {
        Err(numeric("selftest failed"))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        2 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let outcome = match cli.command {
        Command::Project(a) => run_project(a),
        Command::Recover(a) => run_recover(a),
        Command::Sweep(a) => run_sweep(a),
        Command::Selftest(a) => run_selftest(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numeric(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
