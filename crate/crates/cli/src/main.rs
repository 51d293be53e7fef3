use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use frnn_cli::config::ExperimentConfig;
use frnn_cli::{cmd_combo, cmd_compare, cmd_evaluate, cmd_fit_gamma, cmd_folds, CliError};
use frnn_core::{KernelFamily, MissingPolicy};

#[derive(Parser)]
#[command(name = "frnn", version, about = "Fuzzy-rough nearest neighbour benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cross-validate relations on data sets and write a result matrix.
    Evaluate(RunArgs),
    /// Rank-based comparison of one or more result matrices.
    Compare(CompareArgs),
    /// Fit kernel widths by gradient descent.
    FitGamma(FitArgs),
    /// Select a relation by inner cross-validation.
    Combo(ComboArgs),
    /// Write the stratified fold assignment of each data set.
    Folds(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Plain-text config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Data files or directories (comma separated).
    #[arg(long)]
    data: Option<String>,
    /// Relations to evaluate (comma separated).
    #[arg(long)]
    relations: Option<String>,
    /// Number of neighbours.
    #[arg(long)]
    k: Option<String>,
    /// Number of outer folds.
    #[arg(long)]
    folds: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
    /// Wall-clock budget per data set and relation, in seconds.
    #[arg(long)]
    time_budget: Option<String>,
    /// Decision column of CSV inputs (default: last column).
    #[arg(long)]
    target: Option<String>,
    /// Classes with fewer than k neighbours: truncate or strict.
    #[arg(long)]
    policy: Option<String>,
    /// Worker threads.
    #[arg(long)]
    jobs: Option<String>,
    /// Skip range normalisation.
    #[arg(long)]
    no_normalize: bool,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Kernel families to fit (comma separated).
    #[arg(long, default_value = "gauss")]
    kernels: String,
    #[arg(long)]
    initial_gamma: Option<String>,
    #[arg(long)]
    batch_size: Option<String>,
    #[arg(long)]
    learning_rate: Option<String>,
    #[arg(long)]
    max_iterations: Option<String>,
    #[arg(long)]
    precision: Option<String>,
    #[arg(long)]
    gd_seed: Option<String>,
}

#[derive(Args)]
struct ComboArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Candidate relations (comma separated).
    #[arg(long)]
    candidates: Option<String>,
    #[arg(long)]
    inner_folds: Option<String>,
    #[arg(long)]
    combo_seed: Option<String>,
}

#[derive(Args)]
struct CompareArgs {
    /// Result matrix CSV files.
    files: Vec<PathBuf>,
    /// Result matrix CSV files (comma separated), in addition to FILES.
    #[arg(long)]
    data: Option<String>,
    #[arg(long, default_value = "compare-out")]
    out: PathBuf,
    /// Rows with missing cells: complete-case or worst-rank.
    #[arg(long, default_value = "complete-case")]
    missing: String,
    /// Significance level of the Friedman stage.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
}

fn build_config(run: &RunArgs, extra: &[(&str, &Option<String>)]) -> Result<ExperimentConfig, CliError> {
    let mut cfg = ExperimentConfig::default();
    if let Some(path) = &run.config {
        cfg.apply_file(path)?;
    }
    let flags = [
        ("data", &run.data),
        ("relations", &run.relations),
        ("k", &run.k),
        ("folds", &run.folds),
        ("seed", &run.seed),
        ("out", &run.out),
        ("time_budget", &run.time_budget),
        ("target", &run.target),
        ("policy", &run.policy),
        ("jobs", &run.jobs),
    ];
    for (key, value) in flags.iter().chain(extra) {
        if let Some(v) = value {
            cfg.set(key, v, None)?;
        }
    }
    if run.no_normalize {
        cfg.normalize = false;
    }
    Ok(cfg)
}

fn print_files(files: &[PathBuf]) {
    for f in files {
        println!("wrote {}", f.display());
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Evaluate(args) => {
            let cfg = build_config(&args, &[])?;
            let result = cmd_evaluate(&cfg);
            if let Ok(out) = &result {
                for r in &out.records {
                    println!("{}", r.display_line());
                }
                print!("\n{}", out.matrix.to_csv(4));
                print_files(&out.files);
            }
            result.map(|_| ())
        }
        Command::Compare(args) => {
            let mut files = args.files.clone();
            if let Some(d) = &args.data {
                files.extend(d.split(',').map(str::trim).filter(|s| !s.is_empty()).map(PathBuf::from));
            }
            let policy: MissingPolicy = args.missing.parse().map_err(CliError::Usage)?;
            let out = cmd_compare(&files, &args.out, policy, args.alpha)?;
            print!("{}", out.report.to_text());
            print_files(&out.files);
            Ok(())
        }
        Command::FitGamma(args) => {
            let cfg = build_config(
                &args.run,
                &[
                    ("gd.initial_gamma", &args.initial_gamma),
                    ("gd.batch_size", &args.batch_size),
                    ("gd.learning_rate", &args.learning_rate),
                    ("gd.max_iterations", &args.max_iterations),
                    ("gd.precision", &args.precision),
                    ("gd.seed", &args.gd_seed),
                ],
            )?;
            let families: Vec<KernelFamily> = args
                .kernels
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse()
                        .map_err(|e: frnn_core::RelationError| CliError::Usage(e.to_string()))
                })
                .collect::<Result<_, _>>()?;
            let out = cmd_fit_gamma(&cfg, &families)?;
            for (name, fit) in &out.fits {
                println!(
                    "{name} {}: gamma = {} after {} iterations ({}), loss {:.6} -> {:.6}, uniform fallbacks {}",
                    fit.family,
                    fit.gamma,
                    fit.iterations,
                    if fit.converged { "converged" } else { "iteration limit" },
                    fit.initial_loss,
                    fit.final_loss,
                    fit.uniform_fallbacks
                );
            }
            print_files(&out.files);
            Ok(())
        }
        Command::Combo(args) => {
            let cfg = build_config(
                &args.run,
                &[
                    ("combo.candidates", &args.candidates),
                    ("combo.folds", &args.inner_folds),
                    ("combo.seed", &args.combo_seed),
                ],
            )?;
            let out = cmd_combo(&cfg)?;
            for (name, sel) in &out.selections {
                println!("{name}: winner {}", sel.spec);
                for (spec, score) in cfg.combo.candidates.iter().zip(&sel.scores) {
                    println!("  {spec:<12} {score:.4}");
                }
            }
            print_files(&out.files);
            Ok(())
        }
        Command::Folds(args) => {
            let cfg = build_config(&args, &[])?;
            for (name, plan, path) in cmd_folds(&cfg)? {
                println!("{name}: fold sizes {:?}", plan.fold_sizes());
                println!("wrote {}", path.display());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
