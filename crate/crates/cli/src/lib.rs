//! Library side of the `frnn` command-line tool.
//!
//! Each `cmd_*` function runs one subcommand, writes its files under the
//! configured output directory and returns what it computed so the binary
//! (and the tests) can print or inspect it.

pub mod config;

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use thiserror::Error;

use frnn_core::dataset::{parse_csv, parse_keel};
use frnn_core::experiment::{self, FoldOutcome, Method, MissingReason, RunRecord};
use frnn_core::tuning::{self, ComboSelection, GammaFit};
use frnn_core::{
    ComparisonReport, DecisionSystem, FoldPlan, KernelFamily, MissingPolicy, RangeNormalizer, ResultMatrix,
};

pub use config::ExperimentConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("every run failed")]
    AllRunsFailed,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::AllRunsFailed => 3,
        }
    }
}

fn data_err(context: impl std::fmt::Display, e: impl std::fmt::Display) -> CliError {
    CliError::Data(format!("{context}: {e}"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedDataset {
    pub name: String,
    pub data: DecisionSystem,
}

const DATA_EXTENSIONS: [&str; 2] = ["dat", "csv"];

/// Expands directories to their `.dat` / `.csv` files, sorted by name.
pub fn expand_data_paths(paths: &[PathBuf]) -> Result<Vec<PathBuf>, CliError> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut files: Vec<PathBuf> = fs::read_dir(p)
                .map_err(|e| data_err(p.display(), e))?
                .filter_map(|entry| entry.ok().map(|e| e.path()))
                .filter(|f| {
                    f.is_file()
                        && f.extension()
                            .and_then(|x| x.to_str())
                            .is_some_and(|x| DATA_EXTENSIONS.contains(&x))
                })
                .collect();
            files.sort();
            out.extend(files);
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}

/// Reads a KEEL `.dat` file or a headed CSV. For CSV the decision column is
/// `target`, or the last column when `target` is `None`.
pub fn load_dataset(path: &Path, target: Option<&str>) -> Result<NamedDataset, CliError> {
    let text = fs::read_to_string(path).map_err(|e| data_err(path.display(), e))?;
    let is_csv = path.extension().and_then(|x| x.to_str()) == Some("csv");
    let data = if is_csv {
        let last = text
            .lines()
            .next()
            .and_then(|h| h.rsplit(',').next())
            .map(|s| s.trim().trim_matches('"').to_string())
            .unwrap_or_default();
        parse_csv(&text, target.unwrap_or(&last))
    } else {
        parse_keel(&text)
    }
    .map_err(|e| data_err(path.display(), e))?;
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("data").to_string();
    Ok(NamedDataset { name, data })
}

pub fn load_datasets(cfg: &ExperimentConfig) -> Result<Vec<NamedDataset>, CliError> {
    let paths = expand_data_paths(&cfg.data)?;
    if paths.is_empty() {
        return Err(CliError::Data("no data files found".into()));
    }
    let sets: Vec<NamedDataset> = paths
        .iter()
        .map(|p| load_dataset(p, cfg.target.as_deref()))
        .collect::<Result<_, _>>()?;
    let mut seen = BTreeSet::new();
    for s in &sets {
        if !seen.insert(s.name.as_str()) {
            return Err(CliError::Data(format!("two data files are named `{}`", s.name)));
        }
    }
    Ok(sets)
}

fn write_file(path: PathBuf, contents: &str, written: &mut Vec<PathBuf>) -> Result<(), CliError> {
    fs::write(&path, contents).map_err(|e| data_err(path.display(), e))?;
    written.push(path);
    Ok(())
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| data_err(dir.display(), e))
}

fn run_parallel<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    match jobs {
        None => Ok(f()),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(|pool| pool.install(f))
            .map_err(|e| CliError::Usage(format!("cannot start {n} worker threads: {e}"))),
    }
}

#[derive(Debug, Clone)]
pub struct EvaluateOutput {
    /// Canonical order: data set, relation, fold.
    pub records: Vec<RunRecord>,
    pub matrix: ResultMatrix,
    pub files: Vec<PathBuf>,
}

/// Cross-validates every relation on every data set.
///
/// Writes `runs.csv` (one line per fold, without timings) and `results.csv`
/// (mean balanced accuracy per data set and relation, `x` where any fold is
/// missing). Returns [`CliError::AllRunsFailed`] after writing if no fold
/// produced a score.
pub fn cmd_evaluate(cfg: &ExperimentConfig) -> Result<EvaluateOutput, CliError> {
    cfg.validate()?;
    let datasets = load_datasets(cfg)?;
    let plans: Vec<FoldPlan> = datasets
        .iter()
        .map(|d| FoldPlan::stratified(&d.data, cfg.folds, cfg.seed).map_err(|e| data_err(&d.name, e)))
        .collect::<Result<_, _>>()?;
    let settings = cfg.method_settings();
    let cells: Vec<(usize, usize)> = (0..datasets.len())
        .flat_map(|d| (0..cfg.relations.len()).map(move |m| (d, m)))
        .collect();

    let run_cell = |&(d, m): &(usize, usize)| -> Result<Vec<RunRecord>, CliError> {
        let ds = &datasets[d];
        let method = &cfg.relations[m];
        let plan = &plans[d];
        let started = Instant::now();
        let mut records = Vec::with_capacity(plan.n_folds());
        for fold in 0..plan.n_folds() {
            let record = |outcome, duration, detail| RunRecord {
                dataset: ds.name.clone(),
                method: method.to_string(),
                fold,
                outcome,
                duration,
                detail,
            };
            if cfg.time_budget.is_some_and(|b| started.elapsed() >= b) {
                records.push(record(
                    FoldOutcome::Missing(MissingReason::Timeout),
                    Duration::ZERO,
                    None,
                ));
                continue;
            }
            let t = Instant::now();
            let eval = experiment::evaluate_method_fold(
                &ds.data,
                &plan.train_indices(fold),
                &plan.test_indices(fold),
                method,
                &settings,
            )
            .map_err(|e| data_err(format!("{} {method} fold {fold}", ds.name), e))?;
            records.push(record(eval.outcome, t.elapsed(), eval.detail));
        }
        Ok(records)
    };
    let per_cell: Vec<Result<Vec<RunRecord>, CliError>> =
        run_parallel(cfg.jobs, || cells.par_iter().map(run_cell).collect())?;
    let mut records = Vec::new();
    for r in per_cell {
        records.extend(r?);
    }

    let mut cells_out = vec![vec![None; cfg.relations.len()]; datasets.len()];
    for (chunk, &(d, m)) in records.chunks(cfg.folds).zip(&cells) {
        let outcomes: Vec<FoldOutcome> = chunk.iter().map(|r| r.outcome).collect();
        cells_out[d][m] = experiment::aggregate(&outcomes);
    }
    let matrix = ResultMatrix::new(
        datasets.iter().map(|d| d.name.clone()).collect(),
        cfg.relations.iter().map(Method::to_string).collect(),
        cells_out,
    )
    .map_err(|e| CliError::Data(e.to_string()))?;

    ensure_dir(&cfg.out)?;
    let mut files = Vec::new();
    let mut runs = String::from(RunRecord::CSV_HEADER);
    runs.push('\n');
    for r in &records {
        runs.push_str(&r.csv_line());
        runs.push('\n');
    }
    write_file(cfg.out.join("runs.csv"), &runs, &mut files)?;
    write_file(cfg.out.join("results.csv"), &matrix.to_csv(6), &mut files)?;

    if records.iter().all(|r| r.outcome.accuracy().is_none()) {
        return Err(CliError::AllRunsFailed);
    }
    Ok(EvaluateOutput { records, matrix, files })
}

#[derive(Debug, Clone)]
pub struct CompareOutput {
    pub matrix: ResultMatrix,
    pub report: ComparisonReport,
    pub files: Vec<PathBuf>,
}

/// Friedman test, Conover/Holm post-hoc (when significant), mean ranks and
/// deficits for the merged result matrices.
///
/// Writes `ranks.csv`, `friedman.csv`, `deficits.csv`, `posthoc.csv` (only
/// when the post-hoc stage runs) and `report.txt`.
pub fn cmd_compare(
    matrices: &[PathBuf],
    out: &Path,
    policy: MissingPolicy,
    alpha: f64,
) -> Result<CompareOutput, CliError> {
    if matrices.is_empty() {
        return Err(CliError::Usage("no result matrix given".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(CliError::Usage("alpha must lie in (0, 1)".into()));
    }
    let parts: Vec<ResultMatrix> = matrices
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p).map_err(|e| data_err(p.display(), e))?;
            ResultMatrix::from_csv(&text).map_err(|e| data_err(p.display(), e))
        })
        .collect::<Result<_, _>>()?;
    let matrix = ResultMatrix::merge(&parts).map_err(|e| CliError::Data(e.to_string()))?;
    let report = ComparisonReport::compute(&matrix, policy, alpha).map_err(|e| CliError::Data(e.to_string()))?;

    ensure_dir(out)?;
    let mut files = Vec::new();
    write_file(out.join("ranks.csv"), &report.ranks_csv(), &mut files)?;
    write_file(out.join("friedman.csv"), &report.friedman_csv(), &mut files)?;
    write_file(out.join("deficits.csv"), &report.deficits_csv(), &mut files)?;
    if let Some(p) = report.posthoc_csv() {
        write_file(out.join("posthoc.csv"), &p, &mut files)?;
    }
    write_file(out.join("report.txt"), &report.to_text(), &mut files)?;
    Ok(CompareOutput { matrix, report, files })
}

#[derive(Debug, Clone)]
pub struct FitOutput {
    /// `(data set, fit)` in data set then family order.
    pub fits: Vec<(String, GammaFit)>,
    pub files: Vec<PathBuf>,
}

fn prepared(cfg: &ExperimentConfig, ds: &DecisionSystem) -> Result<DecisionSystem, CliError> {
    if cfg.normalize {
        RangeNormalizer::fit(ds)
            .transform_system(ds)
            .map_err(|e| CliError::Data(e.to_string()))
    } else {
        Ok(ds.clone())
    }
}

/// Fits the width of each kernel family on each (normalised) data set.
///
/// Writes `gamma.csv` with one summary line per fit and
/// `trace_<data set>_<family>.csv` with the iteration trace.
pub fn cmd_fit_gamma(cfg: &ExperimentConfig, families: &[KernelFamily]) -> Result<FitOutput, CliError> {
    cfg.validate()?;
    if families.is_empty() {
        return Err(CliError::Usage("no kernel family given".into()));
    }
    let datasets = load_datasets(cfg)?;
    let gd = tuning::GradientDescentConfig {
        policy: cfg.policy,
        ..cfg.gd.clone()
    };
    let jobs: Vec<(usize, KernelFamily)> = (0..datasets.len())
        .flat_map(|d| families.iter().map(move |&f| (d, f)))
        .collect();
    let results: Vec<Result<(String, GammaFit), CliError>> = run_parallel(cfg.jobs, || {
        jobs.par_iter()
            .map(|&(d, family)| {
                let ds = &datasets[d];
                let train = prepared(cfg, &ds.data)?;
                let fit = tuning::fit_gamma(&train, family, cfg.k, &gd)
                    .map_err(|e| data_err(format!("{} {family}", ds.name), e))?;
                Ok((ds.name.clone(), fit))
            })
            .collect()
    })?;
    let fits: Vec<(String, GammaFit)> = results.into_iter().collect::<Result<_, _>>()?;

    ensure_dir(&cfg.out)?;
    let mut files = Vec::new();
    let mut summary =
        String::from("dataset,family,gamma,iterations,converged,initial_loss,final_loss,uniform_fallbacks\n");
    for (name, fit) in &fits {
        writeln!(
            summary,
            "{name},{},{},{},{},{:.6},{:.6},{}",
            fit.family,
            fit.gamma,
            fit.iterations,
            fit.converged,
            fit.initial_loss,
            fit.final_loss,
            fit.uniform_fallbacks
        )
        .expect("string write");
        let mut trace = String::from("iteration,gamma,loss,gradient\n");
        for s in &fit.trace {
            writeln!(trace, "{},{},{},{}", s.iteration, s.gamma, s.loss, s.gradient).expect("string write");
        }
        write_file(
            cfg.out.join(format!("trace_{name}_{}.csv", fit.family)),
            &trace,
            &mut files,
        )?;
    }
    write_file(cfg.out.join("gamma.csv"), &summary, &mut files)?;
    Ok(FitOutput { fits, files })
}

#[derive(Debug, Clone)]
pub struct ComboOutput {
    pub selections: Vec<(String, ComboSelection)>,
    pub files: Vec<PathBuf>,
}

/// COMBO selection on each whole data set. Writes `combo.csv` with the
/// inner cross-validation scores of every candidate.
pub fn cmd_combo(cfg: &ExperimentConfig) -> Result<ComboOutput, CliError> {
    cfg.validate()?;
    let datasets = load_datasets(cfg)?;
    let combo = tuning::ComboConfig {
        normalize: cfg.normalize,
        policy: cfg.policy,
        ..cfg.combo.clone()
    };
    let results: Vec<Result<(String, ComboSelection), CliError>> = run_parallel(cfg.jobs, || {
        datasets
            .par_iter()
            .map(|ds| {
                tuning::combo_select(&ds.data, &combo, cfg.k)
                    .map(|s| (ds.name.clone(), s))
                    .map_err(|e| data_err(&ds.name, e))
            })
            .collect()
    })?;
    let selections: Vec<(String, ComboSelection)> = results.into_iter().collect::<Result<_, _>>()?;

    ensure_dir(&cfg.out)?;
    let mut files = Vec::new();
    let mut text = String::from("dataset,candidate,mean,winner,fold_scores,pair_evaluations\n");
    for (name, sel) in &selections {
        for (i, spec) in combo.candidates.iter().enumerate() {
            let folds: Vec<String> = sel.fold_scores[i]
                .iter()
                .map(|s| s.map_or_else(|| "x".to_string(), |v| format!("{v:.6}")))
                .collect();
            let mean = if sel.scores[i].is_finite() {
                format!("{:.6}", sel.scores[i])
            } else {
                "-inf".to_string()
            };
            writeln!(
                text,
                "{name},{spec},{mean},{},{},{}",
                i == sel.winner,
                folds.join(";"),
                sel.pair_evaluations
            )
            .expect("string write");
        }
    }
    write_file(cfg.out.join("combo.csv"), &text, &mut files)?;
    Ok(ComboOutput { selections, files })
}

/// Writes the stratified outer folds of each data set to `folds_<name>.csv`.
pub fn cmd_folds(cfg: &ExperimentConfig) -> Result<Vec<(String, FoldPlan, PathBuf)>, CliError> {
    cfg.validate()?;
    let datasets = load_datasets(cfg)?;
    ensure_dir(&cfg.out)?;
    let mut out = Vec::new();
    for ds in datasets {
        let plan = FoldPlan::stratified(&ds.data, cfg.folds, cfg.seed).map_err(|e| data_err(&ds.name, e))?;
        let path = cfg.out.join(format!("folds_{}.csv", ds.name));
        fs::write(&path, plan.to_csv()).map_err(|e| data_err(path.display(), e))?;
        out.push((ds.name, plan, path));
    }
    Ok(out)
}
