mod common;

use std::fs;
use std::path::Path;
use std::process::Command;

use frnn_cli::config::ExperimentConfig;
use frnn_cli::{cmd_combo, cmd_compare, cmd_evaluate, cmd_fit_gamma, cmd_folds, CliError};
use frnn_core::dataset::FeatureMatrix;
use frnn_core::experiment::{FoldOutcome, MissingReason};
use frnn_core::tuning::ComboConfig;
use frnn_core::{synthetic, DecisionSystem, FoldPlan, KernelFamily, MissingPolicy};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

fn frnn() -> Command {
    Command::new(env!("CARGO_BIN_EXE_frnn"))
}

fn config(dir: &Path, data: &[&Path], relations: &str) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.data = data.iter().map(|p| p.to_path_buf()).collect();
    cfg.set("relations", relations, None).unwrap();
    cfg.out = dir.join("out");
    cfg
}

fn with_duplicate_column(ds: &DecisionSystem) -> DecisionSystem {
    let rows: Vec<Vec<f64>> = ds.features.rows().map(|r| vec![r[0], r[1], r[1]]).collect();
    DecisionSystem::new(
        FeatureMatrix::from_rows(&rows).unwrap(),
        ds.classes.clone(),
        ds.class_names.clone(),
        vec!["a".into(), "b".into(), "b2".into()],
    )
    .unwrap()
}

#[test]
fn evaluate_manhattan_on_gaussians() {
    let dir = TempDir::new().unwrap();
    let ds = synthetic::two_gaussians(200, 2, 3.0, 7);
    let path = common::write_csv(dir.path(), "gauss", &ds);
    let mut cfg = config(dir.path(), &[&path], "man");
    cfg.seed = 7;
    let out = cmd_evaluate(&cfg).unwrap();
    assert_eq!(out.records.len(), 10);
    let mean = out.matrix.cells[0][0].unwrap();
    assert!(mean >= 0.9, "{mean}");
    let plan = FoldPlan::stratified(&ds, 10, 7).unwrap();
    assert!(common::knn_oracle(&ds, &plan, 3) >= 0.9);
    assert!(dir.path().join("out/results.csv").exists());
    assert!(dir.path().join("out/runs.csv").exists());
}

#[test]
fn mahalanobis_on_duplicated_column_is_missing() {
    let dir = TempDir::new().unwrap();
    let ds = with_duplicate_column(&synthetic::two_gaussians(80, 2, 3.0, 1));
    let path = common::write_csv(dir.path(), "dup", &ds);
    let cfg = config(dir.path(), &[&path], "mah,man");
    let out = cmd_evaluate(&cfg).unwrap();
    let mah: Vec<_> = out.records.iter().filter(|r| r.method == "mah").collect();
    assert_eq!(mah.len(), 10);
    assert!(mah
        .iter()
        .all(|r| r.outcome == FoldOutcome::Missing(MissingReason::RelationUndefined)));
    assert_eq!(out.matrix.cells[0][0], None);
    assert!(out.matrix.cells[0][1].is_some());
    let csv = fs::read_to_string(dir.path().join("out/results.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().starts_with("dup,x,"), "{csv}");
    let runs = fs::read_to_string(dir.path().join("out/runs.csv")).unwrap();
    assert!(runs.contains("dup,mah,0,,relation-undefined,"));

    // only an undefined relation: every run fails
    let cfg = config(dir.path(), &[&path], "mah");
    assert!(matches!(cmd_evaluate(&cfg), Err(CliError::AllRunsFailed)));
    let status = frnn()
        .args(["evaluate", "--relations", "mah", "--data"])
        .arg(&path)
        .arg("--out")
        .arg(dir.path().join("out2"))
        .output()
        .unwrap()
        .status;
    assert_eq!(status.code(), Some(3));
}

#[test]
fn evaluate_is_byte_identical_across_runs_and_thread_counts() {
    let dir = TempDir::new().unwrap();
    let a = common::write_csv(dir.path(), "a", &synthetic::two_gaussians(90, 3, 2.0, 3));
    let b = common::write_csv(dir.path(), "b", &synthetic::uniform_random(60, 4, 3, 5, 4));
    let mut cfg = config(dir.path(), &[&a, &b], "man,cos,mah,csmbr,gauss:0.5");
    let read = |cfg: &ExperimentConfig| {
        cmd_evaluate(cfg).unwrap();
        (
            fs::read(cfg.out.join("results.csv")).unwrap(),
            fs::read(cfg.out.join("runs.csv")).unwrap(),
        )
    };
    let first = read(&cfg);
    assert_eq!(first, read(&cfg));
    cfg.jobs = Some(1);
    assert_eq!(first, read(&cfg));
    let runs = String::from_utf8(first.1).unwrap();
    let keys: Vec<(String, String, usize)> = runs
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].to_string(), f[1].to_string(), f[2].parse().unwrap())
        })
        .collect();
    assert_eq!(keys.len(), 2 * 5 * 10);
    assert_eq!(keys[0], ("a".into(), "man".into(), 0));
    assert_eq!(keys[10], ("a".into(), "cos".into(), 0));
    assert_eq!(keys[50], ("b".into(), "man".into(), 0));
}

#[test]
fn zero_time_budget_marks_timeouts() {
    let dir = TempDir::new().unwrap();
    let path = common::write_csv(dir.path(), "g", &synthetic::two_gaussians(40, 2, 3.0, 2));
    let mut cfg = config(dir.path(), &[&path], "man");
    cfg.time_budget = Some(std::time::Duration::ZERO);
    assert!(matches!(cmd_evaluate(&cfg), Err(CliError::AllRunsFailed)));
    let runs = fs::read_to_string(cfg.out.join("runs.csv")).unwrap();
    assert_eq!(runs.matches(",timeout,").count(), 10);
}

#[test]
fn compare_reference_matrix_orders_top_three() {
    let dir = TempDir::new().unwrap();
    let out = cmd_compare(
        &[common::data_dir().join("distance_relations.csv")],
        dir.path(),
        MissingPolicy::CompleteCase,
        0.05,
    )
    .unwrap();
    let order: Vec<&str> = out
        .report
        .rank_order()
        .into_iter()
        .map(|i| out.report.methods[i].as_str())
        .collect();
    assert_eq!(&order[..3], &["man", "pcc", "euc"]);
    assert_eq!(out.report.friedman.rows_used.len(), 28);
    assert!(out.report.posthoc.is_some());
    for f in ["ranks.csv", "friedman.csv", "deficits.csv", "posthoc.csv", "report.txt"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let worst = cmd_compare(
        &[common::data_dir().join("distance_relations.csv")],
        &dir.path().join("worst"),
        MissingPolicy::WorstRank,
        0.05,
    )
    .unwrap();
    assert_eq!(worst.report.friedman.rows_used.len(), 40);
}

#[test]
fn compare_identical_columns_skips_posthoc() {
    let dir = TempDir::new().unwrap();
    let m = dir.path().join("m.csv");
    fs::write(&m, "dataset,a,b\nd1,0.5,0.5\nd2,0.7,0.7\nd3,0.9,0.9\n").unwrap();
    let out = cmd_compare(&[m], &dir.path().join("o"), MissingPolicy::CompleteCase, 0.05).unwrap();
    assert_eq!(out.report.friedman.p_value, 1.0);
    assert!(out.report.posthoc.is_none());
    assert!(!dir.path().join("o/posthoc.csv").exists());
}

#[test]
fn compare_random_matrix_structure() {
    let dir = TempDir::new().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    let mut text = String::from("dataset,m0,m1,m2,m3,m4,m5,m6\n");
    for i in 0..40 {
        text.push_str(&format!("d{i}"));
        for j in 0..7 {
            // a mild trend so the post-hoc stage runs
            let v: f64 = (rng.random::<f64>() * 0.5 + 0.05 * j as f64).min(1.0);
            text.push_str(&format!(",{v:.3}"));
        }
        text.push('\n');
    }
    let m = dir.path().join("random.csv");
    fs::write(&m, text).unwrap();
    let out = cmd_compare(&[m], &dir.path().join("o"), MissingPolicy::CompleteCase, 0.05).unwrap();
    let table = out.report.posthoc.as_ref().expect("post-hoc stage");
    for i in 0..7 {
        for j in 0..7 {
            match table.adjusted[i][j] {
                None => assert_eq!(i, j),
                Some(p) => {
                    assert!((0.0..=1.0).contains(&p));
                    assert_eq!(Some(p), table.adjusted[j][i]);
                }
            }
        }
    }
    assert!(dir.path().join("o/report.txt").exists());
}

#[test]
fn compare_merges_files_and_rejects_garbage() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    fs::write(&a, "dataset,x\nd1,0.5\nd2,0.6\nd3,0.9\n").unwrap();
    fs::write(&b, "dataset,y\nd1,0.4\nd2,0.7\nd3,0.8\n").unwrap();
    let out = cmd_compare(
        &[a.clone(), b],
        &dir.path().join("o"),
        MissingPolicy::CompleteCase,
        0.05,
    )
    .unwrap();
    assert_eq!(out.matrix.methods, vec!["x", "y"]);
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "dataset,x\nd1,zebra\n").unwrap();
    let err = cmd_compare(&[bad.clone()], dir.path(), MissingPolicy::CompleteCase, 0.05).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    let status = frnn()
        .arg("compare")
        .arg(&bad)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap()
        .status;
    assert_eq!(status.code(), Some(2));
}

#[test]
fn fit_gamma_zero_learning_rate() {
    let dir = TempDir::new().unwrap();
    let path = common::write_csv(dir.path(), "g", &synthetic::two_gaussians(60, 2, 3.0, 5));
    let mut cfg = config(dir.path(), &[&path], "man");
    cfg.gd.learning_rate = 0.0;
    let out = cmd_fit_gamma(&cfg, &[KernelFamily::Gaussian, KernelFamily::Spherical]).unwrap();
    for (_, fit) in &out.fits {
        assert_eq!(fit.gamma, 1.0);
        assert_eq!(fit.iterations, 1);
    }
    let summary = fs::read_to_string(cfg.out.join("gamma.csv")).unwrap();
    assert!(
        summary.lines().nth(1).unwrap().starts_with("g,gauss,1,1,true,"),
        "{summary}"
    );
    assert!(cfg.out.join("trace_g_sphere.csv").exists());

    let status = frnn()
        .args(["fit-gamma", "--learning-rate", "0", "--kernels", "exp", "--data"])
        .arg(&path)
        .arg("--out")
        .arg(dir.path().join("bin"))
        .output()
        .unwrap()
        .status;
    assert_eq!(status.code(), Some(0));
    let summary = fs::read_to_string(dir.path().join("bin/gamma.csv")).unwrap();
    assert!(summary.contains("g,exp,1,1,true,"));
}

#[test]
fn combo_dominant_candidate_and_oracle() {
    let dir = TempDir::new().unwrap();
    let angular = common::write_csv(dir.path(), "angular", &synthetic::angular_classes(120, 5));
    let mut cfg = config(dir.path(), &[&angular], "man");
    cfg.set("combo.candidates", "man,che,cos", None).unwrap();
    let out = cmd_combo(&cfg).unwrap();
    let sel = &out.selections[0].1;
    assert_eq!(sel.spec.to_string(), "cos");
    assert_eq!(sel.scores[2], 1.0);
    let csv = fs::read_to_string(cfg.out.join("combo.csv")).unwrap();
    assert!(csv.contains("angular,cos,1.000000,true,"), "{csv}");

    for seed in 1..=5u64 {
        let ds = synthetic::two_gaussians(60, 2, 1.5, seed);
        let path = common::write_csv(dir.path(), &format!("s{seed}"), &ds);
        let mut cfg = config(dir.path(), &[&path], "man");
        cfg.combo.seed = seed;
        let sel = &cmd_combo(&cfg).unwrap().selections[0].1;
        let parsed = frnn_cli::load_dataset(&path, None).unwrap().data;
        let oracle_cfg = ComboConfig {
            seed,
            ..ComboConfig::default()
        };
        let (winner, scores, _) = common::combo_brute_force(&parsed, &oracle_cfg, 3);
        assert_eq!(sel.winner, winner, "seed {seed}");
        assert_eq!(sel.scores, scores, "seed {seed}");
    }
}

#[test]
fn folds_command_writes_plans() {
    let dir = TempDir::new().unwrap();
    let path = common::write_csv(dir.path(), "g", &synthetic::two_gaussians(53, 2, 3.0, 5));
    let cfg = config(dir.path(), &[&path], "man");
    let plans = cmd_folds(&cfg).unwrap();
    let sizes = plans[0].1.fold_sizes();
    assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
    let text = fs::read_to_string(&plans[0].2).unwrap();
    assert_eq!(text.lines().count(), 54);
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    common::write_csv(dir.path(), "g", &synthetic::two_gaussians(40, 2, 3.0, 2));
    let run = |args: &[&str]| frnn().args(args).current_dir(dir.path()).output().unwrap();

    let out = run(&["evaluate", "--relations", "manhattan", "--data", "g.csv"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("csmbr") && err.contains("gauss"), "{err}");

    assert_eq!(run(&["evaluate", "--bogus"]).status.code(), Some(1));
    assert_eq!(run(&["evaluate", "--relations", "man"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
    assert_eq!(run(&["evaluate", "--data", "missing.csv"]).status.code(), Some(2));
    fs::write(dir.path().join("broken.dat"), "@relation r\n@attribute x real\n").unwrap();
    assert_eq!(run(&["evaluate", "--data", "broken.dat"]).status.code(), Some(2));

    let out = run(&["evaluate", "--relations", "man,euc", "--folds", "5", "--data", "g.csv"]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(stdout.matches(" fold ").count(), 10);
    assert!(dir.path().join("frnn-out/results.csv").exists());
}

#[test]
fn config_file_and_flag_override() {
    let dir = TempDir::new().unwrap();
    common::write_csv(dir.path(), "g", &synthetic::two_gaussians(40, 2, 3.0, 2));
    let conf = dir.path().join("run.conf");
    fs::write(
        &conf,
        "# small run\ndata = g.csv\nrelations = man, cos\nfolds = 4\nout = results\n",
    )
    .unwrap();
    let status = frnn()
        .args(["evaluate", "--folds", "5", "--config"])
        .arg(&conf)
        .output()
        .unwrap()
        .status;
    assert_eq!(status.code(), Some(0));
    let runs = fs::read_to_string(dir.path().join("results/runs.csv")).unwrap();
    assert_eq!(runs.lines().count(), 1 + 2 * 5);

    fs::write(&conf, "colour = blue\n").unwrap();
    let status = frnn()
        .args(["evaluate", "--config"])
        .arg(&conf)
        .output()
        .unwrap()
        .status;
    assert_eq!(status.code(), Some(1));
}

#[test]
fn keel_input_end_to_end() {
    let dir = TempDir::new().unwrap();
    let ds = synthetic::two_gaussians(60, 2, 3.0, 4);
    let mut text = String::from(
        "@relation toy\n@attribute a real [-5.0, 5.0]\n@attribute colour {red, blue}\n@attribute b real\n@attribute class {c0, c1}\n@inputs a, colour, b\n@outputs class\n@data\n",
    );
    for (row, &c) in ds.features.rows().zip(&ds.classes) {
        text.push_str(&format!("{}, red, {}, c{c}\n", row[0], row[1]));
    }
    let data_dir = dir.path().join("keel");
    fs::create_dir(&data_dir).unwrap();
    fs::write(data_dir.join("toy.dat"), text).unwrap();
    let cfg = config(dir.path(), &[&data_dir], "man");
    let out = cmd_evaluate(&cfg).unwrap();
    assert_eq!(out.matrix.datasets, vec!["toy"]);
    assert!(out.matrix.cells[0][0].unwrap() > 0.8);
}
