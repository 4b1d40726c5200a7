use std::path::Path;
use std::process::Command;

use ldon::pipeline::commands::{self, COMPARE_FILE, DATASET_FILE, OPERATOR_FILE, REDUCER_FILE, REPORT_FILE};
use ldon::pipeline::{compare, evaluate, ExperimentConfig};

const TINY: &str = "dataset.nx = 8
dataset.ny = 8
dataset.n_samples = 12
dataset.m_t = 4
reducer.d = 16
reducer.epochs = 4
operator.epochs = 3
fno.width = 4
fno.layers = 1
fno.modes = 2
";

fn tiny(dir: &Path, extra: &str) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::parse(&format!("{TINY}{extra}")).unwrap();
    cfg.output_dir = dir.to_path_buf();
    cfg
}

fn read(dir: &Path, file: &str) -> Vec<u8> {
    std::fs::read(dir.join(file)).unwrap()
}

#[test]
fn compare_emits_one_row_per_model_and_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny(dir.path(), "compare.models = latent, full\ncompare.d = 16\nseeds = 1..5\n");
    let reports = compare(&cfg).unwrap();
    let csv = String::from_utf8(read(dir.path(), COMPARE_FILE)).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("model,reducer,d,seed,mse,latent_mse,params"));
    assert_eq!(lines.count(), 10);
    for r in &reports {
        assert!(r.decoded_mse.is_finite());
        assert!(r.phases.iter().all(|(_, s)| *s > 0.0));
        assert_eq!(r.param_ordering_holds, Some(true));
    }
}

#[test]
fn overfitting_five_samples_reaches_small_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny(
        dir.path(),
        "dataset.n_samples = 6
dataset.train_fraction = 0.84
evaluate.split = train
reducer.kind = pca
operator.mode = latent
operator.epochs = 1000
operator.batch = 5
",
    );
    let ds = commands::gen_data(&cfg).unwrap();
    assert_eq!(ds.n_train, 5);
    commands::fit_reducer(&cfg).unwrap();
    commands::train_operator(&cfg).unwrap();
    let mse = evaluate(&cfg).unwrap();
    assert!(mse < 1e-3, "overfit mse {mse}");
}

#[test]
fn rerunning_subcommands_reproduces_artifacts() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for dir in [a.path(), b.path()] {
        let cfg = tiny(dir, "compare.models = latent, full, fno\ncompare.reducers = mlae, pca\ncompare.d = 9\nseeds = 1..2\n");
        commands::gen_data(&cfg).unwrap();
        commands::fit_reducer(&cfg).unwrap();
        commands::train_operator(&cfg).unwrap();
        evaluate(&cfg).unwrap();
        compare(&cfg).unwrap();
        commands::export_all(&cfg).unwrap();
    }
    for file in [
        DATASET_FILE,
        REDUCER_FILE,
        OPERATOR_FILE,
        REPORT_FILE,
        commands::METRICS_FILE,
        COMPARE_FILE,
        "operator.csv",
        "reducer.manifest.csv",
    ] {
        assert_eq!(read(a.path(), file), read(b.path(), file), "{file} differs between runs");
    }
}

#[test]
fn report_records_losses_and_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny(dir.path(), "operator.mode = full\n");
    commands::gen_data(&cfg).unwrap();
    let r = commands::train_operator(&cfg).unwrap();
    assert_eq!(r.epoch_losses.len(), 3);
    assert!(r.seconds("train").unwrap() > 0.0);
    let text = String::from_utf8(read(dir.path(), REPORT_FILE)).unwrap();
    assert!(text.contains(&format!("config_hash = {}", cfg.hash())));
    assert!(text.contains("decoded_mse = "));
    assert!(text.contains(&format!("param_count = {}", r.param_count)));
    assert!(!text.contains("seconds"));
}

fn ldon(dir: &Path, args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_ldon"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .arg("--quiet")
        .env("LDON_THREADS", "1")
        .output()
        .unwrap();
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stderr).into_owned())
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("exp.cfg");
    std::fs::write(&cfg_path, TINY).unwrap();
    let cfg = cfg_path.to_str().unwrap();

    let (code, err) = ldon(dir.path(), &["fit-reducer", "--config", cfg]);
    assert_eq!(code, 3, "{err}");
    assert!(err.contains(DATASET_FILE));

    std::fs::write(&cfg_path, format!("{TINY}reducer.dd = 3\n")).unwrap();
    let (code, err) = ldon(dir.path(), &["gen-data", "--config", cfg]);
    assert_eq!(code, 2);
    assert!(err.contains("line 11, column 1"), "{err}");
    std::fs::write(&cfg_path, TINY).unwrap();

    let (code, _) = ldon(dir.path(), &["gen-data", "--config", cfg, "--set", "operator.p=zero"]);
    assert_eq!(code, 2);

    assert_eq!(ldon(dir.path(), &["gen-data", "--config", cfg]).0, 0);
    let (code, err) = ldon(
        dir.path(),
        &["train-operator", "--config", cfg, "--set", "operator.mode=full", "--set", "operator.lr=1e300"],
    );
    assert_eq!(code, 4, "{err}");
}
