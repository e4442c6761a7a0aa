use std::path::Path;
use std::process::{Command, Output};

use siamface::evaluation::tables::{parse_table, EDC_HEADER, FOLDS_HEADER, RECORDS_HEADER, ROC_HEADER, TRACE_HEADER};
use siamface::synth_data::read_dataset;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_siamface"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = run(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

fn manifest(dir: &Path, name: &str) -> serde_json::Value {
    serde_json::from_str(&read(dir, name)).unwrap()
}

fn synth_small(dir: &Path) {
    ok(
        dir,
        &["synth", "--identities", "6", "--poses", "5", "--vertices", "40", "--landmarks", "20", "--basis-out", "b.txt", "--data-out", "d.txt"],
    );
}

#[test]
fn synth_writes_the_requested_sample_count() {
    let dir = tempfile::tempdir().unwrap();
    let stdout = ok(dir.path(), &["synth", "--identities", "50", "--poses", "20", "--basis-out", "b.txt", "--data-out", "d.txt"]);
    assert!(stdout.contains("samples 1000"), "{stdout}");
    let ds = read_dataset(dir.path().join("d.txt")).unwrap();
    assert_eq!(ds.samples.len(), 1000);
    assert_eq!(ds.identities().len(), 50);
    let m = manifest(dir.path(), "d.txt.manifest.json");
    assert_eq!(m["command"], "synth");
    assert_eq!(m["config"]["identities"], 50);
    assert_eq!(m["outputs"]["basis"], "b.txt");
}

#[test]
fn synth_rejects_a_single_identity() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["synth", "--identities", "1", "--basis-out", "b.txt", "--data-out", "d.txt"]);
    assert!(!out.status.success());
    assert!(!dir.path().join("d.txt").exists());
}

#[test]
fn train_defaults_are_echoed_into_the_manifest() {
    let dir = tempfile::tempdir().unwrap();
    synth_small(dir.path());
    ok(
        dir.path(),
        &[
            "train", "--data", "d.txt", "--basis", "b.txt", "--stage1-epochs", "1", "--stage2-epochs", "0",
            "--hidden", "8", "--model-out", "m.txt", "--trace-out", "t.csv",
        ],
    );
    let cfg = &manifest(dir.path(), "m.txt.manifest.json")["config"];
    assert_eq!(cfg["batch"], 32);
    assert_eq!(cfg["w3d"], 1e-2);
    assert_eq!(cfg["wshp"], 1e-3);
    assert_eq!(cfg["wid"], 1e-4);
    assert_eq!(cfg["margin"], 1.0);
}

#[test]
fn zero_stage2_epochs_leave_only_stage1_in_the_trace() {
    let dir = tempfile::tempdir().unwrap();
    synth_small(dir.path());
    ok(
        dir.path(),
        &[
            "train", "--data", "d.txt", "--basis", "b.txt", "--stage1-epochs", "3", "--stage2-epochs", "0",
            "--w3d", "1e-3", "--hidden", "8", "--model-out", "m.txt", "--trace-out", "t.csv",
        ],
    );
    let trace = parse_table(&read(dir.path(), "t.csv"), TRACE_HEADER).unwrap();
    assert_eq!(trace.column("stage").unwrap(), vec![1.0; 3]);
    assert_eq!(trace.column("epoch").unwrap(), vec![1.0, 2.0, 3.0]);
    assert!(trace.column("w_shp").unwrap().iter().all(|&w| w == 0.0));
}

#[test]
fn same_seed_gives_identical_model_files() {
    let dir = tempfile::tempdir().unwrap();
    synth_small(dir.path());
    let train = |seed: &str, out: &str| {
        ok(
            dir.path(),
            &[
                "train", "--data", "d.txt", "--basis", "b.txt", "--stage1-epochs", "2", "--stage2-epochs", "2",
                "--w3d", "1e-3", "--hidden", "8", "--seed", seed, "--model-out", out, "--trace-out", "t.csv",
            ],
        );
        read(dir.path(), out)
    };
    let a = train("4", "a.txt");
    assert_eq!(a, train("4", "b2.txt"));
    assert_ne!(a, train("5", "c.txt"));
}

#[test]
fn divergence_fails_and_names_the_epoch() {
    let dir = tempfile::tempdir().unwrap();
    synth_small(dir.path());
    let out = run(
        dir.path(),
        &[
            "train", "--data", "d.txt", "--basis", "b.txt", "--w3d", "1e4", "--hidden", "8", "--model-out", "m.txt",
            "--trace-out", "t.csv",
        ],
    );
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("diverged") && stderr.contains("epoch"), "{stderr}");
    assert!(!dir.path().join("m.txt").exists());
}

#[test]
fn missing_inputs_and_mismatched_basis_fail() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["train", "--data", "nope.txt", "--basis", "b.txt", "--model-out", "m", "--trace-out", "t"]);
    assert!(!out.status.success());
    synth_small(dir.path());
    ok(dir.path(), &["synth", "--identities", "3", "--poses", "3", "--vertices", "40", "--landmarks", "20", "--seed", "1", "--basis-out", "other.txt", "--data-out", "o.txt"]);
    let out = run(dir.path(), &["eval-recon", "--oracle", "--data", "d.txt", "--basis", "other.txt", "--out-prefix", "r"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("does not match"));
}

#[test]
fn oracle_reconstruction_tables() {
    let dir = tempfile::tempdir().unwrap();
    synth_small(dir.path());
    ok(dir.path(), &["eval-recon", "--oracle", "--data", "d.txt", "--basis", "b.txt", "--split", "all", "--out-prefix", "r/o"]);
    let records = parse_table(&read(dir.path(), "r/o_records.csv"), RECORDS_HEADER).unwrap();
    assert_eq!(records.rows.len(), 30);
    assert!(records.column("nme_percent").unwrap().iter().all(|&v| v < 1e-8));
    let edc = parse_table(&read(dir.path(), "r/o_edc.csv"), EDC_HEADER).unwrap();
    assert_eq!(edc.rows.last().unwrap()[1], 1.0);
    assert_eq!(manifest(dir.path(), "r/o_records.csv.manifest.json")["config"]["oracle"], true);
}

#[test]
fn trained_model_edc_spans_zero_to_one() {
    let dir = tempfile::tempdir().unwrap();
    synth_small(dir.path());
    ok(
        dir.path(),
        &[
            "train", "--data", "d.txt", "--basis", "b.txt", "--stage1-epochs", "1", "--stage2-epochs", "1",
            "--w3d", "1e-3", "--hidden", "8", "--model-out", "m.txt", "--trace-out", "t.csv",
        ],
    );
    ok(dir.path(), &["eval-recon", "--model", "m.txt", "--data", "d.txt", "--basis", "b.txt", "--split", "all", "--out-prefix", "r"]);
    let records = parse_table(&read(dir.path(), "r_records.csv"), RECORDS_HEADER).unwrap();
    let nme = records.column("nme_percent").unwrap();
    let edc = parse_table(&read(dir.path(), "r_edc.csv"), EDC_HEADER).unwrap();
    let fractions = edc.column("fraction").unwrap();
    let thresholds = edc.column("threshold").unwrap();
    // Counting oracle from the records table.
    for (t, f) in thresholds.iter().zip(&fractions) {
        let want = nme.iter().filter(|&&v| v <= *t).count() as f64 / nme.len() as f64;
        assert!((f - want).abs() < 1e-8, "threshold {t}");
    }
    assert_eq!(fractions[0], 0.0);
    assert_eq!(*fractions.last().unwrap(), 1.0);
}

#[test]
fn verify_defaults_follow_the_protocol() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["synth", "--identities", "50", "--poses", "20", "--vertices", "80", "--basis-out", "b.txt", "--data-out", "d.txt"]);
    let stdout = ok(dir.path(), &["eval-verify", "--oracle", "--data", "d.txt", "--split", "all", "--out", "v"]);
    assert!(stdout.contains("pairs 6000 folds 10"), "{stdout}");
    let cfg = &manifest(dir.path(), "v_roc.csv.manifest.json")["config"];
    assert_eq!((cfg["pairs"].as_u64(), cfg["genuine"].as_u64(), cfg["folds"].as_u64()), (Some(6000), Some(3000), Some(10)));
    let folds = parse_table(&read(dir.path(), "v_folds.csv"), FOLDS_HEADER).unwrap();
    assert_eq!(folds.column("accuracy").unwrap(), vec![1.0; 10]);
    let roc = parse_table(&read(dir.path(), "v_roc.csv"), ROC_HEADER).unwrap();
    let tpr = roc.column("tpr").unwrap();
    assert!(tpr.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn help_lists_defaults_with_provenance() {
    let dir = tempfile::tempdir().unwrap();
    for cmd in ["synth", "train", "eval-recon", "eval-verify"] {
        let help = ok(dir.path(), &[cmd, "--help"]);
        for line in help.lines().filter(|l| l.contains("[default:")) {
            assert!(line.contains("[paper]") || line.contains("[artifact]"), "{cmd}: {line}");
        }
    }
    let help = ok(dir.path(), &["train", "--help"]);
    assert!(help.contains("[paper] [default: 32]"));
    assert!(help.contains("[paper] [default: 0.0001]"));
}
