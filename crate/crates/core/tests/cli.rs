//! End-to-end checks of the command-line binary.

use std::path::Path;
use std::process::{Command, Output};

fn twpinn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twpinn")).args(args).output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn rectangular(path: &Path) -> usize {
    let mut r = csv::Reader::from_path(path).unwrap();
    let width = r.headers().unwrap().len();
    let mut rows = 0;
    for rec in r.records() {
        assert_eq!(rec.unwrap().len(), width, "{}", path.display());
        rows += 1;
    }
    rows
}

#[test]
fn missing_checkpoint_is_reported() {
    let o = twpinn(&["eval", "--checkpoint", "/nonexistent/ck.toml"]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.starts_with("error[not-found]:"), "{err}");
    assert!(err.contains("checkpoint not found"));
}

#[test]
fn usage_errors_exit_nonzero() {
    let o = twpinn(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
    let o = twpinn(&["train", "--config", "fisher_restricted", "--bogus"]);
    assert_eq!(o.status.code(), Some(2));
    let o = twpinn(&["train", "--config", "heat_restricted", "--epochs", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error[config]:"));
}

#[test]
fn train_then_eval_and_export() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = twpinn(&["train", "--config", "fisher_restricted", "--seed", "7", "--epochs", "50", "--out", out]);
    assert!(o.status.success(), "{}", stderr(&o));
    let ck = dir.path().join("fisher_restricted_seed7.toml");
    assert!(ck.exists());
    assert_eq!(rectangular(&dir.path().join("runlog_7.csv")), 50);

    let fields = dir.path().join("fields");
    let o = twpinn(&["eval", "--checkpoint", ck.to_str().unwrap(), "--rho", "100", "--dim", "2", "--dir", "1,3", "--out", fields.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.starts_with("rho,l2,linf"));
    assert_eq!(rectangular(&fields.join("field_fisher_rho1e2_dir1-3.csv")), 100 * 100 * 100);

    let plots = dir.path().join("plots");
    let o = twpinn(&["export-plots", "--checkpoint", ck.to_str().unwrap(), "--rho", "1", "--out", plots.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(rectangular(&plots.join("maxerr_fisher_rho1e0_dir1.csv")), 500);
}

#[test]
fn tables_require_cached_checkpoints() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.toml");
    std::fs::write(
        &plan,
        format!(
            "equations = [\"fisher\"]\npresets = [\"restricted\"]\nseeds = [1]\nepochs = 20\nout_dir = \"{}\"\n",
            dir.path().join("res").display()
        ),
    )
    .unwrap();
    let o = twpinn(&["tables", "--config", plan.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("checkpoint not found"));
    let o = twpinn(&["sweep", "--config", plan.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = twpinn(&["tables", "--config", plan.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("trained 0 cached 1"));
    for f in ["wavespeed.csv", "runs.csv", "seed_errors.csv", "errors_1d.csv", "errors_2d.csv"] {
        rectangular(&dir.path().join("res").join(f));
    }
}

#[test]
fn reference_subcommand_writes_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ref.csv");
    let o = twpinn(&["reference", "--ic", "step", "--rho", "100", "--x=-3,9", "--t-final", "0.05", "--cells", "200", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(rectangular(&out), 400);
}
