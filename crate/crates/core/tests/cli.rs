use std::path::Path;
use std::process::Command;

fn ievm(args: &[&str], cwd: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_ievm"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap()
}

fn ok(args: &[&str], cwd: &Path) -> String {
    let out = ievm(args, cwd);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&["synth", "--classes", "3", "--per-class", "20", "--dim", "2", "--seed", "5", "--out", "train.csv"], d);
    ok(&["convert", "--input", "train.csv", "--output", "train.bin"], d);
    ok(&["convert", "--input", "train.bin", "--output", "back.csv"], d);
    ok(&["fit", "--data", "train.bin", "--out", "m.ievm", "--tail-size", "10"], d);
    ok(&["synth", "--classes", "3", "--per-class", "5", "--dim", "2", "--seed", "6", "--out", "more.csv"], d);
    ok(&["fit", "--data", "more.csv", "--model", "m.ievm", "--out", "m2.ievm"], d);
    ok(&["reduce", "--model", "m2.ievm", "--out", "m3.ievm", "--budget", "4"], d);
    let predictions = ok(&["predict", "--model", "m3.ievm", "--data", "train.csv"], d);
    assert_eq!(predictions.lines().count(), 61);

    std::fs::write(
        d.join("run.toml"),
        "method = \"ievm\"\nreduction = \"wksc\"\nbudget = 5\ntail_size = 10\nblob_classes = 6\nfar_targets = [0.1]\n",
    )
    .unwrap();
    ok(&["run", "--config", "run.toml", "--out-report", "r.csv", "--format", "csv"], d);
    let csv = std::fs::read_to_string(d.join("r.csv")).unwrap();
    assert!(csv.starts_with("epoch,samples_seen"));
}

#[test]
fn failures_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("bad.toml"), "method = \"ievm\"\nbogus = 1\n").unwrap();
    let out = ievm(&["run", "--config", "bad.toml", "--out-report", "r.json"], d);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus"));
    let out = ievm(&["predict", "--model", "missing.ievm", "--data", "x.csv"], d);
    assert!(!out.status.success());
}
