use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
    let _ = fs::remove_dir_all(&dir);
    dir
}

fn intensive(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_intensive"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("INTENSIVE_WORKERS")
        .output()
        .expect("binary runs")
}

fn data_rows(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).skip(1).collect()
}

#[test]
fn sweep_output_is_byte_identical_across_runs_and_workers() {
    let args = ["sweep", "--dim", "2", "--family", "doubled", "--c", "0.1,0.2", "--beta", "1,10", "--nb", "4:7:4"];
    let (a, b) = (scratch("det-a"), scratch("det-b"));
    assert!(intensive(&args, &a).status.success());
    let mut with_workers = args.to_vec();
    with_workers.extend(["--workers", "2"]);
    assert!(intensive(&with_workers, &b).status.success());
    for file in ["results.csv", "results.json"] {
        assert_eq!(fs::read(a.join(file)).unwrap(), fs::read(b.join(file)).unwrap(), "{file} differs");
    }
    let csv = fs::read_to_string(a.join("results.csv")).unwrap();
    assert!(csv.contains("F_I[1],I[nats],E_N[nats]"));
    assert_eq!(data_rows(&csv).len(), 2 * 2 * 4);
    let manifest: serde_json::Value = serde_json::from_slice(&fs::read(a.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"]["experiment"], "sweep");
    assert_eq!(manifest["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn invalid_coupling_fails_before_any_output() {
    let out = scratch("bad-coupling");
    let result = intensive(&["fidelity", "--dim", "2", "--c", "0.1,0.3", "--beta", "1", "--nb", "4"], &out);
    assert!(!result.status.success());
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert!(stderr.contains("0.3"), "{stderr}");
    assert!(!out.exists());
}

#[test]
fn oversized_block_is_rejected() {
    let out = scratch("big-block");
    let result = intensive(&["fidelity", "--dim", "1", "--ls", "10", "--c", "0.2", "--beta", "1", "--nb", "10"], &out);
    assert!(!result.status.success());
    assert!(!out.exists());
}

#[test]
fn near_critical_cells_are_skipped_not_fatal() {
    let out = scratch("phase");
    let args = ["phase-diagram", "--dim", "2", "--ls", "12", "--c", "0.1,0.2499999999999999", "--beta", "2", "--nb", "2,3,4,5"];
    let result = intensive(&args, &out);
    assert!(result.status.success(), "{}", String::from_utf8_lossy(&result.stderr));
    let csv = fs::read_to_string(out.join("results.csv")).unwrap();
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 2);
    assert!(rows[0].ends_with(",ok"), "{}", rows[0]);
    assert!(rows[1].contains("skipped"), "{}", rows[1]);
}

#[test]
fn padded_and_core_shell_columns() {
    let out = scratch("padded");
    let result = intensive(
        &["padded", "--dim", "1", "--ls", "60", "--c", "0.4", "--beta", "10", "--nb", "10:40:4", "--eps", "2", "--bare"],
        &out,
    );
    assert!(result.status.success());
    let csv = fs::read_to_string(out.join("results.csv")).unwrap();
    assert!(csv.contains("F_pad(eps=2)[1],F_pad_bare(eps=2)[1]"), "{csv}");

    let out = scratch("core-shell");
    let result =
        intensive(&["core-shell", "--dim", "2", "--ls", "16", "--c", "0.2", "--beta", "10", "--nb", "6,8", "--layers", "1"], &out);
    assert!(result.status.success());
    let csv = fs::read_to_string(out.join("results.csv")).unwrap();
    assert!(csv.contains("F_core(L=1)[1],F_shell(L=1)[1]"), "{csv}");
}

#[test]
fn zero_workers_is_an_error() {
    let out = scratch("workers");
    let result = intensive(&["correlation-length", "--c", "0.1", "--beta", "1", "--workers", "0"], &out);
    assert!(!result.status.success());
}
