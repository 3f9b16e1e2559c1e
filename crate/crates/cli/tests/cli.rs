//! End-to-end tests of the command-line interface: exit codes, emission
//! formats, and replay determinism.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_xxz-ness"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn version_prints_and_succeeds() {
    let out = run(&["version"]);
    assert!(out.status.success());
    assert!(stdout(&out).starts_with("xxz-ness "));
}

#[test]
fn usage_errors_exit_one() {
    // run with neither preset nor config
    assert_eq!(run(&["run"]).status.code(), Some(1));
    // unknown preset
    assert_eq!(run(&["run", "--preset", "fig9"]).status.code(), Some(1));
    // unknown format
    assert_eq!(
        run(&["run", "--preset", "zeno", "--format", "xml"]).status.code(),
        Some(1)
    );
    // both-format emission needs a path
    assert_eq!(
        run(&["run", "--preset", "zeno", "--format", "both"]).status.code(),
        Some(1)
    );
    // non-increasing sweep grid
    assert_eq!(
        run(&[
            "sweep", "--axis", "mu", "--grid", "0.4,0.2", "--n-sites", "4"
        ])
        .status
        .code(),
        Some(1)
    );
    // unknown axis
    assert_eq!(
        run(&["sweep", "--axis", "phi", "--grid", "0.1,0.2"]).status.code(),
        Some(1)
    );
}

#[test]
fn io_errors_exit_three() {
    let out = run(&[
        "run",
        "--preset",
        "zeno",
        "--out",
        "/nonexistent-dir/results",
    ]);
    assert_eq!(out.status.code(), Some(3));
    let out = run(&["run", "--config", "/nonexistent-dir/conf.toml"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn zeno_preset_emits_csv_with_gap() {
    let out = run(&["run", "--preset", "zeno"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert_eq!(
        header,
        "N,J_x,J_z,Delta,mu_L,mu_R,tau_kind,tau_mean,steps,burn_in,seed,j_L,j_R,sigma_j,N_j,theta,gap"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 6);
    for row in &rows {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), 17);
        // exact-solver branch fills the relaxation gap
        assert!(fields[16].parse::<f64>().unwrap() > 0.0);
        // left and right balances agree exactly in the exact branch
        assert_eq!(fields[11], fields[12]);
    }
}

#[test]
fn replay_is_bitwise_deterministic() {
    let args = [
        "sweep",
        "--axis",
        "mu",
        "--grid",
        "0.2,0.6,1.0",
        "--n-sites",
        "4",
        "--j-x",
        "0.25",
        "--steps",
        "2000",
        "--trajectories",
        "2",
        "--seed",
        "7",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn csv_and_json_share_fields_exactly() {
    let dir = std::env::temp_dir().join(format!("xxz-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let stem: PathBuf = dir.join("results");
    let out = run(&[
        "run",
        "--preset",
        "zeno",
        "--format",
        "both",
        "--out",
        stem.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(stem.with_extension("csv")).unwrap();
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(stem.with_extension("json")).unwrap())
            .unwrap();
    let records = json["records"].as_array().unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(records.len(), rows.len());
    for (row, rec) in rows.iter().zip(records) {
        let fields: Vec<&str> = row.split(',').collect();
        let res = &rec["results"];
        assert_eq!(fields[11].parse::<f64>().unwrap(), res["j_left"].as_f64().unwrap());
        assert_eq!(fields[12].parse::<f64>().unwrap(), res["j_right"].as_f64().unwrap());
        assert_eq!(fields[16].parse::<f64>().unwrap(), res["gap"].as_f64().unwrap());
        // profile carried in JSON with one entry per site
        assert_eq!(
            res["profile"].as_array().unwrap().len(),
            rec["config"]["n_sites"].as_u64().unwrap() as usize
        );
    }
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn config_file_run_and_override_precedence() {
    let dir = std::env::temp_dir().join(format!("xxz-cli-conf-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let conf = dir.join("experiment.toml");
    std::fs::write(
        &conf,
        r#"
n_sites = 4
j_x = 0.25
j_z = 0.5
mu = 0.6
steps = 2000
trajectories = 2
seed = 99
"#,
    )
    .unwrap();
    let out = run(&["run", "--config", conf.to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout(&out);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "4");
    assert_eq!(row[10], "99");
    assert_eq!(row[8], "2000");

    // command line beats the file
    let out2 = run(&[
        "run",
        "--config",
        conf.to_str().unwrap(),
        "--seed",
        "123",
        "--steps",
        "1500",
    ]);
    let text2 = stdout(&out2);
    let row2: Vec<&str> = text2.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row2[10], "123");
    assert_eq!(row2[8], "1500");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn self_check_passes() {
    let out = run(&["check"]);
    assert!(out.status.success(), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.lines().filter(|l| l.ends_with("PASS")).count() >= 6);
    assert!(!text.contains("FAIL"));
}
