//! Result emission: CSV and JSON with 12-significant-digit numbers.

use std::io::Write;
use std::path::Path;

use serde_json::json;

use crate::config::Format;
use crate::runner::ResultRecord;
use crate::CliError;

/// Round to 12 significant digits so CSV and JSON agree exactly.
pub fn sig12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let scale = 10f64.powi(11 - x.abs().log10().floor() as i32);
    (x * scale).round() / scale
}

fn fmt(x: f64) -> String {
    format!("{}", sig12(x))
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt).unwrap_or_default()
}

pub const CSV_HEADER: &str = "N,J_x,J_z,Delta,mu_L,mu_R,tau_kind,tau_mean,steps,burn_in,seed,j_L,j_R,sigma_j,N_j,theta,gap";

pub fn to_csv(records: &[ResultRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.n_sites,
            fmt(r.j_x),
            fmt(r.j_z),
            fmt(r.delta),
            fmt(r.mu_left),
            fmt(r.mu_right),
            r.tau_kind,
            fmt(r.tau_mean),
            r.steps,
            r.burn_in,
            r.seed,
            fmt(r.j_left),
            fmt(r.j_right),
            fmt(r.sigma_j),
            fmt(r.n_j),
            fmt_opt(r.theta),
            fmt_opt(r.gap),
        ));
    }
    out
}

pub fn to_json(name: &str, records: &[ResultRecord]) -> String {
    let recs: Vec<serde_json::Value> = records
        .iter()
        .map(|r| {
            json!({
                "label": r.label,
                "config": {
                    "n_sites": r.n_sites,
                    "j_x": sig12(r.j_x),
                    "j_z": sig12(r.j_z),
                    "delta": sig12(r.delta),
                    "mu_left": sig12(r.mu_left),
                    "mu_right": sig12(r.mu_right),
                    "tau_kind": r.tau_kind,
                    "tau_mean": sig12(r.tau_mean),
                    "steps": r.steps,
                    "burn_in": r.burn_in,
                    "trajectories": r.trajectories,
                    "seed": r.seed,
                    "version": r.version,
                },
                "results": {
                    "j_left": sig12(r.j_left),
                    "j_right": sig12(r.j_right),
                    "sigma_j": sig12(r.sigma_j),
                    "n_j": sig12(r.n_j),
                    "theta": r.theta.map(sig12),
                    "gap": r.gap.map(sig12),
                    "profile": r.profile.iter().map(|&v| sig12(v)).collect::<Vec<_>>(),
                    "wall_time_s": sig12(r.wall_time_s),
                },
            })
        })
        .collect();
    serde_json::to_string_pretty(&json!({ "experiment": name, "records": recs }))
        .expect("JSON serialization cannot fail")
        + "\n"
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))
}

/// Emit records per the requested format. With an output path, `csv` and
/// `json` extensions are appended per format; without one, the single
/// requested format goes to stdout (`both` requires a path).
pub fn emit(
    name: &str,
    records: &[ResultRecord],
    format: Format,
    out: Option<&Path>,
) -> Result<(), CliError> {
    if records.is_empty() {
        return Err(CliError::usage("no records to emit".into()));
    }
    match (format, out) {
        (Format::Csv, None) => {
            print!("{}", to_csv(records));
        }
        (Format::Json, None) => {
            print!("{}", to_json(name, records));
        }
        (Format::Both, None) => {
            return Err(CliError::usage(
                "--format both needs --out to name the files".into(),
            ))
        }
        (fmt_choice, Some(base)) => {
            let with_ext = |ext: &str| base.with_extension(ext);
            if matches!(fmt_choice, Format::Csv | Format::Both) {
                write_file(&with_ext("csv"), &to_csv(records))?;
            }
            if matches!(fmt_choice, Format::Json | Format::Both) {
                write_file(&with_ext("json"), &to_json(name, records))?;
            }
            let mut stderr = std::io::stderr();
            let _ = writeln!(
                stderr,
                "wrote {} record(s) to {}.*",
                records.len(),
                base.with_extension("").display()
            );
        }
    }
    Ok(())
}
