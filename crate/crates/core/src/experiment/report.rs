//! Report files: JSON summaries and RFC 4180 CSV tables.
//!
//! Column lists are fixed:
//!
//! | file              | columns                                                          |
//! |-------------------|------------------------------------------------------------------|
//! | `diagnostics.csv` | `n,statistic,count,mean,sd,skewness,excess_kurtosis,ks`          |
//! | `jm_estimate.csv` | `x,jhat,jm_true_abs,abs_error`                                   |
//! | process CSV       | `x,value,label,n,seed`                                           |
//! | replicate CSV     | `replicate_id,x,W_star,S_star`                                   |
//!
//! Sentinel grid points are written as `-inf` and `inf`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::scenario::ScenarioReport;
use crate::diagnostics::DiagnosticsSummary;
use crate::empirical::{jm_at, GridPoint, ProcessEvaluation};
use crate::error::{Error, Result};
use crate::estimator::JmEstimate;
use crate::hermite::HermiteProfile;
use crate::mbb::{BlockBootstrap, BootstrapReplicate};

pub const REPORT_FILE: &str = "report.json";
pub const CONFIG_ECHO_FILE: &str = "config_echo.json";
pub const DIAGNOSTICS_FILE: &str = "diagnostics.csv";
pub const JM_ESTIMATE_FILE: &str = "jm_estimate.csv";

pub const DIAGNOSTICS_COLUMNS: [&str; 8] = ["n", "statistic", "count", "mean", "sd", "skewness", "excess_kurtosis", "ks"];
pub const JM_ESTIMATE_COLUMNS: [&str; 4] = ["x", "jhat", "jm_true_abs", "abs_error"];
pub const PROCESS_COLUMNS: [&str; 5] = ["x", "value", "label", "n", "seed"];
pub const REPLICATE_COLUMNS: [&str; 4] = ["replicate_id", "x", "W_star", "S_star"];

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

fn write_csv<R: Serialize>(path: &Path, header: &[&str], rows: impl IntoIterator<Item = R>) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(csv_err(path))?;
    w.write_record(header).map_err(csv_err(path))?;
    for row in rows {
        w.serialize(row).map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Creates `dir` if needed. A non-empty existing directory is refused unless
/// `overwrite` is set.
pub fn prepare_dir(dir: &Path, overwrite: bool) -> Result<()> {
    if dir.exists() {
        let mut entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
        if entries.next().is_some() && !overwrite {
            return Err(Error::OutputExists(dir.to_path_buf()));
        }
    } else {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct DiagnosticsRow {
    n: usize,
    statistic: &'static str,
    count: usize,
    mean: f64,
    sd: f64,
    skewness: f64,
    excess_kurtosis: f64,
    ks: f64,
}

fn diagnostics_rows(report: &ScenarioReport) -> Vec<DiagnosticsRow> {
    let mut rows = Vec::new();
    for s in &report.sizes {
        let stats: [(&'static str, Option<DiagnosticsSummary>); 4] = [
            ("bootstrap_w_star", s.bootstrap_w_star),
            ("bootstrap_hermite_sum", s.bootstrap_hermite_sum),
            ("plain_w_n", s.plain_w_n),
            ("plain_hermite_sum", s.plain_hermite_sum),
        ];
        for (name, d) in stats {
            if let Some(d) = d {
                rows.push(DiagnosticsRow {
                    n: s.n,
                    statistic: name,
                    count: d.count,
                    mean: d.mean,
                    sd: d.sd,
                    skewness: d.skewness,
                    excess_kurtosis: d.excess_kurtosis,
                    ks: d.ks,
                });
            }
        }
    }
    rows
}

/// Writes `jm_estimate.csv` rows for an estimate.
pub fn write_jm_estimate(path: &Path, est: &JmEstimate, profile: &HermiteProfile) -> Result<()> {
    let rows = est.grid.points().iter().zip(&est.values).map(|(&p, &jhat)| {
        let truth = jm_at(profile, p).abs();
        (p.to_string(), jhat, truth, (jhat - truth).abs())
    });
    write_csv(path, &JM_ESTIMATE_COLUMNS, rows)
}

/// Writes a process evaluation as `x,value,label,n,seed` rows.
pub fn write_process(path: &Path, eval: &ProcessEvaluation, n: usize, seed: u64) -> Result<()> {
    let rows = eval
        .grid
        .points()
        .iter()
        .zip(&eval.values)
        .map(|(p, &v)| (p.to_string(), v, eval.label.as_str(), n, seed));
    write_csv(path, &PROCESS_COLUMNS, rows)
}

/// Writes `W*` and `S*` of each replicate on the engine's grid.
pub fn write_replicates(path: &Path, engine: &BlockBootstrap, replicates: &[(u64, BootstrapReplicate)]) -> Result<()> {
    let mut rows = Vec::new();
    for (id, rep) in replicates {
        let w = engine.w_star(rep)?;
        let s = engine.residual_from(&w, engine.hermite_sum(rep)?);
        for ((p, wv), sv) in engine.grid().points().iter().zip(&w).zip(&s) {
            rows.push((*id, p.to_string(), *wv, *sv));
        }
    }
    write_csv(path, &REPLICATE_COLUMNS, rows)
}

/// Writes the four report files into `dir` and returns their paths.
pub fn emit_report(report: &ScenarioReport, dir: &Path, overwrite: bool) -> Result<Vec<PathBuf>> {
    prepare_dir(dir, overwrite)?;
    let report_path = dir.join(REPORT_FILE);
    let echo_path = dir.join(CONFIG_ECHO_FILE);
    let diag_path = dir.join(DIAGNOSTICS_FILE);
    let jm_path = dir.join(JM_ESTIMATE_FILE);

    let json = serde_json::to_string_pretty(report).expect("report serialises");
    write_text(&report_path, &json)?;
    write_text(&echo_path, &report.config.to_json())?;
    write_csv(&diag_path, &DIAGNOSTICS_COLUMNS, diagnostics_rows(report))?;
    match (&report.jm_estimate, &report.profile) {
        (Some(est), Some(profile)) => write_jm_estimate(&jm_path, est, profile)?,
        _ => write_csv(&jm_path, &JM_ESTIMATE_COLUMNS, std::iter::empty::<(String, f64, f64, f64)>())?,
    }
    Ok(vec![report_path, echo_path, diag_path, jm_path])
}

/// Loads a one-column numeric CSV. A non-numeric first row is taken as a header.
pub fn load_series(path: &Path) -> Result<Vec<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(csv_err(path))?;
    let mut values = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(csv_err(path))?;
        if record.len() != 1 {
            return Err(Error::InvalidParameter(format!(
                "{}: line {} has {} columns, expected 1",
                path.display(),
                i + 1,
                record.len()
            )));
        }
        match record[0].parse::<f64>() {
            Ok(v) if v.is_finite() => values.push(v),
            Ok(_) => {
                return Err(Error::InvalidParameter(format!(
                    "{}: line {} is not finite",
                    path.display(),
                    i + 1
                )))
            }
            Err(_) if i == 0 => {}
            Err(_) => {
                return Err(Error::InvalidParameter(format!(
                    "{}: line {} is not a number: {:?}",
                    path.display(),
                    i + 1,
                    &record[0]
                )))
            }
        }
    }
    Ok(values)
}

/// Parses a grid cell written by this module.
pub fn parse_grid_cell(cell: &str) -> Option<GridPoint> {
    match cell {
        "-inf" => Some(GridPoint::NegInf),
        "inf" => Some(GridPoint::PosInf),
        s => s.parse().ok().filter(|x: &f64| x.is_finite()).map(GridPoint::Finite),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::config::preset;
    use crate::experiment::scenario::run_scenario;

    #[test]
    fn smoke_report_has_four_files() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("out");
        let report = run_scenario(&preset("smoke").unwrap()).unwrap();
        let files = emit_report(&report, &out, false).unwrap();
        assert_eq!(files.len(), 4);
        for f in &files {
            assert!(f.is_file(), "{}", f.display());
        }
        let jm = fs::read_to_string(out.join(JM_ESTIMATE_FILE)).unwrap();
        let mut lines = jm.lines();
        assert_eq!(lines.next().unwrap(), "x,jhat,jm_true_abs,abs_error");
        assert!(lines.next().unwrap().starts_with("-inf,0.0,0.0,0.0"));
        assert_eq!(jm.lines().count(), 1 + 101 + 2);
        assert!(matches!(emit_report(&report, &out, false), Err(Error::OutputExists(_))));
        assert!(emit_report(&report, &out, true).is_ok());
    }

    #[test]
    fn loader_accepts_header_and_rejects_junk() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("y.csv");
        fs::write(&p, "y\n1.5\n-2\n 3e-1 \n").unwrap();
        assert_eq!(load_series(&p).unwrap(), vec![1.5, -2.0, 0.3]);
        fs::write(&p, "1\nabc\n").unwrap();
        assert!(load_series(&p).is_err());
        fs::write(&p, "1,2\n").unwrap();
        assert!(load_series(&p).is_err());
        assert!(matches!(load_series(&dir.path().join("missing.csv")), Err(Error::Csv { .. })));
    }

    #[test]
    fn grid_cells_round_trip() {
        for p in [GridPoint::NegInf, GridPoint::Finite(-0.25), GridPoint::PosInf] {
            assert_eq!(parse_grid_cell(&p.to_string()), Some(p));
        }
        assert_eq!(parse_grid_cell("nan"), None);
    }
}
