//! The estimator-only path: `|J_m|` from one series per sample size, or from
//! observations loaded from a one-column CSV.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::report::{load_series, prepare_dir, write_jm_estimate, JM_ESTIMATE_FILE};
use super::scenario::{bootstrap_seed, profile_for, series_seed};
use crate::empirical::Grid;
use crate::error::{Error, Result};
use crate::estimator::{estimate_with, sup_abs_deviation, JmEstimate, JmMeta};
use crate::hermite::HermiteProfile;
use crate::lrd_gauss::simulate_path;
use crate::mbb::{BlockBootstrap, BootstrapPlan};
use crate::sample::SubordinatedSample;

pub const ESTIMATE_SCHEMA: &str = "lrdboot.jm-estimate/v1";
pub const JM_SUMMARY_FILE: &str = "jm_summary.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateEntry {
    pub meta: JmMeta,
    /// `sup |Jhat - |J_m||` against the configured transform's law.
    pub sup_deviation: f64,
    pub max_jhat: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub schema: String,
    pub config: ExperimentConfig,
    pub source: String,
    pub entries: Vec<EstimateEntry>,
    pub runtime_seconds: f64,
    /// Estimate at the largest sample size.
    #[serde(skip)]
    pub estimate: Option<JmEstimate>,
    #[serde(skip)]
    pub profile: Option<HermiteProfile>,
}

fn estimate_one(
    sample: &SubordinatedSample,
    profile: &HermiteProfile,
    config: &ExperimentConfig,
    grid: &Grid,
    boot_seed: u64,
) -> Result<(EstimateEntry, JmEstimate)> {
    let n = sample.len();
    let l = config.l_rule.block_length(n);
    let p = config.p_rule.block_count(n, l);
    let plan = BootstrapPlan::new(n, l, Some(p), config.replicates, boot_seed)?;
    let engine = BlockBootstrap::new(sample, profile, l, grid)?;
    let est = estimate_with(&engine, &plan, profile.rank())?;
    let entry = EstimateEntry {
        meta: est.meta,
        sup_deviation: sup_abs_deviation(&est, profile)?,
        max_jhat: est.values.iter().cloned().fold(0.0, f64::max),
    };
    Ok((entry, est))
}

/// Runs the estimator on series 0 of each configured `n`, or once on the
/// observations in `data_path`.
pub fn run_estimator(config: &ExperimentConfig) -> Result<EstimateReport> {
    config.validate()?;
    let started = Instant::now();
    let profile = profile_for(config)?;
    let grid = Grid::quantiles(&profile, config.grid.lo, config.grid.hi, config.grid.points)?;

    let mut entries = Vec::new();
    let mut best: Option<JmEstimate> = None;
    let source;
    if let Some(path) = &config.data_path {
        let y = load_series(path)?;
        if y.len() < 2 {
            return Err(Error::InvalidParameter(format!("{}: need at least 2 observations", path.display())));
        }
        let sample = SubordinatedSample::observed(y, config.model)?;
        let (entry, est) = estimate_one(&sample, &profile, config, &grid, bootstrap_seed(config.master_seed, sample.len(), 0))?;
        entries.push(entry);
        best = Some(est);
        source = format!("data:{}", path.display());
    } else {
        for &n in &config.n {
            let seed = series_seed(config.master_seed, n, 0);
            let path = simulate_path(&config.model, n, seed)?;
            let sample = SubordinatedSample::from_path(path, &config.transform);
            let (entry, est) = estimate_one(&sample, &profile, config, &grid, bootstrap_seed(config.master_seed, n, 0))?;
            entries.push(entry);
            if best.as_ref().is_none_or(|b| b.meta.n < n) {
                best = Some(est);
            }
        }
        source = "simulated".to_string();
    }
    Ok(EstimateReport {
        schema: ESTIMATE_SCHEMA.to_string(),
        config: config.clone(),
        source,
        entries,
        runtime_seconds: started.elapsed().as_secs_f64(),
        estimate: best,
        profile: Some(profile),
    })
}

/// Writes `jm_estimate.csv` and `jm_summary.json`.
pub fn emit_estimate(report: &EstimateReport, dir: &Path, overwrite: bool) -> Result<Vec<PathBuf>> {
    prepare_dir(dir, overwrite)?;
    let csv_path = dir.join(JM_ESTIMATE_FILE);
    let json_path = dir.join(JM_SUMMARY_FILE);
    if let (Some(est), Some(profile)) = (&report.estimate, &report.profile) {
        write_jm_estimate(&csv_path, est, profile)?;
    }
    let json = serde_json::to_string_pretty(report).expect("summary serialises");
    std::fs::write(&json_path, json).map_err(|e| Error::io(&json_path, e))?;
    Ok(vec![csv_path, json_path])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::config::preset;

    #[test]
    fn simulated_estimates_match_scenario_series_zero() {
        let mut c = preset("smoke").unwrap();
        c.replicates = 20;
        let est = run_estimator(&c).unwrap();
        let scen = crate::experiment::run_scenario(&c).unwrap();
        assert_eq!(est.estimate.unwrap().values, scen.jm_estimate.unwrap().values);
        assert_eq!(est.entries[0].sup_deviation, scen.sizes[0].jm_deviation.per_series[0]);
    }

    #[test]
    fn data_mode_uses_loaded_series() {
        let dir = tempfile::tempdir().unwrap();
        let data = dir.path().join("y.csv");
        let y: Vec<String> = (0..200).map(|i| format!("{}", ((i * 37) % 101) as f64 / 50.0 - 1.0)).collect();
        std::fs::write(&data, format!("y\n{}\n", y.join("\n"))).unwrap();
        let mut c = preset("smoke").unwrap();
        c.data_path = Some(data);
        c.m_override = Some(1);
        c.replicates = 10;
        let r = run_estimator(&c).unwrap();
        assert_eq!(r.entries.len(), 1);
        assert_eq!(r.entries[0].meta.n, 200);
        let files = emit_estimate(&r, &dir.path().join("out"), false).unwrap();
        assert!(files.iter().all(|f| f.is_file()));
    }
}
