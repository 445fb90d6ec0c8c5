//! Monte Carlo scenario runner.
//!
//! For each sample size `n` the runner simulates `R` independent series and,
//! per series, draws `A` bootstrap replicates. Each replicate yields the
//! bootstrap Hermite sum, `W*(x0)` and the full `W*` path used by the `|J_m|`
//! estimate; all three share one block draw. Series run in parallel and are
//! aggregated in series order, so results do not depend on the thread count.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::diagnostics::{mean_sd, normality_diagnostics, studentize, DiagnosticsSummary, MIN_DIAGNOSTIC_LEN};
use crate::empirical::{lag_sum, normalizer_dn, Grid, GridPoint};
use crate::error::{Error, Result};
use crate::estimator::{estimate_with_sequential, sup_abs_deviation, JmEstimate};
use crate::hermite::{factorial, hermite_unchecked, HermiteProfile, MAX_DEGREE};
use crate::lrd_gauss::PathSimulator;
use crate::mbb::{BlockBootstrap, BootstrapPlan};
use crate::rng::derive_seed;
use crate::sample::SubordinatedSample;

pub const REPORT_SCHEMA: &str = "lrdboot.scenario-report/v1";

const SERIES_TAG: u64 = 0x5e51;
const BOOT_TAG: u64 = 0xb007;

/// Seed of the Gaussian path for series `r` at sample size `n`.
pub fn series_seed(master_seed: u64, n: usize, r: usize) -> u64 {
    derive_seed(&[master_seed, SERIES_TAG, n as u64, r as u64])
}

/// Master seed of the bootstrap replicates of series `r` at sample size `n`.
pub fn bootstrap_seed(master_seed: u64, n: usize, r: usize) -> u64 {
    derive_seed(&[master_seed, BOOT_TAG, n as u64, r as u64])
}

/// Hermite profile honouring `m_override`.
pub fn profile_for(config: &ExperimentConfig) -> Result<HermiteProfile> {
    match config.m_override {
        Some(m) => HermiteProfile::with_rank(config.transform.clone(), m),
        None => HermiteProfile::new(config.transform.clone()),
    }
}

/// The probe point `x0` and the quantile level it sits at.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbePoint {
    pub quantile: f64,
    pub x0: f64,
    pub jm_x0: f64,
}

/// `x0 = F^{-1}(u)` with `u` from the config (0.5 for rank 1, 0.7 otherwise).
/// If `|J_m(x0)|` is within `10 * tol` of zero the level is moved outward in
/// steps of 0.01 until it is not.
pub fn probe_point(config: &ExperimentConfig, profile: &HermiteProfile) -> Result<ProbePoint> {
    let base = config
        .probe_quantile
        .unwrap_or(if profile.rank() == 1 { 0.5 } else { 0.7 });
    let margin = 10.0 * crate::hermite::DEFAULT_RANK_TOL;
    for k in 0..=98 {
        for sign in [1.0, -1.0] {
            let u = base + sign * 0.01 * k as f64;
            if !(u > 0.0 && u < 1.0) {
                continue;
            }
            let x0 = profile.quantile(u)?;
            let jm_x0 = profile.jm(x0);
            if jm_x0.abs() > margin {
                return Ok(ProbePoint { quantile: u, x0, jm_x0 });
            }
            if k == 0 {
                break;
            }
        }
    }
    Err(Error::InvalidParameter(
        "J_m vanishes at every probe quantile level".into(),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceCheck {
    /// Sample variance of `d_n^{-1} W_n(x0)` across series.
    pub sample: f64,
    /// Standard error of the sample variance.
    pub standard_error: f64,
    /// Leading-term variance `J_m(x0)^2 / m!`.
    pub leading: f64,
    /// Variance including all Hermite orders up to the supported maximum.
    pub exact: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spread {
    pub mean: f64,
    pub sd: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JmDeviation {
    pub median: f64,
    pub min: f64,
    pub max: f64,
    pub per_series: Vec<f64>,
}

/// Results for one sample size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeReport {
    pub n: usize,
    pub l: usize,
    pub p: usize,
    pub d_n: f64,
    pub d_l: f64,
    pub hurst_h: f64,
    /// Per-series studentized bootstrap `W*(x0)`, pooled.
    pub bootstrap_w_star: Option<DiagnosticsSummary>,
    /// Per-series studentized bootstrap Hermite sums, pooled.
    pub bootstrap_hermite_sum: Option<DiagnosticsSummary>,
    /// `d_n^{-1} W_n(x0)` across series.
    pub plain_w_n: Option<DiagnosticsSummary>,
    /// `d_n^{-1} sum H_m(X_i)` across series.
    pub plain_hermite_sum: Option<DiagnosticsSummary>,
    /// `sign(J_m(x0))` times the skewness of `plain_w_n`: the skewness of the
    /// implied `Z_m` draws.
    pub plain_w_n_aligned_skewness: Option<f64>,
    pub plain_w_n_variance: Option<VarianceCheck>,
    /// Dispersion across series of the conditional (bootstrap) skewness of the Hermite sum.
    pub per_series_bootstrap_skewness: Option<Spread>,
    pub jm_deviation: JmDeviation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub schema: String,
    pub config: ExperimentConfig,
    pub rank: usize,
    pub rank_peak: Option<f64>,
    /// Rank found with less than a factor 10 margin over the threshold.
    pub rank_marginal: bool,
    pub sigma_m: f64,
    pub probe: ProbePoint,
    pub sizes: Vec<SizeReport>,
    pub runtime_seconds: f64,
    pub threads: usize,
    /// `|J_m|` estimate of series 0 at the largest sample size.
    #[serde(skip)]
    pub jm_estimate: Option<JmEstimate>,
    #[serde(skip)]
    pub profile: Option<HermiteProfile>,
}

struct SeriesOutcome {
    w_probe: Vec<f64>,
    hermite: Vec<f64>,
    plain_w: f64,
    plain_hermite: f64,
    deviation: f64,
    estimate: Option<JmEstimate>,
}

fn wrap(n: usize, r: usize, seed: u64) -> impl Fn(Error) -> Error {
    move |e| Error::ScenarioFailed {
        n,
        series: r,
        seed,
        source: Box::new(e),
    }
}

#[allow(clippy::too_many_arguments)]
fn run_series(
    config: &ExperimentConfig,
    profile: &HermiteProfile,
    sim: &PathSimulator,
    grid: &Grid,
    probe_grid: &Grid,
    plan: &BootstrapPlan,
    d_n: f64,
    r: usize,
) -> Result<SeriesOutcome> {
    let n = plan.n;
    let seed = series_seed(config.master_seed, n, r);
    let on_err = wrap(n, r, seed);
    let sample = SubordinatedSample::from_path(sim.simulate(seed), &config.transform);
    let m = profile.rank();
    let engine = BlockBootstrap::new(&sample, profile, plan.l, grid).map_err(&on_err)?;
    let probe_engine = BlockBootstrap::new(&sample, profile, plan.l, probe_grid).map_err(&on_err)?;

    let boot_seed = bootstrap_seed(config.master_seed, n, r);
    let plan = BootstrapPlan { master_seed: boot_seed, ..*plan };
    let mut w_probe = Vec::with_capacity(plan.replicates);
    let mut hermite = Vec::with_capacity(plan.replicates);
    for id in 0..plan.replicates as u64 {
        let rep = probe_engine.draw(boot_seed, id, plan.p);
        w_probe.push(probe_engine.w_star_at(&rep, 1).map_err(&on_err)?);
        hermite.push(probe_engine.hermite_sum(&rep).map_err(&on_err)?);
    }
    let estimate = estimate_with_sequential(&engine, &plan, m).map_err(&on_err)?;
    let deviation = sup_abs_deviation(&estimate, profile).map_err(&on_err)?;

    let x = sample.x().map_err(&on_err)?;
    let plain_hermite = x.iter().map(|&s| hermite_unchecked(m, s)).sum::<f64>() / d_n;
    let x0 = match probe_grid.points()[1] {
        GridPoint::Finite(x0) => x0,
        _ => unreachable!("probe grid has one finite point"),
    };
    let below = sample.y().iter().filter(|&&y| y <= x0).count() as f64;
    let plain_w = (below - n as f64 * profile.cdf(x0)) / d_n;

    Ok(SeriesOutcome {
        w_probe,
        hermite,
        plain_w,
        plain_hermite,
        deviation,
        estimate: (r == 0).then_some(estimate),
    })
}

fn pooled_studentized<'a>(groups: impl Iterator<Item = &'a [f64]>) -> Vec<f64> {
    let mut pool = Vec::new();
    for g in groups {
        if let Ok(z) = studentize(g) {
            pool.extend(z);
        }
    }
    pool
}

fn diagnostics_or_none(values: &[f64]) -> Option<DiagnosticsSummary> {
    if values.len() < MIN_DIAGNOSTIC_LEN {
        return None;
    }
    normality_diagnostics(values).ok()
}

fn median_of(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let k = v.len();
    if k == 0 {
        f64::NAN
    } else if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

/// Variance of `d_n^{-1} W_n(x)` from its Hermite expansion, truncated at the
/// largest supported degree.
pub fn plain_variance(profile: &HermiteProfile, model: &crate::lrd_gauss::CovarianceModel, n: usize, x: f64) -> Result<f64> {
    let d_n = normalizer_dn(model, profile.rank(), n)?;
    let mut total = 0.0;
    for q in profile.rank()..=MAX_DEGREE {
        let j = profile.coeff(q, x)?;
        total += j * j / factorial(q) * lag_sum(model, q, n);
    }
    Ok(total / (d_n * d_n))
}

fn variance_check(values: &[f64], leading: f64, exact: f64) -> Option<VarianceCheck> {
    if values.len() < 2 {
        return None;
    }
    let k = values.len() as f64;
    let (mean, sd) = mean_sd(values);
    let var = sd * sd;
    let m4 = values.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / k;
    Some(VarianceCheck {
        sample: var,
        standard_error: ((m4 - var * var).max(0.0) / k).sqrt(),
        leading,
        exact,
    })
}

/// Runs the full scenario on the current rayon pool.
pub fn run_scenario(config: &ExperimentConfig) -> Result<ScenarioReport> {
    config.validate()?;
    let started = Instant::now();
    let profile = profile_for(config)?;
    let m = profile.rank();
    let probe = probe_point(config, &profile)?;
    let grid = Grid::quantiles(&profile, config.grid.lo, config.grid.hi, config.grid.points)?;
    let probe_grid = Grid::new(&[probe.x0])?;

    let mut sizes = Vec::with_capacity(config.n.len());
    let mut jm_estimate = None;
    let largest = *config.n.iter().max().expect("validated non-empty");
    for &n in &config.n {
        let l = config.l_rule.block_length(n);
        let p = config.p_rule.block_count(n, l);
        let plan = BootstrapPlan::new(n, l, Some(p), config.replicates, config.master_seed)?;
        let d_n = normalizer_dn(&config.model, m, n)?;
        let d_l = normalizer_dn(&config.model, m, l)?;
        let sim = PathSimulator::new(config.model, n)?;

        let outcomes: Vec<SeriesOutcome> = (0..config.series)
            .into_par_iter()
            .map(|r| run_series(config, &profile, &sim, &grid, &probe_grid, &plan, d_n, r))
            .collect::<Result<_>>()?;

        let w_pool = pooled_studentized(outcomes.iter().map(|o| o.w_probe.as_slice()));
        let h_pool = pooled_studentized(outcomes.iter().map(|o| o.hermite.as_slice()));
        let plain_w: Vec<f64> = outcomes.iter().map(|o| o.plain_w).collect();
        let plain_h: Vec<f64> = outcomes.iter().map(|o| o.plain_hermite).collect();
        let plain_w_diag = diagnostics_or_none(&plain_w);
        let per_series_skew: Vec<f64> = outcomes
            .iter()
            .filter_map(|o| diagnostics_or_none(&o.hermite).map(|d| d.skewness))
            .collect();
        let per_series_bootstrap_skewness = (per_series_skew.len() >= 2).then(|| {
            let (mean, sd) = mean_sd(&per_series_skew);
            Spread {
                mean,
                sd,
                count: per_series_skew.len(),
            }
        });
        let deviations: Vec<f64> = outcomes.iter().map(|o| o.deviation).collect();
        let leading = probe.jm_x0 * probe.jm_x0 / factorial(m);
        let exact = plain_variance(&profile, &config.model, n, probe.x0)?;

        sizes.push(SizeReport {
            n,
            l,
            p,
            d_n,
            d_l,
            hurst_h: crate::empirical::hurst_exponent(&config.model, m),
            bootstrap_w_star: diagnostics_or_none(&w_pool),
            bootstrap_hermite_sum: diagnostics_or_none(&h_pool),
            plain_w_n_aligned_skewness: plain_w_diag.map(|d| probe.jm_x0.signum() * d.skewness),
            plain_w_n: plain_w_diag,
            plain_hermite_sum: diagnostics_or_none(&plain_h),
            plain_w_n_variance: variance_check(&plain_w, leading, exact),
            per_series_bootstrap_skewness,
            jm_deviation: JmDeviation {
                median: median_of(&deviations),
                min: deviations.iter().cloned().fold(f64::INFINITY, f64::min),
                max: deviations.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
                per_series: deviations,
            },
        });
        if n == largest && jm_estimate.is_none() {
            jm_estimate = outcomes.into_iter().next().and_then(|o| o.estimate);
        }
    }

    Ok(ScenarioReport {
        schema: REPORT_SCHEMA.to_string(),
        config: config.clone(),
        rank: m,
        rank_peak: profile.detection().map(|d| d.peak),
        rank_marginal: profile.detection().is_some_and(|d| d.is_marginal()),
        sigma_m: profile.sigma_m(),
        probe,
        sizes,
        runtime_seconds: started.elapsed().as_secs_f64(),
        threads: rayon::current_num_threads(),
        jm_estimate,
        profile: Some(profile),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::config::preset;

    #[test]
    fn smoke_preset_completes() {
        let config = preset("smoke").unwrap();
        let report = run_scenario(&config).unwrap();
        assert_eq!(report.schema, REPORT_SCHEMA);
        assert_eq!(report.rank, 1);
        assert_eq!(report.sizes.len(), 1);
        let s = &report.sizes[0];
        assert_eq!((s.n, s.l, s.p), (64, 4, 16));
        assert!(s.bootstrap_w_star.is_none());
        assert!(s.plain_w_n.is_none());
        assert_eq!(s.jm_deviation.per_series.len(), 1);
        assert!(report.jm_estimate.is_some());
    }

    #[test]
    fn probe_point_defaults() {
        let c = preset("identity-m1").unwrap();
        let p = probe_point(&c, &profile_for(&c).unwrap()).unwrap();
        assert_eq!(p.quantile, 0.5);
        assert!(p.x0.abs() < 1e-9);
        let c = preset("hermite2-m2").unwrap();
        let prof = profile_for(&c).unwrap();
        let p = probe_point(&c, &prof).unwrap();
        assert_eq!(p.quantile, 0.7);
        assert!(p.jm_x0 < 0.0);
    }

    #[test]
    fn probe_point_skips_zeros_of_jm() {
        // J_2 of the identity is -x phi(x): zero at the median.
        let mut c = preset("identity-m1").unwrap();
        c.m_override = Some(2);
        c.probe_quantile = Some(0.5);
        let prof = profile_for(&c).unwrap();
        let p = probe_point(&c, &prof).unwrap();
        assert!((p.quantile - 0.51).abs() < 1e-12);
        assert!(p.jm_x0.abs() > 1e-5);
    }

    #[test]
    fn plain_variance_leading_term_for_identity() {
        let c = preset("identity-m1").unwrap();
        let prof = profile_for(&c).unwrap();
        let v = plain_variance(&prof, &c.model, 4096, 0.0).unwrap();
        let lead = prof.jm(0.0).powi(2);
        assert!(v >= lead && v < lead * 1.02, "{v} vs {lead}");
    }

    #[test]
    fn failures_carry_seed_and_size() {
        let mut c = preset("smoke").unwrap();
        c.model = crate::lrd_gauss::CovarianceModel::poly(0.6).unwrap();
        c.m_override = Some(2);
        let err = run_scenario(&c).unwrap_err();
        assert!(matches!(err, Error::RegimeViolation { .. }), "{err}");
    }
}
