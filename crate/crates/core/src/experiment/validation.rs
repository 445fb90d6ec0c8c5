//! Finite-sample surrogates for the moment bounds behind the bootstrap
//! limit theory, evaluated on a ladder of sample sizes.
//!
//! Every series is one Gaussian path of the largest size; smaller sizes use
//! its prefixes, so the ladder compares nested samples rather than
//! independent ones.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::empirical::{normalizer_dn, reduction_residual, Grid};
use crate::error::{Error, Result};
use crate::hermite::{HermiteProfile, Transform};
use crate::lrd_gauss::{CovarianceModel, PathSimulator};
use crate::mbb::{tilde_f, tilde_mu, BlockBootstrap};
use crate::rng::derive_seed;
use crate::sample::SubordinatedSample;

const MOMENT_TAG: u64 = 0x3013;
const REDUCTION_TAG: u64 = 0x4ed0;

/// The `n` ladder used by the validation studies.
pub const LADDER: [usize; 5] = [512, 1024, 2048, 4096, 8192];

/// Quantile-level pairs `(u, v)` defining the increments `(F^{-1}(u), F^{-1}(v)]`.
pub const PAIRS: [(f64, f64); 5] = [(0.1, 0.3), (0.2, 0.5), (0.4, 0.6), (0.5, 0.8), (0.7, 0.95)];

/// `l = floor(n^0.5)`.
pub fn ladder_block_length(n: usize) -> usize {
    ((n as f64).sqrt().floor() as usize).max(1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudySetup {
    pub model: CovarianceModel,
    pub transform: Transform,
    pub ladder: Vec<usize>,
    pub series: usize,
    pub master_seed: u64,
}

impl StudySetup {
    fn check(&self) -> Result<usize> {
        if self.ladder.is_empty() || self.series == 0 {
            return Err(Error::InvalidParameter("ladder and series count must be non-empty".into()));
        }
        if self.ladder.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter("ladder must be strictly increasing".into()));
        }
        Ok(*self.ladder.last().unwrap())
    }
}

/// Monte Carlo means at one ladder size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub n: usize,
    pub l: usize,
    pub d_n: f64,
    pub d_l: f64,
    /// Per pair: `mean |S_n(x, y)|^2 / (F(y) - F(x))`.
    pub residual_ratio: Vec<f64>,
    /// `mean mu~^2 * n^2 / d_n^2`.
    pub centering_mean_scaled: f64,
    /// `l^2 d_l^{-2} * mean mu~^2 * n^2 / d_n^2`.
    pub centering_product: f64,
    /// `l^2 d_l^{-2} * mean mu~^2`.
    pub centering_block_scaled: f64,
    /// Per pair: `mean (F(x, y) - F~(x, y))^2 / ((d_n^2 / n^2) F(x, y))`.
    pub tilde_f_ratio: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentStudy {
    pub setup: StudySetup,
    pub pairs: Vec<(f64, f64)>,
    pub rows: Vec<MomentRow>,
}

struct SeriesMoments {
    residual_sq: Vec<Vec<f64>>,
    mu_sq: Vec<f64>,
    gap_sq: Vec<Vec<f64>>,
}

/// Grid over the pair endpoints, grid indices of each pair, and `F(y) - F(x)`.
type PairGrid = (Grid, Vec<(usize, usize)>, Vec<f64>);

fn pair_grid(profile: &HermiteProfile, pairs: &[(f64, f64)]) -> Result<PairGrid> {
    let mut levels: Vec<f64> = pairs.iter().flat_map(|&(u, v)| [u, v]).collect();
    levels.sort_by(|a, b| a.total_cmp(b));
    levels.dedup();
    let xs = levels.iter().map(|&u| profile.quantile(u)).collect::<Result<Vec<_>>>()?;
    let grid = Grid::new(&xs)?;
    let index = |u: f64| levels.iter().position(|&w| w == u).unwrap() + 1;
    let idx: Vec<(usize, usize)> = pairs.iter().map(|&(u, v)| (index(u), index(v))).collect();
    let masses = idx
        .iter()
        .map(|&(i, j)| profile.cdf(xs[j - 1]) - profile.cdf(xs[i - 1]))
        .collect();
    Ok((grid, idx, masses))
}

fn mean_by_column(rows: &[Vec<f64>]) -> Vec<f64> {
    let k = rows.len() as f64;
    let mut acc = vec![0.0; rows[0].len()];
    for r in rows {
        for (a, v) in acc.iter_mut().zip(r) {
            *a += v;
        }
    }
    acc.into_iter().map(|s| s / k).collect()
}

/// Residual, centering and `F~` moment ratios over the ladder.
pub fn moment_study(setup: &StudySetup, pairs: &[(f64, f64)]) -> Result<MomentStudy> {
    let n_max = setup.check()?;
    let profile = HermiteProfile::new(setup.transform.clone())?;
    let m = profile.rank();
    let (grid, idx, masses) = pair_grid(&profile, pairs)?;
    let sim = PathSimulator::new(setup.model, n_max)?;
    let mut cdf_on_grid = Vec::with_capacity(grid.len());
    for p in grid.points() {
        cdf_on_grid.push(match p {
            crate::empirical::GridPoint::Finite(x) => profile.cdf(*x),
            crate::empirical::GridPoint::NegInf => 0.0,
            crate::empirical::GridPoint::PosInf => 1.0,
        });
    }

    let per_series: Vec<SeriesMoments> = (0..setup.series)
        .into_par_iter()
        .map(|r| {
            let seed = derive_seed(&[setup.master_seed, MOMENT_TAG, r as u64]);
            let full = SubordinatedSample::from_path(sim.simulate(seed), &setup.transform);
            let mut out = SeriesMoments {
                residual_sq: Vec::new(),
                mu_sq: Vec::new(),
                gap_sq: Vec::new(),
            };
            for &n in &setup.ladder {
                let s = full.prefix(n)?;
                let l = ladder_block_length(n);
                let res = reduction_residual(&s, &profile, &grid)?;
                let tf = tilde_f(&s, l, &grid)?;
                out.residual_sq.push(
                    idx.iter()
                        .zip(&masses)
                        .map(|(&(i, j), mass)| res.increment(i, j).powi(2) / mass)
                        .collect(),
                );
                out.gap_sq.push(
                    idx.iter()
                        .map(|&(i, j)| {
                            let gap = (cdf_on_grid[j] - cdf_on_grid[i]) - tf.increment(i, j);
                            gap * gap
                        })
                        .collect(),
                );
                out.mu_sq.push(tilde_mu(&s, l, m)?.powi(2));
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(setup.ladder.len());
    for (k, &n) in setup.ladder.iter().enumerate() {
        let l = ladder_block_length(n);
        let d_n = normalizer_dn(&setup.model, m, n)?;
        let d_l = normalizer_dn(&setup.model, m, l)?;
        let residual: Vec<Vec<f64>> = per_series.iter().map(|s| s.residual_sq[k].clone()).collect();
        let gap: Vec<Vec<f64>> = per_series.iter().map(|s| s.gap_sq[k].clone()).collect();
        let mu_mean = per_series.iter().map(|s| s.mu_sq[k]).sum::<f64>() / setup.series as f64;
        let scale_n = (n as f64 / d_n).powi(2);
        let scale_l = (l as f64 / d_l).powi(2);
        rows.push(MomentRow {
            n,
            l,
            d_n,
            d_l,
            residual_ratio: mean_by_column(&residual),
            centering_mean_scaled: mu_mean * scale_n,
            centering_product: scale_l * mu_mean * scale_n,
            centering_block_scaled: scale_l * mu_mean,
            tilde_f_ratio: mean_by_column(&gap)
                .into_iter()
                .zip(&masses)
                .map(|(g, mass)| g * scale_n / mass)
                .collect(),
        });
    }
    Ok(MomentStudy {
        setup: setup.clone(),
        pairs: pairs.to_vec(),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionRow {
    pub n: usize,
    pub l: usize,
    /// Mean over series of the per-series median over replicates of `sup |S*|`.
    pub mean_median_sup: f64,
    pub per_series_median: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionStudy {
    pub setup: StudySetup,
    pub replicates: usize,
    pub grid_points: usize,
    pub rows: Vec<ReductionRow>,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

/// `sup |S*|` on a quantile grid, summarised by its median over replicates.
pub fn reduction_study(setup: &StudySetup, replicates: usize, grid_points: usize) -> Result<ReductionStudy> {
    let n_max = setup.check()?;
    if replicates == 0 {
        return Err(Error::InvalidParameter("replicates must be positive".into()));
    }
    let profile = HermiteProfile::new(setup.transform.clone())?;
    let grid = Grid::quantiles(&profile, 0.01, 0.99, grid_points)?;
    let sim = PathSimulator::new(setup.model, n_max)?;

    let per_series: Vec<Vec<f64>> = (0..setup.series)
        .into_par_iter()
        .map(|r| {
            let seed = derive_seed(&[setup.master_seed, REDUCTION_TAG, r as u64]);
            let full = SubordinatedSample::from_path(sim.simulate(seed), &setup.transform);
            setup
                .ladder
                .iter()
                .map(|&n| {
                    let s = full.prefix(n)?;
                    let l = ladder_block_length(n);
                    let engine = BlockBootstrap::new(&s, &profile, l, &grid)?;
                    let boot = derive_seed(&[setup.master_seed, REDUCTION_TAG, r as u64, n as u64]);
                    let p = n / l;
                    let sups = (0..replicates as u64)
                        .map(|id| {
                            let rep = engine.draw(boot, id, p);
                            Ok(engine.s_star(&rep)?.iter().fold(0.0f64, |a, v| a.max(v.abs())))
                        })
                        .collect::<Result<Vec<f64>>>()?;
                    Ok(median(sups))
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let rows = setup
        .ladder
        .iter()
        .enumerate()
        .map(|(k, &n)| {
            let per: Vec<f64> = per_series.iter().map(|s| s[k]).collect();
            ReductionRow {
                n,
                l: ladder_block_length(n),
                mean_median_sup: per.iter().sum::<f64>() / per.len() as f64,
                per_series_median: per,
            }
        })
        .collect();
    Ok(ReductionStudy {
        setup: setup.clone(),
        replicates,
        grid_points,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> StudySetup {
        StudySetup {
            model: CovarianceModel::poly(0.3).unwrap(),
            transform: Transform::Identity,
            ladder: vec![64, 128],
            series: 4,
            master_seed: 7,
        }
    }

    #[test]
    fn block_lengths() {
        assert_eq!(LADDER.map(ladder_block_length), [22, 32, 45, 64, 90]);
    }

    #[test]
    fn moment_study_shapes_and_signs() {
        let s = moment_study(&small(), &PAIRS).unwrap();
        assert_eq!(s.rows.len(), 2);
        for row in &s.rows {
            assert_eq!(row.residual_ratio.len(), PAIRS.len());
            assert!(row.residual_ratio.iter().chain(&row.tilde_f_ratio).all(|v| v.is_finite() && *v >= 0.0));
            assert!(row.centering_product >= 0.0);
        }
        assert_eq!(s, moment_study(&small(), &PAIRS).unwrap());
    }

    #[test]
    fn reduction_study_is_deterministic() {
        let a = reduction_study(&small(), 10, 11).unwrap();
        assert_eq!(a.rows[0].per_series_median.len(), 4);
        assert_eq!(a, reduction_study(&small(), 10, 11).unwrap());
    }

    #[test]
    fn rejects_unordered_ladder() {
        let mut s = small();
        s.ladder = vec![128, 64];
        assert!(moment_study(&s, &PAIRS).is_err());
    }
}
