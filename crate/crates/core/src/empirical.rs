//! The empirical process of the observed series, its normaliser, and the
//! residual left after removing the leading Hermite projection.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermite::{factorial, hermite_unchecked, HermiteProfile};
use crate::lrd_gauss::CovarianceModel;
use crate::sample::SubordinatedSample;

/// A grid location. The sentinels are kept symbolic so indicator logic at the
/// ends is exact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridPoint {
    NegInf,
    Finite(f64),
    PosInf,
}

impl GridPoint {
    pub fn value(self) -> f64 {
        match self {
            GridPoint::NegInf => f64::NEG_INFINITY,
            GridPoint::Finite(x) => x,
            GridPoint::PosInf => f64::INFINITY,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, GridPoint::Finite(_))
    }
}

impl fmt::Display for GridPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridPoint::NegInf => f.write_str("-inf"),
            GridPoint::PosInf => f.write_str("inf"),
            GridPoint::Finite(x) => write!(f, "{x}"),
        }
    }
}

/// Strictly increasing evaluation points bracketed by `-inf` and `+inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    points: Vec<GridPoint>,
}

impl Grid {
    /// Builds a grid from finite interior points; sentinels are added.
    pub fn new(interior: &[f64]) -> Result<Self> {
        if interior.is_empty() {
            return Err(Error::InvalidParameter("grid needs at least one finite point".into()));
        }
        if interior.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("interior grid points must be finite".into()));
        }
        if interior.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter("grid points must be strictly increasing".into()));
        }
        let mut points = Vec::with_capacity(interior.len() + 2);
        points.push(GridPoint::NegInf);
        points.extend(interior.iter().map(|&x| GridPoint::Finite(x)));
        points.push(GridPoint::PosInf);
        Ok(Self { points })
    }

    /// Quantiles of `F` at `count` equispaced levels from `lo` to `hi`.
    /// Ties (atoms of `F`) are collapsed.
    pub fn quantiles(profile: &HermiteProfile, lo: f64, hi: f64, count: usize) -> Result<Self> {
        if count < 1 || !(0.0 < lo && lo <= hi && hi < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "quantile grid needs 0 < lo <= hi < 1 and count >= 1, got ({lo}, {hi}, {count})"
            )));
        }
        let mut xs = Vec::with_capacity(count);
        for k in 0..count {
            let u = if count == 1 {
                lo
            } else {
                lo + (hi - lo) * k as f64 / (count - 1) as f64
            };
            let x = profile.quantile(u)?;
            if xs.last().is_none_or(|&prev| x > prev) {
                xs.push(x);
            }
        }
        Self::new(&xs)
    }

    pub fn points(&self) -> &[GridPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Index of a finite point equal to `x`, if present.
    pub fn position(&self, x: f64) -> Option<usize> {
        self.points.iter().position(|p| *p == GridPoint::Finite(x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Label {
    WN,
    WNNormalized,
    SN,
    WStar,
    SStar,
    JHat,
    TildeF,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::WN => "W_N",
            Label::WNNormalized => "W_N_NORMALIZED",
            Label::SN => "S_N",
            Label::WStar => "W_STAR",
            Label::SStar => "S_STAR",
            Label::JHat => "J_HAT",
            Label::TildeF => "TILDE_F",
        }
    }

    /// Whether the process is centred, hence zero at both sentinels.
    pub fn is_centered(self) -> bool {
        !matches!(self, Label::JHat | Label::TildeF)
    }
}

/// Process values on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessEvaluation {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub label: Label,
}

impl ProcessEvaluation {
    /// Increment over `(x_i, x_j]` by grid index.
    pub fn increment(&self, i: usize, j: usize) -> f64 {
        self.values[j] - self.values[i]
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }
}

/// `H = 1 - m D / 2` and the exact normaliser `d_n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub m: usize,
    pub d_exp: f64,
    pub hurst_h: f64,
    pub n: usize,
    pub d_n: f64,
}

impl Normalization {
    pub fn new(model: &CovarianceModel, m: usize, n: usize) -> Result<Self> {
        let d_n = normalizer_dn(model, m, n)?;
        Ok(Self {
            m,
            d_exp: model.d_exp(),
            hurst_h: hurst_exponent(model, m),
            n,
            d_n,
        })
    }
}

pub fn hurst_exponent(model: &CovarianceModel, m: usize) -> f64 {
    1.0 - m as f64 * model.d_exp() / 2.0
}

/// `d_n = sqrt(sum_{i,j<=n} |rho(i-j)|^m)`, valid for `m D < 1`.
pub fn normalizer_dn(model: &CovarianceModel, m: usize, n: usize) -> Result<f64> {
    let md = m as f64 * model.d_exp();
    if m == 0 || md >= 1.0 {
        return Err(Error::RegimeViolation { md });
    }
    if n == 0 {
        return Err(Error::InvalidParameter("normaliser needs n >= 1".into()));
    }
    Ok(lag_sum(model, m, n).sqrt())
}

/// `sum_{i,j<=n} rho(i-j)^q = n + 2 sum_{k<n} (n-k) |rho(k)|^q`, no regime check.
pub fn lag_sum(model: &CovarianceModel, q: usize, n: usize) -> f64 {
    let exp = q as i32;
    let tail: f64 = (1..n)
        .map(|k| (n - k) as f64 * model.autocovariance(k).abs().powi(exp))
        .sum();
    n as f64 + 2.0 * tail
}

fn indicator_counts(y: &[f64], grid: &Grid) -> Vec<usize> {
    let mut sorted = y.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    grid.points()
        .iter()
        .map(|p| match p {
            GridPoint::NegInf => 0,
            GridPoint::PosInf => sorted.len(),
            GridPoint::Finite(x) => sorted.partition_point(|v| v <= x),
        })
        .collect()
}

pub(crate) fn cdf_at(profile: &HermiteProfile, p: GridPoint) -> f64 {
    match p {
        GridPoint::NegInf => 0.0,
        GridPoint::PosInf => 1.0,
        GridPoint::Finite(x) => profile.cdf(x),
    }
}

/// `J_m(x)` with exact zeros at the sentinels.
pub(crate) fn jm_at(profile: &HermiteProfile, p: GridPoint) -> f64 {
    match p {
        GridPoint::Finite(x) => profile.jm(x),
        _ => 0.0,
    }
}

/// `W_n(x) = sum_i (1{Y_i <= x} - F(x))`, or `d_n^{-1} W_n(x)` when `normalized`.
pub fn empirical_process(
    sample: &SubordinatedSample,
    profile: &HermiteProfile,
    grid: &Grid,
    normalized: bool,
) -> Result<ProcessEvaluation> {
    let n = sample.len();
    if n == 0 {
        return Err(Error::InvalidParameter("sample is empty".into()));
    }
    let scale = if normalized {
        1.0 / normalizer_dn(sample.model(), profile.rank(), n)?
    } else {
        1.0
    };
    let counts = indicator_counts(sample.y(), grid);
    let values = grid
        .points()
        .iter()
        .zip(counts)
        .map(|(&p, c)| match p {
            GridPoint::Finite(_) => scale * (c as f64 - n as f64 * cdf_at(profile, p)),
            _ => 0.0,
        })
        .collect();
    Ok(ProcessEvaluation {
        grid: grid.clone(),
        values,
        label: if normalized { Label::WNNormalized } else { Label::WN },
    })
}

/// `S_n(x) = d_n^{-1} sum_i (1{Y_i <= x} - F(x) - J_m(x)/m! H_m(X_i))`.
pub fn reduction_residual(
    sample: &SubordinatedSample,
    profile: &HermiteProfile,
    grid: &Grid,
) -> Result<ProcessEvaluation> {
    let x = sample.x()?;
    let m = profile.rank();
    let n = sample.len();
    let d_n = normalizer_dn(sample.model(), m, n)?;
    let hermite_sum: f64 = x.iter().map(|&s| hermite_unchecked(m, s)).sum();
    let m_fact = factorial(m);
    let counts = indicator_counts(sample.y(), grid);
    let values = grid
        .points()
        .iter()
        .zip(counts)
        .map(|(&p, c)| match p {
            GridPoint::Finite(_) => {
                (c as f64 - n as f64 * cdf_at(profile, p) - jm_at(profile, p) / m_fact * hermite_sum) / d_n
            }
            _ => 0.0,
        })
        .collect();
    Ok(ProcessEvaluation {
        grid: grid.clone(),
        values,
        label: Label::SN,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite::Transform;
    use crate::lrd_gauss::{simulate_path, GaussianPath};
    use approx::assert_abs_diff_eq;

    fn poly(d: f64) -> CovarianceModel {
        CovarianceModel::poly(d).unwrap()
    }

    #[test]
    fn normalizer_examples() {
        let m = poly(0.4);
        assert_eq!(normalizer_dn(&m, 1, 1).unwrap(), 1.0);
        assert_eq!(normalizer_dn(&m, 2, 1).unwrap(), 1.0);
        assert_abs_diff_eq!(normalizer_dn(&m, 1, 2).unwrap(), 1.875024, epsilon = 1e-6);
        assert_abs_diff_eq!(normalizer_dn(&m, 2, 2).unwrap(), 1.774457, epsilon = 1e-6);
        assert!(matches!(
            normalizer_dn(&poly(0.6), 2, 10),
            Err(Error::RegimeViolation { .. })
        ));
        assert!(normalizer_dn(&poly(0.3), 3, 10).is_ok());
    }

    #[test]
    fn normalizer_matches_double_sum() {
        let model = CovarianceModel::fgn(0.8).unwrap();
        let n = 40;
        let brute: f64 = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i as i64 - j as i64).unsigned_abs() as usize))
            .map(|k| model.autocovariance(k).powi(2))
            .sum();
        assert_abs_diff_eq!(normalizer_dn(&model, 2, n).unwrap(), brute.sqrt(), epsilon = 1e-10);
    }

    #[test]
    fn normalizer_growth_tracks_hurst_exponent() {
        for (model, m) in [(poly(0.3), 1), (poly(0.3), 2), (CovarianceModel::fgn(0.8).unwrap(), 1)] {
            let ns: Vec<usize> = (10..=16).map(|e| 1usize << e).collect();
            let logs: Vec<(f64, f64)> = ns
                .iter()
                .map(|&n| ((n as f64).ln(), normalizer_dn(&model, m, n).unwrap().ln()))
                .collect();
            assert!(logs.windows(2).all(|w| w[1].1 > w[0].1));
            let k = logs.len() as f64;
            let mx = logs.iter().map(|p| p.0).sum::<f64>() / k;
            let my = logs.iter().map(|p| p.1).sum::<f64>() / k;
            let slope = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
                / logs.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
            let h = hurst_exponent(&model, m);
            assert!((slope - h).abs() < 0.03, "{model} m={m}: slope {slope} vs H {h}");
        }
    }

    fn sample_from(x: Vec<f64>, t: &Transform) -> SubordinatedSample {
        let path = GaussianPath {
            values: x,
            model: poly(0.3),
            seed: 0,
        };
        SubordinatedSample::from_path(path, t)
    }

    #[test]
    fn empirical_process_by_hand() {
        let profile = HermiteProfile::new(Transform::Identity).unwrap();
        let sample = sample_from(vec![-1.0, 0.0, 1.0], &Transform::Identity);
        let grid = Grid::new(&[-2.0, 0.0]).unwrap();
        let w = empirical_process(&sample, &profile, &grid, false).unwrap();
        assert_eq!(w.label, Label::WN);
        assert_eq!(w.values[0], 0.0);
        assert_abs_diff_eq!(w.values[1], -3.0 * profile.cdf(-2.0), epsilon = 1e-15);
        assert_abs_diff_eq!(w.values[2], 0.5, epsilon = 1e-15);
        assert_eq!(w.values[3], 0.0);

        let wn = empirical_process(&sample, &profile, &grid, true).unwrap();
        let dn = normalizer_dn(sample.model(), 1, 3).unwrap();
        assert_abs_diff_eq!(wn.values[2], 0.5 / dn, epsilon = 1e-15);
    }

    #[test]
    fn all_above_point_gives_minus_half_n() {
        let profile = HermiteProfile::new(Transform::Identity).unwrap();
        let sample = sample_from(vec![0.5, 1.0, 2.0, 3.0], &Transform::Identity);
        let grid = Grid::new(&[0.0]).unwrap();
        let w = empirical_process(&sample, &profile, &grid, false).unwrap();
        assert_abs_diff_eq!(w.values[1], -2.0, epsilon = 1e-15);
    }

    #[test]
    fn residual_vanishes_at_sentinels_and_telescopes() {
        let profile = HermiteProfile::new(Transform::Square).unwrap();
        let path = simulate_path(&poly(0.3), 300, 5).unwrap();
        let sample = SubordinatedSample::from_path(path, &Transform::Square);
        let grid = Grid::quantiles(&profile, 0.05, 0.95, 11).unwrap();
        let s = reduction_residual(&sample, &profile, &grid).unwrap();
        assert_eq!(s.values[0], 0.0);
        assert_eq!(*s.values.last().unwrap(), 0.0);
        let w = empirical_process(&sample, &profile, &grid, false).unwrap();
        let total: f64 = (1..w.values.len()).map(|i| w.increment(i - 1, i)).sum();
        assert_abs_diff_eq!(total, 0.0, epsilon = 1e-9);
        for i in 1..w.values.len() {
            let partial: f64 = (1..=i).map(|k| w.increment(k - 1, k)).sum();
            assert_abs_diff_eq!(partial, w.values[i], epsilon = 1e-9);
        }
    }

    #[test]
    fn residual_requires_latent() {
        let profile = HermiteProfile::new(Transform::Identity).unwrap();
        let sample = SubordinatedSample::observed(vec![0.1, 0.2], poly(0.3)).unwrap();
        let grid = Grid::new(&[0.0]).unwrap();
        assert!(matches!(
            reduction_residual(&sample, &profile, &grid),
            Err(Error::MissingLatent)
        ));
    }

    #[test]
    fn grid_validation() {
        assert!(Grid::new(&[]).is_err());
        assert!(Grid::new(&[1.0, 1.0]).is_err());
        assert!(Grid::new(&[f64::NAN]).is_err());
        let g = Grid::new(&[0.0, 1.0]).unwrap();
        assert_eq!(g.len(), 4);
        assert_eq!(g.points()[0], GridPoint::NegInf);
        assert_eq!(g.position(1.0), Some(2));
    }
}
