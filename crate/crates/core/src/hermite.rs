//! Hermite machinery for subordinated Gaussian variables `Y = G(X)`.
//!
//! For every supported transform the sublevel set `{s : G(s) <= x}` is a finite
//! union of intervals. The law of `Y` and the Hermite coefficients of the
//! indicator class are therefore closed-form sums over interval endpoints:
//!
//! * `F(x)   = sum Phi(b) - Phi(a)`
//! * `J_q(x) = sum H_{q-1}(a) phi(a) - H_{q-1}(b) phi(b)`, since `(H_{q-1} phi)' = -H_q phi`.
//!
//! Moments of `G` itself (for `sigma_m`) go through adaptive quadrature.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::quadrature;

/// Largest supported Hermite degree.
pub const MAX_DEGREE: usize = 30;
/// Default threshold separating a zero coefficient from a nonzero one.
pub const DEFAULT_RANK_TOL: f64 = 1e-6;
/// Number of quantile points probed when detecting the rank.
pub const RANK_PROBE_POINTS: usize = 41;

const QUAD_TOL: f64 = 1e-12;
const QUAD_HALF_WIDTH: f64 = 40.0;

pub fn std_normal_pdf(x: f64) -> f64 {
    if x.is_infinite() {
        return 0.0;
    }
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

pub fn std_normal_cdf(x: f64) -> f64 {
    if x == f64::NEG_INFINITY {
        0.0
    } else if x == f64::INFINITY {
        1.0
    } else {
        0.5 * erfc(-x / std::f64::consts::SQRT_2)
    }
}

/// Probabilists' Hermite polynomial `H_q(x)`.
pub fn hermite_eval(q: usize, x: f64) -> Result<f64> {
    if q > MAX_DEGREE {
        return Err(Error::RankTooLarge(q));
    }
    Ok(hermite_unchecked(q, x))
}

pub(crate) fn hermite_unchecked(q: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, x);
    if q == 0 {
        return prev;
    }
    for k in 1..q {
        let next = x * cur - k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `H_{q-1}(x) phi(x)` with the convention that it vanishes at infinity.
fn hermite_tail(q: usize, x: f64) -> f64 {
    if x.is_infinite() {
        0.0
    } else {
        hermite_unchecked(q - 1, x) * std_normal_pdf(x)
    }
}

pub fn factorial(q: usize) -> f64 {
    (1..=q).fold(1.0, |acc, k| acc * k as f64)
}

/// Zeros of `H_q`, ascending. Found by interlacing with the zeros of `H_{q-1}`.
pub fn hermite_zeros(q: usize) -> Vec<f64> {
    let mut zeros: Vec<f64> = Vec::new();
    for k in 1..=q {
        let bound = (4.0 * k as f64 + 2.0).sqrt() + 1.0;
        let mut edges = Vec::with_capacity(k + 1);
        edges.push(-bound);
        edges.extend_from_slice(&zeros);
        edges.push(bound);
        zeros = edges
            .windows(2)
            .map(|w| bisect_root(|s| hermite_unchecked(k, s), w[0], w[1]))
            .collect();
    }
    zeros
}

fn bisect_root<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Piecewise-linear transform through strictly increasing knots, constant
/// beyond the first and last knot.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseTable {
    knots: Vec<(f64, f64)>,
}

impl PiecewiseTable {
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::InvalidParameter("table needs at least one knot".into()));
        }
        if knots.iter().any(|(s, g)| !s.is_finite() || !g.is_finite()) {
            return Err(Error::InvalidParameter("table knots must be finite".into()));
        }
        if knots.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::InvalidParameter(
                "table abscissae must be strictly increasing".into(),
            ));
        }
        Ok(Self { knots })
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn eval(&self, s: f64) -> f64 {
        let k = &self.knots;
        if s <= k[0].0 {
            return k[0].1;
        }
        if s >= k[k.len() - 1].0 {
            return k[k.len() - 1].1;
        }
        let i = k.partition_point(|&(x, _)| x <= s);
        let (x0, y0) = k[i - 1];
        let (x1, y1) = k[i];
        y0 + (y1 - y0) * (s - x0) / (x1 - x0)
    }
}

/// The transform `G` in `Y = G(X)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Transform {
    Identity,
    Square,
    Abs,
    /// `G = H_q`.
    Hermite(usize),
    Custom(PiecewiseTable),
}

impl Transform {
    pub fn eval(&self, s: f64) -> f64 {
        match self {
            Transform::Identity => s,
            Transform::Square => s * s,
            Transform::Abs => s.abs(),
            Transform::Hermite(q) => hermite_unchecked(*q, s),
            Transform::Custom(t) => t.eval(s),
        }
    }

    /// Points splitting the real line into pieces on which `G` is monotone.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Transform::Identity => vec![],
            Transform::Square | Transform::Abs => vec![0.0],
            Transform::Hermite(q) => {
                if *q <= 1 {
                    vec![]
                } else {
                    hermite_zeros(q - 1)
                }
            }
            Transform::Custom(t) => t.knots.iter().map(|&(s, _)| s).collect(),
        }
    }

    fn limit(&self, positive: bool) -> f64 {
        match self {
            Transform::Identity => {
                if positive {
                    f64::INFINITY
                } else {
                    f64::NEG_INFINITY
                }
            }
            Transform::Square | Transform::Abs => f64::INFINITY,
            Transform::Hermite(0) => 1.0,
            Transform::Hermite(q) => {
                if positive || q % 2 == 0 {
                    f64::INFINITY
                } else {
                    f64::NEG_INFINITY
                }
            }
            Transform::Custom(t) => {
                if positive {
                    t.knots[t.knots.len() - 1].1
                } else {
                    t.knots[0].1
                }
            }
        }
    }

    fn eval_ext(&self, s: f64) -> f64 {
        if s == f64::INFINITY {
            self.limit(true)
        } else if s == f64::NEG_INFINITY {
            self.limit(false)
        } else {
            self.eval(s)
        }
    }

    /// `{s : G(s) <= x}` as disjoint closed intervals (ends may be infinite).
    pub fn sublevel_intervals(&self, x: f64) -> Vec<(f64, f64)> {
        if x == f64::INFINITY {
            return vec![(f64::NEG_INFINITY, f64::INFINITY)];
        }
        if x == f64::NEG_INFINITY {
            return vec![];
        }
        let mut edges = vec![f64::NEG_INFINITY];
        edges.extend(self.breakpoints());
        edges.push(f64::INFINITY);
        let mut out: Vec<(f64, f64)> = Vec::new();
        for w in edges.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (ga, gb) = (self.eval_ext(a), self.eval_ext(b));
            let piece = match (ga <= x, gb <= x) {
                (true, true) => Some((a, b)),
                (false, false) => None,
                (true, false) => Some((a, self.crossing(a, b, x))),
                (false, true) => Some((self.crossing(a, b, x), b)),
            };
            if let Some((lo, hi)) = piece {
                match out.last_mut() {
                    Some(last) if last.1 >= lo => last.1 = last.1.max(hi),
                    _ => out.push((lo, hi)),
                }
            }
        }
        out
    }

    // Level crossing of a monotone piece whose end values straddle x.
    fn crossing(&self, a: f64, b: f64, x: f64) -> f64 {
        let below = |s: f64| self.eval_ext(s) <= x;
        let below_a = below(a);
        let mut lo = a;
        let mut hi = b;
        if lo.is_infinite() {
            let anchor = if hi.is_finite() { hi } else { 0.0 };
            let mut step = 1.0;
            lo = anchor - step;
            while below(lo) != below_a {
                step *= 2.0;
                lo = anchor - step;
            }
        }
        if hi.is_infinite() {
            let anchor = if a.is_finite() { a } else { 0.0 };
            let mut step = 1.0;
            hi = anchor + step;
            while below(hi) == below_a {
                step *= 2.0;
                hi = anchor + step;
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if below(mid) == below_a {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

impl fmt::Display for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Transform::Identity => f.write_str("identity"),
            Transform::Square => f.write_str("square"),
            Transform::Abs => f.write_str("abs"),
            Transform::Hermite(q) => write!(f, "hermite:{q}"),
            Transform::Custom(t) => {
                f.write_str("table:")?;
                for (i, (s, g)) in t.knots.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{s}/{g}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for Transform {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "identity" => return Ok(Transform::Identity),
            "square" => return Ok(Transform::Square),
            "abs" => return Ok(Transform::Abs),
            _ => {}
        }
        if let Some(q) = s.strip_prefix("hermite:") {
            let q: usize = q
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("bad hermite degree in `{s}`")))?;
            if q == 0 {
                return Err(Error::InvalidParameter("hermite degree must be >= 1".into()));
            }
            if q > MAX_DEGREE {
                return Err(Error::RankTooLarge(q));
            }
            return Ok(Transform::Hermite(q));
        }
        if let Some(body) = s.strip_prefix("table:") {
            let knots = body
                .split(',')
                .map(|pair| {
                    let (a, b) = pair
                        .split_once('/')
                        .ok_or_else(|| Error::InvalidParameter(format!("bad table knot `{pair}`")))?;
                    let a: f64 = a.trim().parse().map_err(|_| Error::InvalidParameter(format!("bad knot `{pair}`")))?;
                    let b: f64 = b.trim().parse().map_err(|_| Error::InvalidParameter(format!("bad knot `{pair}`")))?;
                    Ok((a, b))
                })
                .collect::<Result<Vec<_>>>()?;
            return Ok(Transform::Custom(PiecewiseTable::new(knots)?));
        }
        Err(Error::InvalidParameter(format!(
            "unknown transform `{s}` (expected identity | square | abs | hermite:q | table:s/g,..)"
        )))
    }
}

impl Serialize for Transform {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Transform {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `F(x) = P(G(X) <= x)` for standard normal `X`.
pub fn true_cdf(transform: &Transform, x: f64) -> f64 {
    transform
        .sublevel_intervals(x)
        .iter()
        .map(|&(a, b)| std_normal_cdf(b) - std_normal_cdf(a))
        .sum::<f64>()
        .clamp(0.0, 1.0)
}

/// `J_q(x) = E[1{G(X) <= x} H_q(X)]`.
pub fn hermite_coeff(transform: &Transform, q: usize, x: f64) -> Result<f64> {
    if q > MAX_DEGREE {
        return Err(Error::RankTooLarge(q));
    }
    if q == 0 {
        return Ok(true_cdf(transform, x));
    }
    Ok(transform
        .sublevel_intervals(x)
        .iter()
        .map(|&(a, b)| hermite_tail(q, a) - hermite_tail(q, b))
        .sum())
}

/// Smallest `u`-quantile of `F`: `inf {x : F(x) >= u}`.
pub fn quantile(transform: &Transform, u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::InvalidParameter(format!("quantile level must be in (0,1), got {u}")));
    }
    let cdf = |x: f64| true_cdf(transform, x);
    let (mut lo, mut hi) = (-1.0f64, 1.0f64);
    let mut guard = 0;
    while cdf(lo) >= u {
        lo *= 2.0;
        guard += 1;
        if guard > 64 {
            return Ok(f64::NEG_INFINITY);
        }
    }
    while cdf(hi) < u {
        hi *= 2.0;
        guard += 1;
        if guard > 128 {
            return Ok(f64::INFINITY);
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if cdf(mid) >= u {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// The default rank probe grid: equispaced quantile levels `k / (points + 1)`.
pub fn quantile_grid(transform: &Transform, points: usize) -> Result<Vec<f64>> {
    (1..=points)
        .map(|k| quantile(transform, k as f64 / (points + 1) as f64))
        .collect()
}

/// Outcome of a rank search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankDetection {
    pub rank: usize,
    /// `max |J_rank(x)|` over the probe grid.
    pub peak: f64,
    pub tol: f64,
}

impl RankDetection {
    /// True when the leading coefficient is within a factor 10 of the threshold.
    pub fn is_marginal(&self) -> bool {
        self.peak < 10.0 * self.tol
    }
}

/// Smallest degree `q >= 1` with `max_grid |J_q| > tol`.
pub fn detect_rank(transform: &Transform, probe_grid: &[f64], q_max: usize, tol: f64) -> Result<RankDetection> {
    if probe_grid.is_empty() {
        return Err(Error::InvalidParameter("probe grid is empty".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("rank tolerance must be > 0, got {tol}")));
    }
    if q_max > MAX_DEGREE {
        return Err(Error::RankTooLarge(q_max));
    }
    for q in 1..=q_max {
        let mut peak = 0.0f64;
        for &x in probe_grid {
            peak = peak.max(hermite_coeff(transform, q, x)?.abs());
        }
        if peak > tol {
            return Ok(RankDetection { rank: q, peak, tol });
        }
    }
    Err(Error::RankNotFound { q_max, tol })
}

/// `E[G(X) H_m(X)] / m!`.
pub fn sigma_m(transform: &Transform, m: usize) -> Result<f64> {
    if m > MAX_DEGREE {
        return Err(Error::RankTooLarge(m));
    }
    let breaks = transform.breakpoints();
    let second = quadrature::integrate_pieces(
        |s| {
            let g = transform.eval(s);
            g * g * std_normal_pdf(s)
        },
        -QUAD_HALF_WIDTH,
        QUAD_HALF_WIDTH,
        &breaks,
        QUAD_TOL,
    )?;
    if !second.is_finite() {
        return Err(Error::QuadratureFailure {
            what: format!("E[G(X)^2] is not finite for {transform}"),
            tol: QUAD_TOL,
        });
    }
    let cross = quadrature::integrate_pieces(
        |s| transform.eval(s) * hermite_unchecked(m, s) * std_normal_pdf(s),
        -QUAD_HALF_WIDTH,
        QUAD_HALF_WIDTH,
        &breaks,
        QUAD_TOL,
    )?;
    Ok(cross / factorial(m))
}

/// A transform together with its law, Hermite rank and `sigma_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteProfile {
    transform: Transform,
    rank: usize,
    detection: Option<RankDetection>,
    sigma_m: f64,
}

impl HermiteProfile {
    /// Detects the rank on the default quantile probe grid.
    pub fn new(transform: Transform) -> Result<Self> {
        let grid = quantile_grid(&transform, RANK_PROBE_POINTS)?;
        let detection = detect_rank(&transform, &grid, MAX_DEGREE, DEFAULT_RANK_TOL)?;
        let sigma_m = sigma_m(&transform, detection.rank)?;
        Ok(Self {
            transform,
            rank: detection.rank,
            detection: Some(detection),
            sigma_m,
        })
    }

    /// Uses a caller-supplied rank instead of detecting it.
    pub fn with_rank(transform: Transform, rank: usize) -> Result<Self> {
        if rank == 0 {
            return Err(Error::InvalidParameter("Hermite rank must be >= 1".into()));
        }
        if rank > MAX_DEGREE {
            return Err(Error::RankTooLarge(rank));
        }
        let sigma_m = sigma_m(&transform, rank)?;
        Ok(Self {
            transform,
            rank,
            detection: None,
            sigma_m,
        })
    }

    pub fn transform(&self) -> &Transform {
        &self.transform
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn detection(&self) -> Option<&RankDetection> {
        self.detection.as_ref()
    }

    pub fn sigma_m(&self) -> f64 {
        self.sigma_m
    }

    pub fn cdf(&self, x: f64) -> f64 {
        true_cdf(&self.transform, x)
    }

    pub fn coeff(&self, q: usize, x: f64) -> Result<f64> {
        hermite_coeff(&self.transform, q, x)
    }

    /// `J_m(x)` at the profile's rank.
    pub fn jm(&self, x: f64) -> f64 {
        hermite_coeff(&self.transform, self.rank, x).expect("rank validated at construction")
    }

    pub fn quantile(&self, u: f64) -> Result<f64> {
        quantile(&self.transform, u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn hermite_values() {
        assert_eq!(hermite_eval(2, 1.0).unwrap(), 0.0);
        assert_eq!(hermite_eval(3, 2.0).unwrap(), 2.0);
        assert_eq!(hermite_eval(4, 0.0).unwrap(), 3.0);
        assert_eq!(hermite_eval(0, 7.0).unwrap(), 1.0);
        assert!(matches!(hermite_eval(31, 0.0), Err(Error::RankTooLarge(31))));
    }

    #[test]
    fn zeros_of_hermite_polynomials() {
        let z = hermite_zeros(2);
        assert_abs_diff_eq!(z[0], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(z[1], 1.0, epsilon = 1e-12);
        let z = hermite_zeros(3);
        assert_abs_diff_eq!(z[1], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(z[2], 3f64.sqrt(), epsilon = 1e-12);
        for q in [5usize, 12, 29] {
            let z = hermite_zeros(q);
            assert_eq!(z.len(), q);
            assert!(z.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn cdf_examples() {
        assert_abs_diff_eq!(true_cdf(&Transform::Identity, 0.0), 0.5, epsilon = 1e-15);
        assert_eq!(true_cdf(&Transform::Square, -0.5), 0.0);
        assert_abs_diff_eq!(true_cdf(&Transform::Square, 1.0), 0.682689492137, epsilon = 1e-10);
        assert_abs_diff_eq!(true_cdf(&Transform::Abs, 1.0), 0.682689492137, epsilon = 1e-10);
        assert_eq!(true_cdf(&Transform::Hermite(2), f64::INFINITY), 1.0);
        assert_eq!(true_cdf(&Transform::Hermite(2), f64::NEG_INFINITY), 0.0);
        // H_2 = s^2 - 1 >= -1
        assert_eq!(true_cdf(&Transform::Hermite(2), -1.5), 0.0);
    }

    #[test]
    fn coefficient_examples() {
        let j = hermite_coeff(&Transform::Identity, 1, 0.0).unwrap();
        assert_abs_diff_eq!(j, -0.398942280401, epsilon = 1e-10);
        for x in [-1.0, 0.3, 2.0] {
            assert_abs_diff_eq!(hermite_coeff(&Transform::Square, 1, x).unwrap(), 0.0, epsilon = 1e-14);
        }
        assert!(hermite_coeff(&Transform::Identity, 1, 12.0).unwrap().abs() < 1e-20);
        assert_eq!(hermite_coeff(&Transform::Identity, 3, f64::INFINITY).unwrap(), 0.0);
    }

    #[test]
    fn rank_detection() {
        for (t, expect) in [
            (Transform::Identity, 1),
            (Transform::Square, 2),
            (Transform::Abs, 2),
            (Transform::Hermite(2), 2),
            (Transform::Hermite(3), 1),
        ] {
            let grid = quantile_grid(&t, RANK_PROBE_POINTS).unwrap();
            let det = detect_rank(&t, &grid, 30, DEFAULT_RANK_TOL).unwrap();
            assert_eq!(det.rank, expect, "{t}");
            assert!(!det.is_marginal());
        }
        let constant = Transform::Custom(PiecewiseTable::new(vec![(0.0, 1.0)]).unwrap());
        let grid = [0.0, 1.0, 2.0];
        assert!(matches!(
            detect_rank(&constant, &grid, 5, 1e-6),
            Err(Error::RankNotFound { .. })
        ));
        assert!(detect_rank(&Transform::Identity, &[], 5, 1e-6).is_err());
    }

    #[test]
    fn sigma_values() {
        assert_abs_diff_eq!(sigma_m(&Transform::Identity, 1).unwrap(), 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(sigma_m(&Transform::Hermite(2), 2).unwrap(), 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(sigma_m(&Transform::Square, 1).unwrap(), 0.0, epsilon = 1e-12);
        // E[|X| (X^2 - 1)] / 2 = (2 sqrt(2/pi) - sqrt(2/pi)) / 2
        let abs2 = (2.0 / PI).sqrt() / 2.0;
        assert_abs_diff_eq!(sigma_m(&Transform::Abs, 2).unwrap(), abs2, epsilon = 1e-10);
    }

    #[test]
    fn transform_keywords_round_trip() {
        for s in ["identity", "square", "abs", "hermite:2", "table:-1/0,0/0.5,2/3"] {
            let t: Transform = s.parse().unwrap();
            assert_eq!(t.to_string().parse::<Transform>().unwrap(), t);
        }
        assert!("hermite:0".parse::<Transform>().is_err());
        assert!("hermite:40".parse::<Transform>().is_err());
        assert!("cube".parse::<Transform>().is_err());
        assert!("table:1/0,0/1".parse::<Transform>().is_err());
    }

    #[test]
    fn custom_table_sublevel() {
        let t: Transform = "table:-1/0,0/1,1/0".parse().unwrap();
        // tent: G <= 0.5 on (-inf, -0.5] and [0.5, inf)
        let iv = t.sublevel_intervals(0.5);
        assert_eq!(iv.len(), 2);
        assert_abs_diff_eq!(iv[0].1, -0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(iv[1].0, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(true_cdf(&t, 0.5), 2.0 * std_normal_cdf(-0.5), epsilon = 1e-12);
        assert_eq!(true_cdf(&t, 1.0), 1.0);
        assert_abs_diff_eq!(true_cdf(&t, 0.0), 2.0 * std_normal_cdf(-1.0), epsilon = 1e-12);
    }

    #[test]
    fn quantiles_invert_cdf() {
        for t in [Transform::Identity, Transform::Square, Transform::Hermite(2), Transform::Hermite(3)] {
            for u in [0.01, 0.3, 0.5, 0.7, 0.99] {
                let x = quantile(&t, u).unwrap();
                assert_abs_diff_eq!(true_cdf(&t, x), u, epsilon = 1e-9);
            }
        }
        assert_abs_diff_eq!(quantile(&Transform::Identity, 0.5).unwrap(), 0.0, epsilon = 1e-12);
    }
}
