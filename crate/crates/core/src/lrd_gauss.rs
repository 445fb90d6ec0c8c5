//! Long-memory correlation models and exact stationary Gaussian paths.
//!
//! Paths are generated by circulant embedding: the autocorrelation
//! `(rho(0), .., rho(n-1))` is extended to an even sequence of length
//! `2(n-1)`, whose DFT gives the eigenvalues of the embedding circulant.
//! When all eigenvalues are nonnegative the first `n` coordinates of the
//! synthesised circulant process have exactly the target covariance.

use std::fmt;
use std::sync::Arc;

use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{keyed_stream, DOMAIN_PATH};

/// Eigenvalues below this are treated as a failed embedding.
pub const EIGEN_TOL: f64 = 1e-9;

/// Parametric correlation family with `rho(k) ~ c k^{-D}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Family {
    /// Fractional Gaussian noise with Hurst parameter in (1/2, 1); `D = 2 - 2 hurst`.
    Fgn { hurst: f64 },
    /// `rho(k) = (1 + k)^{-D}`.
    Poly { d: f64 },
}

/// A validated correlation model. Construct with [`CovarianceModel::new`],
/// [`CovarianceModel::fgn`] or [`CovarianceModel::poly`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Family", into = "Family")]
pub struct CovarianceModel {
    family: Family,
}

impl TryFrom<Family> for CovarianceModel {
    type Error = Error;

    fn try_from(family: Family) -> Result<Self> {
        CovarianceModel::new(family)
    }
}

impl From<CovarianceModel> for Family {
    fn from(m: CovarianceModel) -> Self {
        m.family
    }
}

impl fmt::Display for CovarianceModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            Family::Fgn { hurst } => write!(f, "fgn(hurst={hurst})"),
            Family::Poly { d } => write!(f, "poly(D={d})"),
        }
    }
}

impl CovarianceModel {
    pub fn new(family: Family) -> Result<Self> {
        match family {
            Family::Fgn { hurst } if !(hurst > 0.5 && hurst < 1.0) => Err(Error::InvalidParameter(
                format!("fgn hurst must lie in (1/2, 1), got {hurst}"),
            )),
            Family::Poly { d } if !(d > 0.0 && d < 1.0) => Err(Error::InvalidParameter(format!(
                "poly decay exponent must lie in (0, 1), got {d}"
            ))),
            _ => Ok(Self { family }),
        }
    }

    pub fn fgn(hurst: f64) -> Result<Self> {
        Self::new(Family::Fgn { hurst })
    }

    pub fn poly(d: f64) -> Result<Self> {
        Self::new(Family::Poly { d })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// The decay exponent `D` in `rho(k) ~ c k^{-D}`.
    pub fn d_exp(&self) -> f64 {
        match self.family {
            Family::Fgn { hurst } => 2.0 - 2.0 * hurst,
            Family::Poly { d } => d,
        }
    }

    /// Limit of `rho(k) k^D` as `k` grows.
    pub fn asymptotic_constant(&self) -> f64 {
        match self.family {
            Family::Fgn { hurst } => hurst * (2.0 * hurst - 1.0),
            Family::Poly { .. } => 1.0,
        }
    }

    pub fn autocovariance(&self, lag: usize) -> f64 {
        autocovariance(self, lag)
    }
}

/// Correlation at `lag`. Unit variance at lag 0.
pub fn autocovariance(model: &CovarianceModel, lag: usize) -> f64 {
    if lag == 0 {
        return 1.0;
    }
    let k = lag as f64;
    match model.family {
        Family::Poly { d } => (1.0 + k).powf(-d),
        Family::Fgn { hurst } => {
            let two_h = 2.0 * hurst;
            if lag < 64 {
                0.5 * ((k + 1.0).powf(two_h) - 2.0 * k.powf(two_h) + (k - 1.0).powf(two_h))
            } else {
                // Second difference expanded in 1/k; the direct form cancels badly.
                // 0.5 k^{2H} [(1+1/k)^{2H} - 2 + (1-1/k)^{2H}] = k^{2H} sum_{j even} C(2H, j) k^{-j}
                let inv = 1.0 / k;
                let mut binom = 1.0;
                let mut sum = 0.0;
                let mut pow = 1.0;
                for j in 1..=40usize {
                    binom *= (two_h - (j as f64 - 1.0)) / j as f64;
                    pow *= inv;
                    if j % 2 == 0 {
                        let term = binom * pow;
                        sum += term;
                        if term.abs() < 1e-18 * sum.abs() {
                            break;
                        }
                    }
                }
                k.powf(two_h) * sum
            }
        }
    }
}

/// Spectrum of the circulant that embeds `(rho(0), .., rho(n-1))`, length `2(n-1)`.
pub fn circulant_eigenvalues(model: &CovarianceModel, n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "circulant embedding needs n >= 2, got {n}"
        )));
    }
    let size = 2 * (n - 1);
    let mut buf: Vec<Complex64> = (0..size)
        .map(|j| {
            let lag = if j < n { j } else { size - j };
            Complex64::new(autocovariance(model, lag), 0.0)
        })
        .collect();
    FftPlanner::new().plan_fft_forward(size).process(&mut buf);
    let eig: Vec<f64> = buf.iter().map(|c| c.re).collect();
    if let Some((index, &eigenvalue)) = eig.iter().enumerate().find(|(_, &v)| v < -EIGEN_TOL) {
        return Err(Error::EmbeddingNotPsd {
            n,
            index,
            eigenvalue,
        });
    }
    Ok(eig)
}

/// A realisation `X_1, .., X_n` of the stationary Gaussian process.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianPath {
    pub values: Vec<f64>,
    pub model: CovarianceModel,
    pub seed: u64,
}

impl GaussianPath {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Reusable generator for paths of a fixed length: the spectrum and FFT plan
/// are computed once.
#[derive(Clone)]
pub struct PathSimulator {
    model: CovarianceModel,
    n: usize,
    // sqrt(lambda_k / M) for k = 0..=M/2
    scale: Vec<f64>,
    fft: Option<Arc<dyn Fft<f64>>>,
}

impl fmt::Debug for PathSimulator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PathSimulator")
            .field("model", &self.model)
            .field("n", &self.n)
            .finish()
    }
}

impl PathSimulator {
    pub fn new(model: CovarianceModel, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("path length must be >= 1".into()));
        }
        if n == 1 {
            return Ok(Self {
                model,
                n,
                scale: vec![1.0],
                fft: None,
            });
        }
        let eig = circulant_eigenvalues(&model, n)?;
        let size = eig.len();
        let scale = eig[..=size / 2]
            .iter()
            .map(|&v| (v.max(0.0) / size as f64).sqrt())
            .collect();
        let fft = FftPlanner::new().plan_fft_forward(size);
        Ok(Self {
            model,
            n,
            scale,
            fft: Some(fft),
        })
    }

    pub fn model(&self) -> &CovarianceModel {
        &self.model
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn simulate(&self, seed: u64) -> GaussianPath {
        let mut rng = keyed_stream(seed, DOMAIN_PATH, 0);
        let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };
        let values = match &self.fft {
            None => vec![normal()],
            Some(fft) => {
                let size = 2 * (self.n - 1);
                let half = size / 2;
                let mut w = vec![Complex64::new(0.0, 0.0); size];
                w[0] = Complex64::new(self.scale[0] * normal(), 0.0);
                for k in 1..half {
                    let s = self.scale[k] * std::f64::consts::FRAC_1_SQRT_2;
                    let z = Complex64::new(s * normal(), s * normal());
                    w[k] = z;
                    w[size - k] = z.conj();
                }
                w[half] = Complex64::new(self.scale[half] * normal(), 0.0);
                fft.process(&mut w);
                w[..self.n].iter().map(|c| c.re).collect()
            }
        };
        GaussianPath {
            values,
            model: self.model,
            seed,
        }
    }
}

/// Exact draw of `X_1..X_n` with covariance `rho(|i-j|)`, deterministic in `seed`.
pub fn simulate_path(model: &CovarianceModel, n: usize, seed: u64) -> Result<GaussianPath> {
    Ok(PathSimulator::new(*model, n)?.simulate(seed))
}
