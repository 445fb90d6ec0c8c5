use crate::error::{Error, Result};
use crate::hermite::Transform;
use crate::lrd_gauss::{CovarianceModel, GaussianPath};

/// Observed series `Y_i = G(X_i)`, with the latent Gaussian path when it is known.
#[derive(Debug, Clone, PartialEq)]
pub struct SubordinatedSample {
    latent: Option<GaussianPath>,
    y: Vec<f64>,
    model: CovarianceModel,
}

impl SubordinatedSample {
    pub fn from_path(path: GaussianPath, transform: &Transform) -> Self {
        let y = path.values.iter().map(|&s| transform.eval(s)).collect();
        let model = path.model;
        Self {
            latent: Some(path),
            y,
            model,
        }
    }

    /// A series whose latent path is unknown. `model` supplies the decay
    /// exponent used for normalisation.
    pub fn observed(y: Vec<f64>, model: CovarianceModel) -> Result<Self> {
        if y.is_empty() {
            return Err(Error::InvalidParameter("sample is empty".into()));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("sample contains non-finite values".into()));
        }
        Ok(Self {
            latent: None,
            y,
            model,
        })
    }

    /// The first `n` observations, keeping the latent prefix.
    pub fn prefix(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.len() {
            return Err(Error::InvalidParameter(format!(
                "prefix length {n} outside 1..={}",
                self.len()
            )));
        }
        Ok(Self {
            latent: self.latent.as_ref().map(|p| GaussianPath {
                values: p.values[..n].to_vec(),
                model: p.model,
                seed: p.seed,
            }),
            y: self.y[..n].to_vec(),
            model: self.model,
        })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn x(&self) -> Result<&[f64]> {
        self.latent
            .as_ref()
            .map(|p| p.values.as_slice())
            .ok_or(Error::MissingLatent)
    }

    pub fn latent(&self) -> Option<&GaussianPath> {
        self.latent.as_ref()
    }

    pub fn model(&self) -> &CovarianceModel {
        &self.model
    }

    pub fn seed(&self) -> Option<u64> {
        self.latent.as_ref().map(|p| p.seed)
    }
}
