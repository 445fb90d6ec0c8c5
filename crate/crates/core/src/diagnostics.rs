use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermite::std_normal_cdf;

/// Minimum sample length accepted by [`normality_diagnostics`].
pub const MIN_DIAGNOSTIC_LEN: usize = 8;

/// Moment and Kolmogorov–Smirnov screens against the standard normal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsSummary {
    pub count: usize,
    pub mean: f64,
    pub sd: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    /// KS distance of the studentized sample to `N(0, 1)`.
    pub ks: f64,
}

impl DiagnosticsSummary {
    /// `|skew| < skew_max`, `|exkurt| < kurt_max` and `ks < ks_max`.
    pub fn passes(&self, skew_max: f64, kurt_max: f64, ks_max: f64) -> bool {
        self.skewness.abs() < skew_max && self.excess_kurtosis.abs() < kurt_max && self.ks < ks_max
    }
}

pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Centres and scales by the sample mean and standard deviation.
pub fn studentize(values: &[f64]) -> Result<Vec<f64>> {
    if values.len() < 2 {
        return Err(Error::DegenerateSample);
    }
    let (mean, sd) = mean_sd(values);
    if !(sd > 0.0) || !sd.is_finite() {
        return Err(Error::DegenerateSample);
    }
    Ok(values.iter().map(|v| (v - mean) / sd).collect())
}

pub fn normality_diagnostics(values: &[f64]) -> Result<DiagnosticsSummary> {
    if values.len() < MIN_DIAGNOSTIC_LEN {
        return Err(Error::InvalidParameter(format!(
            "normality diagnostics need at least {MIN_DIAGNOSTIC_LEN} values, got {}",
            values.len()
        )));
    }
    let (mean, sd) = mean_sd(values);
    let mut z = studentize(values)?;
    let n = z.len() as f64;
    let zm = z.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for v in &z {
        let d = v - zm;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    let skewness = m3 / m2.powf(1.5);
    let excess_kurtosis = m4 / (m2 * m2) - 3.0;

    z.sort_by(|a, b| a.total_cmp(b));
    let ks = z
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let cdf = std_normal_cdf(v);
            ((i + 1) as f64 / n - cdf).max(cdf - i as f64 / n)
        })
        .fold(0.0, f64::max);

    Ok(DiagnosticsSummary {
        count: values.len(),
        mean,
        sd,
        skewness,
        excess_kurtosis,
        ks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::keyed_stream;
    use approx::assert_abs_diff_eq;
    use rand_distr::{Distribution, Exp1, StandardNormal};

    #[test]
    fn standard_normal_sample_passes() {
        let mut rng = keyed_stream(1, 0, 0);
        let v: Vec<f64> = (0..10_000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let d = normality_diagnostics(&v).unwrap();
        assert!(d.skewness.abs() < 0.08, "{d:?}");
        assert!(d.excess_kurtosis.abs() < 0.15, "{d:?}");
        assert!(d.ks < 0.02, "{d:?}");
        assert!(d.passes(0.08, 0.15, 0.02));
    }

    #[test]
    fn exponential_sample_fails() {
        let mut rng = keyed_stream(2, 0, 0);
        let v: Vec<f64> = (0..10_000).map(|_| Exp1.sample(&mut rng)).collect();
        let d = normality_diagnostics(&v).unwrap();
        assert!(d.skewness > 1.5);
        assert!(!d.passes(0.2, 0.4, 0.05));
    }

    #[test]
    fn constant_and_short_inputs() {
        assert!(matches!(normality_diagnostics(&[2.0; 20]), Err(Error::DegenerateSample)));
        assert!(normality_diagnostics(&[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn reflection_symmetry() {
        let mut rng = keyed_stream(3, 0, 0);
        let v: Vec<f64> = (0..500).map(|_| Exp1.sample(&mut rng)).collect();
        let neg: Vec<f64> = v.iter().map(|x| -x).collect();
        let a = normality_diagnostics(&v).unwrap();
        let b = normality_diagnostics(&neg).unwrap();
        assert_abs_diff_eq!(a.skewness.abs(), b.skewness.abs(), epsilon = 1e-12);
        assert_abs_diff_eq!(a.excess_kurtosis, b.excess_kurtosis, epsilon = 1e-12);
        assert!((0.0..=1.0).contains(&a.ks));
    }

    #[test]
    fn ks_of_perfect_quantiles_is_small() {
        let n = 1000;
        // midpoint quantiles have KS distance 1/(2n) before studentizing
        let v: Vec<f64> = (0..n)
            .map(|i| crate::hermite::quantile(&crate::hermite::Transform::Identity, (i as f64 + 0.5) / n as f64).unwrap())
            .collect();
        let d = normality_diagnostics(&v).unwrap();
        assert!(d.ks < 0.005, "{d:?}");
    }
}
