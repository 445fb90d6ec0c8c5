use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::hermite::{Transform, MAX_DEGREE};
use crate::lrd_gauss::CovarianceModel;

/// Presets keep `l <= n^GROWTH_EXPONENT` unless `allow_long_blocks` is set.
pub const GROWTH_EXPONENT: f64 = 0.9;
pub const DEFAULT_REPLICATES: usize = 500;
pub const DEFAULT_SERIES: usize = 200;

/// Block length as a function of `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum BlockRule {
    Fixed(usize),
    /// `l = floor(n^beta)`, `beta` in (0, 1).
    Power(f64),
}

impl Default for BlockRule {
    fn default() -> Self {
        BlockRule::Power(0.5)
    }
}

impl BlockRule {
    pub fn block_length(&self, n: usize) -> usize {
        match *self {
            BlockRule::Fixed(l) => l,
            BlockRule::Power(beta) => ((n as f64).powf(beta).floor() as usize).max(1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum BlockCountRule {
    /// `p = floor(n / l)`.
    #[default]
    Default,
    Fixed(usize),
}

impl BlockCountRule {
    pub fn block_count(&self, n: usize, l: usize) -> usize {
        match *self {
            BlockCountRule::Default => n / l,
            BlockCountRule::Fixed(p) => p,
        }
    }
}

/// Estimation grid: `points` quantiles of `F` equispaced on `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default = "GridSpec::default_lo")]
    pub lo: f64,
    #[serde(default = "GridSpec::default_hi")]
    pub hi: f64,
    #[serde(default = "GridSpec::default_points")]
    pub points: usize,
}

impl GridSpec {
    fn default_lo() -> f64 {
        0.01
    }
    fn default_hi() -> f64 {
        0.99
    }
    fn default_points() -> usize {
        101
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            lo: Self::default_lo(),
            hi: Self::default_hi(),
            points: Self::default_points(),
        }
    }
}

fn default_replicates() -> usize {
    DEFAULT_REPLICATES
}

fn default_series() -> usize {
    DEFAULT_SERIES
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: CovarianceModel,
    pub transform: Transform,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_override: Option<usize>,
    pub n: Vec<usize>,
    #[serde(default)]
    pub l_rule: BlockRule,
    #[serde(default)]
    pub p_rule: BlockCountRule,
    /// Bootstrap replicates per series.
    #[serde(rename = "A", default = "default_replicates")]
    pub replicates: usize,
    /// Independent series per sample size.
    #[serde(rename = "R", default = "default_series")]
    pub series: usize,
    #[serde(default)]
    pub grid: GridSpec,
    /// Quantile level of the probe point `x0`; defaults to 0.5 for rank 1 and 0.7 otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe_quantile: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default, skip_serializing_if = "is_false")]
    pub allow_long_blocks: bool,
    /// One-column CSV of observations for `estimate-jm`. The transform then
    /// only supplies the reference law `F`, and `m_override` is required.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data_path: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n.is_empty() {
            return Err(ConfigError::new("n", "at least one sample size is required"));
        }
        if let BlockRule::Power(beta) = self.l_rule {
            if !(beta > 0.0 && beta < 1.0) {
                return Err(ConfigError::new(
                    "l_rule.power",
                    format!("exponent must lie in (0, 1), got {beta}"),
                ));
            }
        }
        if let BlockRule::Fixed(0) = self.l_rule {
            return Err(ConfigError::new("l_rule.fixed", "block length must be >= 1"));
        }
        if let BlockCountRule::Fixed(0) = self.p_rule {
            return Err(ConfigError::new("p_rule.fixed", "block count must be >= 1"));
        }
        for (i, &n) in self.n.iter().enumerate() {
            let path = format!("n[{i}]");
            if n < 2 {
                return Err(ConfigError::new(path, format!("sample size must be >= 2, got {n}")));
            }
            let l = self.l_rule.block_length(n);
            if l > n {
                return Err(ConfigError::new("l_rule", format!("block length {l} exceeds n = {n}")));
            }
            if !self.allow_long_blocks && l as f64 > (n as f64).powf(GROWTH_EXPONENT) {
                return Err(ConfigError::new(
                    "l_rule",
                    format!(
                        "block length {l} exceeds n^{GROWTH_EXPONENT} for n = {n} (set allow_long_blocks to override)"
                    ),
                ));
            }
            if self.p_rule.block_count(n, l) == 0 {
                return Err(ConfigError::new("p_rule", format!("no complete block fits n = {n}")));
            }
        }
        if self.replicates == 0 {
            return Err(ConfigError::new("A", "replicate count must be >= 1"));
        }
        if self.series == 0 {
            return Err(ConfigError::new("R", "series count must be >= 1"));
        }
        let g = &self.grid;
        if !(g.lo > 0.0 && g.lo <= g.hi && g.hi < 1.0) {
            return Err(ConfigError::new("grid", format!("need 0 < lo <= hi < 1, got [{}, {}]", g.lo, g.hi)));
        }
        if g.points == 0 {
            return Err(ConfigError::new("grid.points", "must be >= 1"));
        }
        if let Some(u) = self.probe_quantile {
            if !(u > 0.0 && u < 1.0) {
                return Err(ConfigError::new("probe_quantile", format!("must lie in (0, 1), got {u}")));
            }
        }
        if let Some(m) = self.m_override {
            if m == 0 || m > MAX_DEGREE {
                return Err(ConfigError::new("m_override", format!("must lie in 1..={MAX_DEGREE}, got {m}")));
            }
        }
        if self.data_path.is_some() && self.m_override.is_none() {
            return Err(ConfigError::new(
                "m_override",
                "required with data_path: the rank cannot be detected from observations",
            ));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }
}

/// Parses and validates a JSON config document. Unknown keys are rejected.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let config: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." { "<document>".to_string() } else { path };
        ConfigError::new(path, e.inner().to_string())
    })?;
    config.validate()?;
    Ok(config)
}

/// A named built-in scenario.
#[derive(Debug, Clone)]
pub struct Preset {
    pub name: &'static str,
    pub summary: &'static str,
    pub config: ExperimentConfig,
}

fn base(model: CovarianceModel, transform: Transform, n: Vec<usize>) -> ExperimentConfig {
    ExperimentConfig {
        model,
        transform,
        m_override: None,
        n,
        l_rule: BlockRule::Fixed(64),
        p_rule: BlockCountRule::Default,
        replicates: DEFAULT_REPLICATES,
        series: 20,
        grid: GridSpec::default(),
        probe_quantile: None,
        out_dir: None,
        master_seed: 1,
        allow_long_blocks: false,
        data_path: None,
    }
}

pub fn presets() -> Vec<Preset> {
    let poly = CovarianceModel::poly(0.3).expect("valid preset model");
    vec![
        Preset {
            name: "identity-m1",
            summary: "poly D=0.3, G(x)=x (rank 1), n in {2048, 8192}, l=64, A=500, R=20",
            config: base(poly, Transform::Identity, vec![2048, 8192]),
        },
        Preset {
            name: "hermite2-m2",
            summary: "poly D=0.3, G=H_2 (rank 2), n in {2048, 8192}, l=64, A=500, R=20",
            config: base(poly, Transform::Hermite(2), vec![2048, 8192]),
        },
        Preset {
            name: "smoke",
            summary: "pipeline liveness: n=64, l=4, A=1, R=1",
            config: ExperimentConfig {
                l_rule: BlockRule::Fixed(4),
                replicates: 1,
                series: 1,
                ..base(poly, Transform::Identity, vec![64])
            },
        },
    ]
}

pub fn preset(name: &str) -> Option<ExperimentConfig> {
    presets().into_iter().find(|p| p.name == name).map(|p| p.config)
}
