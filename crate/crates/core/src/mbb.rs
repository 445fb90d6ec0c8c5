//! Moving block bootstrap.
//!
//! A replicate concatenates `p` blocks `(Y_s, .., Y_{s+l-1})` whose starts are
//! i.i.d. uniform over the `n - l + 1` available positions. All centring is by
//! the conditional block expectations `F~_{n,l}` and `mu~_{n,l}`, which weight
//! observation `j` by the number of blocks covering it.
//!
//! [`BlockBootstrap`] precomputes every block sum once, so a replicate costs
//! `O(p)` per grid point. The free functions are convenience wrappers that
//! build one for a single evaluation.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::empirical::{cdf_at, jm_at, normalizer_dn, Grid, GridPoint, Label, ProcessEvaluation};
use crate::error::{Error, Result};
use crate::hermite::{factorial, hermite_unchecked, HermiteProfile};
use crate::rng::{keyed_stream, DOMAIN_BLOCKS};
use crate::sample::SubordinatedSample;

/// Block length, block count, replicate count and seed of a bootstrap run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BootstrapPlan {
    pub n: usize,
    pub l: usize,
    pub p: usize,
    pub replicates: usize,
    pub master_seed: u64,
}

impl BootstrapPlan {
    /// `p = None` selects the usual `floor(n / l)`.
    pub fn new(n: usize, l: usize, p: Option<usize>, replicates: usize, master_seed: u64) -> Result<Self> {
        if l == 0 || l > n {
            return Err(Error::InvalidParameter(format!("block length {l} outside 1..={n}")));
        }
        let p = p.unwrap_or(n / l);
        if p == 0 {
            return Err(Error::InvalidParameter("number of blocks must be >= 1".into()));
        }
        if replicates == 0 {
            return Err(Error::InvalidParameter("replicate count must be >= 1".into()));
        }
        Ok(Self {
            n,
            l,
            p,
            replicates,
            master_seed,
        })
    }

    pub fn block_count(&self) -> usize {
        self.n - self.l + 1
    }

    /// Checks `l <= n^exponent`, the growth restriction used by presets.
    pub fn check_growth(&self, exponent: f64) -> Result<()> {
        let cap = (self.n as f64).powf(exponent);
        if self.l as f64 > cap {
            return Err(Error::InvalidParameter(format!(
                "block length {} exceeds n^{exponent} = {cap:.1} for n = {}",
                self.l, self.n
            )));
        }
        Ok(())
    }
}

/// Block starts of one replicate, 0-based (`0..=n-l`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BootstrapReplicate {
    pub id: u64,
    pub starts: Vec<usize>,
    pub l: usize,
}

impl BootstrapReplicate {
    /// The resampled index sequence of length `p * l`.
    pub fn expanded(&self) -> Vec<usize> {
        self.starts.iter().flat_map(|&s| s..s + self.l).collect()
    }
}

pub fn draw_replicate(plan: &BootstrapPlan, replicate_id: u64) -> Result<BootstrapReplicate> {
    if replicate_id >= plan.replicates as u64 {
        return Err(Error::InvalidParameter(format!(
            "replicate id {replicate_id} outside 0..{}",
            plan.replicates
        )));
    }
    Ok(draw_starts(plan.master_seed, replicate_id, plan.block_count(), plan.p, plan.l))
}

fn draw_starts(seed: u64, replicate_id: u64, blocks: usize, p: usize, l: usize) -> BootstrapReplicate {
    let mut rng = keyed_stream(seed, DOMAIN_BLOCKS, replicate_id);
    let starts = (0..p).map(|_| rng.random_range(0..blocks)).collect();
    BootstrapReplicate {
        id: replicate_id,
        starts,
        l,
    }
}

/// Number of blocks covering each observation, `a_{n,j}` for `j = 1..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeWeights {
    pub a: Vec<usize>,
    pub l: usize,
}

impl EdgeWeights {
    pub fn new(n: usize, l: usize) -> Result<Self> {
        if l == 0 || l > n {
            return Err(Error::InvalidParameter(format!("block length {l} outside 1..={n}")));
        }
        let blocks = n - l + 1;
        let a = (1..=n).map(|j| j.min(l).min(blocks).min(n - j + 1)).collect();
        Ok(Self { a, l })
    }

    /// `l (n - l + 1)`, the sum of all weights.
    pub fn total(&self) -> usize {
        self.l * (self.a.len() - self.l + 1)
    }
}

fn weighted_mean(weights: &EdgeWeights, values: impl Iterator<Item = f64>) -> f64 {
    let sum: f64 = weights.a.iter().zip(values).map(|(&w, v)| w as f64 * v).sum();
    sum / weights.total() as f64
}

/// `F~_{n,l}(x)`: the bootstrap expectation of the block-average indicator.
pub fn tilde_f(sample: &SubordinatedSample, l: usize, grid: &Grid) -> Result<ProcessEvaluation> {
    let weights = EdgeWeights::new(sample.len(), l)?;
    let mut pairs: Vec<(f64, usize)> = sample.y().iter().copied().zip(weights.a.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut cum = Vec::with_capacity(pairs.len() + 1);
    cum.push(0usize);
    for &(_, w) in &pairs {
        cum.push(cum.last().unwrap() + w);
    }
    let total = weights.total() as f64;
    let values = grid
        .points()
        .iter()
        .map(|p| match p {
            GridPoint::NegInf => 0.0,
            GridPoint::PosInf => 1.0,
            GridPoint::Finite(x) => cum[pairs.partition_point(|(v, _)| v <= x)] as f64 / total,
        })
        .collect();
    Ok(ProcessEvaluation {
        grid: grid.clone(),
        values,
        label: Label::TildeF,
    })
}

/// `mu~_{n,l}(H_m)`: the bootstrap expectation of the block-average of `H_m(X*)`.
pub fn tilde_mu(sample: &SubordinatedSample, l: usize, m: usize) -> Result<f64> {
    let weights = EdgeWeights::new(sample.len(), l)?;
    let x = sample.x()?;
    Ok(weighted_mean(&weights, x.iter().map(|&s| hermite_unchecked(m, s))))
}

/// Either a single point or an increment `(x, y]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Probe {
    Point(f64),
    Increment(f64, f64),
}

/// Bootstrap statistics of one sample, reusable across replicates.
#[derive(Debug, Clone)]
pub struct BlockBootstrap {
    n: usize,
    l: usize,
    grid: Grid,
    // block_counts[s * width + g] = #{j in block s : Y_j <= x_g}
    block_counts: Vec<u32>,
    // sum of H_m(X_j) over block s
    block_hermite: Option<Vec<f64>>,
    tilde_f: Vec<f64>,
    tilde_mu: Option<f64>,
    // J_m(x_g) / m!
    leading: Vec<f64>,
    d_l: f64,
    m: usize,
}

impl BlockBootstrap {
    pub fn new(sample: &SubordinatedSample, profile: &HermiteProfile, l: usize, grid: &Grid) -> Result<Self> {
        let n = sample.len();
        let weights = EdgeWeights::new(n, l)?;
        let m = profile.rank();
        let d_l = normalizer_dn(sample.model(), m, l)?;
        let blocks = n - l + 1;
        let width = grid.len();
        let y = sample.y();

        let mut block_counts = vec![0u32; blocks * width];
        let mut prefix = vec![0u32; n + 1];
        for (g, point) in grid.points().iter().enumerate() {
            match point {
                GridPoint::NegInf => continue,
                GridPoint::PosInf => {
                    for s in 0..blocks {
                        block_counts[s * width + g] = l as u32;
                    }
                }
                GridPoint::Finite(x) => {
                    for (j, v) in y.iter().enumerate() {
                        prefix[j + 1] = prefix[j] + u32::from(*v <= *x);
                    }
                    for s in 0..blocks {
                        block_counts[s * width + g] = prefix[s + l] - prefix[s];
                    }
                }
            }
        }

        let total = weights.total() as f64;
        let mut tilde_f = vec![0.0; width];
        for (g, slot) in tilde_f.iter_mut().enumerate() {
            let sum: u64 = (0..blocks).map(|s| block_counts[s * width + g] as u64).sum();
            *slot = sum as f64 / total;
        }

        let (block_hermite, tilde_mu) = match sample.x() {
            Ok(x) => {
                let h: Vec<f64> = x.iter().map(|&s| hermite_unchecked(m, s)).collect();
                // Sliding sums, re-anchored every 256 blocks to bound rounding drift.
                let mut sums = Vec::with_capacity(blocks);
                for s in 0..blocks {
                    let v = if s % 256 == 0 {
                        h[s..s + l].iter().sum()
                    } else {
                        sums[s - 1] + h[s + l - 1] - h[s - 1]
                    };
                    sums.push(v);
                }
                let mu = weighted_mean(&weights, h.iter().copied());
                (Some(sums), Some(mu))
            }
            Err(_) => (None, None),
        };

        let m_fact = factorial(m);
        let leading = grid.points().iter().map(|&p| jm_at(profile, p) / m_fact).collect();

        Ok(Self {
            n,
            l,
            grid: grid.clone(),
            block_counts,
            block_hermite,
            tilde_f,
            tilde_mu,
            leading,
            d_l,
            m,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn d_l(&self) -> f64 {
        self.d_l
    }

    pub fn block_count(&self) -> usize {
        self.n - self.l + 1
    }

    pub fn tilde_f(&self) -> &[f64] {
        &self.tilde_f
    }

    pub fn tilde_mu(&self) -> Result<f64> {
        self.tilde_mu.ok_or(Error::MissingLatent)
    }

    fn width(&self) -> usize {
        self.grid.len()
    }

    fn hermite_blocks(&self) -> Result<&[f64]> {
        self.block_hermite.as_deref().ok_or(Error::MissingLatent)
    }

    fn scale(&self, p: usize) -> f64 {
        1.0 / ((p as f64).sqrt() * self.d_l)
    }

    /// Draws replicate `id` with `p` blocks from the stream keyed by `seed`.
    pub fn draw(&self, seed: u64, id: u64, p: usize) -> BootstrapReplicate {
        draw_starts(seed, id, self.block_count(), p, self.l)
    }

    fn check(&self, rep: &BootstrapReplicate) -> Result<()> {
        if rep.l != self.l || rep.starts.iter().any(|&s| s >= self.block_count()) {
            return Err(Error::InvalidParameter(
                "replicate does not match the block layout".into(),
            ));
        }
        Ok(())
    }

    /// `W*(x)` on the grid.
    pub fn w_star(&self, rep: &BootstrapReplicate) -> Result<Vec<f64>> {
        self.check(rep)?;
        let width = self.width();
        let mut counts = vec![0u64; width];
        for &s in &rep.starts {
            let row = &self.block_counts[s * width..(s + 1) * width];
            for (acc, &c) in counts.iter_mut().zip(row) {
                *acc += c as u64;
            }
        }
        let p = rep.starts.len();
        let pl = (p * self.l) as f64;
        let scale = self.scale(p);
        Ok(self
            .grid
            .points()
            .iter()
            .enumerate()
            .map(|(g, point)| match point {
                GridPoint::Finite(_) => scale * (counts[g] as f64 - pl * self.tilde_f[g]),
                _ => 0.0,
            })
            .collect())
    }

    /// `W*(x_g)` at one grid index.
    pub fn w_star_at(&self, rep: &BootstrapReplicate, g: usize) -> Result<f64> {
        self.check(rep)?;
        if !self.grid.points()[g].is_finite() {
            return Ok(0.0);
        }
        let width = self.width();
        let count: u64 = rep.starts.iter().map(|&s| self.block_counts[s * width + g] as u64).sum();
        let p = rep.starts.len();
        Ok(self.scale(p) * (count as f64 - (p * self.l) as f64 * self.tilde_f[g]))
    }

    /// `(p^{1/2} d_l)^{-1} sum_{i<=pl} (H_m(X*_i) - mu~)`.
    pub fn hermite_sum(&self, rep: &BootstrapReplicate) -> Result<f64> {
        self.check(rep)?;
        let blocks = self.hermite_blocks()?;
        let mu = self.tilde_mu()?;
        let p = rep.starts.len();
        let sum: f64 = rep.starts.iter().map(|&s| blocks[s] - self.l as f64 * mu).sum();
        Ok(self.scale(p) * sum)
    }

    /// `S*(x)` on the grid.
    pub fn s_star(&self, rep: &BootstrapReplicate) -> Result<Vec<f64>> {
        let w = self.w_star(rep)?;
        let h = self.hermite_sum(rep)?;
        Ok(self.residual_from(&w, h))
    }

    /// `S* = W* - J_m/m! * hermite_sum`, pointwise.
    pub fn residual_from(&self, w_star: &[f64], hermite_sum: f64) -> Vec<f64> {
        w_star
            .iter()
            .zip(&self.leading)
            .map(|(w, c)| w - c * hermite_sum)
            .collect()
    }

    /// Centred block sum of `S*` at grid index `g`, block `s`, before scaling.
    fn centered_block_s(&self, s: usize, g: usize, mu: f64, hermite: &[f64]) -> f64 {
        let count = self.block_counts[s * self.width() + g] as f64;
        (count - self.l as f64 * self.tilde_f[g]) - self.leading[g] * (hermite[s] - self.l as f64 * mu)
    }

    /// Exact conditional means of `W*` and `S*` on the grid, by enumerating
    /// the equally likely blocks. Both vanish up to rounding.
    pub fn enumerated_means(&self, p: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        let blocks = self.block_count();
        let hermite = self.hermite_blocks()?;
        let mu = self.tilde_mu()?;
        let width = self.width();
        let factor = p as f64 * self.scale(p) / blocks as f64;
        let mut w_mean = vec![0.0; width];
        let mut s_mean = vec![0.0; width];
        for g in 0..width {
            if !self.grid.points()[g].is_finite() {
                continue;
            }
            let mut w = 0.0;
            let mut sres = 0.0;
            for s in 0..blocks {
                w += self.block_counts[s * width + g] as f64 - self.l as f64 * self.tilde_f[g];
                sres += self.centered_block_s(s, g, mu, hermite);
            }
            w_mean[g] = factor * w;
            s_mean[g] = factor * sres;
        }
        Ok((w_mean, s_mean))
    }

    /// `E*[S*(x)^2]` (or of the increment over `(x, y]`), exact by block
    /// enumeration: `(n-l+1)^{-1} sum_s T_s^2 / d_l^2`. Independent of `p`.
    pub fn conditional_second_moment_at(&self, g: usize, h: Option<usize>) -> Result<f64> {
        let hermite = self.hermite_blocks()?;
        let mu = self.tilde_mu()?;
        let blocks = self.block_count();
        let block_term = |gi: usize, s: usize| -> f64 {
            if self.grid.points()[gi].is_finite() {
                self.centered_block_s(s, gi, mu, hermite)
            } else {
                0.0
            }
        };
        let sum_sq: f64 = (0..blocks)
            .map(|s| {
                let t = match h {
                    None => block_term(g, s),
                    Some(h) => block_term(h, s) - block_term(g, s),
                };
                t * t
            })
            .sum();
        Ok(sum_sq / blocks as f64 / (self.d_l * self.d_l))
    }
}

fn single_point_grid(probe: Probe) -> Result<Grid> {
    match probe {
        Probe::Point(x) => Grid::new(&[x]),
        Probe::Increment(x, y) => Grid::new(&[x, y]),
    }
}

fn evaluation(grid: &Grid, values: Vec<f64>, label: Label) -> ProcessEvaluation {
    ProcessEvaluation {
        grid: grid.clone(),
        values,
        label,
    }
}

fn engine_for(
    sample: &SubordinatedSample,
    profile: &HermiteProfile,
    plan: &BootstrapPlan,
    grid: &Grid,
) -> Result<BlockBootstrap> {
    if plan.n != sample.len() {
        return Err(Error::InvalidParameter(format!(
            "plan is for n = {} but sample has {} observations",
            plan.n,
            sample.len()
        )));
    }
    BlockBootstrap::new(sample, profile, plan.l, grid)
}

/// `W*(x) = (p^{1/2} d_l)^{-1} sum_{i<=pl} (1{Y*_i <= x} - F~_{n,l}(x))`.
pub fn bootstrap_empirical(
    sample: &SubordinatedSample,
    profile: &HermiteProfile,
    plan: &BootstrapPlan,
    replicate_id: u64,
    grid: &Grid,
) -> Result<ProcessEvaluation> {
    let engine = engine_for(sample, profile, plan, grid)?;
    let rep = draw_replicate(plan, replicate_id)?;
    Ok(evaluation(grid, engine.w_star(&rep)?, Label::WStar))
}

/// `S*_{n,l}(x)`, the bootstrap reduction residual.
pub fn bootstrap_residual(
    sample: &SubordinatedSample,
    profile: &HermiteProfile,
    plan: &BootstrapPlan,
    replicate_id: u64,
    grid: &Grid,
) -> Result<ProcessEvaluation> {
    let engine = engine_for(sample, profile, plan, grid)?;
    let rep = draw_replicate(plan, replicate_id)?;
    Ok(evaluation(grid, engine.s_star(&rep)?, Label::SStar))
}

/// Centred bootstrap Hermite sum of replicate `replicate_id`.
pub fn bootstrap_hermite_sum(
    sample: &SubordinatedSample,
    profile: &HermiteProfile,
    plan: &BootstrapPlan,
    replicate_id: u64,
) -> Result<f64> {
    let grid = Grid::new(&[0.0])?;
    let engine = engine_for(sample, profile, plan, &grid)?;
    engine.hermite_sum(&draw_replicate(plan, replicate_id)?)
}

/// Exact conditional second moment of `S*` at a point or over an increment.
pub fn conditional_second_moment(
    sample: &SubordinatedSample,
    profile: &HermiteProfile,
    l: usize,
    probe: Probe,
) -> Result<f64> {
    let grid = single_point_grid(probe)?;
    let engine = BlockBootstrap::new(sample, profile, l, &grid)?;
    match probe {
        Probe::Point(_) => engine.conditional_second_moment_at(1, None),
        Probe::Increment(..) => engine.conditional_second_moment_at(1, Some(2)),
    }
}

/// `F(x) - F~_{n,l}(x)` on the grid; used by the bias surrogates.
pub fn centering_gap(profile: &HermiteProfile, tilde: &ProcessEvaluation) -> Vec<f64> {
    tilde
        .grid
        .points()
        .iter()
        .zip(&tilde.values)
        .map(|(&p, &v)| cdf_at(profile, p) - v)
        .collect()
}
