//! Bootstrap estimate of `|J_m(x)|`: `m!` times the root mean square of the
//! normalised bootstrap empirical process over `A` replicates.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::empirical::{jm_at, Grid, Label, ProcessEvaluation};
use crate::error::{Error, Result};
use crate::hermite::{factorial, HermiteProfile};
use crate::mbb::{BlockBootstrap, BootstrapPlan};
use crate::sample::SubordinatedSample;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct JmMeta {
    pub n: usize,
    pub l: usize,
    pub p: usize,
    pub replicates: usize,
    pub m: usize,
    pub master_seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JmEstimate {
    pub grid: Grid,
    /// `m! * rms`.
    pub values: Vec<f64>,
    /// Root mean square of `W*` over replicates.
    pub rms: Vec<f64>,
    pub meta: JmMeta,
}

impl JmEstimate {
    pub fn to_evaluation(&self) -> ProcessEvaluation {
        ProcessEvaluation {
            grid: self.grid.clone(),
            values: self.values.clone(),
            label: Label::JHat,
        }
    }
}

/// Runs `plan.replicates` bootstrap replicates and forms the estimate.
pub fn estimate_jm(
    sample: &SubordinatedSample,
    profile: &HermiteProfile,
    plan: &BootstrapPlan,
    grid: &Grid,
) -> Result<JmEstimate> {
    if plan.n != sample.len() {
        return Err(Error::InvalidParameter(format!(
            "plan is for n = {} but sample has {} observations",
            plan.n,
            sample.len()
        )));
    }
    let engine = BlockBootstrap::new(sample, profile, plan.l, grid)?;
    estimate_with(&engine, plan, profile.rank())
}

/// Estimate from a prepared [`BlockBootstrap`]. Replicates may run in
/// parallel; squares are accumulated in replicate order.
pub fn estimate_with(engine: &BlockBootstrap, plan: &BootstrapPlan, m: usize) -> Result<JmEstimate> {
    let per_replicate: Vec<Vec<f64>> = (0..plan.replicates as u64)
        .into_par_iter()
        .map(|id| engine.w_star(&engine.draw(plan.master_seed, id, plan.p)))
        .collect::<Result<_>>()?;
    let width = engine.grid().len();
    let mut sum_sq = vec![0.0; width];
    for w in &per_replicate {
        for (acc, v) in sum_sq.iter_mut().zip(w) {
            *acc += v * v;
        }
    }
    Ok(finish(engine.grid().clone(), sum_sq, plan, m))
}

/// Sequential variant used when the caller already parallelises at an outer level.
pub fn estimate_with_sequential(engine: &BlockBootstrap, plan: &BootstrapPlan, m: usize) -> Result<JmEstimate> {
    let width = engine.grid().len();
    let mut sum_sq = vec![0.0; width];
    for id in 0..plan.replicates as u64 {
        let w = engine.w_star(&engine.draw(plan.master_seed, id, plan.p))?;
        for (acc, v) in sum_sq.iter_mut().zip(&w) {
            *acc += v * v;
        }
    }
    Ok(finish(engine.grid().clone(), sum_sq, plan, m))
}

fn finish(grid: Grid, sum_sq: Vec<f64>, plan: &BootstrapPlan, m: usize) -> JmEstimate {
    let a = plan.replicates as f64;
    let rms: Vec<f64> = sum_sq.iter().map(|s| (s / a).sqrt()).collect();
    let m_fact = factorial(m);
    let values = rms.iter().map(|r| m_fact * r).collect();
    JmEstimate {
        grid,
        values,
        rms,
        meta: JmMeta {
            n: plan.n,
            l: plan.l,
            p: plan.p,
            replicates: plan.replicates,
            m,
            master_seed: plan.master_seed,
        },
    }
}

/// `sup_x | Jhat(x) - |J_m(x)| |` over the estimate's grid.
pub fn sup_abs_deviation(est: &JmEstimate, profile: &HermiteProfile) -> Result<f64> {
    if profile.rank() != est.meta.m {
        return Err(Error::InvalidParameter(format!(
            "estimate is for m = {} but profile has rank {}",
            est.meta.m,
            profile.rank()
        )));
    }
    Ok(est
        .grid
        .points()
        .iter()
        .zip(&est.values)
        .map(|(&p, v)| (v - jm_at(profile, p).abs()).abs())
        .fold(0.0, f64::max))
}
