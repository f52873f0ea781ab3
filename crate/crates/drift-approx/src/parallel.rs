//! Trajectory-parallel Monte Carlo on a rayon pool.
//!
//! Outcomes are collected in trajectory order and reduced by
//! [`McPlan::finish`], so results do not depend on the number of workers.

use std::sync::OnceLock;

use anyhow::Result;
use drift_approx_core::montecarlo::{DriftModel, LabeledEstimate, McPlan, Scratch};
use drift_approx_core::{Control, CostEstimate, KernelProblem, McConfig};
use rayon::prelude::*;
use rayon::ThreadPool;

pub const THREADS_ENV: &str = "DRIFT_APPROX_THREADS";

/// Worker count: all available cores, capped by `DRIFT_APPROX_THREADS`.
pub fn worker_count() -> usize {
    let available = std::thread::available_parallelism().map_or(1, |n| n.get());
    match std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
    {
        Some(cap) if cap >= 1 => available.min(cap),
        _ => available,
    }
}

fn pool() -> &'static ThreadPool {
    static POOL: OnceLock<ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(worker_count())
            .build()
            .expect("failed to start worker pool")
    })
}

pub fn run_plan(plan: &McPlan) -> Result<CostEstimate> {
    let n = plan.config().n_traj as u64;
    let outcomes: Vec<Option<f64>> = pool().install(|| {
        (0..n)
            .into_par_iter()
            .map_init(Scratch::default, |scratch, j| {
                plan.trajectory_cost(j, scratch)
            })
            .collect()
    });
    Ok(plan.finish(&outcomes)?)
}

pub fn estimate<C: Control + ?Sized>(
    problem: &KernelProblem,
    u: &C,
    config: McConfig,
) -> Result<CostEstimate> {
    run_plan(&McPlan::new(problem, u, config)?)
}

/// Like [`estimate`] but with an explicit model for `z`.
pub fn estimate_with_model<C: Control + ?Sized>(
    problem: &KernelProblem,
    model: DriftModel,
    u: &C,
    config: McConfig,
) -> Result<CostEstimate> {
    run_plan(&McPlan::with_model(problem, model, u, config)?)
}

/// Parallel counterpart of the core `cost_sweep`: same seed, same streams.
pub fn sweep(
    problem: &KernelProblem,
    family: &[(String, &dyn Control)],
    config: McConfig,
) -> Result<Vec<LabeledEstimate>> {
    anyhow::ensure!(!family.is_empty(), "cost sweep needs at least one control");
    family
        .iter()
        .map(|(label, u)| {
            Ok(LabeledEstimate {
                label: label.clone(),
                estimate: estimate(problem, *u, config)?,
            })
        })
        .collect()
}
