//! Monte-Carlo estimation of `J[u] = E ∫₀ᵀ ξ_u(t)²/2 dt`.
//!
//! Each trajectory `j` simulates `z` and the gap process `ξ` with the Euler
//! scheme on the `6N + 1` grid and integrates `ξ²/2` with the composite
//! Newton–Cotes rule. Trajectory `j` draws the noise of `ξ` from stream `2j`
//! and, when `z` is an independent GBM, the noise of `z` from stream `2j + 1`;
//! when `z = G` both share stream `2j`. Every member of a sweep therefore
//! sees the same random numbers.
//!
//! [`McPlan::trajectory_cost`] is a pure function of the trajectory index, so
//! callers may evaluate trajectories in any order or in parallel and hand the
//! outcomes, in index order, to [`McPlan::finish`].

use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::fredholm::Control;
use crate::kernel::{KernelProblem, Scenario};
use crate::process::{euler_gap_guarded, fill_normals, NoiseSpec};
use crate::quadrature::{QuadratureRule, NODES_PER_PANEL};
use crate::{Error, Result};

/// Trajectories with `|ξ|` above this are aborted and counted.
pub const STIFFNESS_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    /// Newton–Cotes panels `N`; the Euler step is `T / (6N)`.
    pub panels: usize,
    pub n_traj: usize,
    pub seed: u64,
}

impl McConfig {
    pub fn new(panels: usize, n_traj: usize, seed: u64) -> Self {
        McConfig {
            panels,
            n_traj,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostEstimate {
    pub mean: f64,
    pub std_error: f64,
    /// Trajectories that entered the average.
    pub n_traj: usize,
    /// Trajectories dropped by the stiffness guard.
    pub aborted: usize,
    pub panels: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledEstimate {
    pub label: String,
    pub estimate: CostEstimate,
}

/// How `z` is produced along each trajectory.
#[derive(Debug, Clone, PartialEq)]
pub enum DriftModel {
    /// GBM from its own noise stream.
    IndependentGbm,
    /// GBM built from the same draws as `ξ`.
    SharedNoiseGbm,
    /// A fixed path, identical for every trajectory.
    Deterministic(Vec<f64>),
}

impl DriftModel {
    pub fn for_scenario(scenario: &Scenario) -> Result<Self> {
        match scenario {
            Scenario::IndependentGbm => Ok(DriftModel::IndependentGbm),
            Scenario::DependentGbm => Ok(DriftModel::SharedNoiseGbm),
            Scenario::CustomIndependent { .. } => Err(Error::Unsupported(
                "paths of a custom z are not available; use DriftModel::Deterministic",
            )),
        }
    }
}

/// Everything a trajectory needs, sampled once.
#[derive(Debug, Clone)]
pub struct McPlan {
    config: McConfig,
    model: DriftModel,
    a_nodes: Vec<f64>,
    u_nodes: Vec<f64>,
    weights: Vec<f64>,
    step: f64,
}

/// Per-worker buffers reused across trajectories.
#[derive(Debug, Default, Clone)]
pub struct Scratch {
    xi_normals: Vec<f64>,
    z_normals: Vec<f64>,
    z: Vec<f64>,
    xi: Vec<f64>,
}

impl McPlan {
    pub fn new<C: Control + ?Sized>(
        problem: &KernelProblem,
        u: &C,
        config: McConfig,
    ) -> Result<Self> {
        let model = DriftModel::for_scenario(problem.scenario())?;
        Self::with_model(problem, model, u, config)
    }

    pub fn with_model<C: Control + ?Sized>(
        problem: &KernelProblem,
        model: DriftModel,
        u: &C,
        config: McConfig,
    ) -> Result<Self> {
        if config.panels == 0 {
            return Err(Error::InvalidConfig("N must be at least 1"));
        }
        if config.n_traj == 0 {
            return Err(Error::InvalidConfig("at least one trajectory is required"));
        }
        let rule = QuadratureRule::composite_newton_cotes(config.panels, problem.horizon())?;
        let u_nodes = u.sample_rule(&rule)?;
        if u_nodes.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("control value"));
        }
        if let DriftModel::Deterministic(path) = &model {
            if path.len() != rule.len() {
                return Err(Error::LengthMismatch {
                    expected: rule.len(),
                    got: path.len(),
                });
            }
        }
        let a_nodes = rule
            .nodes()
            .iter()
            .map(|&t| problem.drift().value(t))
            .collect();
        Ok(McPlan {
            config,
            model,
            a_nodes,
            u_nodes,
            weights: rule.weights().to_vec(),
            step: problem.horizon() / (NODES_PER_PANEL * config.panels) as f64,
        })
    }

    pub fn config(&self) -> McConfig {
        self.config
    }

    /// `∫ ξ²/2` along trajectory `index`, or `None` if the stiffness guard fired.
    pub fn trajectory_cost(&self, index: u64, scratch: &mut Scratch) -> Option<f64> {
        let steps = self.weights.len() - 1;
        let seed = self.config.seed;
        let mut xi_rng = NoiseSpec::new(seed, 2 * index).rng();
        fill_normals(&mut xi_rng, steps, &mut scratch.xi_normals);

        let z: &[f64] = match &self.model {
            DriftModel::Deterministic(path) => path,
            DriftModel::IndependentGbm => {
                let mut z_rng = NoiseSpec::new(seed, 2 * index + 1).rng();
                fill_normals(&mut z_rng, steps, &mut scratch.z_normals);
                gbm_into(&scratch.z_normals, self.step, &mut scratch.z);
                &scratch.z
            }
            DriftModel::SharedNoiseGbm => {
                gbm_into(&scratch.xi_normals, self.step, &mut scratch.z);
                &scratch.z
            }
        };
        scratch.xi.resize(steps + 1, 0.0);
        if euler_gap_guarded(
            &self.a_nodes,
            z,
            &self.u_nodes,
            &scratch.xi_normals,
            self.step,
            STIFFNESS_LIMIT,
            &mut scratch.xi,
        )
        .is_some()
        {
            return None;
        }
        let cost: f64 = self
            .weights
            .iter()
            .zip(&scratch.xi)
            .map(|(w, x)| 0.5 * w * x * x)
            .sum();
        cost.is_finite().then_some(cost)
    }

    /// Mean and standard error over trajectory outcomes supplied in index order.
    pub fn finish(&self, outcomes: &[Option<f64>]) -> Result<CostEstimate> {
        let accepted: Vec<f64> = outcomes.iter().flatten().copied().collect();
        let aborted = outcomes.len() - accepted.len();
        if accepted.is_empty() {
            return Err(Error::AllTrajectoriesAborted { aborted });
        }
        let n = accepted.len() as f64;
        let mean = accepted.iter().sum::<f64>() / n;
        let std_error = if accepted.len() > 1 {
            let var = accepted
                .iter()
                .map(|c| (c - mean) * (c - mean))
                .sum::<f64>()
                / (n - 1.0);
            (var / n).sqrt()
        } else {
            0.0
        };
        Ok(CostEstimate {
            mean,
            std_error,
            n_traj: accepted.len(),
            aborted,
            panels: self.config.panels,
            seed: self.config.seed,
        })
    }

    /// Runs every trajectory on the current thread.
    pub fn run_sequential(&self) -> Result<CostEstimate> {
        let mut scratch = Scratch::default();
        let outcomes: Vec<Option<f64>> = (0..self.config.n_traj as u64)
            .map(|j| self.trajectory_cost(j, &mut scratch))
            .collect();
        self.finish(&outcomes)
    }
}

fn gbm_into(normals: &[f64], h: f64, out: &mut Vec<f64>) {
    let sqrt_h = h.sqrt();
    out.clear();
    let mut g = 1.0;
    out.push(g);
    for z in normals {
        g *= (z * sqrt_h - 0.5 * h).exp();
        out.push(g);
    }
}

/// Single-threaded estimate of `J[u]`.
pub fn estimate_quadratic_cost<C: Control + ?Sized>(
    problem: &KernelProblem,
    u: &C,
    config: McConfig,
) -> Result<CostEstimate> {
    McPlan::new(problem, u, config)?.run_sequential()
}

/// One estimate per labelled control, all with common random numbers.
pub fn cost_sweep(
    problem: &KernelProblem,
    family: &[(&str, &dyn Control)],
    config: McConfig,
) -> Result<Vec<LabeledEstimate>> {
    if family.is_empty() {
        return Err(Error::InvalidConfig(
            "cost sweep needs at least one control",
        ));
    }
    family
        .iter()
        .map(|(label, u)| {
            Ok(LabeledEstimate {
                label: String::from(*label),
                estimate: estimate_quadratic_cost(problem, *u, config)?,
            })
        })
        .collect()
}
