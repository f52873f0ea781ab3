use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use drift_approx_core::{DriftCoefficient, KernelProblem, Scenario};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioId {
    /// `a ≡ -1`, `T = 1`, `z` a GBM independent of the noise.
    Example1Independent,
    /// `a ≡ 1`, `T = 1`, `z = G`.
    Example2Dependent,
    /// Constant drift and horizon from [`CustomScenario`], `z` an independent GBM.
    Custom,
}

impl std::str::FromStr for ScenarioId {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "example1_independent" | "example1" => ScenarioId::Example1Independent,
            "example2_dependent" | "example2" => ScenarioId::Example2Dependent,
            "custom" => ScenarioId::Custom,
            other => bail!("unknown scenario `{other}`"),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomScenario {
    pub drift: f64,
    pub horizon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub scenario: ScenarioId,
    #[serde(rename = "N")]
    pub n: usize,
    pub m: usize,
    pub delta_list: Vec<f64>,
    pub n_traj: usize,
    pub seed: u64,
    pub output_dir: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub custom: Option<CustomScenario>,
}

pub fn default_deltas() -> Vec<f64> {
    (1..=9).map(|n| 10f64.powi(-n)).collect()
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            scenario: ScenarioId::Example1Independent,
            n: 100,
            m: 5,
            delta_list: default_deltas(),
            n_traj: 100_000,
            seed: 2021,
            output_dir: PathBuf::from("out"),
            custom: None,
        }
    }
}

/// Values given on the command line; each one replaces the config-file value.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub scenario: Option<ScenarioId>,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub delta_list: Option<Vec<f64>>,
    pub n_traj: Option<usize>,
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn load(path: Option<&Path>, overrides: &Overrides) -> Result<Self> {
        let mut cfg = match path {
            Some(p) => Self::from_json_file(p)?,
            None => Self::default(),
        };
        cfg.apply(overrides);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.scenario {
            self.scenario = s;
        }
        if let Some(n) = o.n {
            self.n = n;
        }
        if let Some(m) = o.m {
            self.m = m;
        }
        if let Some(d) = &o.delta_list {
            self.delta_list = d.clone();
        }
        if let Some(n) = o.n_traj {
            self.n_traj = n;
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(p) = &o.output_dir {
            self.output_dir = p.clone();
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.delta_list.is_empty() {
            bail!("delta_list must not be empty");
        }
        if let Some(d) = self
            .delta_list
            .iter()
            .find(|d| !(**d > 0.0 && d.is_finite()))
        {
            bail!("delta_list entries must be positive and finite, got {d}");
        }
        if self.delta_list.windows(2).any(|w| w[1] >= w[0]) {
            bail!("delta_list must be strictly decreasing");
        }
        if self.n < 1 {
            bail!("N must be at least 1");
        }
        if self.n_traj < 1 {
            bail!("n_traj must be at least 1");
        }
        match (self.scenario, &self.custom) {
            (ScenarioId::Custom, None) => {
                bail!("scenario `custom` needs a `custom` block with drift and horizon")
            }
            (ScenarioId::Custom, Some(c)) => {
                if !c.drift.is_finite() {
                    bail!("custom drift must be finite");
                }
                if !(c.horizon > 0.0 && c.horizon.is_finite()) {
                    bail!("custom horizon must be positive and finite");
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn problem(&self) -> Result<KernelProblem> {
        Ok(match self.scenario {
            ScenarioId::Example1Independent => KernelProblem::example_independent(),
            ScenarioId::Example2Dependent => KernelProblem::example_dependent(),
            ScenarioId::Custom => {
                let c = self.custom.context("missing custom scenario")?;
                KernelProblem::new(
                    DriftCoefficient::constant(c.drift),
                    c.horizon,
                    Scenario::IndependentGbm,
                )?
            }
        })
    }

    /// Same parameters, different scenario.
    pub fn with_scenario(&self, scenario: ScenarioId) -> Self {
        ExperimentConfig {
            scenario,
            ..self.clone()
        }
    }
}

/// Parses `0.1,0.01,1e-3`.
pub fn parse_delta_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse::<f64>().with_context(|| format!("bad delta `{p}`")))
        .collect()
}
