use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Model, ModelSpec, TiltContext};
use crate::oracle::{DEFAULT_INNER_DRAWS, DEFAULT_POOL_ITERATIONS, DEFAULT_POOL_SIZE};
use crate::spine::{EstimatorVariant, IsPlan, DEFAULT_NODE_BUDGET};

/// Estimator block of an experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub variant: EstimatorVariant,
    pub n: u64,
    #[serde(default = "default_node_budget")]
    pub node_budget: u64,
    pub t_grid: Vec<f64>,
}

fn default_node_budget() -> u64 {
    DEFAULT_NODE_BUDGET
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedConfig {
    pub master_seed: u64,
}

impl Default for SeedConfig {
    fn default() -> Self {
        SeedConfig { master_seed: 1 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OutputConfig {
    #[serde(default)]
    pub csv: Option<PathBuf>,
    #[serde(default)]
    pub report: Option<PathBuf>,
}

/// Oracle block: naive tree, population dynamics and `H` settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OracleConfig {
    /// Truncation depth of the naive tree; the deepest affordable if absent.
    pub naive_depth: Option<usize>,
    pub naive_n: u64,
    pub pool_size: usize,
    pub pool_iterations: usize,
    /// Fresh draws in the `H` estimate from the pool.
    pub h_n: usize,
    /// Generations at which the spine form of `H` is evaluated.
    pub h_spine_m: Vec<usize>,
    pub h_spine_n: u64,
    pub h_spine_inner_draws: u32,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            naive_depth: None,
            naive_n: 100_000,
            pool_size: DEFAULT_POOL_SIZE,
            pool_iterations: DEFAULT_POOL_ITERATIONS,
            h_n: 1_000_000,
            h_spine_m: vec![2, 4, 6],
            h_spine_n: 50_000,
            h_spine_inner_draws: DEFAULT_INNER_DRAWS,
        }
    }
}

/// A complete experiment description (JSON).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub estimator: EstimatorConfig,
    #[serde(default)]
    pub seeds: SeedConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub oracle: OracleConfig,
    /// Replaces the computed root; for fault injection only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_override: Option<f64>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let grid = &self.estimator.t_grid;
        if grid.is_empty() {
            return Err(Error::Config("t_grid must not be empty".into()));
        }
        if grid.iter().any(|t| !t.is_finite()) || grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(
                "t_grid must be finite and strictly increasing".into(),
            ));
        }
        if self.estimator.n == 0 {
            return Err(Error::Config("n must be at least 1".into()));
        }
        if self.estimator.node_budget == 0 {
            return Err(Error::Config("node_budget must be at least 1".into()));
        }
        if let Some(a) = self.alpha_override {
            if !(a > 0.0 && a.is_finite()) {
                return Err(Error::Config("alpha_override must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn build_model(&self) -> Result<Model> {
        Model::new(self.model.clone())
    }

    /// Root and drift, or the override when one is set.
    pub fn context(&self, model: &Model) -> Result<TiltContext> {
        match self.alpha_override {
            Some(alpha) => TiltContext::with_alpha(model, alpha),
            None => model.solve_alpha(),
        }
    }

    pub fn is_plan(&self, parallelism: usize) -> IsPlan {
        IsPlan {
            node_budget: self.estimator.node_budget,
            ..IsPlan::new(
                self.estimator.variant,
                self.estimator.n,
                self.seeds.master_seed,
            )
        }
        .with_parallelism(parallelism)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "model": {"type": "non_branching_exp", "theta": 2.0, "lambda": 1.0,
                  "q_law": {"type": "constant", "q": 1.0}},
        "estimator": {"variant": "general", "n": 100, "t_grid": [1.0, 2.0]}
    }"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = ExperimentConfig::from_json(MINIMAL).unwrap();
        assert_eq!(cfg.estimator.node_budget, DEFAULT_NODE_BUDGET);
        assert_eq!(cfg.seeds.master_seed, 1);
        assert_eq!(cfg.oracle.pool_size, DEFAULT_POOL_SIZE);
        let again = ExperimentConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(again.estimator, cfg.estimator);
    }

    #[test]
    fn bad_grids_rejected() {
        for grid in ["[]", "[2.0, 1.0]", "[1.0, 1.0]"] {
            let text = MINIMAL.replace("[1.0, 2.0]", grid);
            assert!(matches!(
                ExperimentConfig::from_json(&text),
                Err(Error::Config(_))
            ));
        }
        assert!(ExperimentConfig::from_json("{").is_err());
    }
}
