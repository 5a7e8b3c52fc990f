//! Built-in experiments and the reference rows they are compared against.

use crate::error::{Error, Result};
use crate::model::{ModelSpec, NLaw, Outcome, QLaw, SimplexQ};
use crate::spine::{EstimatorVariant, DEFAULT_NODE_BUDGET};

use super::config::{EstimatorConfig, ExperimentConfig, OracleConfig, OutputConfig, SeedConfig};

pub const PRESET_NAMES: [&str; 4] = ["mm1", "simplex", "nonbranching", "discrete"];

pub const MM1_GRID: [f64; 5] = [0.5, 1.0, 1.5, 2.0, 2.5];
pub const SIMPLEX_GRID: [f64; 5] = [1.5, 2.0, 2.5, 3.0, 3.5];
pub const NONBRANCHING_GRID: [f64; 4] = [1.0, 3.0, 5.0, 8.0];

/// One published row: level, estimate, its standard error, `t/μ`, mean
/// terminal generation, seconds per replication and fraction nonzero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReferenceRow {
    pub t: f64,
    pub estimate: f64,
    pub std_err: f64,
    pub t_over_mu: f64,
    pub terminal_gen: f64,
    pub time_s: f64,
    pub prop_nonzero: f64,
}

const fn row(
    t: f64,
    estimate: f64,
    std_err: f64,
    t_over_mu: f64,
    terminal_gen: f64,
    time_s: f64,
    prop_nonzero: f64,
) -> ReferenceRow {
    ReferenceRow {
        t,
        estimate,
        std_err,
        t_over_mu,
        terminal_gen,
        time_s,
        prop_nonzero,
    }
}

/// Branching M/M/1 preset, n = 10,000, independent-Q estimator
/// (alpha = 4.374, mu = 1.383).
pub const MM1_REFERENCE: [ReferenceRow; 5] = [
    row(0.5, 0.037774, 0.001241, 0.36, 1.39, 0.002610, 0.967),
    row(1.0, 0.003025, 0.000123, 0.72, 1.78, 0.007702, 0.980),
    row(1.5, 0.000354, 1.07147e-05, 1.08, 2.16, 0.017536, 0.983),
    row(2.0, 3.90110e-05, 1.43477e-06, 1.45, 2.52, 0.029310, 0.983),
    row(2.5, 4.11873e-06, 1.16323e-07, 1.81, 2.90, 0.065747, 0.985),
];

/// Simplex preset, n = 10,000, general estimator (alpha = 3.328, mu = 0.995).
pub const SIMPLEX_REFERENCE: [ReferenceRow; 5] = [
    row(1.5, 0.015785, 0.000166, 1.51, 0.33, 0.000235, 0.998),
    row(2.0, 0.003611, 3.51666e-05, 2.01, 0.78, 0.000311, 0.994),
    row(2.5, 0.000613, 6.60663e-06, 2.51, 1.33, 0.000439, 0.994),
    row(3.0, 0.000116, 1.21042e-06, 3.01, 1.84, 0.000671, 0.994),
    row(3.5, 2.29240e-05, 2.35959e-07, 3.52, 2.33, 0.001058, 0.992),
];

pub const MM1_ALPHA: f64 = 4.374;
pub const MM1_MU: f64 = 1.383;
pub const SIMPLEX_ALPHA: f64 = 3.328;
pub const SIMPLEX_MU: f64 = 0.995;
pub const MM1_H: f64 = 0.2390;
pub const SIMPLEX_H: f64 = 2.5180;

pub fn mm1_model() -> ModelSpec {
    ModelSpec::BranchingMm1 {
        theta: 5.0,
        lambda: 0.25,
        poisson_param: 2.0,
        y_rate: 9.0,
    }
}

pub fn simplex_model() -> ModelSpec {
    ModelSpec::SimplexGamma {
        a: 0.25,
        b: 1.0,
        n_law: NLaw::Uniform { lo: 1, hi: 3 },
        q_mode: SimplexQ::TwoTimesB,
    }
}

/// `N ≡ 1`, `C = e^{χ - τ}` with rates 2 and 1, `Q ≡ 1`:
/// `P(W > t) = e^{-t} / 2` and `H = 1/2`.
pub fn nonbranching_model() -> ModelSpec {
    ModelSpec::NonBranchingExp {
        theta: 2.0,
        lambda: 1.0,
        q_law: QLaw::Constant { q: 1.0 },
    }
}

/// `(C_1, C_2) = (2/3, 0)` w.p. 3/4 and `(1, 1)` w.p. 1/4, `Q ≡ 1`. The root
/// is 1 but the drift there is negative.
pub fn discrete_model() -> ModelSpec {
    ModelSpec::DiscreteTable {
        outcomes: vec![
            Outcome {
                weights: vec![2.0 / 3.0, 0.0],
                q: 1.0,
            },
            Outcome {
                weights: vec![1.0, 1.0],
                q: 1.0,
            },
        ],
        probs: vec![0.75, 0.25],
    }
}

fn config(model: ModelSpec, variant: EstimatorVariant, n: u64, grid: &[f64]) -> ExperimentConfig {
    ExperimentConfig {
        model,
        estimator: EstimatorConfig {
            variant,
            n,
            node_budget: DEFAULT_NODE_BUDGET,
            t_grid: grid.to_vec(),
        },
        seeds: SeedConfig::default(),
        output: OutputConfig::default(),
        oracle: OracleConfig::default(),
        alpha_override: None,
    }
}

pub fn preset(name: &str) -> Result<ExperimentConfig> {
    match name {
        "mm1" => Ok(config(
            mm1_model(),
            EstimatorVariant::IndependentQ,
            10_000,
            &MM1_GRID,
        )),
        "simplex" => {
            let mut cfg = config(
                simplex_model(),
                EstimatorVariant::General,
                10_000,
                &SIMPLEX_GRID,
            );
            cfg.oracle.h_spine_m = vec![2, 4, 6, 8];
            Ok(cfg)
        }
        "nonbranching" => {
            let mut cfg = config(
                nonbranching_model(),
                EstimatorVariant::IndependentQ,
                100_000,
                &NONBRANCHING_GRID,
            );
            cfg.oracle.naive_depth = Some(60);
            cfg.oracle.h_spine_m = vec![5, 10, 20];
            Ok(cfg)
        }
        "discrete" => Ok(config(
            discrete_model(),
            EstimatorVariant::IndependentQ,
            10_000,
            &[1.0],
        )),
        other => Err(Error::Config(format!(
            "unknown preset {other:?}; expected one of {}",
            PRESET_NAMES.join(", ")
        ))),
    }
}

/// Reference rows for a table name (`mm1` or `simplex`).
pub fn reference_table(name: &str) -> Result<&'static [ReferenceRow]> {
    match name {
        "mm1" => Ok(&MM1_REFERENCE),
        "simplex" => Ok(&SIMPLEX_REFERENCE),
        other => Err(Error::Config(format!(
            "unknown table {other:?}; expected mm1 or simplex"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_builds() {
        for name in PRESET_NAMES {
            let cfg = preset(name).unwrap();
            cfg.validate().unwrap();
            cfg.build_model().unwrap();
        }
        assert!(preset("nope").is_err());
    }

    #[test]
    fn reference_grids_match_presets() {
        let grid = |rows: &[ReferenceRow]| rows.iter().map(|r| r.t).collect::<Vec<_>>();
        assert_eq!(grid(&MM1_REFERENCE), MM1_GRID.to_vec());
        assert_eq!(grid(&SIMPLEX_REFERENCE), SIMPLEX_GRID.to_vec());
    }
}
