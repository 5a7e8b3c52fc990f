//! Importance sampling of `P(W > t)` along a spine.
//!
//! The tree is grown in length-lexicographic order. The single spine node of
//! each generation gets a branching vector from the tilted law, every other
//! node one from the original law, and the spine continues into child `j`
//! with probability `C_j^α / D`. The walk stops at the first node with
//! `S_i + Y_i > t`; if that node is on the spine the estimator is
//! `e^{-α S} / D` (or `e^{-α S}` when `Q` is independent of the weights),
//! otherwise it is zero.

use std::time::{Duration, Instant};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{choose_spine_child, Model, TiltContext};
use crate::replication::{aggregate, run_replications, EstimateSummary, SeedSpec};
use crate::tree::{Frontier, NodeIndex, NodeState};

pub const DEFAULT_NODE_BUDGET: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorVariant {
    /// `Z = e^{-α V_τ} / D_{J_τ}` on a spine hit.
    General,
    /// `Z = e^{-α V_τ}` on a spine hit; needs `Q` independent of `(N, C)`.
    IndependentQ,
}

/// Outcome of one replication.
#[derive(Clone, Debug, PartialEq)]
pub struct ISRun {
    pub z: f64,
    /// Generation of the terminal node; equals `τ(t)` when the hit is on the spine.
    pub tau: usize,
    pub terminal_index: NodeIndex,
    pub hit_on_spine: bool,
    /// `V_τ = S_{J_τ}` for a spine hit.
    pub v_tau: Option<f64>,
    /// `D` of the terminal spine node's tilted vector.
    pub d_terminal: Option<f64>,
    pub nodes_expanded: u64,
    pub elapsed: Duration,
}

/// One replication of the estimator at level `t`.
pub fn run_single<R: Rng>(
    model: &Model,
    ctx: &TiltContext,
    t: f64,
    variant: EstimatorVariant,
    node_budget: u64,
    rng: &mut R,
) -> Result<ISRun> {
    if variant == EstimatorVariant::IndependentQ && !model.q_independent() {
        return Err(Error::DependentQ);
    }
    if node_budget == 0 {
        return Err(Error::InvalidParameter(
            "node budget must be positive".into(),
        ));
    }
    let start = Instant::now();
    let alpha = ctx.alpha;
    let mut frontier = Frontier::new();
    let mut node = NodeState::root();
    let mut expanded = 0u64;
    loop {
        if expanded == node_budget {
            return Err(Error::BudgetExceeded {
                budget: node_budget,
                nodes_expanded: expanded,
                max_generation: node.index.generation(),
            });
        }
        expanded += 1;
        let vector = if node.on_spine {
            model.sample_tilted(ctx, rng)?
        } else {
            model.sample_p(rng)
        };
        node.perturbation = vector.log_q();
        let spine_child = if node.on_spine {
            Some(choose_spine_child(&vector, alpha, rng)?)
        } else {
            None
        };
        if node.level() > t {
            let generation = node.index.generation();
            let (z, v_tau, d_terminal) = if node.on_spine {
                let d = vector.spine_weight(alpha);
                let weight = (-alpha * node.log_weight).exp();
                let z = match variant {
                    EstimatorVariant::General => weight / d,
                    EstimatorVariant::IndependentQ => weight,
                };
                (z, Some(node.log_weight), Some(d))
            } else {
                (0.0, None, None)
            };
            return Ok(ISRun {
                z,
                tau: generation,
                terminal_index: node.index,
                hit_on_spine: node.on_spine,
                v_tau,
                d_terminal,
                nodes_expanded: expanded,
                elapsed: start.elapsed(),
            });
        }
        for (j, &c) in vector.weights.iter().enumerate() {
            // a zero weight sends S to -inf; nothing below it can cross
            if c > 0.0 {
                let on_spine = spine_child == Some(j);
                frontier.push(node.child(j as u32 + 1, c, on_spine)?);
            }
        }
        node = frontier.advance()?;
    }
}

/// Replication settings shared by the estimators.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IsPlan {
    pub variant: EstimatorVariant,
    pub n: u64,
    pub node_budget: u64,
    pub seeds: SeedSpec,
    pub parallelism: usize,
}

impl IsPlan {
    pub fn new(variant: EstimatorVariant, n: u64, master_seed: u64) -> Self {
        IsPlan {
            variant,
            n,
            node_budget: DEFAULT_NODE_BUDGET,
            seeds: SeedSpec::new(master_seed),
            parallelism: 1,
        }
    }

    pub fn with_parallelism(self, parallelism: usize) -> Self {
        IsPlan {
            parallelism,
            ..self
        }
    }

    pub fn with_stream(self, stream_id: u64) -> Self {
        IsPlan {
            seeds: self.seeds.with_stream(stream_id),
            ..self
        }
    }
}

/// All replications of [`run_single`] at level `t`, in index order.
pub fn is_runs(model: &Model, ctx: &TiltContext, t: f64, plan: &IsPlan) -> Vec<Result<ISRun>> {
    run_replications(plan.n, plan.seeds, plan.parallelism, |_, rng| {
        run_single(model, ctx, t, plan.variant, plan.node_budget, rng)
    })
}

/// The sample average of `plan.n` replications of the estimator.
pub fn is_estimate(
    model: &Model,
    ctx: &TiltContext,
    t: f64,
    plan: &IsPlan,
) -> Result<EstimateSummary> {
    if plan.n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    let runs = is_runs(model, ctx, t, plan);
    if let Some(Err(e)) = runs
        .iter()
        .find(|r| matches!(r, Err(e) if !matches!(e, Error::BudgetExceeded { .. })))
    {
        return Err(e.clone());
    }
    aggregate(&runs)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GenerationProfileRow {
    pub t: f64,
    pub mean_terminal_gen: f64,
    pub mean_tau: Option<f64>,
    pub t_over_mu: f64,
}

/// Mean terminal generation against the renewal reference `t / μ`.
pub fn terminal_generation_profile(
    model: &Model,
    ctx: &TiltContext,
    t_grid: &[f64],
    plan: &IsPlan,
) -> Result<Vec<GenerationProfileRow>> {
    t_grid
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let s = is_estimate(model, ctx, t, &plan.with_stream(k as u64))?;
            Ok(GenerationProfileRow {
                t,
                mean_terminal_gen: s.mean_terminal_gen,
                mean_tau: s.mean_tau,
                t_over_mu: t / ctx.mu,
            })
        })
        .collect()
}
