//! Estimators that reach the same quantities by other routes: the naive
//! depth-truncated tree, the population-dynamics pool, and the constant `H`
//! in `P(W > t) ~ H e^{-αt}`.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Model, TiltContext};
use crate::replication::{run_replications, Estimate, SeedSpec};
use crate::spine::{is_estimate, IsPlan};
use crate::tree::{Frontier, NodeState};

/// Largest expected number of nodes in one naive tree.
pub const DEFAULT_RECURSION_CAP: f64 = 1e7;
pub const DEFAULT_POOL_SIZE: usize = 100_000;
pub const DEFAULT_POOL_ITERATIONS: usize = 60;
pub const BATCHES: usize = 20;
pub const DEFAULT_INNER_DRAWS: u32 = 16;

/// Expected size `Σ_{k<=depth} E[N]^k` of a tree truncated at `depth`.
pub fn expected_tree_size(model: &Model, depth: usize) -> f64 {
    let m = model.mean_offspring();
    (0..=depth).map(|k| m.powi(k as i32)).sum()
}

/// Largest depth whose expected tree size stays within `cap`.
pub fn max_feasible_depth(model: &Model, cap: f64, limit: usize) -> usize {
    (0..=limit)
        .take_while(|&d| expected_tree_size(model, d) <= cap)
        .last()
        .unwrap_or(0)
}

fn w_recursive<R: Rng>(model: &Model, depth: usize, rng: &mut R) -> f64 {
    let v = model.sample_p(rng);
    let mut w = v.log_q();
    if depth > 0 {
        for &c in &v.weights {
            if c > 0.0 {
                w = w.max(c.ln() + w_recursive(model, depth - 1, rng));
            }
        }
    }
    w
}

/// `max{S_i + Y_i : |i| <= depth}` on a fresh tree; `-inf` terminal values.
pub fn naive_w_sample<R: Rng>(model: &Model, depth: usize, cap: f64, rng: &mut R) -> Result<f64> {
    let expected = expected_tree_size(model, depth);
    if expected > cap {
        return Err(Error::RecursionBudget { expected, cap });
    }
    Ok(w_recursive(model, depth, rng))
}

/// Fraction of `n` truncated-tree samples with `W > t`, with binomial
/// standard error. Truncation can only lower `W`, so this is biased low.
pub fn naive_tail(
    model: &Model,
    t: f64,
    n: u64,
    depth: usize,
    seeds: SeedSpec,
    parallelism: usize,
) -> Result<Estimate> {
    let samples = naive_w_samples(model, n, depth, seeds, parallelism)?;
    Ok(tail_fraction(&samples, t))
}

/// `n` truncated-tree samples of `W`, in replication order.
pub fn naive_w_samples(
    model: &Model,
    n: u64,
    depth: usize,
    seeds: SeedSpec,
    parallelism: usize,
) -> Result<Vec<f64>> {
    let expected = expected_tree_size(model, depth);
    if expected > DEFAULT_RECURSION_CAP {
        return Err(Error::RecursionBudget {
            expected,
            cap: DEFAULT_RECURSION_CAP,
        });
    }
    run_replications(n, seeds, parallelism, |_, rng| {
        Ok(w_recursive(model, depth, rng))
    })
    .into_iter()
    .collect()
}

fn tail_fraction(samples: &[f64], t: f64) -> Estimate {
    let n = samples.len();
    let hits = samples.iter().filter(|&&w| w > t).count();
    let p = hits as f64 / n as f64;
    Estimate {
        value: p,
        std_err: (p * (1.0 - p) / n as f64).sqrt(),
        n: n as u64,
    }
}

/// An approximate sample from the law of `W`.
#[derive(Clone, Debug, PartialEq)]
pub struct WPool {
    pub samples: Vec<f64>,
    pub iterations: usize,
}

impl WPool {
    pub fn pool_size(&self) -> usize {
        self.samples.len()
    }

    /// `P(W > t)` from the pool, with a batch-means standard error.
    pub fn tail(&self, t: f64) -> Estimate {
        let ind: Vec<f64> = self
            .samples
            .iter()
            .map(|&w| f64::from(u8::from(w > t)))
            .collect();
        Estimate::batch_means(&ind, BATCHES)
    }

    /// Empirical `q`-quantile (lower), `q` in `[0, 1]`.
    pub fn quantile(&self, q: f64) -> f64 {
        let mut s = self.samples.clone();
        s.sort_by(f64::total_cmp);
        let k = ((q * s.len() as f64).floor() as usize).min(s.len() - 1);
        s[k]
    }

    /// One value per line; `-inf` for minus infinity.
    pub fn write_to(&self, path: &Path) -> Result<()> {
        let mut out = BufWriter::new(fs::File::create(path)?);
        for &w in &self.samples {
            writeln!(out, "{w}")?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_from(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let samples = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(|l| {
                l.parse::<f64>()
                    .map_err(|e| Error::Io(format!("bad pool value {l:?}: {e}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if samples.is_empty() {
            return Err(Error::EmptySample);
        }
        Ok(WPool {
            samples,
            iterations: 0,
        })
    }
}

/// Population dynamics: start from `-inf` and apply
/// `W <- max{Y, max_i (X_i + W_{π(i)})}` `iterations` times to a pool of
/// `pool_size` entries, drawing `π(i)` uniformly from the previous pool.
pub fn popdyn_pool<R: Rng>(
    model: &Model,
    pool_size: usize,
    iterations: usize,
    rng: &mut R,
) -> Result<WPool> {
    if pool_size == 0 || iterations == 0 {
        return Err(Error::InvalidParameter(
            "pool size and iterations must be positive".into(),
        ));
    }
    let mut pool = vec![f64::NEG_INFINITY; pool_size];
    let mut next = vec![0.0; pool_size];
    for _ in 0..iterations {
        for slot in next.iter_mut() {
            let v = model.sample_p(rng);
            let mut w = v.log_q();
            for &c in &v.weights {
                if c > 0.0 {
                    w = w.max(c.ln() + pool[rng.random_range(0..pool_size)]);
                }
            }
            *slot = w;
        }
        std::mem::swap(&mut pool, &mut next);
    }
    Ok(WPool {
        samples: pool,
        iterations,
    })
}

/// `e^{αx}` with `e^{α(-inf)} = 0`.
fn exp_alpha(alpha: f64, x: f64) -> f64 {
    if x == f64::NEG_INFINITY {
        0.0
    } else {
        (alpha * x).exp()
    }
}

/// `H = E[e^{αY} ∨ max_i e^{α(X_i + W_i)} - Σ_i e^{α(X_i + W_i)}] / (αμ)`
/// with the `W_i` resampled from `pool`. Batch-means standard error.
pub fn estimate_h_equiv<R: Rng>(
    model: &Model,
    ctx: &TiltContext,
    pool: &WPool,
    n: usize,
    rng: &mut R,
) -> Result<Estimate> {
    if n == 0 || pool.samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let alpha = ctx.alpha;
    let scale = 1.0 / (alpha * ctx.mu);
    let k = pool.samples.len();
    let values: Vec<f64> = (0..n)
        .map(|_| {
            let v = model.sample_p(rng);
            let mut top = exp_alpha(alpha, v.log_q());
            let mut sum = 0.0;
            for &c in &v.weights {
                if c > 0.0 {
                    let term = exp_alpha(alpha, c.ln() + pool.samples[rng.random_range(0..k)]);
                    top = top.max(term);
                    sum += term;
                }
            }
            (top - sum) * scale
        })
        .collect();
    Ok(Estimate::batch_means(&values, BATCHES))
}

/// How the last spine vector enters the spine form of `H`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HSpineForm {
    /// Draw `ψ_{J_m}` from the tilted law and weight by `1 / D_{J_m}`.
    Literal,
    /// Replace `ψ_{J_m}` by the average over independent draws from the
    /// original law, with unit weight. Given the nodes before `J_m`,
    /// `Ẽ[h(ψ_{J_m}) / D_{J_m}] = E[h(ψ)]`, so the mean is the same; the
    /// variance stays finite when `E[1/D] = ∞`.
    #[default]
    Conditional,
}

/// One draw of `(e^{αξ_m} - e^{α(max_{i≺J_m}(S_i+Y_i) - V_m)})^+ / D_{J_m}`.
fn h_spine_term<R: Rng>(
    model: &Model,
    ctx: &TiltContext,
    m: usize,
    form: HSpineForm,
    inner_draws: u32,
    node_budget: u64,
    rng: &mut R,
) -> Result<f64> {
    let alpha = ctx.alpha;
    let mut frontier = Frontier::new();
    let mut node = NodeState::root();
    let mut earlier_max = f64::NEG_INFINITY;
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
        let generation = node.index.generation();
        let last = node.on_spine && generation == m;
        if last && form == HSpineForm::Conditional {
            let draws = inner_draws.max(1);
            let shift = exp_alpha(alpha, earlier_max - node.log_weight);
            let total: f64 = (0..draws)
                .map(|_| (exp_alpha(alpha, model.sample_p(rng).log_q()) - shift).max(0.0))
                .sum();
            return Ok(total / f64::from(draws));
        }
        let vector = if node.on_spine {
            model.sample_tilted(ctx, rng)?
        } else {
            model.sample_p(rng)
        };
        node.perturbation = vector.log_q();
        if last {
            let d = vector.spine_weight(alpha);
            if !(d > 0.0) {
                return Err(Error::ZeroSpineWeight);
            }
            let gap = exp_alpha(alpha, node.perturbation)
                - exp_alpha(alpha, earlier_max - node.log_weight);
            return Ok(gap.max(0.0) / d);
        }
        earlier_max = earlier_max.max(node.level());
        if generation < m {
            let spine_child = if node.on_spine {
                Some(crate::model::choose_spine_child(&vector, alpha, rng)?)
            } else {
                None
            };
            for (j, &c) in vector.weights.iter().enumerate() {
                if c > 0.0 {
                    frontier.push(node.child(j as u32 + 1, c, spine_child == Some(j))?);
                }
            }
        }
        node = frontier.advance()?;
    }
}

/// Settings for [`estimate_h_spine`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HSpinePlan {
    pub n: u64,
    pub node_budget: u64,
    pub form: HSpineForm,
    /// Draws of the last spine vector per replication in the conditional form.
    pub inner_draws: u32,
    pub seeds: SeedSpec,
    pub parallelism: usize,
}

impl HSpinePlan {
    pub fn new(n: u64, master_seed: u64) -> Self {
        HSpinePlan {
            n,
            node_budget: crate::spine::DEFAULT_NODE_BUDGET,
            form: HSpineForm::default(),
            inner_draws: DEFAULT_INNER_DRAWS,
            seeds: SeedSpec::new(master_seed),
            parallelism: 1,
        }
    }

    pub fn with_form(self, form: HSpineForm) -> Self {
        HSpinePlan { form, ..self }
    }

    pub fn with_parallelism(self, parallelism: usize) -> Self {
        HSpinePlan {
            parallelism,
            ..self
        }
    }
}

/// The spine form `H_m` of the constant, averaged over `plan.n` replications.
pub fn estimate_h_spine(
    model: &Model,
    ctx: &TiltContext,
    m: usize,
    plan: &HSpinePlan,
) -> Result<Estimate> {
    let HSpinePlan {
        n,
        node_budget,
        form,
        inner_draws,
        seeds,
        parallelism,
    } = *plan;
    if m == 0 {
        return Err(Error::InvalidParameter("m must be at least 1".into()));
    }
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let scale = 1.0 / (ctx.alpha * ctx.mu);
    let values = run_replications(n, seeds, parallelism, |_, rng| {
        h_spine_term(model, ctx, m, form, inner_draws, node_budget, rng)
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    Ok(Estimate::from_values(values.into_iter().map(|x| x * scale)))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClBoundRow {
    pub t: f64,
    pub estimate: f64,
    pub std_err: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Checks `P(W > t) <= q^α e^{-αt}` for a model with `Q ≡ q`, at `4 SE`.
pub fn cl_bound_check(
    model: &Model,
    ctx: &TiltContext,
    t_grid: &[f64],
    plan: &IsPlan,
) -> Result<Vec<ClBoundRow>> {
    let q = model.degenerate_q().ok_or(Error::NotDegenerateQ)?;
    t_grid
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let s = is_estimate(model, ctx, t, &plan.with_stream(k as u64))?;
            let bound = q.powf(ctx.alpha) * (-ctx.alpha * t).exp();
            Ok(ClBoundRow {
                t,
                estimate: s.mean,
                std_err: s.std_err,
                bound,
                pass: s.mean <= bound + 4.0 * s.std_err,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ModelSpec, NLaw, Outcome, QLaw};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn example1() -> Model {
        ModelSpec::DiscreteTable {
            outcomes: vec![Outcome {
                weights: vec![0.5, 0.5],
                q: 0.5,
            }],
            probs: vec![1.0],
        }
        .build()
        .unwrap()
    }

    #[test]
    fn example1_is_constant() {
        let m = example1();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for depth in 0..6 {
            let w = naive_w_sample(&m, depth, 1e7, &mut rng).unwrap();
            assert_eq!(w, -(2f64.ln()));
        }
        let pool = popdyn_pool(&m, 100, 1, &mut rng).unwrap();
        assert!(pool.samples.iter().all(|&w| w == -(2f64.ln())));
        let tail = naive_tail(&m, -1.0, 100, 4, SeedSpec::new(2), 1).unwrap();
        assert_eq!(tail.value, 1.0);
        let tail = naive_tail(&m, 0.0, 100, 4, SeedSpec::new(2), 1).unwrap();
        assert_eq!(tail.value, 0.0);
    }

    #[test]
    fn depth_zero_is_root_perturbation() {
        let m = ModelSpec::IdenticalPareto {
            a: 3.0,
            b: 0.5,
            upper: None,
            n_law: NLaw::Constant { n: 2 },
            q_law: QLaw::Uniform { lo: 1.0, hi: 2.0 },
        }
        .build()
        .unwrap();
        let mut a = ChaCha8Rng::seed_from_u64(3);
        let mut b = ChaCha8Rng::seed_from_u64(3);
        let w = naive_w_sample(&m, 0, 1e7, &mut a).unwrap();
        assert_eq!(w, m.sample_p(&mut b).log_q());
    }

    #[test]
    fn recursion_budget() {
        let m = example1();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        assert!(matches!(
            naive_w_sample(&m, 30, 1e7, &mut rng),
            Err(Error::RecursionBudget { .. })
        ));
        assert_eq!(max_feasible_depth(&m, 1e7, 100), 22);
    }

    #[test]
    fn pool_file_round_trip() {
        let pool = WPool {
            samples: vec![f64::NEG_INFINITY, -0.5, 1.25],
            iterations: 3,
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pool.txt");
        pool.write_to(&path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text, "-inf\n-0.5\n1.25\n");
        assert_eq!(WPool::read_from(&path).unwrap().samples, pool.samples);
    }

    #[test]
    fn cl_bound_needs_constant_q() {
        let m = ModelSpec::BranchingMm1 {
            theta: 5.0,
            lambda: 0.25,
            poisson_param: 2.0,
            y_rate: 9.0,
        }
        .build()
        .unwrap();
        let ctx = m.solve_alpha().unwrap();
        let plan = IsPlan::new(crate::spine::EstimatorVariant::IndependentQ, 10, 1);
        assert_eq!(
            cl_bound_check(&m, &ctx, &[1.0], &plan),
            Err(Error::NotDegenerateQ)
        );
    }
}
