//! Generic samplers for the spine law that only need pieces of the original
//! law: a mixture over the tilted coordinate, and two acceptance–rejection
//! schemes for bounded weights.

use rand::Rng;
use rand_distr::{Distribution, Exp, Gamma};

use super::{
    exp_sample, gamma_sample, pareto_sample, tilted_exp_difference_inverse, BranchingVector, Model,
    ModelSpec, TiltContext,
};
use crate::error::{Error, Result};

/// Attempts allowed when conditioning on `N = n` by rejection.
const CONDITIONING_ATTEMPTS: u64 = 10_000_000;

/// An accepted vector and the number of proposals it took.
#[derive(Clone, Debug, PartialEq)]
pub struct ArDraw {
    pub vector: BranchingVector,
    pub attempts: u64,
}

impl Model {
    /// One draw of `ψ` under the original law conditioned on `N = n`.
    pub fn sample_p_given_n<R: Rng>(&self, n: u64, rng: &mut R) -> Result<BranchingVector> {
        if n == 0 {
            return Err(Error::InvalidParameter("N must be at least 1".into()));
        }
        let k = n as usize;
        match &self.spec {
            ModelSpec::BranchingMm1 {
                theta,
                lambda,
                y_rate,
                ..
            } => {
                let weights = (0..k)
                    .map(|_| (exp_sample(rng, *theta) - exp_sample(rng, *lambda)).exp())
                    .collect();
                return Ok(BranchingVector {
                    q: exp_sample(rng, *y_rate).exp(),
                    weights,
                });
            }
            ModelSpec::IdenticalPareto {
                a, b, upper, q_law, ..
            } => {
                let c = pareto_sample(rng, *a, *b, *upper);
                return Ok(BranchingVector {
                    q: q_law.sample(rng),
                    weights: vec![c; k],
                });
            }
            ModelSpec::ExpPoisson { lambda, q_law } => {
                // e^{-λc} e^{-c} c^{n-1}
                let c = gamma_sample(rng, n as f64, lambda + 1.0);
                return Ok(BranchingVector {
                    q: q_law.sample(rng),
                    weights: vec![c; k],
                });
            }
            ModelSpec::GammaGeometric { beta } => {
                let q = gamma_sample(rng, 2.0, *beta);
                let c = gamma_sample(rng, n as f64 + 1.0, 2.0 * q);
                return Ok(BranchingVector {
                    q,
                    weights: vec![c; k],
                });
            }
            ModelSpec::SimplexGamma { a, b, q_mode, .. } => {
                let big_b = gamma_sample(rng, *a, *b);
                return Ok(self.simplex_vector(big_b, n, q_mode, rng));
            }
            _ => {}
        }
        if self.n_pmf(n) == Some(0.0) {
            return Err(Error::InvalidParameter(format!("P(N = {n}) = 0")));
        }
        for _ in 0..CONDITIONING_ATTEMPTS {
            let v = self.sample_p(rng);
            if v.n_offspring() == k {
                return Ok(v);
            }
        }
        Err(Error::MissingIngredients(format!(
            "could not condition on N = {n} by rejection"
        )))
    }
}

/// Mixture representation of the spine law: draw `Ñ`, pick the tilted
/// coordinate `i` with probability `E[C_i^α | N = n] / E[D | N = n]`, draw
/// `C̃_i` from `x^α f_{i,n}(x) / E[C_i^α | N = n]`, then fill the remaining
/// coordinates from their conditional law given `(C_i, N)`.
pub fn tilt_mixture_sample<R: Rng>(
    model: &Model,
    ctx: &TiltContext,
    rng: &mut R,
) -> Result<BranchingVector> {
    let alpha = ctx.alpha;
    let missing = |what: &str| Err(Error::MissingIngredients(what.to_string()));
    match &model.spec {
        ModelSpec::NonBranchingExp {
            theta,
            lambda,
            q_law,
        } => {
            let c = tilted_exp_difference_inverse(rng.random(), *theta, *lambda, alpha);
            Ok(BranchingVector {
                q: q_law.sample(rng),
                weights: vec![c],
            })
        }
        ModelSpec::BranchingMm1 {
            theta,
            lambda,
            y_rate,
            ..
        } => {
            let n = ctx.sample_tilted_n(rng)? as usize;
            // exchangeable coordinates: p_{i,n} = 1/n
            let i = rng.random_range(0..n);
            let mut weights = Vec::with_capacity(n);
            for j in 0..n {
                weights.push(if j == i {
                    tilted_exp_difference_inverse(rng.random(), *theta, *lambda, alpha)
                } else {
                    (exp_sample(rng, *theta) - exp_sample(rng, *lambda)).exp()
                });
            }
            Ok(BranchingVector {
                q: exp_sample(rng, *y_rate).exp(),
                weights,
            })
        }
        ModelSpec::IdenticalPareto {
            a, b, upper, q_law, ..
        } => {
            let n = ctx.sample_tilted_n(rng)? as usize;
            let k = a - alpha;
            if upper.is_none() && k <= 0.0 {
                return missing("tilted Pareto marginal needs alpha < a");
            }
            let c = pareto_sample(rng, k, *b, *upper);
            Ok(BranchingVector {
                q: q_law.sample(rng),
                weights: vec![c; n],
            })
        }
        ModelSpec::ExpPoisson { lambda, q_law } => {
            let n = ctx.sample_tilted_n(rng)?;
            let c = Gamma::new(n as f64 + alpha, 1.0 / (lambda + 1.0))
                .expect("positive shape")
                .sample(rng);
            Ok(BranchingVector {
                q: q_law.sample(rng),
                weights: vec![c; n as usize],
            })
        }
        ModelSpec::GammaGeometric { beta } => {
            if alpha >= 2.0 {
                return missing("tilted marginal needs alpha < 2");
            }
            let n = ctx.sample_tilted_n(rng)?;
            // marginal of C given N = n, tilted by c^α, as a Gamma mixture
            let mix = gamma_sample(rng, 2.0 - alpha, *beta);
            let c = gamma_sample(rng, n as f64 + 1.0 + alpha, 2.0 * mix);
            // Q | (C, N = n) under the original law
            let q = gamma_sample(rng, n as f64 + 3.0, beta + 2.0 * c);
            Ok(BranchingVector {
                q,
                weights: vec![c; n as usize],
            })
        }
        ModelSpec::SimplexGamma { .. } => {
            missing("simplex weights have no per-coordinate conditional law")
        }
        ModelSpec::DiscreteTable { .. } => missing("discrete tables have no marginal density"),
        ModelSpec::Custom(_) => missing("custom models expose no mixture ingredients"),
    }
}

/// `E[D | N = n] / Σ_{i<=n} b_i^α`: the acceptance probability of
/// [`tilt_ar_bounded_sample`] given `Ñ = n`.
pub fn ar_bounded_acceptance(
    model: &Model,
    ctx: &TiltContext,
    n: u64,
    bounds: &[f64],
) -> Result<f64> {
    let law = ctx
        .tilted_n_law()
        .ok_or_else(|| Error::MissingIngredients("tilted law of N".into()))?;
    let p = model
        .n_pmf(n)
        .ok_or_else(|| Error::MissingIngredients("law of N".into()))?;
    if p == 0.0 {
        return Err(Error::InvalidParameter(format!("P(N = {n}) = 0")));
    }
    let total: f64 = bounds.iter().map(|b| b.powf(ctx.alpha)).sum();
    Ok(law.probability(n) / p / total)
}

/// Acceptance–rejection for weights bounded by `C_i <= b_i`: propose from the
/// original law given `Ñ = n` and accept when `U <= D / Σ b_i^α`.
///
/// `bounds(n)` returns `(b_1, ..., b_n)`.
pub fn tilt_ar_bounded_sample<R: Rng>(
    model: &Model,
    ctx: &TiltContext,
    bounds: &dyn Fn(u64) -> Vec<f64>,
    rng: &mut R,
) -> Result<ArDraw> {
    let alpha = ctx.alpha;
    let n = ctx.sample_tilted_n(rng)?;
    let b = bounds(n);
    if b.len() != n as usize {
        return Err(Error::InvalidParameter(format!(
            "expected {n} bounds, got {}",
            b.len()
        )));
    }
    let total: f64 = b.iter().map(|x| x.powf(alpha)).sum();
    let mut attempts = 0;
    loop {
        attempts += 1;
        let v = model.sample_p_given_n(n, rng)?;
        for (&c, &bound) in v.weights.iter().zip(&b) {
            if c > bound {
                return Err(Error::NonBoundedModel { value: c, bound });
            }
        }
        let u: f64 = rng.random();
        if u <= v.spine_weight(alpha) / total {
            return Ok(ArDraw {
                vector: v,
                attempts,
            });
        }
    }
}

/// Acceptance–rejection for `D <= b`: propose from the original law given
/// `Ñ = n` and accept when `Z > (b / D)^{1/a}` with `Z ~ Pareto(a, 1)`.
/// Given `Ñ = n` the acceptance probability is `E[D | N = n] / b`.
pub fn tilt_ar_sumbound_sample<R: Rng>(
    model: &Model,
    ctx: &TiltContext,
    b: f64,
    a: f64,
    rng: &mut R,
) -> Result<ArDraw> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::InvalidParameter("a and b must be positive".into()));
    }
    let n = ctx.sample_tilted_n(rng)?;
    let pareto = Exp::new(a).expect("positive shape");
    let mut attempts = 0;
    loop {
        attempts += 1;
        let v = model.sample_p_given_n(n, rng)?;
        let d = v.spine_weight(ctx.alpha);
        if d > b {
            return Err(Error::SumBoundViolated { d, bound: b });
        }
        let z = pareto.sample(rng).exp();
        if d > 0.0 && z > (b / d).powf(1.0 / a) {
            return Ok(ArDraw {
                vector: v,
                attempts,
            });
        }
    }
}
