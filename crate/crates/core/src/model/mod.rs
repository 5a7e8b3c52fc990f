//! Branching vector laws `ψ = (N, Q, C_1, ..., C_N)` under the original
//! measure and under the spine tilt.
//!
//! A [`ModelSpec`] is the declarative description (it round-trips through the
//! experiment configuration file); [`Model`] is the validated form with
//! cached quantities. [`Model::solve_alpha`] finds the Cramér–Lundberg root
//! `E[Σ C_i^α] = 1`, checks the drift `μ = E[Σ C_i^α log C_i] > 0`, and
//! returns the [`TiltContext`] every spine-law sampler needs.

mod custom;
mod efficiency;
mod laws;
mod root;
mod tilt;

use std::sync::{Arc, OnceLock};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Gamma, Poisson};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{digamma, ln_gamma};

use crate::error::{Error, Result};
use crate::replication::Estimate;

pub use custom::CustomModel;
pub use efficiency::{q_efficiency_check, EfficiencyMethod, QEfficiencyReport};
pub use laws::{NLaw, QLaw, TabulatedLaw};
pub use tilt::{
    ar_bounded_acceptance, tilt_ar_bounded_sample, tilt_ar_sumbound_sample, tilt_mixture_sample,
    ArDraw,
};

use root::Crossing;

/// Draws used to evaluate the moment function of a custom model that has no
/// analytic `mellin` hook.
const EMPIRICAL_SAMPLE: usize = 100_000;
const EMPIRICAL_SEED: u64 = 0x005e_ed0f_ce11;

/// Largest acceptable `|mellin(alpha) - 1|` for analytic moment functions.
pub const ROOT_TOLERANCE: f64 = 1e-10;

/// One realization of the branching vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchingVector {
    pub q: f64,
    pub weights: Vec<f64>,
}

/// `c^s` with `0^s := 0` for every `s`, so that zero weights never count.
#[inline]
pub(crate) fn pow0(c: f64, s: f64) -> f64 {
    if c == 0.0 {
        0.0
    } else {
        c.powf(s)
    }
}

impl BranchingVector {
    pub fn new(q: f64, weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidParameter("N must be at least 1".into()));
        }
        if !(q >= 0.0) || weights.iter().any(|&c| !(c >= 0.0)) {
            return Err(Error::InvalidParameter(
                "Q and the weights must be nonnegative".into(),
            ));
        }
        Ok(BranchingVector { q, weights })
    }

    pub fn n_offspring(&self) -> usize {
        self.weights.len()
    }

    /// `D = Σ C_i^α`.
    pub fn spine_weight(&self, alpha: f64) -> f64 {
        self.weights.iter().map(|&c| pow0(c, alpha)).sum()
    }

    /// `Y = log Q`, `-inf` when `Q = 0`.
    pub fn log_q(&self) -> f64 {
        self.q.ln()
    }
}

/// How the perturbation of the simplex model is generated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SimplexQ {
    /// `Q` independent of everything else.
    Independent { law: QLaw },
    /// `Q = 2B`.
    TwoTimesB,
}

/// One atom of a [`ModelSpec::DiscreteTable`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub weights: Vec<f64>,
    pub q: f64,
}

/// Declarative description of the law of `ψ`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ModelSpec {
    /// `N ≡ 1`, `C = e^{χ - τ}`, `χ ~ Exp(theta)`, `τ ~ Exp(lambda)`.
    NonBranchingExp {
        theta: f64,
        lambda: f64,
        q_law: QLaw,
    },
    /// i.i.d. `C_i = e^{χ_i - τ_i}`, `N = K | K > 0` with
    /// `K ~ Poisson(poisson_param)`, `Q = e^Y` with `Y ~ Exp(y_rate)`.
    BranchingMm1 {
        theta: f64,
        lambda: f64,
        poisson_param: f64,
        y_rate: f64,
    },
    /// `C_i ≡ C ~ Pareto(a, b)`, optionally truncated to `C <= upper`;
    /// `N` and `Q` independent.
    IdenticalPareto {
        a: f64,
        b: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        upper: Option<f64>,
        n_law: NLaw,
        q_law: QLaw,
    },
    /// `C_i ≡ C ~ Exp(lambda)`, `N | C ~ Poisson(C) + 1`.
    ExpPoisson { lambda: f64, q_law: QLaw },
    /// `Q ~ Gamma(2, beta)`, `N ~ Geometric(1/2)` on `{1, 2, ...}`,
    /// `C_i ≡ C | (N, Q) ~ Gamma(N + 1, rate 2Q)`.
    GammaGeometric { beta: f64 },
    /// `B ~ Gamma(a, rate b)`, `C_i = B β_i^{1/α}` with `β ~ Dirichlet(1, ..., 1)`
    /// given `N`, where `α` solves `E[B^α] = 1`.
    SimplexGamma {
        a: f64,
        b: f64,
        n_law: NLaw,
        q_mode: SimplexQ,
    },
    /// Finitely many outcomes `(C_1, ..., C_N, Q)`.
    DiscreteTable {
        outcomes: Vec<Outcome>,
        probs: Vec<f64>,
    },
    #[serde(skip)]
    Custom(Arc<dyn CustomModel>),
}

#[derive(Clone, Debug)]
struct SimplexCache {
    /// `α` with `E[B^α] = 1`, used to build the weights.
    exponent: f64,
    n_pmf: Vec<(u64, f64)>,
}

/// A validated model.
#[derive(Clone, Debug)]
pub struct Model {
    spec: ModelSpec,
    simplex: Option<SimplexCache>,
    empirical: Arc<OnceLock<Vec<BranchingVector>>>,
}

fn exp_sample<R: Rng>(rng: &mut R, rate: f64) -> f64 {
    Exp::new(rate).expect("positive rate").sample(rng)
}

fn gamma_sample<R: Rng>(rng: &mut R, shape: f64, rate: f64) -> f64 {
    Gamma::new(shape, 1.0 / rate)
        .expect("positive shape and rate")
        .sample(rng)
}

fn poisson_plus_one<R: Rng>(rng: &mut R, mean: f64) -> u64 {
    if mean > 0.0 {
        Poisson::new(mean).expect("finite mean").sample(rng) as u64 + 1
    } else {
        1
    }
}

/// Pareto with density `∝ c^{-k-1}` on `[b, upper]` (`upper = inf` needs `k > 0`).
fn pareto_sample<R: Rng>(rng: &mut R, k: f64, b: f64, upper: Option<f64>) -> f64 {
    let u: f64 = rng.random();
    match upper {
        None => b * (1.0 - u).powf(-1.0 / k),
        Some(top) if k.abs() < 1e-12 => b * (top / b).powf(u),
        Some(top) => {
            let lo = b.powf(-k);
            let hi = top.powf(-k);
            (lo + u * (hi - lo)).powf(-1.0 / k)
        }
    }
}

/// `Dirichlet(1, ..., 1)` of dimension `n`.
fn flat_dirichlet<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    let mut e: Vec<f64> = (0..n).map(|_| exp_sample(rng, 1.0)).collect();
    let total: f64 = e.iter().sum();
    e.iter_mut().for_each(|x| *x /= total);
    e
}

/// Inversion of the tilted density of `C = e^{χ - τ}`,
/// `f̃(x) ∝ x^{α+λ-1} 1(x < 1) + x^{-(θ-α)-1} 1(x >= 1)`.
pub(crate) fn tilted_exp_difference_inverse(u: f64, theta: f64, lambda: f64, alpha: f64) -> f64 {
    let up = theta - alpha;
    let down = lambda + alpha;
    let p_below = up / (theta + lambda);
    if u < p_below {
        (u / p_below).powf(1.0 / down)
    } else {
        (1.0 - (u - p_below) / (1.0 - p_below)).powf(-1.0 / up)
    }
}

/// Tabulates an unnormalized weight on `{1, 2, ...}` until the tail is negligible.
fn tabulate_infinite(weight: impl Fn(u64) -> f64) -> Vec<(u64, f64)> {
    let mut out = Vec::new();
    let mut total = 0.0;
    let mut peak = 0.0f64;
    for n in 1..=200_000u64 {
        let w = weight(n);
        out.push((n, w));
        total += w;
        peak = peak.max(w);
        if n > 16 && w < peak && w <= 1e-18 * total {
            break;
        }
    }
    out
}

impl ModelSpec {
    pub fn build(self) -> Result<Model> {
        Model::new(self)
    }
}

impl Model {
    pub fn new(spec: ModelSpec) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        let positive = |x: f64| x > 0.0 && x.is_finite();
        let mut simplex = None;
        match &spec {
            ModelSpec::NonBranchingExp {
                theta,
                lambda,
                q_law,
            } => {
                if !positive(*theta) || !positive(*lambda) {
                    return bad("theta and lambda must be positive".into());
                }
                q_law.validate()?;
            }
            ModelSpec::BranchingMm1 {
                theta,
                lambda,
                poisson_param,
                y_rate,
            } => {
                if ![*theta, *lambda, *poisson_param, *y_rate]
                    .into_iter()
                    .all(positive)
                {
                    return bad("mm1 rates must be positive".into());
                }
            }
            ModelSpec::IdenticalPareto {
                a,
                b,
                upper,
                n_law,
                q_law,
            } => {
                if !positive(*a) || !positive(*b) {
                    return bad("Pareto shape and scale must be positive".into());
                }
                if let Some(u) = upper {
                    if !(*u > *b && u.is_finite()) {
                        return bad("Pareto truncation point must exceed the scale".into());
                    }
                }
                n_law.validate()?;
                q_law.validate()?;
            }
            ModelSpec::ExpPoisson { lambda, q_law } => {
                if !positive(*lambda) {
                    return bad("lambda must be positive".into());
                }
                q_law.validate()?;
            }
            ModelSpec::GammaGeometric { beta } => {
                if !positive(*beta) {
                    return bad("beta must be positive".into());
                }
            }
            ModelSpec::SimplexGamma {
                a,
                b,
                n_law,
                q_mode,
            } => {
                if !positive(*a) || !positive(*b) {
                    return bad("Gamma shape and rate must be positive".into());
                }
                n_law.validate()?;
                if let SimplexQ::Independent { law } = q_mode {
                    law.validate()?;
                }
                let exponent = simplex_exponent(*a, *b)?;
                simplex = Some(SimplexCache {
                    exponent,
                    n_pmf: n_law.tabulate(|n| n_law.pmf(n)),
                });
            }
            ModelSpec::DiscreteTable { outcomes, probs } => {
                if outcomes.is_empty() || outcomes.len() != probs.len() {
                    return bad("outcomes and probs must be nonempty and equally long".into());
                }
                if probs.iter().any(|&p| !(p >= 0.0)) {
                    return bad("probabilities must be nonnegative".into());
                }
                let total: f64 = probs.iter().sum();
                if (total - 1.0).abs() > 1e-12 {
                    return bad(format!("probabilities sum to {total}, not 1"));
                }
                for o in outcomes {
                    BranchingVector::new(o.q, o.weights.clone())?;
                }
            }
            ModelSpec::Custom(_) => {}
        }
        Ok(Model {
            spec,
            simplex,
            empirical: Arc::new(OnceLock::new()),
        })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn name(&self) -> &'static str {
        match self.spec {
            ModelSpec::NonBranchingExp { .. } => "non_branching_exp",
            ModelSpec::BranchingMm1 { .. } => "branching_mm1",
            ModelSpec::IdenticalPareto { .. } => "identical_pareto",
            ModelSpec::ExpPoisson { .. } => "exp_poisson",
            ModelSpec::GammaGeometric { .. } => "gamma_geometric",
            ModelSpec::SimplexGamma { .. } => "simplex_gamma",
            ModelSpec::DiscreteTable { .. } => "discrete_table",
            ModelSpec::Custom(_) => "custom",
        }
    }

    /// True when `Q` is independent of `(N, C_1, C_2, ...)`.
    pub fn q_independent(&self) -> bool {
        match &self.spec {
            ModelSpec::NonBranchingExp { .. }
            | ModelSpec::BranchingMm1 { .. }
            | ModelSpec::IdenticalPareto { .. }
            | ModelSpec::ExpPoisson { .. } => true,
            ModelSpec::GammaGeometric { .. } => false,
            ModelSpec::SimplexGamma { q_mode, .. } => {
                matches!(q_mode, SimplexQ::Independent { .. })
            }
            ModelSpec::DiscreteTable { outcomes, .. } => {
                outcomes.iter().all(|o| o.q == outcomes[0].q)
            }
            ModelSpec::Custom(c) => c.q_independent(),
        }
    }

    /// The constant `q` if `Q ≡ q`.
    pub fn degenerate_q(&self) -> Option<f64> {
        match &self.spec {
            ModelSpec::NonBranchingExp { q_law, .. }
            | ModelSpec::IdenticalPareto { q_law, .. }
            | ModelSpec::ExpPoisson { q_law, .. } => q_law.degenerate(),
            ModelSpec::SimplexGamma {
                q_mode: SimplexQ::Independent { law },
                ..
            } => law.degenerate(),
            ModelSpec::DiscreteTable { outcomes, .. } => outcomes
                .iter()
                .all(|o| o.q == outcomes[0].q)
                .then_some(outcomes[0].q),
            ModelSpec::Custom(c) => c.degenerate_q(),
            _ => None,
        }
    }

    /// `ess inf Q`.
    pub fn q_lower_bound(&self) -> f64 {
        match &self.spec {
            ModelSpec::NonBranchingExp { q_law, .. }
            | ModelSpec::IdenticalPareto { q_law, .. }
            | ModelSpec::ExpPoisson { q_law, .. } => q_law.lower_bound(),
            ModelSpec::BranchingMm1 { .. } => 1.0,
            ModelSpec::SimplexGamma { q_mode, .. } => match q_mode {
                SimplexQ::Independent { law } => law.lower_bound(),
                SimplexQ::TwoTimesB => 0.0,
            },
            ModelSpec::DiscreteTable { outcomes, probs } => outcomes
                .iter()
                .zip(probs)
                .filter(|(_, &p)| p > 0.0)
                .map(|(o, _)| o.q)
                .fold(f64::INFINITY, f64::min),
            ModelSpec::GammaGeometric { .. } => 0.0,
            ModelSpec::Custom(c) => c.degenerate_q().unwrap_or(0.0),
        }
    }

    /// `E[N]`.
    pub fn mean_offspring(&self) -> f64 {
        match &self.spec {
            ModelSpec::NonBranchingExp { .. } => 1.0,
            ModelSpec::BranchingMm1 { poisson_param, .. } => NLaw::TruncatedPoisson {
                lambda: *poisson_param,
            }
            .mean(),
            ModelSpec::IdenticalPareto { n_law, .. } | ModelSpec::SimplexGamma { n_law, .. } => {
                n_law.mean()
            }
            ModelSpec::ExpPoisson { lambda, .. } => 1.0 + 1.0 / lambda,
            ModelSpec::GammaGeometric { .. } => 2.0,
            ModelSpec::DiscreteTable { outcomes, probs } => outcomes
                .iter()
                .zip(probs)
                .map(|(o, p)| p * o.weights.len() as f64)
                .sum(),
            ModelSpec::Custom(_) => {
                let sample = self.empirical_sample();
                sample.iter().map(|v| v.n_offspring() as f64).sum::<f64>() / sample.len() as f64
            }
        }
    }

    /// `P(N = n)` when known in closed form.
    pub fn n_pmf(&self, n: u64) -> Option<f64> {
        match &self.spec {
            ModelSpec::NonBranchingExp { .. } => Some(f64::from(u8::from(n == 1))),
            ModelSpec::BranchingMm1 { poisson_param, .. } => Some(
                NLaw::TruncatedPoisson {
                    lambda: *poisson_param,
                }
                .pmf(n),
            ),
            ModelSpec::IdenticalPareto { n_law, .. } | ModelSpec::SimplexGamma { n_law, .. } => {
                Some(n_law.pmf(n))
            }
            ModelSpec::GammaGeometric { .. } => Some(NLaw::Geometric { p: 0.5 }.pmf(n)),
            ModelSpec::ExpPoisson { lambda, .. } => {
                // P(N = n) = E[e^{-C} C^{n-1}] / (n-1)! = λ / (λ+1)^n
                (n >= 1).then(|| lambda / (lambda + 1.0).powi(n as i32))
            }
            ModelSpec::DiscreteTable { outcomes, probs } => Some(
                outcomes
                    .iter()
                    .zip(probs)
                    .filter(|(o, _)| o.weights.len() as u64 == n)
                    .map(|(_, p)| p)
                    .sum(),
            ),
            ModelSpec::Custom(_) => None,
        }
    }

    fn empirical_sample(&self) -> &[BranchingVector] {
        self.empirical.get_or_init(|| {
            let mut rng = ChaCha8Rng::seed_from_u64(EMPIRICAL_SEED);
            (0..EMPIRICAL_SAMPLE)
                .map(|_| self.sample_p(&mut rng))
                .collect()
        })
    }

    /// Right edge of the analytic domain of `mellin`, if finite.
    pub fn mellin_domain_upper(&self) -> Option<f64> {
        match &self.spec {
            ModelSpec::NonBranchingExp { theta, .. } | ModelSpec::BranchingMm1 { theta, .. } => {
                Some(*theta)
            }
            ModelSpec::IdenticalPareto { a, upper: None, .. } => Some(*a),
            ModelSpec::GammaGeometric { .. } => Some(2.0),
            _ => None,
        }
    }

    fn mellin_domain_lower(&self) -> f64 {
        match &self.spec {
            ModelSpec::NonBranchingExp { lambda, .. } | ModelSpec::BranchingMm1 { lambda, .. } => {
                -lambda
            }
            ModelSpec::ExpPoisson { .. } => -1.0,
            ModelSpec::GammaGeometric { .. } => -2.0,
            ModelSpec::SimplexGamma { a, .. } => {
                let e = self.simplex.as_ref().expect("simplex cache").exponent;
                (-a).max(-e)
            }
            // zero weights and unbounded-below laws: only s >= 0 is safe
            _ => -f64::MIN_POSITIVE,
        }
    }

    fn check_domain(&self, s: f64) -> Result<()> {
        let lo = self.mellin_domain_lower();
        let hi = self.mellin_domain_upper();
        if s.is_nan() || s <= lo || hi.is_some_and(|h| s >= h) {
            return Err(Error::Domain {
                s,
                domain: format!(
                    "({lo}, {})",
                    hi.map_or("inf".to_string(), |h| h.to_string())
                ),
            });
        }
        Ok(())
    }

    /// `E[Σ_{i<=N} C_i^s]`.
    pub fn mellin(&self, s: f64) -> Result<f64> {
        self.check_domain(s)?;
        let value = match &self.spec {
            ModelSpec::NonBranchingExp { theta, lambda, .. } => {
                theta * lambda / ((theta - s) * (lambda + s))
            }
            ModelSpec::BranchingMm1 {
                theta,
                lambda,
                poisson_param,
                ..
            } => {
                NLaw::TruncatedPoisson {
                    lambda: *poisson_param,
                }
                .mean()
                    * theta
                    * lambda
                    / ((theta - s) * (lambda + s))
            }
            ModelSpec::IdenticalPareto {
                a, b, upper, n_law, ..
            } => n_law.mean() * pareto_moment(*a, *b, *upper, s),
            ModelSpec::ExpPoisson { lambda, .. } => {
                (ln_gamma(s + 2.0) - (s + 1.0) * lambda.ln()).exp()
                    + (ln_gamma(s + 1.0) - s * lambda.ln()).exp()
            }
            ModelSpec::GammaGeometric { beta } => {
                2.0 * (s * beta.ln() + ln_gamma(s + 2.0) + ln_gamma(2.0 - s)).exp()
            }
            ModelSpec::SimplexGamma { a, b, .. } => {
                let cache = self.simplex.as_ref().expect("simplex cache");
                let r = s / cache.exponent;
                (ln_gamma(a + s) - ln_gamma(*a) - s * b.ln()).exp()
                    * dirichlet_moment_sum(&cache.n_pmf, r).0
            }
            ModelSpec::DiscreteTable { outcomes, probs } => outcomes
                .iter()
                .zip(probs)
                .map(|(o, p)| p * o.weights.iter().map(|&c| pow0(c, s)).sum::<f64>())
                .sum(),
            ModelSpec::Custom(c) => match c.mellin(s) {
                Some(v) if v.is_finite() => v,
                Some(_) => {
                    return Err(Error::Domain {
                        s,
                        domain: "custom mellin hook".into(),
                    })
                }
                None => {
                    let sample = self.empirical_sample();
                    sample.iter().map(|v| v.spine_weight(s)).sum::<f64>() / sample.len() as f64
                }
            },
        };
        if value.is_nan() {
            return Err(Error::Domain {
                s,
                domain: "moment evaluates to NaN".into(),
            });
        }
        Ok(value)
    }

    /// True when `mellin` is computed in closed form (no sampling).
    pub fn has_analytic_mellin(&self) -> bool {
        match &self.spec {
            ModelSpec::Custom(c) => c.mellin(0.5).is_some(),
            _ => true,
        }
    }

    /// Plain Monte Carlo estimate of `E[Σ C_i^s]` from `n` fresh draws.
    pub fn mellin_mc<R: Rng>(&self, s: f64, n: usize, rng: &mut R) -> Estimate {
        Estimate::from_values((0..n).map(|_| self.sample_p(rng).spine_weight(s)))
    }

    /// `d/ds E[Σ C_i^s]`: analytic where available, otherwise a central
    /// difference with step `1e-5 max(1, s)`.
    pub fn mellin_derivative(&self, s: f64) -> Result<f64> {
        let m = self.mellin(s)?;
        let analytic = match &self.spec {
            ModelSpec::NonBranchingExp { theta, lambda, .. }
            | ModelSpec::BranchingMm1 { theta, lambda, .. } => {
                Some(m * (1.0 / (theta - s) - 1.0 / (lambda + s)))
            }
            ModelSpec::IdenticalPareto {
                a, b, upper: None, ..
            } => Some(m * (b.ln() + 1.0 / (a - s))),
            ModelSpec::ExpPoisson { lambda, .. } => {
                let l = lambda.ln();
                Some(
                    (ln_gamma(s + 2.0) - (s + 1.0) * l).exp() * (digamma(s + 2.0) - l)
                        + (ln_gamma(s + 1.0) - s * l).exp() * (digamma(s + 1.0) - l),
                )
            }
            ModelSpec::GammaGeometric { beta } => {
                Some(m * (beta.ln() + digamma(s + 2.0) - digamma(2.0 - s)))
            }
            ModelSpec::SimplexGamma { a, b, .. } => {
                let cache = self.simplex.as_ref().expect("simplex cache");
                let r = s / cache.exponent;
                let eb = (ln_gamma(a + s) - ln_gamma(*a) - s * b.ln()).exp();
                let (k, dk) = dirichlet_moment_sum(&cache.n_pmf, r);
                Some(eb * ((digamma(a + s) - b.ln()) * k + dk / cache.exponent))
            }
            ModelSpec::DiscreteTable { outcomes, probs } => Some(
                outcomes
                    .iter()
                    .zip(probs)
                    .map(|(o, p)| {
                        p * o
                            .weights
                            .iter()
                            .filter(|&&c| c > 0.0)
                            .map(|&c| c.powf(s) * c.ln())
                            .sum::<f64>()
                    })
                    .sum(),
            ),
            ModelSpec::Custom(c) if c.mellin(s).is_none() => {
                let sample = self.empirical_sample();
                Some(
                    sample
                        .iter()
                        .flat_map(|v| v.weights.iter())
                        .filter(|&&c| c > 0.0)
                        .map(|&c| c.powf(s) * c.ln())
                        .sum::<f64>()
                        / sample.len() as f64,
                )
            }
            _ => None,
        };
        match analytic {
            Some(d) => Ok(d),
            None => {
                let h = 1e-5 * s.abs().max(1.0);
                Ok((self.mellin(s + h)? - self.mellin(s - h)?) / (2.0 * h))
            }
        }
    }

    /// `μ = E[Σ C_i^α log C_i]`, with `0 log 0 := 0`.
    pub fn drift_mu(&self, alpha: f64) -> Result<f64> {
        self.mellin_derivative(alpha)
    }

    /// Finds the Cramér–Lundberg root and checks that the drift is positive.
    ///
    /// Scans `s = 2^-6, 2^-5, ...` up to the edge of the analytic domain for
    /// sign changes of `mellin(s) - 1`, preferring an upward crossing (which
    /// also certifies `mellin < 1` somewhere to the left of the root).
    pub fn solve_alpha(&self) -> Result<TiltContext> {
        let grid = root::scan_grid(self.mellin_domain_upper());
        let g = |s: f64| self.mellin(s).ok().map(|m| m - 1.0);
        let crossings = root::find_crossings(g, &grid);
        if crossings.is_empty() {
            return Err(Error::NoRoot(format!(
                "scanned s in [{}, {}]",
                grid[0],
                grid[grid.len() - 1]
            )));
        }
        let is_upward = |c: &Crossing| match *c {
            Crossing::Bracket { upward, .. } => upward,
            Crossing::Exact(s) => self.mellin_derivative(s).is_ok_and(|d| d > 0.0),
        };
        let chosen = crossings
            .iter()
            .find(|c| is_upward(c))
            .unwrap_or(&crossings[0]);
        let alpha = match *chosen {
            Crossing::Exact(s) => s,
            Crossing::Bracket { lo, hi, .. } => root::bisect(
                |s| self.mellin(s).map_or(f64::INFINITY, |m| m - 1.0),
                lo,
                hi,
            ),
        };
        let residual = (self.mellin(alpha)? - 1.0).abs();
        if self.has_analytic_mellin() && residual > ROOT_TOLERANCE {
            return Err(Error::NoRoot(format!(
                "bisection stalled at alpha = {alpha} with |mellin - 1| = {residual:e}"
            )));
        }
        let mu = self.drift_mu(alpha)?;
        if !(mu > 0.0) {
            return Err(Error::NonPositiveDrift { alpha, mu });
        }
        TiltContext::build(self, alpha, mu)
    }

    /// One draw of `ψ` under the original measure.
    pub fn sample_p<R: Rng>(&self, rng: &mut R) -> BranchingVector {
        match &self.spec {
            ModelSpec::NonBranchingExp {
                theta,
                lambda,
                q_law,
            } => {
                let c = (exp_sample(rng, *theta) - exp_sample(rng, *lambda)).exp();
                BranchingVector {
                    q: q_law.sample(rng),
                    weights: vec![c],
                }
            }
            ModelSpec::BranchingMm1 {
                theta,
                lambda,
                poisson_param,
                y_rate,
            } => {
                let n = NLaw::TruncatedPoisson {
                    lambda: *poisson_param,
                }
                .sample(rng);
                let weights = (0..n)
                    .map(|_| (exp_sample(rng, *theta) - exp_sample(rng, *lambda)).exp())
                    .collect();
                BranchingVector {
                    q: exp_sample(rng, *y_rate).exp(),
                    weights,
                }
            }
            ModelSpec::IdenticalPareto {
                a,
                b,
                upper,
                n_law,
                q_law,
            } => {
                let n = n_law.sample(rng);
                let c = pareto_sample(rng, *a, *b, *upper);
                BranchingVector {
                    q: q_law.sample(rng),
                    weights: vec![c; n as usize],
                }
            }
            ModelSpec::ExpPoisson { lambda, q_law } => {
                let c = exp_sample(rng, *lambda);
                let n = poisson_plus_one(rng, c);
                BranchingVector {
                    q: q_law.sample(rng),
                    weights: vec![c; n as usize],
                }
            }
            ModelSpec::GammaGeometric { beta } => {
                let q = gamma_sample(rng, 2.0, *beta);
                let n = NLaw::Geometric { p: 0.5 }.sample(rng);
                let c = gamma_sample(rng, n as f64 + 1.0, 2.0 * q);
                BranchingVector {
                    q,
                    weights: vec![c; n as usize],
                }
            }
            ModelSpec::SimplexGamma {
                a,
                b,
                n_law,
                q_mode,
            } => {
                let big_b = gamma_sample(rng, *a, *b);
                let n = n_law.sample(rng);
                self.simplex_vector(big_b, n, q_mode, rng)
            }
            ModelSpec::DiscreteTable { outcomes, probs } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut k = outcomes.len() - 1;
                for (j, p) in probs.iter().enumerate() {
                    acc += p;
                    if u < acc {
                        k = j;
                        break;
                    }
                }
                BranchingVector {
                    q: outcomes[k].q,
                    weights: outcomes[k].weights.clone(),
                }
            }
            ModelSpec::Custom(c) => c.sample_p(rng as &mut dyn RngCore),
        }
    }

    fn simplex_vector<R: Rng>(
        &self,
        big_b: f64,
        n: u64,
        q_mode: &SimplexQ,
        rng: &mut R,
    ) -> BranchingVector {
        let exponent = self.simplex.as_ref().expect("simplex cache").exponent;
        let weights = flat_dirichlet(rng, n as usize)
            .into_iter()
            .map(|beta| big_b * beta.powf(1.0 / exponent))
            .collect();
        let q = match q_mode {
            SimplexQ::Independent { law } => law.sample(rng),
            SimplexQ::TwoTimesB => 2.0 * big_b,
        };
        BranchingVector { q, weights }
    }

    /// One draw from the spine law `P̃(ψ ∈ B) = E[1(ψ ∈ B) Σ C_i^α]`, using
    /// each built-in model's closed-form tilt.
    pub fn sample_tilted<R: Rng>(&self, ctx: &TiltContext, rng: &mut R) -> Result<BranchingVector> {
        let alpha = ctx.alpha;
        let no_tilt = |why: &str| Err(Error::NoTiltAvailable(why.to_string()));
        Ok(match &self.spec {
            ModelSpec::NonBranchingExp {
                theta,
                lambda,
                q_law,
            } => {
                if alpha >= *theta {
                    return no_tilt("alpha >= theta");
                }
                let c = (exp_sample(rng, theta - alpha) - exp_sample(rng, lambda + alpha)).exp();
                BranchingVector {
                    q: q_law.sample(rng),
                    weights: vec![c],
                }
            }
            ModelSpec::BranchingMm1 {
                theta,
                lambda,
                poisson_param,
                y_rate,
            } => {
                if alpha >= *theta {
                    return no_tilt("alpha >= theta");
                }
                // size-biased K | K > 0 is K + 1
                let n = poisson_plus_one(rng, *poisson_param) as usize;
                let tilted = rng.random_range(0..n);
                let weights = (0..n)
                    .map(|i| {
                        if i == tilted {
                            (exp_sample(rng, theta - alpha) - exp_sample(rng, lambda + alpha)).exp()
                        } else {
                            (exp_sample(rng, *theta) - exp_sample(rng, *lambda)).exp()
                        }
                    })
                    .collect();
                BranchingVector {
                    q: exp_sample(rng, *y_rate).exp(),
                    weights,
                }
            }
            ModelSpec::IdenticalPareto {
                a, b, upper, q_law, ..
            } => {
                let k = a - alpha;
                if upper.is_none() && k <= 0.0 {
                    return no_tilt("alpha >= Pareto shape");
                }
                let n = ctx.sample_tilted_n(rng)?;
                let c = pareto_sample(rng, k, *b, *upper);
                BranchingVector {
                    q: q_law.sample(rng),
                    weights: vec![c; n as usize],
                }
            }
            ModelSpec::ExpPoisson { lambda, q_law } => {
                let n = ctx.sample_tilted_n(rng)?;
                let c = gamma_sample(rng, n as f64 + alpha, lambda + 1.0);
                BranchingVector {
                    q: q_law.sample(rng),
                    weights: vec![c; n as usize],
                }
            }
            ModelSpec::GammaGeometric { beta } => {
                if alpha >= 2.0 {
                    return no_tilt("alpha >= 2");
                }
                let q = gamma_sample(rng, 2.0 - alpha, *beta);
                let c = gamma_sample(rng, alpha + 2.0, q);
                let n = poisson_plus_one(rng, q * c);
                BranchingVector {
                    q,
                    weights: vec![c; n as usize],
                }
            }
            ModelSpec::SimplexGamma {
                a,
                b,
                n_law,
                q_mode,
            } => {
                let big_b = gamma_sample(rng, a + alpha, *b);
                let n = n_law.sample(rng);
                self.simplex_vector(big_b, n, q_mode, rng)
            }
            ModelSpec::DiscreteTable { outcomes, .. } => {
                let law = ctx.discrete.as_ref().expect("discrete tilt table");
                let k = law.sample(rng) as usize - 1;
                BranchingVector {
                    q: outcomes[k].q,
                    weights: outcomes[k].weights.clone(),
                }
            }
            ModelSpec::Custom(c) => match c.sample_tilted(alpha, rng as &mut dyn RngCore) {
                Some(v) => v,
                None => return no_tilt("custom model has no tilt hook"),
            },
        })
    }

    /// Exact tilted pmf `p_k Σ_i c_{k,i}^α` of a discrete-table model.
    pub fn discrete_tilted_pmf(&self, alpha: f64) -> Option<Vec<f64>> {
        match &self.spec {
            ModelSpec::DiscreteTable { outcomes, probs } => Some(
                outcomes
                    .iter()
                    .zip(probs)
                    .map(|(o, p)| p * o.weights.iter().map(|&c| pow0(c, alpha)).sum::<f64>())
                    .collect(),
            ),
            _ => None,
        }
    }

    /// Unnormalized `P̃(Ñ = n) = E[1(N = n) Σ C_i^α]` as a table, when known.
    fn tilted_n_weights(&self, alpha: f64) -> Option<Vec<(u64, f64)>> {
        match &self.spec {
            ModelSpec::NonBranchingExp { .. } => Some(vec![(1, 1.0)]),
            ModelSpec::BranchingMm1 { poisson_param, .. } => {
                let law = NLaw::TruncatedPoisson {
                    lambda: *poisson_param,
                };
                Some(law.tabulate(|n| law.size_biased_pmf(n)))
            }
            ModelSpec::IdenticalPareto { n_law, .. } => {
                Some(n_law.tabulate(|n| n_law.size_biased_pmf(n)))
            }
            ModelSpec::ExpPoisson { lambda, .. } => Some(tabulate_infinite(|n| {
                let nf = n as f64;
                (nf.ln() + lambda.ln() + ln_gamma(nf + alpha)
                    - ln_gamma(nf)
                    - (nf + alpha) * (lambda + 1.0).ln())
                .exp()
            })),
            ModelSpec::GammaGeometric { .. } => Some(tabulate_infinite(|n| {
                let nf = n as f64;
                (nf.ln() - nf * std::f64::consts::LN_2 + ln_gamma(nf + 1.0 + alpha)
                    - ln_gamma(nf + 1.0))
                .exp()
            })),
            ModelSpec::SimplexGamma { n_law, .. } => Some(n_law.tabulate(|n| n_law.pmf(n))),
            ModelSpec::DiscreteTable { outcomes, probs } => {
                let mut by_n: Vec<(u64, f64)> = Vec::new();
                for (o, p) in outcomes.iter().zip(probs) {
                    let n = o.weights.len() as u64;
                    let w = p * o.weights.iter().map(|&c| pow0(c, alpha)).sum::<f64>();
                    match by_n.iter_mut().find(|e| e.0 == n) {
                        Some(e) => e.1 += w,
                        None => by_n.push((n, w)),
                    }
                }
                by_n.sort_by_key(|e| e.0);
                Some(by_n)
            }
            ModelSpec::Custom(_) => None,
        }
    }
}

/// `E[C^s]` for `C ~ Pareto(a, b)`, optionally truncated at `upper`.
fn pareto_moment(a: f64, b: f64, upper: Option<f64>, s: f64) -> f64 {
    match upper {
        None => a * b.powf(s) / (a - s),
        Some(u) => {
            let norm = 1.0 - (b / u).powf(a);
            if (s - a).abs() < 1e-12 {
                a * b.powf(a) * (u / b).ln() / norm
            } else {
                a * b.powf(a) * (u.powf(s - a) - b.powf(s - a)) / ((s - a) * norm)
            }
        }
    }
}

/// `K(r) = E_N[Σ_i E β_i^r]` for flat Dirichlet `β` given `N`, and `K'(r)`.
/// Each `β_i ~ Beta(1, n-1)`, so `Σ_i E β_i^r = n Γ(1+r) Γ(n) / Γ(n+r)`.
fn dirichlet_moment_sum(n_pmf: &[(u64, f64)], r: f64) -> (f64, f64) {
    let mut k = 0.0;
    let mut dk = 0.0;
    for &(n, p) in n_pmf {
        if p == 0.0 {
            continue;
        }
        let nf = n as f64;
        let term = nf * (ln_gamma(1.0 + r) + ln_gamma(nf) - ln_gamma(nf + r)).exp();
        k += p * term;
        dk += p * term * (digamma(1.0 + r) - digamma(nf + r));
    }
    (k, dk)
}

/// Positive root of `E[B^s] = 1` for `B ~ Gamma(a, rate b)`.
fn simplex_exponent(a: f64, b: f64) -> Result<f64> {
    let log_moment = |s: f64| ln_gamma(a + s) - ln_gamma(a) - s * b.ln();
    let grid = root::scan_grid(None);
    let crossing = root::find_crossings(|s| Some(log_moment(s)), &grid)
        .into_iter()
        .find(|c| !matches!(c, Crossing::Bracket { upward: false, .. }));
    match crossing {
        Some(Crossing::Exact(s)) => Ok(s),
        Some(Crossing::Bracket { lo, hi, .. }) => Ok(root::bisect(log_moment, lo, hi)),
        None => Err(Error::InvalidParameter(format!(
            "E[B^s] = 1 has no positive root for B ~ Gamma({a}, {b})"
        ))),
    }
}

/// The Cramér–Lundberg root, drift, and precomputed spine-law tables.
#[derive(Clone, Debug)]
pub struct TiltContext {
    pub alpha: f64,
    pub mu: f64,
    tilted_n: Option<TabulatedLaw>,
    discrete: Option<TabulatedLaw>,
}

impl TiltContext {
    fn build(model: &Model, alpha: f64, mu: f64) -> Result<Self> {
        let tilted_n = model
            .tilted_n_weights(alpha)
            .map(|w| TabulatedLaw::new(&w))
            .transpose()?;
        let discrete = model
            .discrete_tilted_pmf(alpha)
            .map(|pmf| {
                let pairs: Vec<(u64, f64)> = pmf
                    .iter()
                    .enumerate()
                    .map(|(k, &p)| (k as u64 + 1, p))
                    .collect();
                TabulatedLaw::new(&pairs)
            })
            .transpose()?;
        Ok(TiltContext {
            alpha,
            mu,
            tilted_n,
            discrete,
        })
    }

    /// Context at a user-chosen `alpha`, skipping the root and drift checks.
    /// Used for fault injection and for tilt checks on models whose root has
    /// non-positive drift.
    pub fn with_alpha(model: &Model, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter("alpha must be positive".into()));
        }
        let mu = model.drift_mu(alpha).unwrap_or(f64::NAN);
        Self::build(model, alpha, mu)
    }

    /// The tabulated law of `Ñ` under the tilt, when the model provides one.
    pub fn tilted_n_law(&self) -> Option<&TabulatedLaw> {
        self.tilted_n.as_ref()
    }

    pub(crate) fn sample_tilted_n<R: Rng>(&self, rng: &mut R) -> Result<u64> {
        self.tilted_n
            .as_ref()
            .map(|law| law.sample(rng))
            .ok_or_else(|| Error::MissingIngredients("tilted law of N".into()))
    }
}

/// Picks child `j` (0-based) with probability `C_j^α / D`.
pub fn choose_spine_child<R: Rng>(v: &BranchingVector, alpha: f64, rng: &mut R) -> Result<usize> {
    let d = v.spine_weight(alpha);
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::ZeroSpineWeight);
    }
    let target = rng.random::<f64>() * d;
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (j, &c) in v.weights.iter().enumerate() {
        let w = pow0(c, alpha);
        if w > 0.0 {
            last_positive = j;
            acc += w;
            if target < acc {
                return Ok(j);
            }
        }
    }
    Ok(last_positive)
}
