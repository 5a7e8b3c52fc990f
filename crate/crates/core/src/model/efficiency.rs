//! Advisory check of the moment conditions behind bounded relative error:
//! `E[Q^{2α}] < ∞` for the independent-`Q` estimator and
//! `E[Q^{2α} D^{-1}] < ∞` for the general one.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{Model, ModelSpec, QLaw, SimplexQ, TiltContext};

const MC_DRAWS: usize = 200_000;
const MC_SEED: u64 = 0xeff1c1e;
/// Largest single-draw share of the Monte Carlo sum tolerated before the
/// moment is reported as probably infinite.
const MAX_CONTRIBUTION_SHARE: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EfficiencyMethod {
    Analytic,
    MonteCarlo,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QEfficiencyReport {
    /// `E[Q^α]`, `inf` when infinite.
    pub e_q_alpha: f64,
    /// `E[Q^{2α}]`, `inf` when infinite.
    pub e_q_2alpha: f64,
    /// `E[Q^{2α} D^{-1}]`, `inf` when infinite.
    pub e_q_2alpha_over_d: f64,
    /// Whether the condition relevant to the estimator the model would use
    /// (independent-`Q` or general) holds.
    pub finite: bool,
    pub method: EfficiencyMethod,
    pub warnings: Vec<String>,
}

struct McMoment {
    mean: f64,
    max_share: f64,
}

fn q_moment(law: &QLaw, s: f64) -> f64 {
    law.moment(s).unwrap_or(f64::INFINITY)
}

/// Reports `E[Q^α]`, `E[Q^{2α}]` and `E[Q^{2α}/D]`, analytically where the
/// model allows, otherwise by Monte Carlo with a heavy-tail heuristic.
pub fn q_efficiency_check(model: &Model, ctx: &TiltContext) -> QEfficiencyReport {
    let alpha = ctx.alpha;
    let independent_law = match model.spec() {
        ModelSpec::NonBranchingExp { q_law, .. }
        | ModelSpec::IdenticalPareto { q_law, .. }
        | ModelSpec::ExpPoisson { q_law, .. } => Some(q_law.clone()),
        ModelSpec::BranchingMm1 { y_rate, .. } => Some(QLaw::LogExponential { rate: *y_rate }),
        ModelSpec::SimplexGamma {
            q_mode: SimplexQ::Independent { law },
            ..
        } => Some(law.clone()),
        _ => None,
    };
    let mut warnings = Vec::new();

    if let Some(law) = independent_law {
        let e_q_alpha = q_moment(&law, alpha);
        let e_q_2alpha = q_moment(&law, 2.0 * alpha);
        // E[Q^{2α}/D] = E[Q^{2α}] E[1/D] by independence; E[1/D] by Monte Carlo
        let inv_d = inverse_d_moment(model, alpha);
        if inv_d.max_share > MAX_CONTRIBUTION_SHARE {
            warnings.push(format!(
                "E[1/D] looks heavy-tailed (largest draw is {:.1}% of the sum)",
                100.0 * inv_d.max_share
            ));
        }
        let finite = e_q_2alpha.is_finite();
        if !finite {
            warnings.push(format!(
                "E[Q^(2 alpha)] is infinite at 2 alpha = {}",
                2.0 * alpha
            ));
        }
        return QEfficiencyReport {
            e_q_alpha,
            e_q_2alpha,
            e_q_2alpha_over_d: e_q_2alpha * inv_d.mean,
            finite,
            method: EfficiencyMethod::Analytic,
            warnings,
        };
    }

    if let ModelSpec::SimplexGamma {
        a,
        b,
        q_mode: SimplexQ::TwoTimesB,
        ..
    } = model.spec()
    {
        // Q = 2B and, at the root, D = B^α Σ β_i = B^α
        let gamma_moment = |s: f64| {
            QLaw::Gamma {
                shape: *a,
                rate: *b,
            }
            .moment(s)
            .unwrap_or(f64::INFINITY)
        };
        let e_q_alpha = 2f64.powf(alpha) * gamma_moment(alpha);
        let e_q_2alpha = 4f64.powf(alpha) * gamma_moment(2.0 * alpha);
        let over_d = 4f64.powf(alpha) * gamma_moment(alpha);
        return QEfficiencyReport {
            e_q_alpha,
            e_q_2alpha,
            e_q_2alpha_over_d: over_d,
            finite: over_d.is_finite(),
            method: EfficiencyMethod::Analytic,
            warnings,
        };
    }

    let q_alpha = mc_q_moment(model, alpha, alpha, false);
    let q_2alpha = mc_q_moment(model, alpha, 2.0 * alpha, false);
    let over_d = mc_q_moment(model, alpha, 2.0 * alpha, true);
    for (name, m) in [("E[Q^(2 alpha)/D]", &over_d), ("E[Q^(2 alpha)]", &q_2alpha)] {
        if m.max_share > MAX_CONTRIBUTION_SHARE {
            warnings.push(format!(
                "{name} looks heavy-tailed (largest draw is {:.1}% of the sum)",
                100.0 * m.max_share
            ));
        }
    }
    let finite = over_d.max_share <= MAX_CONTRIBUTION_SHARE && over_d.mean.is_finite();
    QEfficiencyReport {
        e_q_alpha: q_alpha.mean,
        e_q_2alpha: q_2alpha.mean,
        e_q_2alpha_over_d: over_d.mean,
        finite,
        method: EfficiencyMethod::MonteCarlo,
        warnings,
    }
}

fn inverse_d_moment(model: &Model, alpha: f64) -> McMoment {
    mc_expectation(
        model,
        alpha,
        |_, d| if d > 0.0 { 1.0 / d } else { f64::INFINITY },
    )
}

/// `E[Q^s / D]` when `over_d`, else `E[Q^s]`.
fn mc_q_moment(model: &Model, alpha: f64, s: f64, over_d: bool) -> McMoment {
    mc_expectation(model, alpha, |q, d| {
        let qs = if q == 0.0 { 0.0 } else { q.powf(s) };
        match (over_d, d > 0.0) {
            (false, _) => qs,
            (true, true) => qs / d,
            (true, false) => f64::INFINITY,
        }
    })
}

fn mc_expectation(model: &Model, alpha: f64, f: impl Fn(f64, f64) -> f64) -> McMoment {
    let mut rng = ChaCha8Rng::seed_from_u64(MC_SEED);
    let mut sum = 0.0;
    let mut max = 0.0f64;
    for _ in 0..MC_DRAWS {
        let v = model.sample_p(&mut rng);
        let x = f(v.q, v.spine_weight(alpha));
        sum += x;
        max = max.max(x);
    }
    McMoment {
        mean: sum / MC_DRAWS as f64,
        max_share: if sum > 0.0 { max / sum } else { 0.0 },
    }
}
