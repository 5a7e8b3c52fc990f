//! Cramér–Lundberg root, drift and the `Q` efficiency check for every
//! built-in model.

use spinetail::experiment::presets;
use spinetail::model::{q_efficiency_check, ModelSpec, NLaw, QLaw, SimplexQ};

fn main() -> spinetail::Result<()> {
    let specs = vec![
        ("mm1", presets::mm1_model()),
        ("simplex", presets::simplex_model()),
        ("nonbranching", presets::nonbranching_model()),
        (
            "exp-poisson",
            ModelSpec::ExpPoisson {
                lambda: 3.0,
                q_law: QLaw::Constant { q: 1.0 },
            },
        ),
        ("gamma-geometric", ModelSpec::GammaGeometric { beta: 0.25 }),
        (
            "pareto",
            ModelSpec::IdenticalPareto {
                a: 5.0,
                b: 0.5,
                upper: None,
                n_law: NLaw::Uniform { lo: 1, hi: 2 },
                q_law: QLaw::LogExponential { rate: 12.0 },
            },
        ),
        (
            "simplex-independent-q",
            ModelSpec::SimplexGamma {
                a: 0.5,
                b: 1.0,
                n_law: NLaw::Constant { n: 3 },
                q_mode: SimplexQ::Independent {
                    law: QLaw::Uniform { lo: 1.0, hi: 2.0 },
                },
            },
        ),
        ("discrete", presets::discrete_model()),
    ];
    for (name, spec) in specs {
        let model = spec.build()?;
        match model.solve_alpha() {
            Ok(ctx) => {
                let eff = q_efficiency_check(&model, &ctx);
                println!(
                    "{name:>22}: alpha = {:.6}, mu = {:.6}, E[Q^2a] finite: {}",
                    ctx.alpha, ctx.mu, eff.finite
                );
            }
            Err(e) => println!("{name:>22}: {e}"),
        }
    }
    Ok(())
}
