//! Three independent estimates of `P(W > t)`: importance sampling, a naive
//! depth-truncated tree, and the population-dynamics pool.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spinetail::experiment::presets;
use spinetail::oracle::{max_feasible_depth, naive_tail, popdyn_pool};
use spinetail::replication::{default_parallelism, SeedSpec};
use spinetail::spine::{is_estimate, EstimatorVariant, IsPlan};

fn main() -> spinetail::Result<()> {
    let parallelism = default_parallelism();
    for (name, spec, variant, t) in [
        (
            "mm1",
            presets::mm1_model(),
            EstimatorVariant::IndependentQ,
            0.5,
        ),
        (
            "nonbranching",
            presets::nonbranching_model(),
            EstimatorVariant::IndependentQ,
            1.0,
        ),
    ] {
        let model = spec.build()?;
        let ctx = model.solve_alpha()?;
        let plan = IsPlan::new(variant, 50_000, 2).with_parallelism(parallelism);
        let is = is_estimate(&model, &ctx, t, &plan)?.estimate();
        let depth = max_feasible_depth(&model, 300.0, 60);
        let naive = naive_tail(&model, t, 50_000, depth, SeedSpec::new(3), parallelism)?;
        let pool = popdyn_pool(&model, 50_000, 40, &mut ChaCha8Rng::seed_from_u64(4))?;
        let pd = pool.tail(t);
        println!("{name} at t = {t}:");
        println!("  importance sampling  {:.5} ± {:.5}", is.value, is.std_err);
        println!(
            "  naive (depth {depth:2})     {:.5} ± {:.5}",
            naive.value, naive.std_err
        );
        println!("  population dynamics  {:.5} ± {:.5}", pd.value, pd.std_err);
    }
    Ok(())
}
