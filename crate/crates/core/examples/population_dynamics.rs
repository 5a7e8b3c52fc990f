//! Population-dynamics pool for the law of `W`, the tail constant `H` from
//! the pool, and the spine form of `H` at increasing generations.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spinetail::experiment::presets;
use spinetail::oracle::{estimate_h_equiv, estimate_h_spine, popdyn_pool, HSpinePlan};

fn main() -> spinetail::Result<()> {
    for (name, spec, ms) in [
        (
            "nonbranching",
            presets::nonbranching_model(),
            vec![5, 10, 20],
        ),
        ("mm1", presets::mm1_model(), vec![2, 4, 6]),
    ] {
        let model = spec.build()?;
        let ctx = model.solve_alpha()?;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pool = popdyn_pool(&model, 50_000, 40, &mut rng)?;
        println!(
            "{name}: pool of {} after {} sweeps",
            pool.pool_size(),
            pool.iterations
        );
        for q in [0.5, 0.9, 0.99] {
            println!("  quantile {q}: {:.4}", pool.quantile(q));
        }
        let h = estimate_h_equiv(&model, &ctx, &pool, 200_000, &mut rng)?;
        println!("  H from pool: {:.4} ± {:.4}", h.value, h.std_err);
        for m in ms {
            let plan = HSpinePlan::new(10_000, 5);
            let hs = estimate_h_spine(&model, &ctx, m, &plan)?;
            println!("  H spine m={m}: {:.4} ± {:.4}", hs.value, hs.std_err);
        }
    }
    Ok(())
}
