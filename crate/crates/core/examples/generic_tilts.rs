//! The generic spine-law samplers on an exponential–Poisson model, where the
//! exact spine law is also available: mixture, acceptance–rejection with
//! per-coordinate bounds on a truncated Pareto model, and acceptance–rejection
//! with a bound on `D`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spinetail::model::{
    ar_bounded_acceptance, tilt_ar_bounded_sample, tilt_ar_sumbound_sample, tilt_mixture_sample,
    ModelSpec, NLaw, QLaw,
};
use spinetail::replication::Estimate;

fn main() -> spinetail::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);

    let model = ModelSpec::ExpPoisson {
        lambda: 3.0,
        q_law: QLaw::Constant { q: 1.0 },
    }
    .build()?;
    let ctx = model.solve_alpha()?;
    let draws = 100_000;
    let exact = Estimate::from_values((0..draws).map(|_| {
        let v = model.sample_tilted(&ctx, &mut rng).unwrap();
        v.n_offspring() as f64
    }));
    let mixture = Estimate::from_values((0..draws).map(|_| {
        let v = tilt_mixture_sample(&model, &ctx, &mut rng).unwrap();
        v.n_offspring() as f64
    }));
    println!("exp-poisson alpha = {:.4}", ctx.alpha);
    println!("  tilted E[N]: exact sampler {exact:?}");
    println!("  tilted E[N]: mixture       {mixture:?}");

    let upper = 1.5;
    let pareto = ModelSpec::IdenticalPareto {
        a: 3.0,
        b: 0.5,
        upper: Some(upper),
        n_law: NLaw::Uniform { lo: 1, hi: 4 },
        q_law: QLaw::Constant { q: 1.0 },
    }
    .build()?;
    let pctx = pareto.solve_alpha()?;
    let bounds = |n: u64| vec![upper; n as usize];
    let mut attempts = 0;
    let mut d_inv = Vec::new();
    for _ in 0..20_000 {
        let draw = tilt_ar_bounded_sample(&pareto, &pctx, &bounds, &mut rng)?;
        attempts += draw.attempts;
        d_inv.push(1.0 / draw.vector.spine_weight(pctx.alpha));
    }
    println!("truncated pareto alpha = {:.4}", pctx.alpha);
    println!(
        "  bounded AR: {:.2} proposals per draw, acceptance given N=2 is {:.3}",
        attempts as f64 / 20_000.0,
        ar_bounded_acceptance(&pareto, &pctx, 2, &bounds(2))?
    );
    println!(
        "  tilted E[1/D] = {:?} (should be 1)",
        Estimate::from_values(d_inv)
    );

    let d_bound = 4.0 * upper.powf(pctx.alpha);
    let mut attempts = 0;
    for _ in 0..20_000 {
        attempts += tilt_ar_sumbound_sample(&pareto, &pctx, d_bound, 2.0, &mut rng)?.attempts;
    }
    println!(
        "  sum-bound AR: {:.2} proposals per draw",
        attempts as f64 / 20_000.0
    );
    Ok(())
}
