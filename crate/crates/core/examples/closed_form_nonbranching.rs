//! `N ≡ 1`, `log C = χ - τ` with rates 2 and 1, `Q ≡ 1`. Then
//! `P(W > t) = e^{-t} / 2` for `t >= 0`, which both estimators should match.

use spinetail::experiment::commands::log_slope;
use spinetail::experiment::presets::{nonbranching_model, NONBRANCHING_GRID};
use spinetail::spine::{is_estimate, EstimatorVariant, IsPlan};

fn main() -> spinetail::Result<()> {
    let model = nonbranching_model().build()?;
    let ctx = model.solve_alpha()?;
    println!("alpha = {}, mu = {}", ctx.alpha, ctx.mu);
    for variant in [EstimatorVariant::IndependentQ, EstimatorVariant::General] {
        let plan = IsPlan::new(variant, 100_000, 3);
        let mut points = Vec::new();
        for (k, &t) in NONBRANCHING_GRID.iter().enumerate() {
            let s = is_estimate(&model, &ctx, t, &plan.with_stream(k as u64))?;
            let exact = 0.5 * (-t).exp();
            println!(
                "{variant:?} t={t}: {:.6e} ± {:.2e} (exact {exact:.6e}, {:+.2} SE)",
                s.mean,
                s.std_err,
                (s.mean - exact) / s.std_err
            );
            points.push((t, s.mean));
        }
        println!("{variant:?} log-slope: {:.4}", log_slope(&points).unwrap());
    }
    Ok(())
}
