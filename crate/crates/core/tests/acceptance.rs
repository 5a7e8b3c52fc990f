//! Acceptance criteria. Each criterion prints one PASS or FAIL line; the
//! process exits nonzero if any criterion fails.

use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use spinetail::experiment::commands::{
    compare_table, drop_csv_column, log_slope, run_is, validation_suite, RunOptions,
};
use spinetail::experiment::presets::{self, preset, NONBRANCHING_GRID};
use spinetail::model::TiltContext;
use spinetail::model::{
    choose_spine_child, BranchingVector, Model, ModelSpec, NLaw, QLaw, SimplexQ,
};
use spinetail::oracle::{
    estimate_h_equiv, estimate_h_spine, max_feasible_depth, naive_tail, popdyn_pool, HSpinePlan,
};
use spinetail::replication::{aggregate, Estimate, SeedSpec};
use spinetail::spine::{is_estimate, is_runs, EstimatorVariant, IsPlan};
use spinetail::Result;

const SEED: u64 = 20_240_611;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn within_time(elapsed: Duration, limit_s: f64) -> bool {
    elapsed.as_secs_f64() < limit_s
}

fn mm1() -> Model {
    presets::mm1_model().build().unwrap()
}

fn simplex() -> Model {
    presets::simplex_model().build().unwrap()
}

fn nonbranching() -> Model {
    presets::nonbranching_model().build().unwrap()
}

/// Every built-in model family, with the preset parameters where a preset
/// exists. The discrete preset has a root with negative drift, so its tilt is
/// taken at that root directly.
fn builtin_models() -> Vec<(&'static str, Model, TiltContext)> {
    let specs = vec![
        ("nonbranching", presets::nonbranching_model()),
        ("mm1", presets::mm1_model()),
        ("simplex", presets::simplex_model()),
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
            "truncated-pareto",
            ModelSpec::IdenticalPareto {
                a: 3.0,
                b: 0.5,
                upper: Some(1.5),
                n_law: NLaw::Uniform { lo: 1, hi: 4 },
                q_law: QLaw::Constant { q: 1.0 },
            },
        ),
        (
            "exp-poisson",
            ModelSpec::ExpPoisson {
                lambda: 3.0,
                q_law: QLaw::Constant { q: 1.0 },
            },
        ),
        ("gamma-geometric", ModelSpec::GammaGeometric { beta: 0.25 }),
    ];
    let mut out: Vec<(&'static str, Model, TiltContext)> = specs
        .into_iter()
        .map(|(name, spec)| {
            let model = spec.build().unwrap();
            let ctx = model.solve_alpha().unwrap();
            (name, model, ctx)
        })
        .collect();
    let discrete = presets::discrete_model().build().unwrap();
    let ctx = TiltContext::with_alpha(&discrete, 1.0).unwrap();
    out.push(("discrete", discrete, ctx));
    out
}

fn criterion_1() -> Outcome {
    let mut lines = Vec::new();
    let mut pass = true;
    for (name, model, alpha, mu) in [
        ("mm1", mm1(), presets::MM1_ALPHA, presets::MM1_MU),
        (
            "simplex",
            simplex(),
            presets::SIMPLEX_ALPHA,
            presets::SIMPLEX_MU,
        ),
    ] {
        let start = Instant::now();
        let ctx = model.solve_alpha().unwrap();
        let elapsed = start.elapsed();
        let ok = (ctx.alpha - alpha).abs() <= 0.001
            && (ctx.mu - mu).abs() <= 0.005
            && within_time(elapsed, 1.0);
        pass &= ok;
        lines.push(format!(
            "{name}: alpha={:.4} mu={:.4} in {:.3}s",
            ctx.alpha,
            ctx.mu,
            elapsed.as_secs_f64()
        ));
    }
    outcome(pass, lines.join("; "))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let model = nonbranching();
    let ctx = model.solve_alpha().unwrap();
    let plan = IsPlan::new(EstimatorVariant::IndependentQ, 100_000, SEED);
    let mut pass = true;
    let mut points = Vec::new();
    let mut lines = Vec::new();
    for (k, &t) in NONBRANCHING_GRID.iter().enumerate() {
        let s = is_estimate(&model, &ctx, t, &plan.with_stream(k as u64)).unwrap();
        let exact = 0.5 * (-t).exp();
        let z = (s.mean - exact) / s.std_err;
        pass &= z.abs() <= 4.0;
        points.push((t, s.mean));
        lines.push(format!("t={t}: {z:+.2} SE"));
    }
    let slope = log_slope(&points).unwrap();
    pass &= (slope + 1.0).abs() <= 0.03;
    let elapsed = start.elapsed();
    pass &= within_time(elapsed, 120.0);
    lines.push(format!("slope {slope:.4}, {:.1}s", elapsed.as_secs_f64()));
    outcome(pass, lines.join(", "))
}

fn table_criterion(name: &str) -> Outcome {
    let start = Instant::now();
    let opts = RunOptions {
        seed: None,
        parallelism: 1,
    };
    let rows = compare_table(name, &opts).unwrap();
    let elapsed = start.elapsed();
    let passed = rows.iter().filter(|r| r.pass()).count();
    let detail = rows
        .iter()
        .map(|r| {
            format!(
                "t={} {:+.2}SE gen {:.2}/{:.2} nz {:.3}",
                r.reference.t,
                (r.estimate.value - r.reference.estimate)
                    / (r.estimate.std_err + r.reference.std_err),
                r.mean_terminal_gen,
                r.reference.terminal_gen,
                r.prop_nonzero
            )
        })
        .collect::<Vec<_>>()
        .join("; ");
    outcome(
        passed == rows.len() && within_time(elapsed, 300.0),
        format!(
            "{passed}/{} rows in {:.1}s: {detail}",
            rows.len(),
            elapsed.as_secs_f64()
        ),
    )
}

fn h_spine_at_largest_m(model: &Model, ctx: &TiltContext, n: u64) -> (usize, Estimate) {
    let m = max_feasible_depth(model, 1000.0, 20).max(1);
    let plan = HSpinePlan::new(n, SEED).with_parallelism(1);
    (m, estimate_h_spine(model, ctx, m, &plan).unwrap())
}

fn criterion_5() -> Outcome {
    let mut pass = true;
    let mut lines = Vec::new();
    for (name, model, reference) in [
        ("mm1", mm1(), presets::MM1_H),
        ("simplex", simplex(), presets::SIMPLEX_H),
    ] {
        let ctx = model.solve_alpha().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(SEED);
        let pool = popdyn_pool(&model, 100_000, 60, &mut rng).unwrap();
        let equiv = estimate_h_equiv(&model, &ctx, &pool, 1_000_000, &mut rng).unwrap();
        let (m, spine) = h_spine_at_largest_m(&model, &ctx, 20_000);
        let rel = (equiv.value - reference) / reference;
        let ok = rel.abs() <= 0.10 && spine.agrees_with(&equiv, 4.0);
        pass &= ok;
        lines.push(format!(
            "{name}: pool {:.4}±{:.4} ({:+.1}% vs {reference}), spine m={m} {:.4}±{:.4}",
            equiv.value,
            equiv.std_err,
            100.0 * rel,
            spine.value,
            spine.std_err
        ));
    }
    let model = nonbranching();
    let ctx = model.solve_alpha().unwrap();
    let (m, spine) = h_spine_at_largest_m(&model, &ctx, 50_000);
    pass &= (spine.value - 0.5).abs() <= 0.025;
    lines.push(format!(
        "N≡1: spine m={m} {:.4}±{:.4}",
        spine.value, spine.std_err
    ));
    outcome(pass, lines.join("; "))
}

fn criterion_6() -> Outcome {
    let discrete = presets::discrete_model().build().unwrap();
    let pmf = discrete.discrete_tilted_pmf(1.0).unwrap();
    let pmf_ok = pmf == [0.5, 0.5];
    let trunc = NLaw::TruncatedPoisson { lambda: 2.0 };
    let shifted = NLaw::ShiftedPoisson { lambda: 2.0 };
    let worst = (1..=30)
        .map(|n| {
            let (a, b) = (trunc.size_biased_pmf(n), shifted.pmf(n));
            (a - b).abs() / a.max(b)
        })
        .fold(0.0, f64::max);
    outcome(
        pmf_ok && worst <= 8.0 * f64::EPSILON,
        format!("tilted pmf {pmf:?}; size-biased vs shifted Poisson max rel diff {worst:.2e}"),
    )
}

/// Bounded test functions `g(ψ) / (1 + D)`; with the extra factor `D` on the
/// original side they stay bounded too.
fn test_functions(v: &BranchingVector, alpha: f64) -> [f64; 3] {
    let d = v.spine_weight(alpha);
    let cap = 1.0 / (1.0 + d);
    let max_share = v
        .weights
        .iter()
        .map(|c| if *c > 0.0 { c.powf(alpha) } else { 0.0 })
        .fold(0.0, f64::max)
        / d.max(f64::MIN_POSITIVE);
    [
        cap,
        cap * (v.n_offspring().min(4) as f64) / 4.0,
        cap * max_share * (1.0 / (1.0 + v.q)),
    ]
}

/// Share of the largest value in the sum; near 1 for heavy tails.
fn max_share(values: &[f64]) -> f64 {
    let total: f64 = values.iter().sum();
    values.iter().copied().fold(0.0, f64::max) / total
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let n = 100_000;
    let mut pass = true;
    let mut lines = Vec::new();
    for (k, (name, model, ctx)) in builtin_models().into_iter().enumerate() {
        let alpha = ctx.alpha;
        let mut rng = SeedSpec::new(SEED).with_stream(k as u64).rng(0);
        let mut inv_d = Vec::with_capacity(n);
        let mut tilted: [Vec<f64>; 3] = Default::default();
        let mut child_tilted = [Vec::new(), Vec::new()];
        for _ in 0..n {
            let v = model.sample_tilted(&ctx, &mut rng).unwrap();
            inv_d.push(1.0 / v.spine_weight(alpha));
            for (col, h) in tilted.iter_mut().zip(test_functions(&v, alpha)) {
                col.push(h);
            }
            let j = choose_spine_child(&v, alpha, &mut rng).unwrap();
            let cap = 1.0 / (1.0 + v.spine_weight(alpha));
            for (i, col) in child_tilted.iter_mut().enumerate() {
                col.push(if j == i { cap } else { 0.0 });
            }
        }
        let mut original: [Vec<f64>; 3] = Default::default();
        let mut child_original = [Vec::new(), Vec::new()];
        for _ in 0..n {
            let v = model.sample_p(&mut rng);
            let d = v.spine_weight(alpha);
            for (col, h) in original.iter_mut().zip(test_functions(&v, alpha)) {
                col.push(d * h);
            }
            for (i, col) in child_original.iter_mut().enumerate() {
                let c = v.weights.get(i).copied().unwrap_or(0.0);
                col.push(if c > 0.0 {
                    c.powf(alpha) / (1.0 + d)
                } else {
                    0.0
                });
            }
        }
        let share = max_share(&inv_d);
        let inv = Estimate::from_values(inv_d);
        let mut ok = (inv.value - 1.0).abs() <= 4.0 * inv.std_err;
        let mut worst: f64 = 0.0;
        let pairs = tilted
            .into_iter()
            .zip(original)
            .chain(child_tilted.into_iter().zip(child_original));
        for (a, b) in pairs {
            let (a, b) = (Estimate::from_values(a), Estimate::from_values(b));
            let combined = a.std_err + b.std_err;
            if combined > 0.0 {
                worst = worst.max((a.value - b.value).abs() / combined);
            }
            ok &= a.agrees_with(&b, 4.0);
        }
        pass &= ok;
        lines.push(format!(
            "{name}{}: 1/D {:.4}±{:.4} (largest draw {:.1}% of sum), worst h gap {worst:.2} SE",
            if ok { "" } else { " FAILED" },
            inv.value,
            inv.std_err,
            100.0 * share
        ));
    }
    let elapsed = start.elapsed();
    pass &= within_time(elapsed, 60.0);
    lines.push(format!("{:.1}s", elapsed.as_secs_f64()));
    outcome(pass, lines.join("; "))
}

fn criterion_8() -> Outcome {
    let mut pass = true;
    let mut lines = Vec::new();
    let q_at_least_one: Vec<_> = builtin_models()
        .into_iter()
        .filter(|(_, m, _)| m.q_lower_bound() >= 1.0)
        .collect();
    for (k, (name, model, ctx)) in q_at_least_one.into_iter().enumerate() {
        let mut detail = format!("{name}:");
        if model.q_independent() {
            let plan =
                IsPlan::new(EstimatorVariant::IndependentQ, 100_000, SEED).with_stream(k as u64);
            let runs = is_runs(&model, &ctx, -0.25, &plan);
            let ones = runs.iter().all(|r| matches!(r, Ok(r) if r.z == 1.0));
            pass &= ones;
            detail.push_str(&format!(" independent-Q all ones {ones},"));
        }
        let plan =
            IsPlan::new(EstimatorVariant::General, 100_000, SEED).with_stream(100 + k as u64);
        let runs = is_runs(&model, &ctx, -0.25, &plan);
        let z: Vec<f64> = runs.iter().flatten().map(|r| r.z).collect();
        let g = aggregate(&runs).unwrap();
        let ok = (g.mean - 1.0).abs() <= 3.0 * g.std_err;
        pass &= ok;
        detail.push_str(&format!(
            " general {:.4}±{:.4}{} (largest draw {:.1}% of sum)",
            g.mean,
            g.std_err,
            if ok { "" } else { " FAILED" },
            100.0 * max_share(&z)
        ));
        lines.push(detail);
    }
    outcome(pass, lines.join("; "))
}

fn criterion_9() -> Outcome {
    let model = mm1();
    let ctx = model.solve_alpha().unwrap();
    let plan = IsPlan::new(EstimatorVariant::IndependentQ, 10_000, SEED);
    let re: Vec<f64> = presets::MM1_GRID
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let s = is_estimate(&model, &ctx, t, &plan.with_stream(k as u64)).unwrap();
            s.rel_err.unwrap()
        })
        .collect();
    let max = re.iter().copied().fold(f64::MIN, f64::max);
    let min = re.iter().copied().fold(f64::MAX, f64::min);
    outcome(
        max / min <= 2.0,
        format!(
            "relative errors {:?}, ratio {:.3}",
            re.iter().map(|r| format!("{r:.3}")).collect::<Vec<_>>(),
            max / min
        ),
    )
}

fn criterion_10() -> Outcome {
    let mut pass = true;
    let mut lines = Vec::new();
    let grids: [(&str, Model, &[f64]); 2] = [
        ("nonbranching", nonbranching(), &NONBRANCHING_GRID),
        (
            "exp-poisson",
            ModelSpec::ExpPoisson {
                lambda: 3.0,
                q_law: QLaw::Constant { q: 1.0 },
            }
            .build()
            .unwrap(),
            &[0.5, 1.0, 1.5, 2.0],
        ),
    ];
    for (name, model, grid) in grids {
        let ctx = model.solve_alpha().unwrap();
        let plan = IsPlan::new(EstimatorVariant::IndependentQ, 20_000, SEED);
        let rows = spinetail::oracle::cl_bound_check(&model, &ctx, grid, &plan).unwrap();
        pass &= rows.iter().all(|r| r.pass);
        lines.push(format!(
            "{name}: {}",
            rows.iter()
                .map(|r| format!("t={} {:.3e}<={:.3e}", r.t, r.estimate, r.bound))
                .collect::<Vec<_>>()
                .join(", ")
        ));
    }
    outcome(pass, lines.join("; "))
}

fn criterion_11() -> Outcome {
    let mut pass = true;
    let mut lines = Vec::new();
    for (name, model, t) in [("mm1", mm1(), 0.5), ("N≡1", nonbranching(), 1.0)] {
        let ctx = model.solve_alpha().unwrap();
        let plan = IsPlan::new(EstimatorVariant::IndependentQ, 100_000, SEED);
        let is = is_estimate(&model, &ctx, t, &plan).unwrap().estimate();
        let depth = max_feasible_depth(&model, 300.0, 60);
        let naive = naive_tail(&model, t, 100_000, depth, SeedSpec::new(SEED + 1), 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(SEED + 2);
        let pool = popdyn_pool(&model, 100_000, 60, &mut rng).unwrap();
        let pd = pool.tail(t);
        let ok =
            is.agrees_with(&naive, 4.0) && is.agrees_with(&pd, 4.0) && naive.agrees_with(&pd, 4.0);
        pass &= ok;
        lines.push(format!(
            "{name} t={t}: IS {:.5}±{:.5}, naive(d={depth}) {:.5}±{:.5}, pool {:.5}±{:.5}",
            is.value, is.std_err, naive.value, naive.std_err, pd.value, pd.std_err
        ));
    }
    outcome(pass, lines.join("; "))
}

fn criterion_12() -> Outcome {
    let cfg = preset("mm1").unwrap();
    let mut csvs = Vec::new();
    for parallelism in [1, 8, 1, 8] {
        let out = run_is(
            &cfg,
            &RunOptions {
                seed: Some(SEED),
                parallelism,
            },
        );
        csvs.push(drop_csv_column(
            out.csv.as_deref().unwrap(),
            "time_per_replication_s",
        ));
    }
    let identical = csvs.windows(2).all(|w| w[0] == w[1]);
    outcome(
        identical,
        format!(
            "{} runs at parallelism 1 and 8, {} bytes each",
            csvs.len(),
            csvs[0].len()
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> Result<()> {
    let criteria: Vec<Criterion> = vec![
        ("root and drift", criterion_1),
        ("closed-form tail", criterion_2),
        ("M/M/1 table", || table_criterion("mm1")),
        ("simplex table", || table_criterion("simplex")),
        ("tail constant", criterion_5),
        ("exact tilt checks", criterion_6),
        ("change-of-measure identities", criterion_7),
        ("trivial estimator identity", criterion_8),
        ("bounded relative error", criterion_9),
        ("Cramér–Lundberg inequality", criterion_10),
        ("oracle triangle", criterion_11),
        ("determinism", criterion_12),
    ];
    let suite = validation_suite(
        None,
        &RunOptions {
            seed: Some(SEED),
            parallelism: 1,
        },
    )?;
    let mut failed = 0;
    for (i, (name, run)) in criteria.into_iter().enumerate() {
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!(
            "{} criterion {:2} ({name}): {}",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail
        );
    }
    let suite_ok = suite.iter().all(|c| c.pass);
    println!(
        "{} validate suite: {}/{} checks",
        if suite_ok { "PASS" } else { "FAIL" },
        suite.iter().filter(|c| c.pass).count(),
        suite.len()
    );
    if failed > 0 || !suite_ok {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    Ok(())
}
