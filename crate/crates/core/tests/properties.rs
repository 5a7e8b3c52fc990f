use std::cmp::Ordering;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use spinetail::experiment::commands::{drop_csv_column, log_slope};
use spinetail::experiment::ExperimentConfig;
use spinetail::model::{
    choose_spine_child, BranchingVector, ModelSpec, NLaw, Outcome, QLaw, TiltContext,
};
use spinetail::oracle::WPool;
use spinetail::replication::{run_replications, Estimate, Moments, SeedSpec};
use spinetail::spine::{run_single, EstimatorVariant, IsPlan};
use spinetail::tree::{lenlex_compare, Frontier, NodeIndex, NodeState};

fn path() -> impl Strategy<Value = Vec<u32>> {
    prop::collection::vec(1u32..5, 0..6)
}

fn reference_order(a: &[u32], b: &[u32]) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lenlex_is_generation_then_lexicographic(a in path(), b in path()) {
        let (ia, ib) = (NodeIndex::from_path(a.clone()).unwrap(), NodeIndex::from_path(b.clone()).unwrap());
        prop_assert_eq!(lenlex_compare(&ia, &ib), reference_order(&a, &b));
        prop_assert_eq!(lenlex_compare(&ib, &ia), reference_order(&a, &b).reverse());
    }

    #[test]
    fn child_extends_path(a in path(), j in 1u32..9) {
        let parent = NodeIndex::from_path(a.clone()).unwrap();
        let child = parent.child(j).unwrap();
        prop_assert_eq!(child.generation(), parent.generation() + 1);
        prop_assert_eq!(&child.path()[..a.len()], &a[..]);
        prop_assert_eq!(child.truncate(a.len()), parent.clone());
        prop_assert_eq!(lenlex_compare(&parent, &child), Ordering::Less);
    }

    /// Breadth-first expansion of a random tree visits nodes in ≺ order.
    #[test]
    fn frontier_visits_in_lenlex_order(offspring in prop::collection::vec(0u32..4, 1..40)) {
        let mut frontier = Frontier::new();
        let mut node = NodeState::root();
        let mut visited = vec![node.index.clone()];
        let mut k = 0;
        loop {
            let n = offspring[k % offspring.len()];
            k += 1;
            if node.index.generation() < 4 {
                for j in 1..=n {
                    frontier.push(node.child(j, 0.5, false).unwrap());
                }
            }
            match frontier.advance() {
                Ok(next) => {
                    visited.push(next.index.clone());
                    node = next;
                }
                Err(_) => break,
            }
        }
        for w in visited.windows(2) {
            prop_assert_eq!(lenlex_compare(&w[0], &w[1]), Ordering::Less);
        }
    }

    /// For `N ≡ 1`, `C = e^{χ - τ}` the root is `θ - λ` and the drift
    /// `1/(θ-α) - 1/(λ+α)`.
    #[test]
    fn nonbranching_root_closed_form(lambda in 0.2f64..3.0, gap in 0.2f64..4.0) {
        let theta = lambda + gap;
        let model = ModelSpec::NonBranchingExp { theta, lambda, q_law: QLaw::Constant { q: 1.0 } }
            .build()
            .unwrap();
        let ctx = model.solve_alpha().unwrap();
        prop_assert!((ctx.alpha - gap).abs() < 1e-8);
        let mu = 1.0 / (theta - gap) - 1.0 / (lambda + gap);
        prop_assert!((ctx.mu - mu).abs() < 1e-6);
    }

    /// The root solves the quadratic `(θ - s)(λ + s) = E[N] θ λ`.
    #[test]
    fn mm1_root_solves_quadratic(
        theta in 3.0f64..8.0,
        lambda in 0.1f64..0.5,
        poisson in 0.5f64..3.0,
    ) {
        let model = ModelSpec::BranchingMm1 { theta, lambda, poisson_param: poisson, y_rate: 50.0 }
            .build()
            .unwrap();
        let mean_n = poisson / (1.0 - (-poisson).exp());
        let (b, c) = (theta - lambda, theta * lambda * (1.0 - mean_n));
        let disc = b * b + 4.0 * c;
        prop_assume!(disc > 0.0);
        let root = 0.5 * (b + disc.sqrt());
        match model.solve_alpha() {
            Ok(ctx) => {
                prop_assert!((ctx.alpha - root).abs() < 1e-7, "{} vs {}", ctx.alpha, root);
                prop_assert!((model.mellin(ctx.alpha).unwrap() - 1.0).abs() < 1e-9);
            }
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    /// Tilted atom probabilities are `p_k D_k`; they sum to one at the root.
    #[test]
    fn discrete_tilt_is_reweighting(
        c1 in 0.1f64..0.9,
        c2 in 1.1f64..2.5,
        p in 0.2f64..0.8,
        alpha in 0.3f64..3.0,
    ) {
        let spec = ModelSpec::DiscreteTable {
            outcomes: vec![
                Outcome { weights: vec![c1, c1], q: 1.0 },
                Outcome { weights: vec![c2], q: 1.0 },
            ],
            probs: vec![p, 1.0 - p],
        };
        let model = spec.build().unwrap();
        let pmf = model.discrete_tilted_pmf(alpha).unwrap();
        prop_assert_eq!(pmf[0], p * (c1.powf(alpha) + c1.powf(alpha)));
        prop_assert_eq!(pmf[1], (1.0 - p) * c2.powf(alpha));
        let root = match model.solve_alpha() {
            Ok(ctx) => ctx.alpha,
            Err(spinetail::Error::NonPositiveDrift { alpha, .. }) => alpha,
            Err(_) => return Ok(()),
        };
        let total: f64 = model.discrete_tilted_pmf(root).unwrap().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-9, "{total}");
    }

    #[test]
    fn size_biased_pmf_sums_to_one(lambda in 0.2f64..6.0, p in 0.1f64..0.9, hi in 1u32..8) {
        for law in [
            NLaw::TruncatedPoisson { lambda },
            NLaw::ShiftedPoisson { lambda },
            NLaw::Geometric { p },
            NLaw::Uniform { lo: 1, hi },
        ] {
            let total: f64 = (1..400).map(|n| law.size_biased_pmf(n)).sum();
            prop_assert!((total - 1.0).abs() < 1e-9, "{law:?}: {total}");
        }
    }

    #[test]
    fn spine_child_has_positive_weight(
        weights in prop::collection::vec(prop_oneof![Just(0.0), 0.01f64..3.0], 1..6),
        alpha in 0.3f64..4.0,
        seed in any::<u64>(),
    ) {
        prop_assume!(weights.iter().any(|&c| c > 0.0));
        let v = BranchingVector::new(1.0, weights.clone()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let j = choose_spine_child(&v, alpha, &mut rng).unwrap();
        prop_assert!(weights[j] > 0.0);
        prop_assert!(v.spine_weight(alpha) > 0.0);
    }

    #[test]
    fn welford_merge_is_concatenation(
        a in prop::collection::vec(-1e3f64..1e3, 1..50),
        b in prop::collection::vec(-1e3f64..1e3, 1..50),
    ) {
        let ma: Moments = a.iter().copied().collect();
        let mb: Moments = b.iter().copied().collect();
        let all: Moments = a.iter().chain(&b).copied().collect();
        let merged = ma.merge(&mb);
        prop_assert_eq!(merged.count(), all.count());
        prop_assert!((merged.mean() - all.mean()).abs() < 1e-9);
        prop_assert!((merged.variance() - all.variance()).abs() < 1e-6 * (1.0 + all.variance()));
        let naive = a.iter().chain(&b).sum::<f64>() / (a.len() + b.len()) as f64;
        prop_assert!((Estimate::from_values(a.iter().chain(&b).copied()).value - naive).abs() < 1e-9);
    }

    #[test]
    fn replication_streams_ignore_parallelism(seed in any::<u64>(), stream in 0u64..100, threads in 2usize..6) {
        let seeds = SeedSpec::new(seed).with_stream(stream);
        let draw = |_: u64, rng: &mut ChaCha8Rng| Ok(rand::Rng::random::<u64>(rng));
        let serial = run_replications(40, seeds, 1, draw);
        let parallel = run_replications(40, seeds, threads, draw);
        prop_assert_eq!(serial, parallel);
    }

    /// `Z` is nonnegative, zero exactly off the spine, and `τ` is the
    /// generation of the terminal node.
    #[test]
    fn spine_run_invariants(seed in any::<u64>(), t in -1.0f64..4.0) {
        let model = ModelSpec::BranchingMm1 { theta: 5.0, lambda: 0.25, poisson_param: 2.0, y_rate: 9.0 }
            .build()
            .unwrap();
        let ctx = model.solve_alpha().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for variant in [EstimatorVariant::General, EstimatorVariant::IndependentQ] {
            let r = run_single(&model, &ctx, t, variant, 100_000, &mut rng).unwrap();
            prop_assert!(r.z >= 0.0 && r.z.is_finite());
            prop_assert_eq!(r.z > 0.0, r.hit_on_spine);
            prop_assert_eq!(r.tau, r.terminal_index.generation());
            prop_assert!(r.nodes_expanded <= 100_000);
            if t < 0.0 {
                prop_assert_eq!(r.tau, 0);
                if variant == EstimatorVariant::IndependentQ {
                    prop_assert_eq!(r.z, 1.0);
                }
            }
        }
    }

    #[test]
    fn estimate_is_bounded_by_cl_for_unit_q(seed in 0u64..1000, t in 0.5f64..4.0) {
        let model = ModelSpec::NonBranchingExp { theta: 2.0, lambda: 1.0, q_law: QLaw::Constant { q: 1.0 } }
            .build()
            .unwrap();
        let ctx = model.solve_alpha().unwrap();
        let plan = IsPlan::new(EstimatorVariant::IndependentQ, 200, seed);
        for r in spinetail::spine::is_runs(&model, &ctx, t, &plan) {
            // e^{-αS} with S > t on a spine hit
            prop_assert!(r.unwrap().z <= (-ctx.alpha * t).exp());
        }
    }

    #[test]
    fn wrong_alpha_context_still_samples(alpha in 0.2f64..1.9, seed in any::<u64>()) {
        let model = ModelSpec::NonBranchingExp { theta: 2.0, lambda: 1.0, q_law: QLaw::Constant { q: 1.0 } }
            .build()
            .unwrap();
        let ctx = TiltContext::with_alpha(&model, alpha).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = model.sample_tilted(&ctx, &mut rng).unwrap();
        prop_assert_eq!(v.n_offspring(), 1);
    }

    #[test]
    fn pool_file_round_trip(samples in prop::collection::vec(prop_oneof![Just(f64::NEG_INFINITY), -50f64..50.0], 1..100)) {
        let pool = WPool { samples: samples.clone(), iterations: 3 };
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("pool.txt");
        pool.write_to(&file).unwrap();
        let back = WPool::read_from(&file).unwrap();
        prop_assert_eq!(back.samples, samples);
    }

    #[test]
    fn pool_tail_and_quantiles_are_monotone(
        samples in prop::collection::vec(-10f64..10.0, 20..200),
        t1 in -10f64..10.0,
        dt in 0f64..5.0,
    ) {
        let pool = WPool { samples, iterations: 1 };
        let (a, b) = (pool.tail(t1).value, pool.tail(t1 + dt).value);
        prop_assert!((0.0..=1.0).contains(&a) && b <= a);
        prop_assert!(pool.quantile(0.2) <= pool.quantile(0.8));
    }

    #[test]
    fn non_increasing_grids_are_rejected(mut grid in prop::collection::vec(-5f64..5.0, 2..6)) {
        grid.sort_by(f64::total_cmp);
        grid.reverse();
        prop_assume!(grid[0] > grid[grid.len() - 1]);
        let text = format!(
            r#"{{"model": {{"type": "exp_poisson", "lambda": 3.0, "q_law": {{"type": "constant", "q": 1.0}}}},
                "estimator": {{"variant": "general", "n": 10, "t_grid": {grid:?}}}}}"#
        );
        prop_assert!(ExperimentConfig::from_json(&text).is_err());
    }

    #[test]
    fn log_slope_recovers_rate(rate in 0.1f64..8.0, scale in 1e-3f64..1e3) {
        let pts: Vec<(f64, f64)> = (0..6).map(|k| {
            let t = 0.5 * k as f64;
            (t, scale * (-rate * t).exp())
        }).collect();
        prop_assert!((log_slope(&pts).unwrap() + rate).abs() < 1e-9);
    }

    #[test]
    fn dropping_a_column_keeps_the_rest(rows in prop::collection::vec(prop::collection::vec(0u32..100, 3), 0..5), drop in 0usize..3) {
        let header = ["a", "b", "c"];
        let mut csv = format!("{}\n", header.join(","));
        for r in &rows {
            csv.push_str(&format!("{},{},{}\n", r[0], r[1], r[2]));
        }
        let out = drop_csv_column(&csv, header[drop]);
        for (line, r) in out.lines().skip(1).zip(&rows) {
            let kept: Vec<String> = r.iter().enumerate().filter(|(i, _)| *i != drop).map(|(_, v)| v.to_string()).collect();
            prop_assert_eq!(line, kept.join(","));
        }
        prop_assert_eq!(out.lines().next().unwrap().split(',').count(), 2);
    }
}
