//! Command implementations. Each returns a [`CommandOutput`] holding the
//! human-readable report, optional CSV and the process exit code, so the
//! binary stays a thin argument parser.

use std::fmt::Write as _;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{q_efficiency_check, NLaw, TiltContext};
use crate::oracle::{
    estimate_h_equiv, estimate_h_spine, max_feasible_depth, naive_w_samples, popdyn_pool,
    HSpinePlan,
};
use crate::replication::{aggregate, Estimate, SeedSpec};
use crate::spine::{is_estimate, is_runs, run_single, EstimatorVariant, IsPlan};
use crate::tree::{lenlex_compare, NodeIndex};

use super::config::ExperimentConfig;
use super::presets::{self, preset, reference_table};

/// Header of the `run-is` CSV.
pub const RUN_IS_HEADER: &str =
    "t,estimate,std_err,t_over_mu,mean_terminal_generation,time_per_replication_s,prop_nonzero";

/// Header of the `reproduce-table` CSV.
pub const REPRODUCE_HEADER: &str = "t,estimate,std_err,reference_estimate,reference_std_err,\
t_over_mu,reference_t_over_mu,mean_terminal_generation,reference_terminal_generation,\
prop_nonzero,reference_prop_nonzero,time_per_replication_s,reference_time_s,pass";

/// Largest fraction of budget-exceeded replications tolerated per grid point.
pub const MAX_DISCARD_RATE: f64 = 0.001;

/// Expected node count used to pick the default naive-tree depth.
pub const NAIVE_DEPTH_NODES: f64 = 300.0;

/// Tolerance on the mean terminal generation against a reference row.
pub const TERMINAL_GEN_TOLERANCE: f64 = 0.3;

/// Process exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    Usage = 1,
    ModelMath = 2,
    Statistical = 3,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }

    pub fn for_error(err: &Error) -> Self {
        if err.is_model_math() {
            ExitStatus::ModelMath
        } else {
            match err {
                Error::Config(_)
                | Error::InvalidParameter(_)
                | Error::Io(_)
                | Error::Domain { .. }
                | Error::DependentQ
                | Error::NotDegenerateQ
                | Error::NoTiltAvailable(_)
                | Error::MissingIngredients(_) => ExitStatus::Usage,
                _ => ExitStatus::Statistical,
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CommandOutput {
    pub report: String,
    pub csv: Option<String>,
    pub status: ExitStatus,
}

impl CommandOutput {
    fn ok(report: String, csv: Option<String>) -> Self {
        CommandOutput {
            report,
            csv,
            status: ExitStatus::Success,
        }
    }

    /// Maps an error to its report line and exit status.
    pub fn from_error(err: &Error) -> Self {
        CommandOutput {
            report: format!("error: {err}\n"),
            csv: None,
            status: ExitStatus::for_error(err),
        }
    }

    fn from_result(result: Result<CommandOutput>) -> Self {
        result.unwrap_or_else(|e| Self::from_error(&e))
    }
}

/// Options shared by all commands.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunOptions {
    /// Overrides the configured master seed.
    pub seed: Option<u64>,
    pub parallelism: usize,
}

impl RunOptions {
    fn apply(&self, cfg: &ExperimentConfig) -> ExperimentConfig {
        let mut cfg = cfg.clone();
        if let Some(seed) = self.seed {
            cfg.seeds.master_seed = seed;
        }
        cfg
    }
}

pub fn solve_alpha(cfg: &ExperimentConfig, _opts: &RunOptions) -> CommandOutput {
    CommandOutput::from_result(solve_alpha_inner(cfg))
}

fn solve_alpha_inner(cfg: &ExperimentConfig) -> Result<CommandOutput> {
    let model = cfg.build_model()?;
    let ctx = model.solve_alpha()?;
    let eff = q_efficiency_check(&model, &ctx);
    let mut r = String::new();
    writeln!(r, "model={}", model.name()).unwrap();
    writeln!(
        r,
        "alpha={:.3}, mu={:.3}",
        truncate3(ctx.alpha),
        truncate3(ctx.mu)
    )
    .unwrap();
    writeln!(r, "alpha_exact={}", ctx.alpha).unwrap();
    writeln!(r, "mu_exact={}", ctx.mu).unwrap();
    writeln!(r, "E[Q^alpha]={}", eff.e_q_alpha).unwrap();
    writeln!(r, "E[Q^(2 alpha)]={}", eff.e_q_2alpha).unwrap();
    writeln!(r, "E[Q^(2 alpha)/D]={}", eff.e_q_2alpha_over_d).unwrap();
    writeln!(
        r,
        "bounded_relative_error_condition={} ({:?})",
        if eff.finite { "holds" } else { "fails" },
        eff.method
    )
    .unwrap();
    for w in &eff.warnings {
        writeln!(r, "warning: {w}").unwrap();
    }
    Ok(CommandOutput::ok(r, None))
}

/// Three-decimal display that truncates rather than rounds.
pub fn truncate3(x: f64) -> f64 {
    (x * 1000.0).trunc() / 1000.0
}

/// One `run-is` row per grid point; grid point `k` uses stream `k`.
pub fn run_is(cfg: &ExperimentConfig, opts: &RunOptions) -> CommandOutput {
    CommandOutput::from_result(run_is_inner(&opts.apply(cfg), opts.parallelism))
}

fn run_is_inner(cfg: &ExperimentConfig, parallelism: usize) -> Result<CommandOutput> {
    let model = cfg.build_model()?;
    let ctx = cfg.context(&model)?;
    let plan = cfg.is_plan(parallelism);
    let mut csv = format!("{RUN_IS_HEADER}\n");
    let mut report = format!("model={} alpha={} mu={}\n", model.name(), ctx.alpha, ctx.mu);
    let mut status = ExitStatus::Success;
    for (k, &t) in cfg.estimator.t_grid.iter().enumerate() {
        let s = is_estimate(&model, &ctx, t, &plan.with_stream(k as u64))?;
        writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            t,
            s.mean,
            s.std_err,
            t / ctx.mu,
            s.mean_terminal_gen,
            s.mean_time_s,
            s.prop_nonzero
        )
        .unwrap();
        if s.discard_rate() > MAX_DISCARD_RATE {
            status = ExitStatus::Statistical;
            writeln!(
                report,
                "t={t}: {} of {} replications exceeded the node budget",
                s.discarded,
                s.n + s.discarded
            )
            .unwrap();
        }
    }
    Ok(CommandOutput {
        report,
        csv: Some(csv),
        status,
    })
}

fn naive_depth(cfg: &ExperimentConfig, model: &crate::model::Model) -> usize {
    cfg.oracle
        .naive_depth
        .unwrap_or_else(|| max_feasible_depth(model, NAIVE_DEPTH_NODES, 60))
}

/// Naive depth-truncated tree tail estimates over the grid.
pub fn run_naive(cfg: &ExperimentConfig, opts: &RunOptions) -> CommandOutput {
    CommandOutput::from_result(run_naive_inner(&opts.apply(cfg), opts.parallelism))
}

fn run_naive_inner(cfg: &ExperimentConfig, parallelism: usize) -> Result<CommandOutput> {
    let model = cfg.build_model()?;
    let depth = naive_depth(cfg, &model);
    let seeds = SeedSpec::new(cfg.seeds.master_seed);
    let samples = naive_w_samples(&model, cfg.oracle.naive_n, depth, seeds, parallelism)?;
    let mut csv = String::from("t,estimate,std_err,depth,n\n");
    for &t in &cfg.estimator.t_grid {
        let hits = samples.iter().filter(|&&w| w > t).count();
        let n = samples.len();
        let p = hits as f64 / n as f64;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        writeln!(csv, "{t},{p},{se},{depth},{n}").unwrap();
    }
    Ok(CommandOutput::ok(
        format!("model={} depth={depth}\n", model.name()),
        Some(csv),
    ))
}

/// Population-dynamics pool: tail estimates over the grid, and the pool
/// itself (one value per line) when `pool_out` is given.
pub fn run_popdyn(
    cfg: &ExperimentConfig,
    opts: &RunOptions,
    pool_out: Option<&std::path::Path>,
) -> CommandOutput {
    CommandOutput::from_result(run_popdyn_inner(&opts.apply(cfg), pool_out))
}

fn run_popdyn_inner(
    cfg: &ExperimentConfig,
    pool_out: Option<&std::path::Path>,
) -> Result<CommandOutput> {
    let model = cfg.build_model()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seeds.master_seed);
    let pool = popdyn_pool(
        &model,
        cfg.oracle.pool_size,
        cfg.oracle.pool_iterations,
        &mut rng,
    )?;
    let mut csv = String::from("t,estimate,std_err,pool_size,iterations\n");
    for &t in &cfg.estimator.t_grid {
        let e = pool.tail(t);
        writeln!(
            csv,
            "{t},{},{},{},{}",
            e.value,
            e.std_err,
            pool.pool_size(),
            pool.iterations
        )
        .unwrap();
    }
    let mut report = format!(
        "model={} pool_size={} iterations={}\n",
        model.name(),
        pool.pool_size(),
        pool.iterations
    );
    if let Some(path) = pool_out {
        pool.write_to(path)?;
        writeln!(report, "pool written to {}", path.display()).unwrap();
    }
    Ok(CommandOutput::ok(report, Some(csv)))
}

/// Least-squares slope of `log y` on `t`, skipping non-positive `y`.
pub fn log_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.1 > 0.0)
        .map(|&(t, y)| (t, y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    Some(sxy / sxx)
}

/// Both estimates of `H`, the fitted decay rate of the IS grid, and
/// plot-ready columns `(t, log estimate, log H e^{-αt})`.
pub fn estimate_h(cfg: &ExperimentConfig, opts: &RunOptions) -> CommandOutput {
    CommandOutput::from_result(estimate_h_inner(&opts.apply(cfg), opts.parallelism))
}

fn estimate_h_inner(cfg: &ExperimentConfig, parallelism: usize) -> Result<CommandOutput> {
    let model = cfg.build_model()?;
    let ctx = cfg.context(&model)?;
    let seed = cfg.seeds.master_seed;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pool = popdyn_pool(
        &model,
        cfg.oracle.pool_size,
        cfg.oracle.pool_iterations,
        &mut rng,
    )?;
    let h = estimate_h_equiv(&model, &ctx, &pool, cfg.oracle.h_n, &mut rng)?;
    let mut report = String::new();
    writeln!(
        report,
        "model={} alpha={} mu={}",
        model.name(),
        ctx.alpha,
        ctx.mu
    )
    .unwrap();
    writeln!(report, "H_equiv={} se={}", h.value, h.std_err).unwrap();
    let mut spine_plan = HSpinePlan::new(cfg.oracle.h_spine_n, seed).with_parallelism(parallelism);
    spine_plan.inner_draws = cfg.oracle.h_spine_inner_draws;
    for (k, &m) in cfg.oracle.h_spine_m.iter().enumerate() {
        let mut plan = spine_plan;
        plan.seeds = plan.seeds.with_stream(1000 + k as u64);
        let hs = estimate_h_spine(&model, &ctx, m, &plan)?;
        writeln!(report, "H_spine m={m} value={} se={}", hs.value, hs.std_err).unwrap();
    }
    let plan = cfg.is_plan(parallelism);
    let mut points = Vec::new();
    let mut csv = String::from("t,log_estimate,log_asymptotic\n");
    for (k, &t) in cfg.estimator.t_grid.iter().enumerate() {
        let s = is_estimate(&model, &ctx, t, &plan.with_stream(k as u64))?;
        points.push((t, s.mean));
        let asymptotic = h.value.ln() - ctx.alpha * t;
        writeln!(csv, "{t},{},{asymptotic}", s.mean.ln()).unwrap();
    }
    match log_slope(&points) {
        Some(slope) => writeln!(
            report,
            "log_slope={slope} (-alpha = {}, ratio {})",
            -ctx.alpha,
            -slope / ctx.alpha
        )
        .unwrap(),
        None => writeln!(report, "log_slope=undefined").unwrap(),
    }
    Ok(CommandOutput::ok(report, Some(csv)))
}

/// Comparison of one grid point with its reference row.
#[derive(Clone, Debug, PartialEq)]
pub struct RowComparison {
    pub reference: presets::ReferenceRow,
    pub estimate: Estimate,
    pub mean_terminal_gen: f64,
    pub prop_nonzero: f64,
    pub time_s: f64,
    pub t_over_mu: f64,
    pub estimate_ok: bool,
    pub prop_nonzero_ok: bool,
    pub terminal_gen_ok: bool,
}

impl RowComparison {
    pub fn pass(&self) -> bool {
        self.estimate_ok && self.prop_nonzero_ok && self.terminal_gen_ok
    }
}

/// Runs a reference table's preset and compares each row.
pub fn compare_table(name: &str, opts: &RunOptions) -> Result<Vec<RowComparison>> {
    let reference = reference_table(name)?;
    let cfg = opts.apply(&preset(name)?);
    let model = cfg.build_model()?;
    let ctx = model.solve_alpha()?;
    let plan = cfg.is_plan(opts.parallelism);
    reference
        .iter()
        .enumerate()
        .map(|(k, row)| {
            let s = is_estimate(&model, &ctx, row.t, &plan.with_stream(k as u64))?;
            let est = s.estimate();
            let reference_est = Estimate {
                value: row.estimate,
                std_err: row.std_err,
                n: 10_000,
            };
            Ok(RowComparison {
                reference: *row,
                estimate: est,
                mean_terminal_gen: s.mean_terminal_gen,
                prop_nonzero: s.prop_nonzero,
                time_s: s.mean_time_s,
                t_over_mu: row.t / ctx.mu,
                estimate_ok: est.agrees_with(&reference_est, 4.0),
                prop_nonzero_ok: s.prop_nonzero >= 0.95,
                terminal_gen_ok: (s.mean_terminal_gen - row.terminal_gen).abs()
                    <= TERMINAL_GEN_TOLERANCE,
            })
        })
        .collect()
}

pub fn reproduce_table(name: &str, opts: &RunOptions) -> CommandOutput {
    CommandOutput::from_result(reproduce_table_inner(name, opts))
}

fn reproduce_table_inner(name: &str, opts: &RunOptions) -> Result<CommandOutput> {
    let rows = compare_table(name, opts)?;
    let mut csv = format!("{REPRODUCE_HEADER}\n");
    let mut report = String::new();
    for c in &rows {
        let r = &c.reference;
        writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.t,
            c.estimate.value,
            c.estimate.std_err,
            r.estimate,
            r.std_err,
            c.t_over_mu,
            r.t_over_mu,
            c.mean_terminal_gen,
            r.terminal_gen,
            c.prop_nonzero,
            r.prop_nonzero,
            c.time_s,
            r.time_s,
            c.pass()
        )
        .unwrap();
        writeln!(
            report,
            "{} t={}: estimate {:.6e} ± {:.3e} vs {:.6e} ± {:.3e}, terminal gen {:.2} vs {:.2}, prop nonzero {:.3}",
            if c.pass() { "PASS" } else { "FAIL" },
            r.t,
            c.estimate.value,
            c.estimate.std_err,
            r.estimate,
            r.std_err,
            c.mean_terminal_gen,
            r.terminal_gen,
            c.prop_nonzero
        )
        .unwrap();
    }
    let passed = rows.iter().filter(|c| c.pass()).count();
    writeln!(report, "{passed}/{} rows pass", rows.len()).unwrap();
    Ok(CommandOutput {
        report,
        csv: Some(csv),
        status: if passed == rows.len() {
            ExitStatus::Success
        } else {
            ExitStatus::Statistical
        },
    })
}

/// Outcome of one check of the validation suite.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

/// The fast invariant suite. With `alpha_override`, every estimator check
/// runs at that root instead of the computed one (fault injection).
pub fn validation_suite(alpha_override: Option<f64>, opts: &RunOptions) -> Result<Vec<Check>> {
    let seed = opts.seed.unwrap_or(1);
    let mut checks = Vec::new();

    let order = [
        vec![],
        vec![1],
        vec![3],
        vec![1, 1],
        vec![1, 2],
        vec![2, 1],
        vec![1, 1, 1],
    ];
    let sorted = order.windows(2).all(|w| {
        let a = NodeIndex::from_path(w[0].clone()).unwrap();
        let b = NodeIndex::from_path(w[1].clone()).unwrap();
        lenlex_compare(&a, &b).is_lt()
    });
    checks.push(Check {
        name: "length-lexicographic order",
        pass: sorted,
        detail: "∅ ≺ (1) ≺ (3) ≺ (1,1) ≺ (1,2) ≺ (2,1) ≺ (1,1,1)".into(),
    });

    let discrete = presets::discrete_model().build()?;
    let pmf = discrete.discrete_tilted_pmf(1.0).expect("discrete table");
    checks.push(Check {
        name: "discrete tilted pmf",
        pass: pmf == [0.5, 0.5],
        detail: format!("{pmf:?}"),
    });

    let trunc = NLaw::TruncatedPoisson { lambda: 2.0 };
    let shifted = NLaw::ShiftedPoisson { lambda: 2.0 };
    let worst = (1..=30)
        .map(|n| {
            let (a, b) = (trunc.size_biased_pmf(n), shifted.pmf(n));
            (a - b).abs() / a.abs().max(b.abs())
        })
        .fold(0.0, f64::max);
    checks.push(Check {
        name: "size-biased truncated Poisson",
        pass: worst <= 8.0 * f64::EPSILON,
        detail: format!("max relative difference {worst:e} on n <= 30"),
    });

    let model = presets::nonbranching_model().build()?;
    let ctx = match alpha_override {
        Some(a) => TiltContext::with_alpha(&model, a)?,
        None => model.solve_alpha()?,
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inv_d = Estimate::from_values(
        (0..100_000)
            .map(|_| {
                model
                    .sample_tilted(&ctx, &mut rng)
                    .map(|v| 1.0 / v.spine_weight(ctx.alpha))
            })
            .collect::<Result<Vec<f64>>>()?,
    );
    checks.push(Check {
        name: "tilted mean of 1/D",
        pass: (inv_d.value - 1.0).abs() <= 4.0 * inv_d.std_err,
        detail: format!("{} ± {}", inv_d.value, inv_d.std_err),
    });

    let plan = IsPlan::new(EstimatorVariant::IndependentQ, 10_000, seed)
        .with_parallelism(opts.parallelism);
    let runs = is_runs(&model, &ctx, -0.5, &plan);
    let all_one = runs.iter().all(|r| matches!(r, Ok(run) if run.z == 1.0));
    checks.push(Check {
        name: "negative level gives Z = 1",
        pass: all_one,
        detail: format!("{} replications", runs.len()),
    });

    let general = IsPlan::new(EstimatorVariant::General, 100_000, seed)
        .with_parallelism(opts.parallelism)
        .with_stream(1);
    let g = aggregate(&is_runs(&model, &ctx, -0.5, &general))?;
    checks.push(Check {
        name: "negative level, general estimator averages 1",
        pass: (g.mean - 1.0).abs() <= 3.0 * g.std_err,
        detail: format!("{} ± {}", g.mean, g.std_err),
    });

    for (k, &t) in [1.0f64, 3.0].iter().enumerate() {
        let plan = IsPlan::new(EstimatorVariant::IndependentQ, 100_000, seed)
            .with_parallelism(opts.parallelism)
            .with_stream(10 + k as u64);
        let s = is_estimate(&model, &ctx, t, &plan)?;
        let exact = 0.5 * (-t).exp();
        checks.push(Check {
            name: "unbiased against exact tail",
            pass: (s.mean - exact).abs() <= 4.0 * s.std_err,
            detail: format!("t={t}: {} ± {} vs {exact}", s.mean, s.std_err),
        });
    }

    let grid = presets::NONBRANCHING_GRID;
    let plan = IsPlan::new(EstimatorVariant::IndependentQ, 20_000, seed)
        .with_parallelism(opts.parallelism)
        .with_stream(20);
    let rows = crate::oracle::cl_bound_check(&model, &ctx, &grid, &plan)?;
    checks.push(Check {
        name: "Cramér–Lundberg bound",
        pass: rows.iter().all(|r| r.pass),
        detail: rows
            .iter()
            .map(|r| format!("t={}: {:.3e} <= {:.3e}", r.t, r.estimate, r.bound))
            .collect::<Vec<_>>()
            .join(", "),
    });

    match presets::discrete_model().build()?.solve_alpha() {
        Err(Error::NonPositiveDrift { mu, .. }) => checks.push(Check {
            name: "negative drift detected",
            pass: true,
            detail: format!("mu = {mu}"),
        }),
        other => checks.push(Check {
            name: "negative drift detected",
            pass: false,
            detail: format!("{other:?}"),
        }),
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let single = run_single(
        &model,
        &ctx,
        -1.0,
        EstimatorVariant::IndependentQ,
        1,
        &mut rng,
    )?;
    checks.push(Check {
        name: "root crossing needs one node",
        pass: single.tau == 0 && single.nodes_expanded == 1,
        detail: format!("tau={} nodes={}", single.tau, single.nodes_expanded),
    });

    Ok(checks)
}

pub fn validate(alpha_override: Option<f64>, opts: &RunOptions) -> CommandOutput {
    let start = Instant::now();
    CommandOutput::from_result(validation_suite(alpha_override, opts).map(|checks| {
        let mut report = String::new();
        for c in &checks {
            writeln!(
                report,
                "{} {}: {}",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                c.detail
            )
            .unwrap();
        }
        let failed = checks.iter().filter(|c| !c.pass).count();
        writeln!(
            report,
            "{} checks, {failed} failed, {:.1}s",
            checks.len(),
            start.elapsed().as_secs_f64()
        )
        .unwrap();
        CommandOutput {
            report,
            csv: None,
            status: if failed == 0 {
                ExitStatus::Success
            } else {
                ExitStatus::Statistical
            },
        }
    }))
}

/// Removes the named column from CSV text; used to compare runs while
/// ignoring timing.
pub fn drop_csv_column(csv: &str, column: &str) -> String {
    let mut lines = csv.lines();
    let Some(header) = lines.next() else {
        return String::new();
    };
    let idx = header.split(',').position(|h| h == column);
    let keep = |line: &str| -> String {
        line.split(',')
            .enumerate()
            .filter(|(i, _)| Some(*i) != idx)
            .map(|(_, f)| f)
            .collect::<Vec<_>>()
            .join(",")
    };
    let mut out = keep(header);
    out.push('\n');
    for line in lines {
        out.push_str(&keep(line));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_exact_exponential() {
        let pts: Vec<(f64, f64)> = (0..5)
            .map(|k| (k as f64, 3.0 * (-2.0 * k as f64).exp()))
            .collect();
        assert!((log_slope(&pts).unwrap() + 2.0).abs() < 1e-12);
        assert_eq!(log_slope(&[(1.0, 0.0)]), None);
    }

    #[test]
    fn drop_column() {
        let csv = "a,b,c\n1,2,3\n4,5,6\n";
        assert_eq!(drop_csv_column(csv, "b"), "a,c\n1,3\n4,6\n");
    }

    #[test]
    fn discrete_preset_exits_with_model_math() {
        let out = solve_alpha(
            &preset("discrete").unwrap(),
            &RunOptions {
                seed: None,
                parallelism: 1,
            },
        );
        assert_eq!(out.status, ExitStatus::ModelMath);
        assert!(out.report.contains("drift"));
    }

    #[test]
    fn unknown_table_is_usage_error() {
        let out = reproduce_table(
            "nope",
            &RunOptions {
                seed: None,
                parallelism: 1,
            },
        );
        assert_eq!(out.status, ExitStatus::Usage);
    }
}
