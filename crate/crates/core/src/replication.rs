//! Seeded, order-deterministic replication and single-pass summary statistics.
//!
//! Replication `i` of a run seeded with `(master_seed, stream_id)` draws from
//! the ChaCha8 stream `stream_id * 2^32 + i` of the generator keyed by
//! `master_seed`. Streams are independent keystreams, so the output does not
//! depend on how replications are scheduled over threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spine::ISRun;

/// Stream offset between consecutive `stream_id`s.
const STREAM_STRIDE: u64 = 1 << 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64) -> Self {
        SeedSpec {
            master_seed,
            stream_id: 0,
        }
    }

    pub fn with_stream(self, stream_id: u64) -> Self {
        SeedSpec { stream_id, ..self }
    }

    /// Generator for replication `index`.
    pub fn rng(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(
            self.stream_id
                .wrapping_mul(STREAM_STRIDE)
                .wrapping_add(index),
        );
        rng
    }
}

/// Welford accumulator.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Pairwise combination of two accumulators.
    pub fn merge(&self, other: &Moments) -> Moments {
        if self.n == 0 {
            return *other;
        }
        if other.n == 0 {
            return *self;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * other.n as f64 / n as f64;
        let m2 = self.m2 + other.m2 + delta * delta * (self.n as f64 * other.n as f64) / n as f64;
        Moments { n, mean, m2 }
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Sample variance with divisor `n - 1`; zero for fewer than two values.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.m2 / (self.n - 1) as f64).max(0.0)
        }
    }

    pub fn std_err(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }
}

impl FromIterator<f64> for Moments {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut m = Moments::default();
        iter.into_iter().for_each(|x| m.push(x));
        m
    }
}

/// A Monte Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_err: f64,
    pub n: u64,
}

impl Estimate {
    pub fn from_values(values: impl IntoIterator<Item = f64>) -> Self {
        let m: Moments = values.into_iter().collect();
        Estimate {
            value: m.mean(),
            std_err: m.std_err(),
            n: m.count(),
        }
    }

    /// Batch-means estimate: the values are cut into `batches` consecutive
    /// blocks and the standard error is that of the block means.
    pub fn batch_means(values: &[f64], batches: usize) -> Self {
        let n = values.len();
        let batches = batches.clamp(1, n.max(1));
        let size = n / batches;
        if size == 0 {
            return Estimate::from_values(values.iter().copied());
        }
        let means: Moments = values
            .chunks(size)
            .take(batches)
            .map(|c| c.iter().sum::<f64>() / c.len() as f64)
            .collect();
        let total: f64 = values.iter().sum();
        Estimate {
            value: total / n as f64,
            std_err: means.std_err(),
            n: n as u64,
        }
    }

    /// `|a - b| <= k (SE_a + SE_b)`.
    pub fn agrees_with(&self, other: &Estimate, k: f64) -> bool {
        (self.value - other.value).abs() <= k * (self.std_err + other.std_err)
    }
}

/// Runs `task(i, rng_i)` for `i = 0..n` on a pool of `parallelism` threads and
/// returns the results in index order.
pub fn run_replications<T, F>(
    n: u64,
    seeds: SeedSpec,
    parallelism: usize,
    task: F,
) -> Vec<Result<T>>
where
    T: Send,
    F: Fn(u64, &mut ChaCha8Rng) -> Result<T> + Sync,
{
    let run = |i: u64| {
        let mut rng = seeds.rng(i);
        task(i, &mut rng)
    };
    if parallelism <= 1 {
        return (0..n).map(run).collect();
    }
    match rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
    {
        Ok(pool) => pool.install(|| (0..n).into_par_iter().map(run).collect()),
        Err(_) => (0..n).map(run).collect(),
    }
}

/// Default worker count: the number of available cores.
pub fn default_parallelism() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Summary of a batch of importance-sampling replications.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateSummary {
    /// Replications used, excluding discarded and failed ones.
    pub n: u64,
    pub mean: f64,
    pub std_err: f64,
    /// `std_err / mean`; `None` when every value is zero.
    pub rel_err: Option<f64>,
    pub prop_nonzero: f64,
    /// Mean generation of the node where the level was first crossed.
    pub mean_terminal_gen: f64,
    /// Mean spine generation `τ(t)` over replications that ended on the spine.
    pub mean_tau: Option<f64>,
    pub mean_time_s: f64,
    /// Replications that hit the node budget.
    pub discarded: u64,
    /// Replications that failed for any other reason.
    pub failed: u64,
}

impl EstimateSummary {
    pub fn estimate(&self) -> Estimate {
        Estimate {
            value: self.mean,
            std_err: self.std_err,
            n: self.n,
        }
    }

    /// Fraction of attempted replications that were discarded.
    pub fn discard_rate(&self) -> f64 {
        let total = self.n + self.discarded + self.failed;
        if total == 0 {
            0.0
        } else {
            self.discarded as f64 / total as f64
        }
    }
}

/// Aggregates replication outcomes in index order. Budget overruns are
/// counted as discarded; every other error as failed.
pub fn aggregate(outcomes: &[Result<ISRun>]) -> Result<EstimateSummary> {
    let mut z = Moments::default();
    let mut generation = Moments::default();
    let mut tau = Moments::default();
    let mut time = Moments::default();
    let mut nonzero = 0u64;
    let mut discarded = 0;
    let mut failed = 0;
    for outcome in outcomes {
        match outcome {
            Ok(run) => {
                z.push(run.z);
                generation.push(run.tau as f64);
                time.push(run.elapsed.as_secs_f64());
                if run.z != 0.0 {
                    nonzero += 1;
                }
                if run.hit_on_spine {
                    tau.push(run.tau as f64);
                }
            }
            Err(Error::BudgetExceeded { .. }) => discarded += 1,
            Err(_) => failed += 1,
        }
    }
    if z.count() == 0 {
        return Err(Error::EmptySample);
    }
    let mean = z.mean();
    let std_err = z.std_err();
    Ok(EstimateSummary {
        n: z.count(),
        mean,
        std_err,
        rel_err: (mean != 0.0).then(|| std_err / mean),
        prop_nonzero: nonzero as f64 / z.count() as f64,
        mean_terminal_gen: generation.mean(),
        mean_tau: (tau.count() > 0).then(|| tau.mean()),
        mean_time_s: time.mean(),
        discarded,
        failed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::NodeIndex;
    use rand::Rng;
    use std::time::Duration;

    fn run(z: f64) -> ISRun {
        ISRun {
            z,
            tau: 1,
            terminal_index: NodeIndex::root(),
            hit_on_spine: z != 0.0,
            v_tau: None,
            d_terminal: None,
            nodes_expanded: 1,
            elapsed: Duration::ZERO,
        }
    }

    #[test]
    fn hand_arithmetic() {
        let s = aggregate(&[Ok(run(0.0)), Ok(run(0.0)), Ok(run(1.0))]).unwrap();
        assert!((s.mean - 1.0 / 3.0).abs() < 1e-15);
        assert!((s.prop_nonzero - 1.0 / 3.0).abs() < 1e-15);
        assert!((s.std_err - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn all_zero_has_no_relative_error() {
        let s = aggregate(&[Ok(run(0.0)), Ok(run(0.0))]).unwrap();
        assert_eq!(s.mean, 0.0);
        assert_eq!(s.rel_err, None);
    }

    #[test]
    fn discards_and_failures_are_separated() {
        let budget = Error::BudgetExceeded {
            budget: 1,
            nodes_expanded: 1,
            max_generation: 0,
        };
        let s = aggregate(&[Ok(run(1.0)), Err(budget), Err(Error::ZeroSpineWeight)]).unwrap();
        assert_eq!((s.n, s.discarded, s.failed), (1, 1, 1));
        assert!(matches!(aggregate(&[]), Err(Error::EmptySample)));
    }

    #[test]
    fn constant_task() {
        let out = run_replications(50, SeedSpec::new(1), 4, |_, _| Ok(run(2.5)));
        let s = aggregate(&out).unwrap();
        assert_eq!(s.mean, 2.5);
        assert_eq!(s.std_err, 0.0);
    }

    #[test]
    fn parallelism_does_not_change_output() {
        let task = |i: u64, rng: &mut ChaCha8Rng| Ok((i, rng.random::<u64>()));
        let a = run_replications(64, SeedSpec::new(9), 1, task);
        let b = run_replications(64, SeedSpec::new(9), 4, task);
        assert_eq!(a, b);
        let c = run_replications(64, SeedSpec::new(9).with_stream(1), 4, task);
        assert_ne!(a, c);
    }

    #[test]
    fn welford_merge_matches_concatenation() {
        let xs: Vec<f64> = (0..100).map(|i| (i as f64).sin()).collect();
        let all: Moments = xs.iter().copied().collect();
        let left: Moments = xs[..37].iter().copied().collect();
        let right: Moments = xs[37..].iter().copied().collect();
        let merged = left.merge(&right);
        assert!((merged.mean() - all.mean()).abs() < 1e-15);
        assert!((merged.variance() - all.variance()).abs() < 1e-14);
    }

    #[test]
    fn batch_means_of_constant() {
        let e = Estimate::batch_means(&[3.0; 100], 20);
        assert_eq!(e.value, 3.0);
        assert_eq!(e.std_err, 0.0);
    }
}
