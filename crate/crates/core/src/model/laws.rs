//! Offspring-count and perturbation laws used by the built-in models.

use rand::Rng;
use rand_distr::{Distribution, Exp, Gamma, Poisson};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Mass below which the tail of an infinite-support pmf is cut when tabulated.
const TAIL_CUT: f64 = 1e-17;

/// Law of the offspring count `N` on `{1, 2, ...}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum NLaw {
    Constant {
        n: u32,
    },
    /// Uniform on `{lo, ..., hi}`.
    Uniform {
        lo: u32,
        hi: u32,
    },
    /// `P(N = n) = p (1 - p)^(n - 1)`.
    Geometric {
        p: f64,
    },
    /// `K | K > 0` with `K ~ Poisson(lambda)`.
    TruncatedPoisson {
        lambda: f64,
    },
    /// `K + 1` with `K ~ Poisson(lambda)`.
    ShiftedPoisson {
        lambda: f64,
    },
    /// Explicit pmf over `1..=pmf.len()`.
    Table {
        pmf: Vec<f64>,
    },
}

/// Poisson pmf; the running product keeps small `k` within a few ulps.
fn poisson_pmf(lambda: f64, k: u64) -> f64 {
    if k <= 100 {
        (1..=k).fold((-lambda).exp(), |p, j| p * (lambda / j as f64))
    } else {
        (k as f64 * lambda.ln() - lambda - ln_gamma(k as f64 + 1.0)).exp()
    }
}

impl NLaw {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        match *self {
            NLaw::Constant { n: 0 } => bad("constant N must be >= 1"),
            NLaw::Uniform { lo, hi } if lo == 0 || hi < lo => bad("uniform N needs 1 <= lo <= hi"),
            NLaw::Geometric { p } if !(p > 0.0 && p <= 1.0) => {
                bad("geometric p must lie in (0, 1]")
            }
            NLaw::TruncatedPoisson { lambda } | NLaw::ShiftedPoisson { lambda }
                if !(lambda > 0.0 && lambda.is_finite()) =>
            {
                bad("Poisson parameter must be positive")
            }
            NLaw::Table { ref pmf } => {
                if pmf.is_empty() || pmf.iter().any(|&p| !(p >= 0.0)) {
                    return bad("N table must be a nonempty nonnegative pmf");
                }
                let total: f64 = pmf.iter().sum();
                if (total - 1.0).abs() > 1e-12 {
                    return bad("N table probabilities must sum to 1");
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn pmf(&self, n: u64) -> f64 {
        if n == 0 {
            return 0.0;
        }
        match *self {
            NLaw::Constant { n: c } => f64::from(u8::from(n == u64::from(c))),
            NLaw::Uniform { lo, hi } => {
                if n >= u64::from(lo) && n <= u64::from(hi) {
                    1.0 / f64::from(hi - lo + 1)
                } else {
                    0.0
                }
            }
            NLaw::Geometric { p } => p * (1.0 - p).powi((n - 1) as i32),
            NLaw::TruncatedPoisson { lambda } => poisson_pmf(lambda, n) / (-(-lambda).exp_m1()),
            NLaw::ShiftedPoisson { lambda } => poisson_pmf(lambda, n - 1),
            NLaw::Table { ref pmf } => pmf.get((n - 1) as usize).copied().unwrap_or(0.0),
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            NLaw::Constant { n } => f64::from(n),
            NLaw::Uniform { lo, hi } => 0.5 * f64::from(lo + hi),
            NLaw::Geometric { p } => 1.0 / p,
            NLaw::TruncatedPoisson { lambda } => lambda / (-(-lambda).exp_m1()),
            NLaw::ShiftedPoisson { lambda } => lambda + 1.0,
            NLaw::Table { ref pmf } => pmf
                .iter()
                .enumerate()
                .map(|(k, p)| (k + 1) as f64 * p)
                .sum(),
        }
    }

    /// Largest `n` with positive mass, if the support is finite.
    pub fn max_support(&self) -> Option<u64> {
        match *self {
            NLaw::Constant { n } => Some(u64::from(n)),
            NLaw::Uniform { hi, .. } => Some(u64::from(hi)),
            NLaw::Table { ref pmf } => Some(pmf.len() as u64),
            NLaw::Geometric { p } if p >= 1.0 => Some(1),
            _ => None,
        }
    }

    /// Size-biased pmf `n P(N = n) / E[N]`.
    pub fn size_biased_pmf(&self, n: u64) -> f64 {
        n as f64 * self.pmf(n) / self.mean()
    }

    /// `(n, weight)` pairs covering all but `TAIL_CUT` of the mass of `weight`.
    pub(crate) fn tabulate(&self, weight: impl Fn(u64) -> f64) -> Vec<(u64, f64)> {
        let mut out = Vec::new();
        if let Some(max) = self.max_support() {
            for n in 1..=max {
                out.push((n, weight(n)));
            }
            return out;
        }
        let mut total = 0.0;
        let floor = (self.mean() * 4.0).ceil() as u64 + 8;
        for n in 1.. {
            let w = weight(n);
            out.push((n, w));
            total += w;
            if n > floor && w <= TAIL_CUT * total.max(1e-300) {
                break;
            }
            if n > 100_000 {
                break;
            }
        }
        out
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> u64 {
        match *self {
            NLaw::Constant { n } => u64::from(n),
            NLaw::Uniform { lo, hi } => rng.random_range(u64::from(lo)..=u64::from(hi)),
            NLaw::Geometric { p } => {
                if p >= 1.0 {
                    return 1;
                }
                let u: f64 = 1.0 - rng.random::<f64>();
                1 + (u.ln() / (1.0 - p).ln()).floor() as u64
            }
            NLaw::TruncatedPoisson { lambda } => {
                let pois = Poisson::new(lambda).expect("validated");
                loop {
                    let k = pois.sample(rng) as u64;
                    if k > 0 {
                        return k;
                    }
                }
            }
            NLaw::ShiftedPoisson { lambda } => {
                Poisson::new(lambda).expect("validated").sample(rng) as u64 + 1
            }
            NLaw::Table { ref pmf } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for (k, p) in pmf.iter().enumerate() {
                    acc += p;
                    if u < acc {
                        return k as u64 + 1;
                    }
                }
                pmf.len() as u64
            }
        }
    }
}

/// Inversion sampler over a tabulated discrete law on `{1, 2, ...}`.
#[derive(Clone, Debug, PartialEq)]
pub struct TabulatedLaw {
    values: Vec<u64>,
    cdf: Vec<f64>,
}

impl TabulatedLaw {
    /// Builds from unnormalized `(value, weight)` pairs.
    pub fn new(pairs: &[(u64, f64)]) -> Result<Self> {
        let total: f64 = pairs.iter().map(|p| p.1).sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::InvalidParameter(
                "discrete table has no mass".to_string(),
            ));
        }
        let mut acc = 0.0;
        let mut values = Vec::with_capacity(pairs.len());
        let mut cdf = Vec::with_capacity(pairs.len());
        for &(v, w) in pairs {
            acc += w / total;
            values.push(v);
            cdf.push(acc);
        }
        Ok(TabulatedLaw { values, cdf })
    }

    pub fn probability(&self, v: u64) -> f64 {
        match self.values.iter().position(|&x| x == v) {
            Some(0) => self.cdf[0],
            Some(k) => self.cdf[k] - self.cdf[k - 1],
            None => 0.0,
        }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> u64 {
        let u: f64 = rng.random();
        let k = self.cdf.partition_point(|&c| c <= u);
        self.values[k.min(self.values.len() - 1)]
    }
}

/// Law of the perturbation `Q >= 0`; `Y = log Q`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum QLaw {
    Constant {
        q: f64,
    },
    /// `Q = e^Y` with `Y ~ Exponential(rate)`, i.e. `Q ~ Pareto(rate, 1)`.
    LogExponential {
        rate: f64,
    },
    Gamma {
        shape: f64,
        rate: f64,
    },
    Uniform {
        lo: f64,
        hi: f64,
    },
}

impl QLaw {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            QLaw::Constant { q } => q >= 0.0 && q.is_finite(),
            QLaw::LogExponential { rate } => rate > 0.0 && rate.is_finite(),
            QLaw::Gamma { shape, rate } => shape > 0.0 && rate > 0.0,
            QLaw::Uniform { lo, hi } => lo >= 0.0 && hi > lo && hi.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("illegal Q law {self:?}")))
        }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            QLaw::Constant { q } => q,
            QLaw::LogExponential { rate } => Exp::new(rate).expect("validated").sample(rng).exp(),
            QLaw::Gamma { shape, rate } => Gamma::new(shape, 1.0 / rate)
                .expect("validated")
                .sample(rng),
            QLaw::Uniform { lo, hi } => rng.random_range(lo..hi),
        }
    }

    /// `E[Q^s]`, or `None` when the moment is infinite.
    pub fn moment(&self, s: f64) -> Option<f64> {
        match *self {
            QLaw::Constant { q } => Some(if q == 0.0 && s > 0.0 { 0.0 } else { q.powf(s) }),
            QLaw::LogExponential { rate } => (s < rate).then(|| rate / (rate - s)),
            QLaw::Gamma { shape, rate } => (shape + s > 0.0)
                .then(|| (ln_gamma(shape + s) - ln_gamma(shape) - s * rate.ln()).exp()),
            QLaw::Uniform { lo, hi } => {
                if (s + 1.0).abs() < 1e-12 {
                    (lo > 0.0).then(|| (hi / lo).ln() / (hi - lo))
                } else if s + 1.0 < 0.0 && lo == 0.0 {
                    None
                } else {
                    Some((hi.powf(s + 1.0) - lo.powf(s + 1.0)) / ((s + 1.0) * (hi - lo)))
                }
            }
        }
    }

    /// The value `q` if `Q` is almost surely constant.
    pub fn degenerate(&self) -> Option<f64> {
        match *self {
            QLaw::Constant { q } => Some(q),
            _ => None,
        }
    }

    /// `ess inf Q`.
    pub fn lower_bound(&self) -> f64 {
        match *self {
            QLaw::Constant { q } => q,
            QLaw::LogExponential { .. } => 1.0,
            QLaw::Gamma { .. } => 0.0,
            QLaw::Uniform { lo, .. } => lo,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pmfs_sum_to_one() {
        let laws = [
            NLaw::Constant { n: 3 },
            NLaw::Uniform { lo: 1, hi: 3 },
            NLaw::Geometric { p: 0.5 },
            NLaw::TruncatedPoisson { lambda: 2.0 },
            NLaw::ShiftedPoisson { lambda: 1.3 },
            NLaw::Table {
                pmf: vec![0.2, 0.0, 0.8],
            },
        ];
        for law in &laws {
            law.validate().unwrap();
            let total: f64 = law.tabulate(|n| law.pmf(n)).iter().map(|p| p.1).sum();
            assert!((total - 1.0).abs() < 1e-12, "{law:?}: {total}");
            let mean: f64 = law
                .tabulate(|n| n as f64 * law.pmf(n))
                .iter()
                .map(|p| p.1)
                .sum();
            assert!((mean - law.mean()).abs() < 1e-10, "{law:?}");
        }
    }

    #[test]
    fn geometric_size_bias() {
        let law = NLaw::Geometric { p: 0.5 };
        for n in 1..20u64 {
            let expected = n as f64 * 0.5f64.powi(n as i32) / 2.0;
            assert!((law.size_biased_pmf(n) - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn truncated_poisson_mean() {
        let law = NLaw::TruncatedPoisson { lambda: 2.0 };
        let expected = 2.0 / (1.0 - (-2.0f64).exp());
        assert!((law.mean() - expected).abs() < 1e-14);
    }

    #[test]
    fn invalid_laws_rejected() {
        assert!(NLaw::Constant { n: 0 }.validate().is_err());
        assert!(NLaw::Table {
            pmf: vec![0.5, 0.4]
        }
        .validate()
        .is_err());
        assert!(QLaw::LogExponential { rate: -1.0 }.validate().is_err());
        assert!(QLaw::Uniform { lo: 2.0, hi: 1.0 }.validate().is_err());
    }

    #[test]
    fn q_moments() {
        assert_eq!(QLaw::LogExponential { rate: 9.0 }.moment(9.5), None);
        let m = QLaw::LogExponential { rate: 9.0 }.moment(8.748).unwrap();
        assert!((m - 9.0 / 0.252).abs() < 1e-9);
        assert_eq!(QLaw::Constant { q: 1.0 }.moment(4.2), Some(1.0));
        let g = QLaw::Gamma {
            shape: 2.0,
            rate: 3.0,
        }
        .moment(1.0)
        .unwrap();
        assert!((g - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn discrete_table_sampling() {
        let t = TabulatedLaw::new(&[(1, 1.0), (4, 3.0)]).unwrap();
        assert!((t.probability(4) - 0.75).abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let hits = (0..40_000).filter(|_| t.sample(&mut rng) == 4).count();
        let p = hits as f64 / 40_000.0;
        assert!((p - 0.75).abs() < 4.0 * (0.75 * 0.25 / 40_000.0f64).sqrt());
    }
}
