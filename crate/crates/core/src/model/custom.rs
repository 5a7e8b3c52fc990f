use std::fmt::Debug;

use rand::RngCore;

use super::BranchingVector;

/// User-supplied branching law.
///
/// Only `sample_p` is required. Without a `mellin` hook the moment function
/// is evaluated on a fixed Monte Carlo sample; without `sample_tilted` the
/// spine sampler fails with `NoTiltAvailable`.
pub trait CustomModel: Debug + Send + Sync {
    fn sample_p(&self, rng: &mut dyn RngCore) -> BranchingVector;

    /// One draw from the spine law at root `alpha`, if the model knows it.
    fn sample_tilted(&self, _alpha: f64, _rng: &mut dyn RngCore) -> Option<BranchingVector> {
        None
    }

    /// `E[sum C_i^s]`; `Some(inf)` outside the domain, `None` if unknown.
    fn mellin(&self, _s: f64) -> Option<f64> {
        None
    }

    fn q_independent(&self) -> bool {
        false
    }

    fn degenerate_q(&self) -> Option<f64> {
        None
    }
}
