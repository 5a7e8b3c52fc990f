//! Importance sampling for the tail of the endogenous solution of the
//! high-order Lindley equation
//!
//! ```text
//! W = max{ Y, max_{1<=i<=N} (X_i + W_i) },   X_i = log C_i,  Y = log Q,
//! ```
//!
//! on a weighted branching tree, together with the oracles used to check it.
//!
//! * [`model`]: laws of the branching vector, the Cramér–Lundberg root and the
//!   tilted (spine) laws.
//! * [`tree`]: node indices and the length-lexicographic frontier.
//! * [`spine`]: the spine estimator of `P(W > t)`.
//! * [`oracle`]: naive tree simulation, population dynamics and the constant
//!   `H` in `P(W > t) ~ H e^{-αt}`.
//! * [`replication`]: seeded parallel replication and summaries.
//! * [`experiment`]: configuration, presets and the command implementations
//!   behind the `spinetail` binary.

// `!(x >= 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiment;
pub mod model;
pub mod oracle;
pub mod replication;
pub mod spine;
pub mod tree;

pub use error::{Error, Result};
