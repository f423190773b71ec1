//! Leave-one-out estimators with finite-sample error bounds.
//!
//! Every estimator here has the same shape: build a set from a sample, then
//! estimate its probability mass by the fraction of sample points that fall
//! in the set built from the remaining points. [`loo`] holds the generic
//! machinery and the MSE bound; the other modules specialise it.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod loo;
pub mod unseen;
pub mod hull;
pub mod poset;
pub mod coincide;
pub mod coverage;
pub mod sim;
pub mod cli;

pub use error::{Error, Result};
pub use loo::{cascade_bound, loo_estimate, loo_estimate_par, BoundInputs, LooEstimate, MembershipOracle};
