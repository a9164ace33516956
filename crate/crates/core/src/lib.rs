//! Exact information rates, dispersions and convergence exponents for
//! multi-view channels.
//!
//! A d-view channel observes one input symbol through d independent uses of
//! a discrete memoryless channel. This crate computes the conditional
//! entropy, mutual information and dispersion of such channels exactly by
//! summing over output type classes, fits their exponential convergence
//! rates against the minimum pairwise Chernoff information, and evaluates
//! the related special channels: the binomial and Poisson approximation
//! channels, the deletion channel, and the tilted large-deviation exponents
//! behind the rate.
//!
//! Every quantity is in nats.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod deletion;
pub mod error;
pub mod exec;
pub mod fbl_rates;
pub mod largedev;
pub mod multiview_dmc;
pub mod prob_core;
pub mod report;
pub mod search;
pub mod special_channels;

pub use error::{Error, Result};
pub use exec::Exec;
pub use multiview_dmc::{Dmc, MultiViewReport, TypeClass};
pub use prob_core::{FiniteDistribution, LogReal};
