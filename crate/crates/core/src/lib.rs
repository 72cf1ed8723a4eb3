//! Simulator and optimizer for a UAV-assisted integrated sensing and
//! communication network with a high-altitude platform acting as the echo
//! collector.
//!
//! Physics lives in [`geometry`] and [`link`], scenario loading in
//! [`scenario`], the genetic optimizer in [`opt`] and the experiment drivers
//! in [`harness`].

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod link;
pub mod opt;
pub mod scenario;

pub use error::{IsacError, Result};
