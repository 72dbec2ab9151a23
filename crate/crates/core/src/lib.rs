//! Coalescent point processes, their node-height laws and the Feller diffusion limit.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod error;
pub mod models;
pub mod moments;
pub mod numerics;
pub mod sampling;
pub mod simulate;
pub mod stats;
pub mod trees;
pub mod verify;

pub use error::{Error, Result};
