//! Instance generation, file formats, the batch driver and the `smba` CLI on
//! top of `smba-core`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod checks;
pub mod clock;
pub mod config;
mod error;
pub mod generator;
pub mod problem_file;
pub mod report;
pub mod selftest;
pub mod trace;

pub use error::{AppError, Result};
