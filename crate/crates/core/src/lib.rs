//! Smoothing moving balls approximation for conic-constrained
//! difference-of-convex programs
//!
//! ```text
//! min  f(x) + P1(x) - P2(x)   s.t.  G(x) in K
//! ```
//!
//! where `K` is a closed convex cone with a compact base `B`, so that
//! `G(x) in K` iff `sigma_B(G(x)) <= 0`. The support function is replaced by a
//! smooth upper approximation `h_mu`, and each outer step minimizes a
//! proximal-linearized model of `psi = f + P1 - P2` over a ball that is
//! guaranteed to sit inside `{g_mu <= 0}`.
//!
//! The crate is `no_std` (with `alloc`). Time measurement and all IO live in
//! the companion `smba` crate.
//!
//! ```
//! use nalgebra::DVector;
//! use smba_core::problem::instances::box_problem;
//! use smba_core::solver::{run, SolveStatus, SolverConfig};
//!
//! // min ||x - (2, -1)||^2 / 2  s.t.  x <= (1, 1)
//! let c = DVector::from_column_slice(&[2.0, -1.0]);
//! let b = DVector::from_column_slice(&[1.0, 1.0]);
//! let prob = box_problem(&c, &b, None).unwrap();
//! let report = run(&prob, &SolverConfig::default(), &DVector::zeros(2)).unwrap();
//! assert_eq!(report.status, SolveStatus::Converged);
//! assert!((report.x[0] - 1.0).abs() < 1e-3);
//! ```

#![no_std]
// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// `num_traits::Float` supplies the float math; whenever std is linked into
// the build its inherent methods take precedence, hence the scoped
// `allow(unused_imports)` next to those imports.

extern crate alloc;

pub mod ball;
pub mod cone;
pub mod diagnostics;
mod error;
pub mod problem;
pub mod schedule;
pub mod solver;

pub use error::{Error, Result};
