//! Solvability tests and constructive synthesis for truncated moment problems
//! on the free semigroup `F_n^+` and on `Z_n^+`.
//!
//! A moment map assigns a matrix to every word of a finite suffix-closed set.
//! Feasibility reduces to positivity of block kernels built from the map; when
//! a kernel test passes, the GNS quotient of the kernel yields an explicit
//! row contraction reproducing the moments.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

pub mod commutative;
pub mod error;
pub mod gns;
pub mod kernels;
pub mod linalg;
pub mod poisson;
pub mod quotient;
pub mod rng;
pub mod words;

pub use error::{Error, Result};
pub use kernels::{FeasibilityReport, HermitianBlockKernel, MomentMap, ReportKind};
pub use linalg::CMatrix;
pub use words::{AdmissibleSet, FreePolynomial, LambdaSpec, MultiIndex, Word};
