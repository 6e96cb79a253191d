//! Numerics for finite-rank Lieb-Thirring constants and their dual formulations.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod binding;
pub mod constants;
pub mod error;
pub mod manakov;
pub mod params;
pub mod profile_cache;
pub mod radial_nls;
pub mod scf;
pub mod special;
pub mod spectra;
pub mod tridiag;
pub mod weak_norm;

pub use error::{LtError, Result};
pub use params::ProblemParams;
