//! Spectral fractional Laplacian with mixed Dirichlet–Neumann conditions on
//! tensor-grid boxes: eigenbasis and extension realizations, critical
//! minimization and Pohozaev diagnostics.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod assembly;
pub mod bn;
pub mod constants;
pub mod error;
pub mod extension;
pub mod extremal;
pub mod fractional;
pub mod linalg;
pub mod mesh;
pub mod par;
pub mod pohozaev;
pub mod quadrature;
pub mod spectral;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
