//! Potential Hessian ascent for the Sherrington–Kirkpatrick model.
//!
//! The crate solves the Parisi PDE for a measure, evaluates the regularized dual
//! entropy, builds the free-probability step covariance, runs the ascent with
//! rounding, and simulates the associated SDEs for verification.

pub mod baseline;
pub mod error;
pub mod harness;
pub mod instance;
pub mod lanczos;
pub(crate) mod io;
pub mod legendre;
pub mod parisi;
pub mod pha;
pub mod potential;
pub mod quad;
pub mod rng;
pub mod sampler;
pub mod sde;
pub mod spectral;

pub use error::{Error, Result};
pub use instance::SkInstance;
