//! Dispersive equations on cusp surfaces: radial operators per angular mode, spectral
//! propagation, mixed norms, semiclassical tools and the experiments built on them.

// `!(x > 0.0)` is used on purpose so that NaN is rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod angular;
pub mod bumps;
pub mod config;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod norms;
pub mod propagate;
pub mod radial;
pub mod semiclassics;
pub mod tridiag;

pub use error::{Error, Result};
