//! Numerical laboratory for Nekhoroshev stability of Hoelder steep
//! Hamiltonians in action-angle variables.
//!
//! Function representations live in [`poly`], [`trig`], [`grid`],
//! [`fourier`] and [`norms`]. The analysis layers built on them are
//! [`smoothing`], [`steepness`], [`geography`], [`normalform`] and
//! [`dynamics`].

pub mod benchmarks;
pub mod dynamics;
pub mod error;
pub mod fit;
pub mod fourier;
pub mod frequency;
pub mod geography;
pub mod grid;
pub mod normalform;
pub mod norms;
pub mod poly;
pub mod smoothing;
pub mod steepness;
pub mod trig;

pub use error::{NekError, Result};
pub use fourier::{fourier_coefficients, CoefficientTable};
pub use grid::{Axis, DomainSpec, GridFunction};
pub use norms::{holder_norm_estimate, weighted_fourier_norm, NormReport};
pub use poly::Poly;
pub use trig::{MultiIndex, TrigPoly};

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
