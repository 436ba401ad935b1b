//! Classicality indicators of unitary symmetry strata of N-level systems.
//!
//! A kernel spectrum `π` cuts the ordered eigenvalue simplex by the half-space
//! `(r↓, π↑) ≥ 0`. The indicator of a stratum is the Hilbert-Schmidt measure
//! of the cut region relative to the whole stratum. Everything is a rational
//! function of `π`, so the pipeline is generic over [`scalar::Scalar`] and runs
//! exactly over rationals or quadratic surds.

pub mod error;
pub mod geometry;
pub mod indicators;
pub mod polyalg;
pub mod quadrature;
pub mod scalar;
pub mod strata;
pub mod verify;

pub use error::{Error, Result};
pub use geometry::{Polytope, Simplex, SignedSimplexList};
pub use indicators::{indicator, IndicatorOptions, IndicatorResult};
pub use polyalg::{AffineChartMap, LinearFormProduct, SparsePolynomial};
pub use quadrature::{Method, QuadratureResult};
pub use scalar::{Extended, Rational, RealScalar, Scalar, Surd};
pub use strata::{DegeneracyType, KernelSpectrum};

/// Default seed for every stochastic routine.
pub const DEFAULT_SEED: u64 = 0x5EED;
