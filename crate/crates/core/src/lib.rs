//! Reflected maxmin (RMM) and maxmin copulas.
//!
//! An RMM copula is built from two generator functions `f`, `g` on `[0, 1]`
//! as `C(u, v) = max(0, u v - f(u) g(v))`; flipping the second coordinate
//! turns it into a maxmin copula, the dependence structure of a two-component
//! shock system where the common shock helps one component and hurts the
//! other. This crate provides:
//!
//! * generator representation and exact validation ([`generator`]),
//! * copula evaluation, reflection, bounds, and stand geometry ([`copula`]),
//! * decomposition of the copula measure into its absolutely continuous
//!   density and the singular mass on the zero-level curve ([`measure`]),
//! * diagonal-section analysis and reconstruction of symmetric copulas from
//!   diagonals ([`diagonal`]),
//! * generator recovery from copula values, analytic or empirical
//!   ([`inference`]),
//! * seeded sampling with explicit singular draws ([`sampler`]),
//! * a named preset catalog ([`presets`]) and file formats ([`io`]).
//!
//! The numeric core is generic over the scalar type; the aliases below pin
//! the `f64` instantiation that the documented tolerances assume.

pub mod copula;
pub mod diagonal;
pub mod generator;
pub mod inference;
pub mod io;
pub mod measure;
pub mod num;
pub mod piecewise;
pub mod poly;
pub mod presets;
pub mod quad;
pub mod sampler;
pub mod stats;

pub use num::{ExtendedNonneg, Scalar};
pub use piecewise::Side;

/// Default scalar type for the concrete aliases.
pub type Real = f64;

pub type Polynomial = poly::Polynomial<Real>;
pub type Piecewise = piecewise::Piecewise<Real>;
pub type Generator = generator::Generator<Real>;
pub type MaxminGenerators = generator::MaxminGenerators<Real>;
pub type RmmCopula = copula::RmmCopula<Real>;
pub type MaxminCopula = copula::MaxminCopula<Real>;
pub type StandGeometry = copula::StandGeometry<Real>;
pub type MassDecomposition = measure::MassDecomposition<Real>;
pub type DiagonalSection = diagonal::DiagonalSection<Real>;
pub type EmpiricalCopula = inference::EmpiricalCopula<Real>;
pub type SampleSet = sampler::SampleSet<Real>;
