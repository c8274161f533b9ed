//! Exact arithmetic for counting problems whose answers are eventually
//! polynomial: multivariate rational generating functions supported on
//! generalized orthants, iterated sumsets in commutative semigroups,
//! Ehrhart-style lattice point counts, and families of commuting maps.
//!
//! Everything is exact. Scalars are either rationals or elements of a
//! cyclotomic field Q(zeta_m); floating point never appears.

pub mod colorings;
pub mod commuting;
pub mod error;
pub mod fitting;
pub mod gf;
pub mod linalg;
pub mod orthants;
pub mod poly;
pub mod polytopes;
pub mod scalar;
pub mod semigroups;

pub use error::Error;
pub use scalar::{Cyclotomic, Scalar};

/// Arbitrary-precision rational, always in lowest terms with a positive
/// denominator (kept that way by `num_rational` itself).
pub type Rational = num_rational::BigRational;

pub type Int = num_bigint::BigInt;

/// Generating function with rational coefficients.
pub type RationalGf = gf::Gf<Rational>;

/// Generating function with coefficients in a cyclotomic field.
pub type CyclotomicGf = gf::Gf<Cyclotomic>;

pub type Result<T> = std::result::Result<T, Error>;
