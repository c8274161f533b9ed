use std::fmt;

/// Unified error type for the whole crate.
///
/// Variants are grouped by how a caller should react: `Schema`-class errors
/// mean the input was malformed, `ResourceCap` means a configured bound was
/// exceeded, `Inconclusive` means a search terminated without a definitive
/// answer, and `Internal` means a self-check that must hold failed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Vector length disagrees with the ambient dimension.
    ArityMismatch { expected: usize, got: usize },
    /// Two scalars live in incompatible cyclotomic fields.
    ContextMismatch(String),
    /// The supplied blocks do not partition the coordinate set.
    NotAPartition(String),
    /// A configured resource bound (orthant count, cell count, norm box)
    /// was exceeded before the computation finished.
    ResourceCap(String),
    /// A generating function expected to be a 0/1 indicator series is not.
    NotIndicator { point: Vec<i64>, value: String },
    /// A coloring violates shift-stability (equivalently additivity).
    NonAdditive(String),
    /// Two maps in a family fail to commute at the witness point.
    NonCommuting { f: usize, g: usize, x: usize },
    /// A stabilization search ran out of budget without stabilizing.
    Inconclusive(String),
    /// A linear system does not determine its unknowns.
    Underdetermined(String),
    /// Sample data admits no model of the requested shape.
    InconsistentSamples(String),
    /// A mandatory internal cross-check failed. Always a bug.
    Internal(String),
    /// Unsupported combination of options.
    Unsupported(String),
    /// Malformed input document.
    Schema(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::ArityMismatch { expected, got } => {
                write!(f, "arity mismatch: expected {expected} coordinates, got {got}")
            }
            Error::ContextMismatch(s) => write!(f, "scalar context mismatch: {s}"),
            Error::NotAPartition(s) => write!(f, "not a partition: {s}"),
            Error::ResourceCap(s) => write!(f, "resource cap exceeded: {s}"),
            Error::NotIndicator { point, value } => {
                write!(f, "series is not an indicator: coefficient at {point:?} is {value}")
            }
            Error::NonAdditive(s) => {
                write!(f, "coloring is not additive: {s}")
            }
            Error::NonCommuting { f: i, g, x } => {
                write!(f, "maps {i} and {g} do not commute at point {x}")
            }
            Error::Inconclusive(s) => write!(f, "inconclusive: {s}"),
            Error::Underdetermined(s) => write!(f, "underdetermined system: {s}"),
            Error::InconsistentSamples(s) => write!(f, "inconsistent samples: {s}"),
            Error::Internal(s) => write!(f, "internal check failed: {s}"),
            Error::Unsupported(s) => write!(f, "unsupported: {s}"),
            Error::Schema(s) => write!(f, "schema error: {s}"),
        }
    }
}

impl std::error::Error for Error {}
