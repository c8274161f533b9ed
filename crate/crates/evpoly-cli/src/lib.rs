//! Library half of the batch front end: the JSON wire schema and the
//! per-command job runners. The binary in main.rs is a thin shell around
//! these, so tests can drive jobs without spawning processes.

pub mod doc;
pub mod jobs;

use evpoly::Error;

/// Process exit code for an error, as documented in the README:
/// 2 malformed input, 3 resource cap, 4 inconclusive or unfittable,
/// 5 failed internal cross-check.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::ResourceCap(_) => 3,
        Error::Inconclusive(_) | Error::Underdetermined(_) | Error::InconsistentSamples(_) => 4,
        Error::Internal(_) => 5,
        _ => 2,
    }
}
