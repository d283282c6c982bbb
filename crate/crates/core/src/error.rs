//! Error type shared by every module in the crate.

use alloc::string::String;
use core::fmt;

/// Everything that can go wrong in this crate.
///
/// Variants split into three families: rejected input (`InvalidInput`,
/// `OutsideWindow`, `GapClosed`), numerical failure after a legal request
/// (`ScanExhausted`, `Unstable`), and guards against runaway allocations
/// (`ResourceLimit`).
#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// A parameter violates a documented precondition.
    InvalidInput(String),
    /// `|t_in| == |t_out|`: the spectral gap is closed and the winding
    /// index is undefined.
    GapClosed,
    /// A site index lies outside the orbital window of the basis.
    OutsideWindow { index: i64, half_window: u32 },
    /// The band-edge scan hit its energy ceiling (after the allowed number
    /// of doublings) before finding the requested number of edges.
    ScanExhausted { requested: usize, found: usize },
    /// A transfer-matrix entry exceeded the overflow guard; the requested
    /// energy is too deep below the potential for this cell length.
    Unstable { energy: f64 },
    /// A discretization request would exceed the built-in size guard.
    ResourceLimit { requested: usize, limit: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(what) => write!(f, "invalid input: {what}"),
            Error::GapClosed => write!(
                f,
                "spectral gap is closed (|t_in| = |t_out|); winding index undefined"
            ),
            Error::OutsideWindow { index, half_window } => write!(
                f,
                "site {index} lies outside the orbital window (half-window {half_window})"
            ),
            Error::ScanExhausted { requested, found } => write!(
                f,
                "band-edge scan exhausted its energy ceiling: found {found} of {requested} edges"
            ),
            Error::Unstable { energy } => write!(
                f,
                "transfer matrix overflowed at energy {energy}; cell is too opaque at this depth"
            ),
            Error::ResourceLimit { requested, limit } => write!(
                f,
                "requested problem size {requested} exceeds the limit {limit}"
            ),
        }
    }
}
