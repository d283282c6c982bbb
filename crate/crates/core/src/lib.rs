//! Numerics for one-dimensional diatomic square-well crystals: transfer-matrix
//! band structure, single-well bound states, tight-binding reduction onto the
//! Su-Schrieffer-Heeger (SSH) chain, and a gap-tracked deformation family that
//! connects the two dimerized limits.
//!
//! The crate is `no_std` (with `alloc`). IO, file formats, and the command
//! line live in the companion `ssh-emergence-cli` crate.

#![no_std]
#![forbid(unsafe_code)]
// Parameter checks are written `!(x > 0.0)` on purpose: the negation also
// routes NaN into the rejection branch, which `x <= 0.0` would let through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bloch;
pub mod error;
pub mod homotopy;
pub mod numerics;
pub mod ssh;
pub mod tb;
pub mod well;

pub use error::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = core::result::Result<T, Error>;
