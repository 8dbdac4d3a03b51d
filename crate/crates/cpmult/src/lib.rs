//! Finite-dimensional toolkit for positivity questions around completely
//! positive maps and multipliers: minimal Kraus/Stinespring representations
//! and their liftings along filtrations, positive Schur multipliers and Gram
//! factorizations, Loewner-matrix monotonicity tests, Toeplitz kernels on
//! finite groups, and completely positive operator multipliers over matrix
//! von Neumann algebras.
//!
//! Everything is dense, deterministic, and desk-scale: dimensions in the
//! tens, tolerances pinned as constants in [`mat`]. All randomness is
//! seeded explicitly.

pub mod alg;
pub mod cli;
pub mod cpmap;
pub mod error;
pub mod io;
pub mod kernels;
pub mod mat;
pub mod opmult;
pub mod sample;
pub mod schur;
pub mod stinelift;

pub use error::{Error, Result};
