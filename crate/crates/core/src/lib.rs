//! Toolkit for measure-definite kernels on finite label sets.
//!
//! A kernel `K` on labels `{x_1, ..., x_n}` is *measure definite* when there
//! are measurable sets `S_x` in some measure space with
//! `K(x, y) = mu(S_x symdiff S_y)`. Such kernels are exactly the ones in the
//! cut cone: nonnegative combinations of cut pseudometrics. This crate
//! provides
//!
//! * tests for negative definiteness and the triangle inequality
//!   ([`is_negative_definite`], [`is_pseudometric`]),
//! * Hilbert-space embeddings of negative definite kernels
//!   ([`schoenberg_embed`]),
//! * explicit half-space measure representations for embedded point
//!   configurations ([`crofton`]),
//! * exact cut-cone decompositions with infeasibility certificates
//!   ([`cutcone::decompose`]),
//! * tree metrics as symmetric-difference kernels ([`trees`]),
//! * translation defects `mu(S symdiff gS)` for integer and finite group
//!   actions ([`actions`]).

pub mod actions;
pub mod crofton;
pub mod cutcone;
pub mod embedding;
mod error;
pub mod kernel;
pub mod measure;
mod pattern;
pub mod trees;

pub use error::{Error, Result};
pub use kernel::{
    is_negative_definite, is_pseudometric, sqrt_kernel, Kernel, NegDefOutcome, NegDefWitness,
    PseudometricOutcome, TriangleViolation,
};
pub use pattern::Pattern;
