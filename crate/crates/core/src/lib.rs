//! Finite-dimensional non-commutative probability.
//!
//! Algebras are direct sums of matrix blocks, states are weighted tuples of
//! density matrices and maps are stored as per-block Choi matrices. On top
//! of that sit the disintegration engine for state-preserving
//! *-homomorphisms, the classical special case over finite sets, and the
//! measurement (Lüders) special case.

pub mod algebra;
pub mod bratteli;
pub mod classical;
pub mod commands;
pub mod disintegration;
pub mod error;
pub mod json;
pub mod maps;
pub mod matrix;
pub mod measurement;
pub mod random;

pub use algebra::{Algebra, AlgebraElement, State};
pub use bratteli::BratteliHom;
pub use error::{Error, Result};
pub use maps::BlockMap;
pub use matrix::{CMatrix, Tolerance, C64};
