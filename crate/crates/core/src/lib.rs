//! Numerical engine for the modular data of Drinfeld centers of near-group
//! fusion categories of type `G+n`, together with ℤ/2 boson condensation,
//! pointed-factor splitting and super-modular reduction.
//!
//! The crate is organised bottom-up:
//!
//! * [`algebra`]: finite abelian groups, bicharacters, quadratic forms.
//! * [`neargroup`]: near-group data, axiom checks, the built-in catalog.
//! * [`linalg`]: dense complex matrices, SVD-based affine solves, Newton.
//! * [`centersolver`]: the `(ξ, τ, ω)` triples of the center equations.
//! * [`centerdata`]: assembly and verification of the center's `(S, T)`.
//! * [`condense`]: centralizers, bosons/fermions, condensation.
//! * [`superfactor`]: pointed factors, fermion sectors, `(Ŝ, T̂²)`.
//! * [`pipeline`]: orchestration, JSON/text artifacts, the CLI.

#![allow(clippy::needless_range_loop)]

pub mod algebra;
pub mod centerdata;
pub mod centersolver;
pub mod condense;
mod error;
pub mod io;
pub mod linalg;
pub mod neargroup;
pub mod pipeline;
pub mod superfactor;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
pub use num_rational::Rational64 as Q;
