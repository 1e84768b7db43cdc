//! Abelian extensions of the current group Map(S³, SU(n)).
//!
//! The crate discretizes S³, T = S³×[0,1], M = S³×S¹ and Q = S³×D² on
//! midpoint chart grids and implements, on top of matrix-valued differential
//! forms, the descent cochains c^{p,q}, the Chern–Simons-type functionals
//! β, γ and C5, the Witten invariant ε, the extended group law over the affine
//! dual of the connection space and the extended Lie algebra. Every identity is
//! checked numerically by the suites in [`suite`].

pub mod algebra;
pub mod cochains;
pub mod error;
pub mod extension;
pub mod fields;
pub mod forms;
pub mod geometry;
pub mod suite;

pub use error::{Error, Result};
