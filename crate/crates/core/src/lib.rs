//! Checking subgame perfection and Nash equilibrium on finite, cyclic and
//! parametric infinite extensive-form strategy profiles.
//!
//! Profiles are equation systems ([`model::ProfileSystem`]). Coinductive
//! predicates are decided as greatest fixpoints over the finitely many body
//! positions, with "for all n" side conditions discharged by an exact affine
//! procedure ([`affine`]). Finite profiles have brute-force oracles in
//! [`finite`].

pub mod affine;
pub mod dollar;
pub mod dot;
pub mod dsl;
pub mod equilibria;
pub mod error;
pub mod evaluation;
pub mod finite;
pub mod generate;
pub mod model;
pub mod samples;
pub mod trees;

pub use error::{Error, Result};
