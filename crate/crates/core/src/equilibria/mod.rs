//! Subgame perfection by greatest fixpoint with symbolic certificates, Nash
//! by bounded deviation search, and the "subgame perfect implies Nash" suite.

mod nash;
mod sgpe;
mod suite;

pub use nash::{check_nash, default_depth_bound, DeviationWitness, NashVerdict};
pub use sgpe::{check_sgpe, Claim, ClaimStatus, LocalCondition, Refutation, SgpeCertificate, SgpeVerdict, WITNESS_SEARCH_SPAN};
pub use suite::{sgpe_implies_nash_suite, suite_with, SuiteReport, SUITE_SHAPE};
