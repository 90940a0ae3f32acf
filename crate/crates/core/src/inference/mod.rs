//! Induction with Houdini-style invariant inference.

pub mod bmc;
pub mod candidates;
pub mod houdini;
pub mod predicates;
pub mod verify;

pub use candidates::{generate, raw_bound, Candidate, CandidateOptions};
pub use houdini::{find_inductive_invariant, HoudiniCandidate, HoudiniConfig, HoudiniError, HoudiniResult, Problem};
pub use predicates::{extract_all, extract_predicates, ExtractOptions, Predicate};
pub use verify::{induction_obligations, verify_contract, verify_property, PropertyResult, Stage, Stats, UnknownReason, Verdict, VerifierConfig};
