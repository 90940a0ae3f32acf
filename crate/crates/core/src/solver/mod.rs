//! SMT-LIB emission and external solver driving.

pub mod driver;
pub mod emit;
pub mod model;
pub mod sexp;
pub mod witness;

pub use driver::{Outcome, Refutation, SolverConfig, SolverError};
pub use emit::{script, Obligation, SymbolTable};
pub use model::Model;
