//! Sorted formula IR, state mapping and formula utilities.

pub mod eval;
pub mod expr;
pub mod print;
pub mod simplify;
pub mod sort;
pub mod state;
pub mod subst;
pub mod system;

pub use expr::{ArithOp, Cmp, Expr, LogicError, Var, VarKind};
pub use simplify::simplify;
pub use sort::Sort;
pub use state::{mk_state_vars, Layout, StateSpace, StateVar};
pub use subst::{free_vars, prime, substitute, Subst};
pub use system::{Property, Transition, TransitionSystem};
