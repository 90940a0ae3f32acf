//! Safety verifier for DeCon declarative smart contracts.

pub mod frontend;
pub mod logic;
pub mod solver;
pub mod compiler;
pub mod inference;
pub mod cli;
