//! DeCon lexing, parsing and validation.

pub mod ast;
pub mod diagnostic;
pub mod lexer;
pub mod parser;
pub mod printer;
pub mod validate;

pub use ast::Contract;
pub use diagnostic::{Diagnostic, Severity};
pub use parser::parse;
pub use validate::{validate, RuleKind, TriggerMode, ValidatedContract};

/// Parse and validate in one step.
pub fn load(name: &str, src: &str) -> Result<ValidatedContract, Vec<Diagnostic>> {
    validate(parse(name, src)?)
}
