//! The compiled transition system and its text/JSON dumps.

use std::fmt::Write;

use serde::Serialize;

use super::expr::{Expr, Var};
use super::state::StateVar;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub name: String,
    /// Index of the transaction rule in the contract.
    pub rule: usize,
    pub params: Vec<Var>,
    /// Over unprimed state, primed state and params.
    pub formula: Expr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Property {
    pub name: String,
    pub rule: usize,
    /// The violation query body, with its free locals.
    pub query: Expr,
    pub locals: Vec<Var>,
    /// ¬∃X. query
    pub formula: Expr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionSystem {
    pub contract: String,
    pub state_vars: Vec<StateVar>,
    pub init: Expr,
    /// Facts that hold in every state (uint nonnegativity).
    pub axioms: Expr,
    pub transitions: Vec<Transition>,
    pub properties: Vec<Property>,
}

impl TransitionSystem {
    pub fn state_var(&self, name: &str) -> Option<&StateVar> {
        self.state_vars.iter().find(|v| v.name == name)
    }

    /// Human-readable dump; stable across runs.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        writeln!(s, "contract {}", self.contract).unwrap();
        writeln!(s, "\nstate:").unwrap();
        for v in &self.state_vars {
            writeln!(s, "  {} : {}    -- {}.{}", v.name, v.sort, v.relation, v.column).unwrap();
        }
        writeln!(s, "\ninit:\n  {}", self.init).unwrap();
        writeln!(s, "\naxioms:\n  {}", self.axioms).unwrap();
        for t in &self.transitions {
            let ps: Vec<String> = t.params.iter().map(|p| format!("{}: {}", p.name, p.sort)).collect();
            writeln!(s, "\ntransition {}({}):", t.name, ps.join(", ")).unwrap();
            writeln!(s, "  {}", t.formula).unwrap();
        }
        for p in &self.properties {
            writeln!(s, "\nproperty {}:\n  {}", p.name, p.formula).unwrap();
        }
        s
    }

    pub fn to_json(&self) -> SystemJson {
        SystemJson {
            schema: "dcv-system/1",
            contract: self.contract.clone(),
            state: self
                .state_vars
                .iter()
                .map(|v| StateVarJson {
                    name: v.name.clone(),
                    sort: v.sort.to_string(),
                    relation: v.relation.clone(),
                    column: v.column.clone(),
                })
                .collect(),
            init: self.init.to_string(),
            axioms: self.axioms.to_string(),
            transitions: self
                .transitions
                .iter()
                .map(|t| TransitionJson {
                    name: t.name.clone(),
                    params: t
                        .params
                        .iter()
                        .map(|p| ParamJson {
                            name: p.name.clone(),
                            sort: p.sort.to_string(),
                        })
                        .collect(),
                    formula: t.formula.to_string(),
                })
                .collect(),
            properties: self
                .properties
                .iter()
                .map(|p| PropertyJson {
                    name: p.name.clone(),
                    formula: p.formula.to_string(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct SystemJson {
    pub schema: &'static str,
    pub contract: String,
    pub state: Vec<StateVarJson>,
    pub init: String,
    pub axioms: String,
    pub transitions: Vec<TransitionJson>,
    pub properties: Vec<PropertyJson>,
}

#[derive(Debug, Serialize)]
pub struct StateVarJson {
    pub name: String,
    pub sort: String,
    pub relation: String,
    pub column: String,
}

#[derive(Debug, Serialize)]
pub struct ParamJson {
    pub name: String,
    pub sort: String,
}

#[derive(Debug, Serialize)]
pub struct TransitionJson {
    pub name: String,
    pub params: Vec<ParamJson>,
    pub formula: String,
}

#[derive(Debug, Serialize)]
pub struct PropertyJson {
    pub name: String,
    pub formula: String,
}
