//! Relation to state-variable mapping.

use std::collections::BTreeMap;

use crate::frontend::ast::{AnnotationKind, RelationDecl};
use crate::frontend::ValidatedContract;

use super::expr::{Expr, Var};
use super::sort::Sort;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateVar {
    pub name: String,
    pub sort: Sort,
    pub relation: String,
    /// Origin value column, or `member` for membership maps.
    pub column: String,
}

impl StateVar {
    pub fn var(&self) -> Var {
        Var::state(self.name.clone(), self.sort.clone())
    }

    pub fn expr(&self) -> Expr {
        self.var().expr()
    }

    pub fn primed(&self) -> Var {
        self.var().primed().expect("unprimed state variable")
    }
}

/// How one relation is represented.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Layout {
    /// One scalar per column.
    Singleton(Vec<StateVar>),
    /// One map per value column, indexed by the key columns.
    Keyed {
        keys: Vec<usize>,
        values: Vec<(usize, StateVar)>,
    },
    /// Set of tuples: all columns index a map to bool.
    Membership(StateVar),
}

impl Layout {
    pub fn vars(&self) -> Vec<&StateVar> {
        match self {
            Layout::Singleton(vs) => vs.iter().collect(),
            Layout::Keyed { values, .. } => values.iter().map(|(_, v)| v).collect(),
            Layout::Membership(v) => vec![v],
        }
    }
}

/// Γ: relation name to layout, in declaration order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StateSpace {
    order: Vec<String>,
    layouts: BTreeMap<String, Layout>,
}

impl StateSpace {
    pub fn get(&self, relation: &str) -> Option<&Layout> {
        self.layouts.get(relation)
    }

    pub fn relations(&self) -> impl Iterator<Item = (&str, &Layout)> {
        self.order.iter().map(|r| (r.as_str(), &self.layouts[r]))
    }

    /// All state variables in declaration order.
    pub fn vars(&self) -> Vec<&StateVar> {
        self.relations().flat_map(|(_, l)| l.vars()).collect()
    }

    pub fn by_name(&self, name: &str) -> Option<&StateVar> {
        self.vars().into_iter().find(|v| v.name == name)
    }
}

fn layout(d: &RelationDecl) -> Layout {
    let name_of = |col: &str, single: bool| {
        if single {
            d.name.clone()
        } else {
            format!("{}.{}", d.name, col)
        }
    };
    if d.singleton {
        let single = d.columns.len() == 1;
        return Layout::Singleton(
            d.columns
                .iter()
                .map(|c| StateVar {
                    name: name_of(&c.name, single),
                    sort: Sort::from_column(c.ty),
                    relation: d.name.clone(),
                    column: c.name.clone(),
                })
                .collect(),
        );
    }
    let keys = d.key_columns();
    let key_sorts: Vec<Sort> = keys.iter().map(|&k| Sort::from_column(d.columns[k].ty)).collect();
    let values = d.value_columns();
    if values.is_empty() {
        return Layout::Membership(StateVar {
            name: d.name.clone(),
            sort: Sort::map(key_sorts, Sort::Bool),
            relation: d.name.clone(),
            column: "member".into(),
        });
    }
    let single = values.len() == 1;
    Layout::Keyed {
        keys,
        values: values
            .iter()
            .map(|&v| {
                let c = &d.columns[v];
                (
                    v,
                    StateVar {
                        name: name_of(&c.name, single),
                        sort: Sort::map(key_sorts.clone(), Sort::from_column(c.ty)),
                        relation: d.name.clone(),
                        column: c.name.clone(),
                    },
                )
            })
            .collect(),
    }
}

/// Build Γ. Handlers are events and violation queries are never
/// materialized, so neither gets state.
pub fn mk_state_vars(c: &ValidatedContract) -> StateSpace {
    let mut space = StateSpace::default();
    for d in &c.contract.decls {
        if d.is_handler() || c.contract.has_annotation(AnnotationKind::Violation, &d.name) {
            continue;
        }
        space.order.push(d.name.clone());
        space.layouts.insert(d.name.clone(), layout(d));
    }
    space
}
