//! DeCon to transition system.

pub mod body;
pub mod rule;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::frontend::ast::{AnnotationKind, Arg, HANDLER_PREFIX};
use crate::frontend::validate::{MSG_SENDER, MSG_VALUE};
use crate::frontend::{RuleKind, TriggerMode, ValidatedContract};
use crate::logic::{
    mk_state_vars, simplify, Cmp, Expr, LogicError, Property, Sort, StateSpace, StateVar, Transition,
    TransitionSystem, Var, VarKind,
};

pub use body::{BodyEncoder, EnvParams, Trigger};
pub use rule::{RuleEncoding, TreeEncoder};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CompileError {
    #[error("internal compiler error: {0}")]
    Internal(String),
}

impl From<LogicError> for CompileError {
    fn from(e: LogicError) -> Self {
        CompileError::Internal(e.to_string())
    }
}

/// Transition system plus the per-transaction rule trees it came from.
#[derive(Debug, Clone)]
pub struct Compiled {
    pub system: TransitionSystem,
    pub gamma: StateSpace,
    pub encodings: Vec<RuleEncoding>,
}

pub fn compile(vc: &ValidatedContract) -> Result<Compiled, CompileError> {
    let gamma = mk_state_vars(vc);
    let mut transitions = Vec::new();
    let mut encodings = Vec::new();
    for (t, e) in build_transitions(vc, &gamma)? {
        transitions.push(t);
        encodings.push(e);
    }
    let system = TransitionSystem {
        contract: vc.name().to_string(),
        state_vars: gamma.vars().into_iter().cloned().collect(),
        init: build_init(vc, &gamma)?,
        axioms: build_axioms(&gamma)?,
        transitions,
        properties: build_properties(vc, &gamma)?,
    };
    Ok(Compiled {
        system,
        gamma,
        encodings,
    })
}

/// Fresh bound variables for the key sorts of a map, named after columns.
fn key_binders(sv: &StateVar, names: &[String], taken: &BTreeSet<String>) -> Vec<Var> {
    let Sort::Map(keys, _) = &sv.sort else {
        return vec![];
    };
    keys.iter()
        .enumerate()
        .map(|(i, s)| {
            let mut name = names.get(i).cloned().unwrap_or_else(|| format!("k{i}"));
            while taken.contains(&name) {
                name.push('_');
            }
            Var::local(name, s.clone())
        })
        .collect()
}

/// `P(v)` for a scalar, `∀k. P(v[k])` for a map.
fn pointwise(v: &Var, binders: Vec<Var>, pred: impl Fn(Expr) -> Result<Expr, LogicError>) -> Result<Expr, LogicError> {
    if binders.is_empty() {
        pred(v.expr())
    } else {
        let read = Expr::select(v.expr(), binders.iter().map(Var::expr).collect())?;
        Expr::forall(binders, pred(read)?)
    }
}

fn value_sort(s: &Sort) -> &Sort {
    match s {
        Sort::Map(_, v) => v,
        s => s,
    }
}

fn nonneg(v: &Var, binders: Vec<Var>) -> Result<Option<Expr>, LogicError> {
    if *value_sort(&v.sort) != Sort::UInt {
        return Ok(None);
    }
    pointwise(v, binders, |x| Expr::cmp(Cmp::Ge, x, Expr::Int(0))).map(Some)
}

fn zero_of(s: &Sort) -> Expr {
    match s {
        Sort::Bool => Expr::ff(),
        _ => Expr::Int(0),
    }
}

fn state_names(gamma: &StateSpace) -> BTreeSet<String> {
    gamma.vars().iter().map(|v| v.name.clone()).collect()
}

/// Uint state is nonnegative in every state.
pub fn build_axioms(gamma: &StateSpace) -> Result<Expr, CompileError> {
    let taken = state_names(gamma);
    let mut xs = Vec::new();
    for sv in gamma.vars() {
        let b = key_binders(sv, &[], &taken);
        if let Some(e) = nonneg(&sv.var(), b)? {
            xs.push(e);
        }
    }
    Ok(simplify(&Expr::And(xs)))
}

/// Written relations start empty unless annotated `.init`; relations that
/// no rule writes are constructor parameters and stay unconstrained. Maps
/// are compared against constant maps, so the formula has no quantifier.
pub fn build_init(vc: &ValidatedContract, gamma: &StateSpace) -> Result<Expr, CompileError> {
    let written = vc.written_relations();
    let mut xs = Vec::new();
    for (rel, layout) in gamma.relations() {
        if vc.contract.has_annotation(AnnotationKind::Init, rel) || !written.contains(rel) {
            continue;
        }
        for sv in layout.vars() {
            let z = zero_of(value_sort(&sv.sort));
            let rhs = match &sv.sort {
                Sort::Map(..) => Expr::const_map(sv.sort.clone(), z)?,
                _ => z,
            };
            xs.push(Expr::eq(sv.expr(), rhs)?);
        }
    }
    Ok(simplify(&Expr::And(xs)))
}

fn uniquify(name: String, taken: &mut BTreeSet<String>) -> String {
    let mut n = name;
    while taken.contains(&n) {
        n.push('_');
    }
    taken.insert(n.clone());
    n
}

pub fn build_transitions(
    vc: &ValidatedContract,
    gamma: &StateSpace,
) -> Result<Vec<(Transition, RuleEncoding)>, CompileError> {
    let mut out = Vec::new();
    let mut names: BTreeMap<String, usize> = BTreeMap::new();
    let state = state_names(gamma);
    for ri in vc.rules_of_kind(RuleKind::Transaction) {
        let rule = &vc.rules()[ri];
        let tl = vc.triggers[ri].unwrap();
        let handler = rule.body[tl].as_atom().unwrap();
        let hdecl = vc.decl(&handler.relation).unwrap();
        let base = handler.relation.trim_start_matches(HANDLER_PREFIX).to_string();
        let k = names.entry(base.clone()).or_default();
        *k += 1;
        let name = if *k == 1 { base } else { format!("{base}_{k}") };

        let mut taken = state.clone();
        taken.insert("sender".into());
        taken.insert("value".into());
        let mut params = Vec::new();
        let mut seen = BTreeSet::new();
        for (arg, col) in handler.args.iter().zip(&hdecl.columns) {
            let wanted = match arg {
                Arg::Var(v) if !crate::frontend::ast::is_wildcard_name(v) && seen.insert(v.clone()) => v.clone(),
                _ => col.name.clone(),
            };
            let pname = uniquify(wanted, &mut taken);
            params.push(Var::new(pname, Sort::from_column(col.ty), VarKind::Param));
        }
        let env = EnvParams {
            sender: Var::new("sender", Sort::Addr, VarKind::Param),
            value: Var::new("value", Sort::UInt, VarKind::Param),
        };
        let uses = |b: &str| rule.body.iter().any(|l| l.as_atom().is_some_and(|a| a.relation == b));
        let trigger = Trigger {
            relation: handler.relation.clone(),
            args: params.iter().map(Var::expr).collect(),
            old: BTreeMap::new(),
        };
        if uses(MSG_SENDER) {
            params.push(env.sender.clone());
        }
        if uses(MSG_VALUE) {
            params.push(env.value.clone());
        }
        let mut tree = TreeEncoder::new(vc, gamma, ri, Some(env));
        let enc = tree.encode(ri, tl, &trigger)?;
        let written: BTreeSet<String> = tree.written().map(String::from).collect();

        let mut xs = vec![enc.formula()];
        for sv in gamma.vars() {
            if written.contains(&sv.name) {
                let binders = key_binders(sv, &[], &state);
                if let Some(e) = nonneg(&sv.primed(), binders)? {
                    xs.push(e);
                }
            } else {
                xs.push(Expr::eq(sv.primed().expr(), sv.expr())?);
            }
        }
        for p in &params {
            if p.sort == Sort::UInt {
                xs.push(Expr::cmp(Cmp::Ge, p.expr(), Expr::Int(0))?);
            }
        }
        params.extend(tree.aux.iter().cloned());
        let formula = simplify(&Expr::And(xs));
        out.push((
            Transition {
                name,
                rule: ri,
                params,
                formula,
            },
            enc,
        ));
    }
    Ok(out)
}

/// Encode a rule under the `check()` trigger: every literal reads the
/// current state. Returns the body and its free locals.
pub fn encode_check(vc: &ValidatedContract, gamma: &StateSpace, ri: usize) -> Result<(Expr, Vec<Var>), CompileError> {
    let mut be = BodyEncoder::new(vc, gamma, ri);
    be.encode(TriggerMode::Check, None, None, &|sv: &StateVar| sv.expr())?;
    Ok((Expr::And(be.constraints), be.locals))
}

/// One safety property per violation query: ¬∃X. φ.
pub fn build_properties(vc: &ValidatedContract, gamma: &StateSpace) -> Result<Vec<Property>, CompileError> {
    let mut out = Vec::new();
    let mut names: BTreeMap<String, usize> = BTreeMap::new();
    for ri in vc.rules_of_kind(RuleKind::ViolationQuery) {
        let base = vc.rules()[ri].head.relation.clone();
        let k = names.entry(base.clone()).or_default();
        *k += 1;
        let name = if *k == 1 { base } else { format!("{base}_{k}") };
        let (query, locals) = encode_check(vc, gamma, ri)?;
        let query = simplify(&query);
        let formula = simplify(&Expr::not(Expr::exists(locals.clone(), query.clone())?)?);
        out.push(Property {
            name,
            rule: ri,
            query,
            locals,
            formula,
        });
    }
    Ok(out)
}
