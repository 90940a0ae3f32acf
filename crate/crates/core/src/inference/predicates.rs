//! Predicate extraction from rule bodies.
//!
//! Each body literal is encoded on its own over the current state, keeping
//! the rule's variable names as free locals: `voted(v, false)` becomes
//! `¬voted[v]`. Those that read state form P0; P1 pairs each of them with
//! another literal of the same rule that shares a variable.

use std::collections::BTreeSet;

use crate::compiler::body::{arith_op, cmp_op, const_expr};
use crate::frontend::ast::{Arg, Literal};
use crate::frontend::validate::is_builtin;
use crate::frontend::{RuleKind, ValidatedContract};
use crate::logic::{free_vars, simplify, substitute, Expr, Layout, LogicError, Sort, StateSpace, Subst, Var, VarKind};

/// Where a predicate came from: a rule and the body literals it encodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Origin {
    pub rule: usize,
    pub literals: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Predicate {
    pub formula: Expr,
    /// Free locals of `formula`, sorted.
    pub locals: Vec<Var>,
    pub origin: Origin,
}

impl Predicate {
    fn new(formula: Expr, origin: Origin) -> Predicate {
        let locals = free_vars(&formula)
            .into_iter()
            .filter(|v| v.kind == VarKind::Local)
            .collect();
        Predicate {
            formula,
            locals,
            origin,
        }
    }

    pub fn mentions_state(&self) -> bool {
        self.formula.mentions_state()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExtractOptions {
    /// Drop P0 members whose literal has no constant argument.
    pub drop_constant_free: bool,
}

fn term(vc: &ValidatedContract, ri: usize, a: &Arg) -> Expr {
    match a {
        Arg::Const(c) => const_expr(c),
        Arg::Var(v) => Var::local(v.clone(), Sort::from_column(vc.var_type(ri, v))).expr(),
    }
}

/// Encode one literal over the current state. `None` for handler,
/// environment and aggregate literals.
pub fn literal_formula(
    vc: &ValidatedContract,
    gamma: &StateSpace,
    ri: usize,
    li: usize,
) -> Result<Option<Expr>, LogicError> {
    let t = |a: &Arg| term(vc, ri, a);
    let e = match &vc.rules()[ri].body[li] {
        Literal::Atom(a) => {
            if is_builtin(&a.relation) {
                return Ok(None);
            }
            let Some(layout) = gamma.get(&a.relation) else {
                return Ok(None);
            };
            match layout {
                Layout::Singleton(vars) => {
                    let eqs = vars
                        .iter()
                        .zip(&a.args)
                        .map(|(sv, arg)| Expr::eq(sv.expr(), t(arg)))
                        .collect::<Result<Vec<_>, _>>()?;
                    Expr::And(eqs)
                }
                Layout::Keyed { keys, values } => {
                    let ks: Vec<Expr> = keys.iter().map(|&k| t(&a.args[k])).collect();
                    let eqs = values
                        .iter()
                        .map(|(col, sv)| Expr::eq(Expr::select(sv.expr(), ks.clone())?, t(&a.args[*col])))
                        .collect::<Result<Vec<_>, _>>()?;
                    Expr::And(eqs)
                }
                Layout::Membership(sv) => Expr::select(sv.expr(), a.args.iter().map(t).collect())?,
            }
        }
        Literal::Condition { lhs, op, rhs, .. } => Expr::cmp(cmp_op(*op), t(lhs), t(rhs))?,
        Literal::Function { out, op, lhs, rhs, .. } => {
            Expr::eq(t(&Arg::Var(out.clone())), Expr::arith(arith_op(*op), t(lhs), t(rhs))?)?
        }
        Literal::Aggregate { .. } => return Ok(None),
    };
    Ok(Some(simplify(&e)))
}

fn has_constant(lit: &Literal) -> bool {
    let c = |a: &Arg| matches!(a, Arg::Const(_));
    match lit {
        Literal::Atom(a) => a.args.iter().any(c),
        Literal::Condition { lhs, rhs, .. } | Literal::Function { lhs, rhs, .. } => c(lhs) || c(rhs),
        Literal::Aggregate { .. } => false,
    }
}

/// Locals renamed in order of first occurrence, for structural dedup.
pub fn canonical_key(e: &Expr) -> String {
    let mut order: Vec<Var> = Vec::new();
    collect_locals(e, &mut order);
    let sigma: Subst = order
        .iter()
        .enumerate()
        .map(|(i, v)| (v.clone(), Var::local(format!("%{i}"), v.sort.clone()).expr()))
        .collect();
    substitute(e, &sigma).map(|x| x.to_string()).unwrap_or_else(|_| e.to_string())
}

/// Free locals in pre-order of first occurrence.
pub fn collect_locals(e: &Expr, out: &mut Vec<Var>) {
    fn go(e: &Expr, bound: &mut Vec<Var>, out: &mut Vec<Var>) {
        match e {
            Expr::Var(v) if v.kind == VarKind::Local && !bound.contains(v) && !out.contains(v) => out.push(v.clone()),
            Expr::Forall(vs, b) | Expr::Exists(vs, b) => {
                let n = bound.len();
                bound.extend(vs.iter().cloned());
                go(b, bound, out);
                bound.truncate(n);
            }
            _ => {
                for c in e.children() {
                    go(c, bound, out);
                }
            }
        }
    }
    go(e, &mut Vec::new(), out);
}

fn trivial(e: &Expr) -> bool {
    matches!(e, Expr::Bool(_))
}

/// P0 ∪ P1 for one rule.
pub fn extract_predicates(
    vc: &ValidatedContract,
    gamma: &StateSpace,
    ri: usize,
    opts: ExtractOptions,
) -> Result<Vec<Predicate>, LogicError> {
    let rule = &vc.rules()[ri];
    let trigger = vc.triggers.get(ri).copied().flatten();
    let mut all: Vec<Predicate> = Vec::new();
    for li in 0..rule.body.len() {
        if Some(li) == trigger {
            continue;
        }
        if let Some(f) = literal_formula(vc, gamma, ri, li)? {
            if !trivial(&f) {
                all.push(Predicate::new(
                    f,
                    Origin {
                        rule: ri,
                        literals: vec![li],
                    },
                ));
            }
        }
    }
    let p0: Vec<&Predicate> = all
        .iter()
        .filter(|p| p.mentions_state())
        .filter(|p| !opts.drop_constant_free || has_constant(&rule.body[p.origin.literals[0]]))
        .collect();

    let mut out: Vec<Predicate> = Vec::new();
    let mut seen = BTreeSet::new();
    let mut push = |p: Predicate, keys: Vec<String>| {
        let key = keys.into_iter().min().unwrap();
        if seen.insert(key) {
            out.push(p);
        }
    };
    for p in &p0 {
        push((*p).clone(), vec![canonical_key(&p.formula)]);
    }
    for p in &p0 {
        let pv: BTreeSet<&Var> = p.locals.iter().collect();
        for q in &all {
            if q.origin == p.origin || !q.locals.iter().any(|v| pv.contains(v)) {
                continue;
            }
            let pq = simplify(&Expr::And(vec![p.formula.clone(), q.formula.clone()]));
            if trivial(&pq) {
                continue;
            }
            let qp = simplify(&Expr::And(vec![q.formula.clone(), p.formula.clone()]));
            let mut lits = p.origin.literals.clone();
            lits.extend(&q.origin.literals);
            push(
                Predicate::new(pq.clone(), Origin { rule: ri, literals: lits }),
                vec![canonical_key(&pq), canonical_key(&qp)],
            );
        }
    }
    Ok(out)
}

/// Predicates from every rule that can fire in a transaction: transaction,
/// join and aggregation rules. Violation queries are left out.
pub fn extract_all(vc: &ValidatedContract, gamma: &StateSpace, opts: ExtractOptions) -> Result<Vec<Predicate>, LogicError> {
    let mut out: Vec<Predicate> = Vec::new();
    let mut seen = BTreeSet::new();
    for ri in 0..vc.rules().len() {
        if vc.kinds[ri] == RuleKind::ViolationQuery {
            continue;
        }
        for p in extract_predicates(vc, gamma, ri, opts)? {
            if seen.insert(canonical_key(&p.formula)) {
                out.push(p);
            }
        }
    }
    Ok(out)
}
