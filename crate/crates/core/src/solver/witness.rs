//! Refuting goals directly on a solver model.
//!
//! A goal of the shape `A ∨ ∀X. B` (nested `∧`/`∨` of quantifier-free parts
//! and top-level universals) is false in a model if it is false when the
//! universals range over any finite set of values: a falsifying assignment
//! is a genuine witness. Only that direction is used.

use std::collections::BTreeSet;

use crate::logic::eval::{holds, Domains, Value};
use crate::logic::{ArithOp, Expr};

use super::model::Model;

/// Values beyond this are left to the solver; the evaluator wraps.
const LIMIT: i64 = 1 << 31;
/// Cap on assignments tried per goal.
const MAX_ASSIGNMENTS: usize = 1 << 16;

fn quantifier_free(e: &Expr) -> bool {
    match e {
        Expr::Forall(..) | Expr::Exists(..) => false,
        Expr::Arith(ArithOp::Div, ..) => false,
        Expr::Int(n) if n.abs() >= LIMIT => false,
        _ => e.children().into_iter().all(quantifier_free),
    }
}

/// Number of universally bound variables if `e` has the supported shape.
fn shape(e: &Expr) -> Option<usize> {
    match e {
        Expr::And(xs) | Expr::Or(xs) => xs.iter().map(shape).sum(),
        Expr::Forall(vs, b) if quantifier_free(b) => Some(vs.len()),
        e if quantifier_free(e) => Some(0),
        _ => None,
    }
}

fn collect(v: &Value, out: &mut BTreeSet<i64>) -> bool {
    match v {
        Value::Bool(_) => true,
        Value::Int(n) => {
            out.insert(*n);
            n.abs() < LIMIT
        }
        Value::Map { default, entries } => {
            let mut ok = collect(default, out);
            for (ks, x) in entries {
                for k in ks {
                    ok &= collect(k, out);
                }
                ok &= collect(x, out);
            }
            ok
        }
    }
}

fn constants(e: &Expr, out: &mut BTreeSet<i64>) {
    if let Expr::Int(n) = e {
        out.insert(*n);
    }
    for c in e.children() {
        constants(c, out);
    }
}

/// Witness values: every integer in the model or the goals, plus one
/// value outside all of them.
pub fn domain(model: &Model, goals: &[&Expr]) -> Option<Vec<i64>> {
    let mut vals = BTreeSet::from([0, 1]);
    for v in model.values.values() {
        if !collect(v, &mut vals) {
            return None;
        }
    }
    for g in goals {
        constants(g, &mut vals);
    }
    let fresh = vals.iter().next_back().copied().unwrap_or(0) + 1;
    vals.insert(fresh);
    Some(vals.into_iter().collect())
}

/// True only if `goal` is certainly false in `model`.
pub fn falsified(model: &Model, goal: &Expr, dom: &[i64]) -> bool {
    let Some(k) = shape(goal) else { return false };
    if dom.len().checked_pow(k as u32).map_or(true, |n| n > MAX_ASSIGNMENTS) {
        return false;
    }
    let d = Domains {
        ints: dom.to_vec(),
        uints: dom.to_vec(),
        addrs: dom.to_vec(),
    };
    matches!(holds(goal, &model.env(), &d), Ok(false))
}
