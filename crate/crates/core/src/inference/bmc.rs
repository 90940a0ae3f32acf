//! Bounded reachability: drop candidates that fail in a state reachable
//! within a few transactions.
//!
//! If the property is invariant, every member of the Houdini fixpoint holds
//! in all reachable states, so this never removes a candidate Houdini would
//! keep. If the property is not invariant, the final check fails anyway.

use std::time::{Duration, Instant};

use crate::logic::{free_vars, substitute, Expr, LogicError, Subst, TransitionSystem, Var, VarKind};
use crate::solver::{Refutation, SolverConfig};

use super::houdini::HoudiniError;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Filtered {
    /// Refuted candidates, each with the depth of its counterexample.
    pub refuted: Vec<(usize, usize)>,
    pub queries: usize,
}

fn at(v: &Var, step: usize) -> Var {
    Var::new(format!("{}@{step}", v.name), v.sort.clone(), VarKind::Aux)
}

/// Rename state to step `i` (primed state to `i + 1`) and everything else
/// free to a copy private to step `i`.
fn rename(e: &Expr, i: usize) -> Result<Expr, LogicError> {
    let mut sigma = Subst::new();
    for v in free_vars(e) {
        let to = match v.kind {
            VarKind::State { primed: false } => at(&v, i),
            VarKind::State { primed: true } => {
                let base = Var::new(v.name.clone(), v.sort.clone(), VarKind::State { primed: false });
                at(&base, i + 1)
            }
            _ => Var::new(format!("{}@t{i}", v.name), v.sort.clone(), v.kind.clone()),
        };
        sigma.insert(v, to.expr());
    }
    substitute(e, &sigma)
}

/// Check `candidates` (over unprimed state) in every state reachable in at
/// most `depth` transactions.
pub fn reachable_filter(
    ts: &TransitionSystem,
    name: &str,
    candidates: &[Expr],
    depth: usize,
    solver: &SolverConfig,
    timeout: Duration,
    deadline: Option<Instant>,
) -> Result<Filtered, HoudiniError> {
    let mut out = Filtered::default();
    let mut open: Vec<usize> = (0..candidates.len()).collect();
    let mut premises = vec![rename(&ts.init, 0)?, rename(&ts.axioms, 0)?];
    for d in 1..=depth {
        let step: Vec<Expr> = ts
            .transitions
            .iter()
            .map(|t| rename(&t.formula, d - 1))
            .collect::<Result<_, _>>()?;
        premises.push(Expr::Or(step));
        premises.push(rename(&ts.axioms, d)?);
        if open.is_empty() || deadline.is_some_and(|dl| Instant::now() >= dl) {
            break;
        }
        let goals: Vec<Expr> = open.iter().map(|&i| rename(&candidates[i], d)).collect::<Result<_, _>>()?;
        let (rs, q) = solver.refute_many(&format!("{name}.reach{d}"), &premises, &goals, timeout, deadline)?;
        out.queries += q;
        let mut next = Vec::new();
        for (&i, r) in open.iter().zip(rs) {
            match r {
                Refutation::Refuted => out.refuted.push((i, d)),
                // undecided candidates are left to Houdini
                Refutation::Holds | Refutation::Unknown(_) => next.push(i),
            }
        }
        open = next;
    }
    out.refuted.sort_unstable();
    Ok(out)
}
