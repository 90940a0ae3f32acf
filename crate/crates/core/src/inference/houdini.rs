//! Houdini: drop candidates until the rest are inductive together.
//!
//! Each round fixes the current set C and finds every candidate that fails
//! initiation or consecution relative to `⋀C ∧ prop`, then removes them all
//! at once. The greatest fixpoint is the same as removing one at a time.
//!
//! Candidates of the form `init ∨ B` are checked in two parts, since
//! `⋀(init ∨ Bᵢ)` is `init ∨ ⋀Bᵢ`: steps out of an initial state, which do
//! not depend on C and are checked once, and steps out of `¬init ∧ ⋀Bᵢ`.

use std::time::{Duration, Instant};

use crate::logic::{prime, Expr, LogicError};
use crate::solver::{Refutation, SolverConfig, SolverError};

/// The transition system as Houdini sees it.
#[derive(Debug, Clone)]
pub struct Problem {
    pub name: String,
    pub init: Expr,
    pub axioms: Expr,
    /// Held fixed in every premise; never removed.
    pub prop: Expr,
    /// (name, formula over s, s′ and params).
    pub transitions: Vec<(String, Expr)>,
}

#[derive(Debug, Clone)]
pub struct HoudiniCandidate {
    pub formula: Expr,
    /// `init ⟹ formula` holds by construction; skip its base query.
    pub init_guarded: bool,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Round {
    pub index: usize,
    pub active: usize,
    /// Candidates with a counterexample.
    pub refuted: Vec<usize>,
    /// Candidates dropped because the solver could not decide.
    pub unknown: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HoudiniResult {
    pub survivors: Vec<usize>,
    pub rounds: Vec<Round>,
    pub queries: usize,
    /// Some candidate was dropped on an unknown answer.
    pub incomplete: bool,
}

#[derive(Debug, Clone)]
pub struct HoudiniConfig {
    pub solver: SolverConfig,
    pub qtimeout: Duration,
    pub deadline: Option<Instant>,
}

#[derive(Debug, thiserror::Error)]
pub enum HoudiniError {
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Logic(#[from] LogicError),
}

/// `B` when the candidate is literally `init ∨ B`.
fn split_body(c: &HoudiniCandidate, init: &Expr) -> Option<Expr> {
    match &c.formula {
        Expr::Or(xs) if c.init_guarded && xs.len() == 2 && xs[0] == *init => Some(xs[1].clone()),
        _ => None,
    }
}

pub fn find_inductive_invariant(
    problem: &Problem,
    cands: &[HoudiniCandidate],
    cfg: &HoudiniConfig,
) -> Result<HoudiniResult, HoudiniError> {
    let mut active: Vec<usize> = (0..cands.len()).collect();
    let mut rounds = Vec::new();
    let mut queries = 0;
    let mut incomplete = false;
    let primed: Vec<Expr> = cands.iter().map(|c| prime(&c.formula)).collect::<Result<_, _>>()?;

    // initiation does not depend on C
    let base: Vec<usize> = active.iter().copied().filter(|&i| !cands[i].init_guarded).collect();
    let mut failed_base: Vec<(usize, Refutation)> = Vec::new();
    if !base.is_empty() {
        let goals: Vec<Expr> = base.iter().map(|&i| cands[i].formula.clone()).collect();
        let premises = vec![problem.init.clone(), problem.axioms.clone()];
        let (rs, q) =
            cfg.solver
                .refute_many(&format!("{}.houdini.base", problem.name), &premises, &goals, cfg.qtimeout, cfg.deadline)?;
        queries += q;
        for (&i, r) in base.iter().zip(rs) {
            if r != Refutation::Holds {
                failed_base.push((i, r));
            }
        }
    }

    // nor do steps out of an initial state, for split candidates
    let bodies: Vec<Option<Expr>> = cands.iter().map(|c| split_body(c, &problem.init)).collect();
    let split: Vec<usize> = active.iter().copied().filter(|&i| bodies[i].is_some()).collect();
    if !split.is_empty() {
        for (tname, tr) in &problem.transitions {
            let open: Vec<usize> = split
                .iter()
                .copied()
                .filter(|i| !failed_base.iter().any(|(j, _)| j == i))
                .collect();
            if open.is_empty() {
                break;
            }
            let premises = vec![problem.init.clone(), problem.axioms.clone(), problem.prop.clone(), tr.clone()];
            let goals: Vec<Expr> = open.iter().map(|&i| primed[i].clone()).collect();
            let (rs, q) = cfg.solver.refute_many(
                &format!("{}.houdini.init.{tname}", problem.name),
                &premises,
                &goals,
                cfg.qtimeout,
                cfg.deadline,
            )?;
            queries += q;
            for (&i, r) in open.iter().zip(rs) {
                if r != Refutation::Holds {
                    failed_base.push((i, r));
                }
            }
        }
    }
    let not_init = if split.is_empty() {
        None
    } else {
        Some(Expr::Not(Box::new(problem.init.clone())))
    };

    let mut index = 0;
    loop {
        index += 1;
        let mut refuted = Vec::new();
        let mut unknown = Vec::new();
        for (i, r) in failed_base.drain(..) {
            match r {
                Refutation::Unknown(_) => unknown.push(i),
                _ => refuted.push(i),
            }
        }
        let checked: Vec<usize> = active
            .iter()
            .copied()
            .filter(|i| !refuted.contains(i) && !unknown.contains(i))
            .collect();
        if !checked.is_empty() {
            for (tname, tr) in &problem.transitions {
                let mut premises = vec![problem.axioms.clone(), problem.prop.clone()];
                premises.extend(not_init.clone());
                premises.extend(
                    active
                        .iter()
                        .map(|&i| bodies[i].clone().unwrap_or_else(|| cands[i].formula.clone())),
                );
                premises.push(tr.clone());
                let open: Vec<usize> = checked
                    .iter()
                    .copied()
                    .filter(|i| !refuted.contains(i) && !unknown.contains(i))
                    .collect();
                if open.is_empty() {
                    break;
                }
                let goals: Vec<Expr> = open.iter().map(|&i| primed[i].clone()).collect();
                let (rs, q) = cfg.solver.refute_many(
                    &format!("{}.houdini.r{index}.{tname}", problem.name),
                    &premises,
                    &goals,
                    cfg.qtimeout,
                    cfg.deadline,
                )?;
                queries += q;
                for (&i, r) in open.iter().zip(rs) {
                    match r {
                        Refutation::Holds => {}
                        Refutation::Refuted => refuted.push(i),
                        Refutation::Unknown(_) => unknown.push(i),
                    }
                }
            }
        }
        refuted.sort_unstable();
        unknown.sort_unstable();
        incomplete |= !unknown.is_empty();
        let n = active.len();
        active.retain(|i| !refuted.contains(i) && !unknown.contains(i));
        let removed = n - active.len();
        rounds.push(Round {
            index,
            active: n,
            refuted,
            unknown,
        });
        if removed == 0 || active.is_empty() {
            break;
        }
    }
    Ok(HoudiniResult {
        survivors: active,
        rounds,
        queries,
        incomplete,
    })
}
