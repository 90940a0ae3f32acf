//! Candidate invariants `∀X. ¬init ∧ [q] ⟹ ¬p`.
//!
//! Locals defined by an equation in the premise (or in `p`) are eliminated
//! before anything else, so `∀u,b. ¬init ∧ wins[u] = b ∧ b ⟹ hasWinner`
//! comes out as `∀u. ¬init ∧ wins[u] ⟹ hasWinner`.

use std::collections::{BTreeSet, HashSet};

use crate::logic::subst::map_children;
use crate::logic::{free_vars, simplify, substitute, Cmp, Expr, Sort, Subst, Var, VarKind};

use super::predicates::{collect_locals, Predicate};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CandidateOptions {
    pub pattern1: bool,
    pub pattern2: bool,
    /// Emit both `p` and `¬p`; otherwise only the extracted polarity.
    pub polarity: bool,
}

impl Default for CandidateOptions {
    fn default() -> Self {
        CandidateOptions {
            pattern1: true,
            pattern2: true,
            polarity: true,
        }
    }
}

/// A predicate index with the polarity it is used at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Use {
    pub pred: usize,
    pub negated: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub pattern: u8,
    pub p: Use,
    pub q: Option<Use>,
    pub locals: Vec<Var>,
    /// Conjuncts of `q` after elimination; empty for pattern 1.
    pub premise: Vec<Expr>,
    pub conclusion: Expr,
}

/// Stand-in printed for the initial-state formula.
pub fn init_marker() -> Var {
    Var::new("init", Sort::Bool, VarKind::Aux)
}

impl Candidate {
    /// `∀X. ⋀premise ⟹ conclusion`, without the init guard.
    pub fn body(&self) -> Expr {
        let imp = if self.premise.is_empty() {
            self.conclusion.clone()
        } else {
            Expr::Implies(Box::new(Expr::And(self.premise.clone())), Box::new(self.conclusion.clone()))
        };
        if self.locals.is_empty() {
            imp
        } else {
            Expr::Forall(self.locals.clone(), Box::new(imp))
        }
    }

    /// `init ∨ ∀X. ...`, equivalent to `∀X. ¬init ∧ q ⟹ ¬p` since init
    /// mentions no local.
    pub fn closed_form(&self, init: &Expr) -> Expr {
        Expr::Or(vec![init.clone(), self.body()])
    }

    /// `∀u. ¬init ∧ wins[u] ⟹ hasWinner`
    pub fn display(&self) -> String {
        let mut prem = vec![Expr::Not(Box::new(init_marker().expr()))];
        prem.extend(self.premise.iter().cloned());
        let imp = Expr::Implies(Box::new(Expr::And(prem)), Box::new(self.conclusion.clone()));
        if self.locals.is_empty() {
            imp.to_string()
        } else {
            Expr::Forall(self.locals.clone(), Box::new(imp)).to_string()
        }
    }
}

/// Upper bound on candidates before pruning for `n` predicates.
pub fn raw_bound(n: usize, opts: CandidateOptions) -> usize {
    let pol = if opts.polarity { 2 } else { 1 };
    let p1 = if opts.pattern1 { pol * n } else { 0 };
    let p2 = if opts.pattern2 { pol * pol * n * n.saturating_sub(1) } else { 0 };
    p1 + p2
}

fn conjuncts(e: &Expr) -> Vec<Expr> {
    match e {
        Expr::And(xs) => xs.iter().flat_map(conjuncts).collect(),
        Expr::Bool(true) => vec![],
        e => vec![e.clone()],
    }
}

fn signed(p: &Predicate, negated: bool) -> Vec<Expr> {
    if negated {
        vec![simplify(&Expr::Not(Box::new(p.formula.clone())))]
    } else {
        conjuncts(&p.formula)
    }
}

/// A local with a defining conjunct `x = t`, `x` or `¬x`.
fn find_definition(xs: &[Expr], locals: &BTreeSet<Var>) -> Option<(Var, Expr)> {
    for c in xs {
        match c {
            Expr::Cmp(Cmp::Eq, a, b) => {
                for (x, t) in [(a, b), (b, a)] {
                    if let Expr::Var(v) = &**x {
                        if locals.contains(v) && !free_vars(t).contains(v) {
                            return Some((v.clone(), (**t).clone()));
                        }
                    }
                }
            }
            Expr::Var(v) if locals.contains(v) => return Some((v.clone(), Expr::tt())),
            Expr::Not(a) => {
                if let Expr::Var(v) = &**a {
                    if locals.contains(v) {
                        return Some((v.clone(), Expr::ff()));
                    }
                }
            }
            _ => {}
        }
    }
    None
}

fn apply(xs: &[Expr], sigma: &Subst) -> Vec<Expr> {
    xs.iter()
        .flat_map(|x| conjuncts(&simplify(&substitute(x, sigma).expect("sort-preserving substitution"))))
        .collect()
}

const DISPLAY_NAMES: &[&str] = &["u", "v", "w", "x", "y", "z"];

/// Rename locals in order of first occurrence to u, v, w, ... avoiding
/// the names in `taken`.
fn rename_locals(premise: &mut Vec<Expr>, conclusion: &mut Expr, taken: &BTreeSet<String>) -> Vec<Var> {
    let mut order = Vec::new();
    for p in premise.iter() {
        collect_locals(p, &mut order);
    }
    collect_locals(conclusion, &mut order);
    let mut names = DISPLAY_NAMES
        .iter()
        .map(|s| s.to_string())
        .chain((1..).flat_map(|i| DISPLAY_NAMES.iter().map(move |s| format!("{s}{i}"))))
        .filter(|n| !taken.contains(n));
    let mut sigma = Subst::new();
    let mut locals = Vec::new();
    for v in order {
        let nv = Var::local(names.next().unwrap(), v.sort.clone());
        sigma.insert(v, nv.expr());
        locals.push(nv);
    }
    // simultaneous, so overlapping old and new names are fine
    *premise = premise.iter().map(|p| substitute(p, &sigma).unwrap()).collect();
    *conclusion = substitute(conclusion, &sigma).unwrap();
    locals
}

/// Rename `q`'s locals that share a name but not a sort with one of `p`'s;
/// same-named locals are otherwise the same variable, across rules too.
fn apart(q: &[Expr], p_locals: &[Var]) -> Vec<Expr> {
    let mut sigma = Subst::new();
    let mut qv = Vec::new();
    for e in q {
        collect_locals(e, &mut qv);
    }
    for v in qv {
        if p_locals.iter().any(|x| x.name == v.name && x.sort != v.sort) {
            let mut n = format!("{}'q", v.name);
            while p_locals.iter().any(|x| x.name == n) {
                n.push('q');
            }
            sigma.insert(v.clone(), Var::local(n, v.sort.clone()).expr());
        }
    }
    q.iter().map(|e| substitute(e, &sigma).unwrap()).collect()
}

/// Build one candidate; `None` when it is a tautology.
fn build(preds: &[Predicate], p: Use, q: Option<Use>, taken: &BTreeSet<String>) -> Option<Candidate> {
    let pp = &preds[p.pred];
    let mut pc = signed(pp, p.negated);
    let mut qc = match q {
        Some(u) => {
            apart(&signed(&preds[u.pred], u.negated), &pp.locals)
        }
        None => vec![],
    };
    let mut locals: BTreeSet<Var> = BTreeSet::new();
    for e in pc.iter().chain(&qc) {
        locals.extend(free_vars(e).into_iter().filter(|v| v.kind == VarKind::Local));
    }
    // one-point elimination over the whole matrix ¬(q ∧ p)
    loop {
        let both: Vec<Expr> = qc.iter().chain(&pc).cloned().collect();
        let Some((x, t)) = find_definition(&both, &locals) else { break };
        let sigma: Subst = [(x.clone(), t)].into_iter().collect();
        qc = apply(&qc, &sigma);
        pc = apply(&pc, &sigma);
        locals.remove(&x);
    }
    if qc.iter().chain(&pc).any(|c| *c == Expr::ff()) {
        return None;
    }
    let mut conclusion = simplify(&Expr::Not(Box::new(Expr::And(pc.clone()))));
    if conclusion == Expr::tt() || qc.contains(&conclusion) || under_premise(&conclusion, &qc) == Expr::tt() {
        return None;
    }
    let mut premise = qc;
    if simplify(&Expr::And(premise.clone())) == Expr::ff() {
        return None;
    }
    // order premise conjuncts independently of local names
    premise.sort_by_key(|e| canonical_shape(e));
    premise.dedup();
    let locals = rename_locals(&mut premise, &mut conclusion, taken);
    Some(Candidate {
        pattern: if q.is_some() { 2 } else { 1 },
        p,
        q,
        locals,
        premise,
        conclusion,
    })
}

/// `e` with each premise literal replaced by its truth value.
fn under_premise(e: &Expr, premise: &[Expr]) -> Expr {
    fn go(e: &Expr, facts: &[(Expr, bool)]) -> Expr {
        if let Some((_, b)) = facts.iter().find(|(a, _)| a == e) {
            return Expr::Bool(*b);
        }
        map_children(e, |c| go(c, facts))
    }
    let facts: Vec<(Expr, bool)> = premise
        .iter()
        .map(|p| match p {
            Expr::Not(a) => ((**a).clone(), false),
            a => (a.clone(), true),
        })
        .collect();
    simplify(&go(e, &facts))
}

fn canonical_shape(e: &Expr) -> String {
    let mut vs = Vec::new();
    collect_locals(e, &mut vs);
    let sigma: Subst = vs.iter().map(|v| (v.clone(), Var::local("_", v.sort.clone()).expr())).collect();
    substitute(e, &sigma).map(|x| x.to_string()).unwrap_or_default()
}

/// Pattern 1 for each predicate, pattern 2 for each ordered pair, both
/// polarities unless disabled. Structural duplicates and tautologies are
/// dropped; order is deterministic.
pub fn generate(preds: &[Predicate], state_names: &BTreeSet<String>, opts: CandidateOptions) -> Vec<Candidate> {
    let pols: &[bool] = if opts.polarity { &[false, true] } else { &[false] };
    let mut out = Vec::new();
    let mut seen: HashSet<String> = HashSet::new();
    let mut push = |c: Option<Candidate>| {
        if let Some(c) = c {
            if seen.insert(c.display()) {
                out.push(c);
            }
        }
    };
    if opts.pattern1 {
        for i in 0..preds.len() {
            for &neg in pols {
                push(build(preds, Use { pred: i, negated: neg }, None, state_names));
            }
        }
    }
    if opts.pattern2 {
        for j in 0..preds.len() {
            for i in 0..preds.len() {
                if i == j {
                    continue;
                }
                for &qn in pols {
                    for &pn in pols {
                        push(build(
                            preds,
                            Use { pred: i, negated: pn },
                            Some(Use { pred: j, negated: qn }),
                            state_names,
                        ));
                    }
                }
            }
        }
    }
    out
}
