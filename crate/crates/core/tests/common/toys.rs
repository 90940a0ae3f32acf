//! Toy transition systems with at most four Houdini candidates, and a
//! brute-force oracle for the largest inductive candidate subset.

use std::collections::BTreeSet;
use std::time::Duration;

use dcv::inference::{find_inductive_invariant, HoudiniCandidate, HoudiniConfig, Problem};
use dcv::logic::eval::{holds, Domains, Env, Value};
use dcv::logic::{free_vars, prime, Cmp, Expr, Sort, Var, VarKind};
use dcv::solver::{Obligation, SolverConfig};

fn b(name: &str) -> Expr {
    Var::state(name, Sort::Bool).expr()
}

fn bp(name: &str) -> Expr {
    Var::state(name, Sort::Bool).primed().unwrap().expr()
}

fn i(name: &str) -> Expr {
    Var::state(name, Sort::Int).expr()
}

fn ip(name: &str) -> Expr {
    Var::state(name, Sort::Int).primed().unwrap().expr()
}

fn not(e: Expr) -> Expr {
    Expr::Not(Box::new(e))
}

fn imp(a: Expr, c: Expr) -> Expr {
    Expr::Implies(Box::new(a), Box::new(c))
}

fn eq(a: Expr, c: Expr) -> Expr {
    Expr::eq(a, c).unwrap()
}

fn cmp(op: Cmp, a: Expr, c: Expr) -> Expr {
    Expr::cmp(op, a, c).unwrap()
}

fn cand(formula: Expr) -> HoudiniCandidate {
    HoudiniCandidate {
        label: formula.to_string(),
        formula,
        init_guarded: false,
    }
}

fn problem(name: &str, init: Expr, prop: Expr, transitions: Vec<Expr>) -> Problem {
    Problem {
        name: name.into(),
        init,
        axioms: Expr::tt(),
        prop,
        transitions: transitions
            .into_iter()
            .enumerate()
            .map(|(k, t)| (format!("t{k}"), t))
            .collect(),
    }
}

pub fn houdini(p: &Problem, cs: &[HoudiniCandidate]) -> BTreeSet<usize> {
    let cfg = HoudiniConfig {
        solver: SolverConfig::new(super::solver()),
        qtimeout: Duration::from_secs(10),
        deadline: None,
    };
    let r = find_inductive_invariant(p, cs, &cfg).expect("solver runs");
    assert!(!r.incomplete);
    r.survivors.into_iter().collect()
}

/// Is the conjunction of `subset` inductive, decided by one solver query
/// per obligation.
fn inductive_by_solver(p: &Problem, cs: &[HoudiniCandidate], subset: &BTreeSet<usize>) -> bool {
    let solver = SolverConfig::new(super::solver());
    let valid = |name: &str, assumptions: Vec<Expr>, goal: Expr| {
        let o = Obligation::new(name, assumptions, goal);
        let out = solver.check(&o, Duration::from_secs(10), false).expect("solver runs");
        out.is_valid()
    };
    let conj: Vec<Expr> = subset.iter().map(|&k| cs[k].formula.clone()).collect();
    subset.iter().all(|&k| {
        valid("base", vec![p.init.clone(), p.axioms.clone()], cs[k].formula.clone())
            && p.transitions.iter().all(|(_, t)| {
                let mut a = vec![p.axioms.clone(), p.prop.clone(), t.clone()];
                a.extend(conj.iter().cloned());
                valid("step", a, prime(&cs[k].formula).unwrap())
            })
    })
}

/// Same, by evaluating every assignment of the (boolean) variables.
fn inductive_by_enumeration(p: &Problem, cs: &[HoudiniCandidate], subset: &BTreeSet<usize>) -> bool {
    let mut vars: BTreeSet<Var> = free_vars(&p.init).into_iter().collect();
    for (_, t) in &p.transitions {
        vars.extend(free_vars(t));
    }
    for c in cs {
        let f = &c.formula;
        vars.extend(free_vars(f));
        vars.extend(free_vars(&prime(f).unwrap()));
    }
    let vars: Vec<Var> = vars.into_iter().collect();
    assert!(vars.iter().all(|v| v.sort == Sort::Bool) && vars.len() <= 16);
    let dom = Domains::small();
    let conj = |env: &Env, primed: bool| {
        subset.iter().all(|&k| {
            let f = if primed { prime(&cs[k].formula).unwrap() } else { cs[k].formula.clone() };
            holds(&f, env, &dom).unwrap()
        })
    };
    (0..1u32 << vars.len()).all(|mask| {
        let env: Env = vars
            .iter()
            .enumerate()
            .map(|(k, v)| (v.clone(), Value::Bool(mask >> k & 1 == 1)))
            .collect();
        let init_ok = !holds(&p.init, &env, &dom).unwrap() || conj(&env, false);
        let step_ok = !(conj(&env, false) && holds(&p.prop, &env, &dom).unwrap())
            || p.transitions.iter().all(|(_, t)| !holds(t, &env, &dom).unwrap() || conj(&env, true));
        init_ok && step_ok
    })
}

/// The largest inductive subset; also checks that it contains every other
/// inductive subset.
fn strongest(n: usize, inductive: impl Fn(&BTreeSet<usize>) -> bool) -> BTreeSet<usize> {
    let ok: Vec<BTreeSet<usize>> = (0..1u32 << n)
        .map(|mask| (0..n).filter(|k| mask >> k & 1 == 1).collect())
        .filter(|s| inductive(s))
        .collect();
    let best = ok.iter().max_by_key(|s| s.len()).unwrap().clone();
    assert!(ok.iter().all(|s| s.is_subset(&best)), "inductive subsets not closed under union");
    best
}

pub struct Toy {
    pub name: &'static str,
    pub problem: Problem,
    pub candidates: Vec<HoudiniCandidate>,
    /// Only boolean state, so enumeration can double-check the solver.
    pub boolean: bool,
}

/// Houdini's survivors and the brute-force strongest inductive subset.
pub fn check_optimal(t: &Toy) -> (BTreeSet<usize>, BTreeSet<usize>) {
    let (p, cs) = (&t.problem, &t.candidates[..]);
    assert!(cs.len() <= 4);
    let got = houdini(p, cs);
    let want = strongest(cs.len(), |s| inductive_by_solver(p, cs, s));
    if t.boolean {
        let want2 = strongest(cs.len(), |s| inductive_by_enumeration(p, cs, s));
        assert_eq!(want, want2, "solver and enumeration oracles disagree");
    }
    (got, want)
}

/// a stays, b copies a, c copies b.
pub fn shift_register() -> Toy {
    let p = problem(
        "shift",
        Expr::And(vec![b("a"), not(b("b")), not(b("c"))]),
        Expr::tt(),
        vec![Expr::And(vec![eq(bp("a"), b("a")), eq(bp("b"), b("a")), eq(bp("c"), b("b"))])],
    );
    let cs = vec![cand(b("a")), cand(imp(b("b"), b("a"))), cand(imp(b("c"), b("b"))), cand(not(b("c")))];
    Toy { name: "shift register", problem: p, candidates: cs, boolean: true }
}

/// Removing r forces q out in the next round, then p.
pub fn cascade() -> Toy {
    let x = Var::new("x", Sort::Bool, VarKind::Param).expr();
    let p = problem(
        "cascade",
        Expr::And(vec![b("p"), b("q"), b("r")]),
        Expr::tt(),
        vec![Expr::And(vec![eq(bp("p"), b("q")), eq(bp("q"), b("r")), eq(bp("r"), x)])],
    );
    let cs = vec![cand(b("p")), cand(b("q")), cand(b("r")), cand(imp(b("r"), b("q")))];
    Toy { name: "cascade", problem: p, candidates: cs, boolean: true }
}

/// Two counters in lockstep.
pub fn counters() -> Toy {
    let p = problem(
        "counters",
        Expr::And(vec![eq(i("x"), Expr::Int(0)), eq(i("y"), Expr::Int(0))]),
        Expr::tt(),
        vec![Expr::And(vec![
            eq(ip("x"), Expr::add(i("x"), Expr::Int(1)).unwrap()),
            eq(ip("y"), Expr::add(i("y"), Expr::Int(2)).unwrap()),
        ])],
    );
    let two_x = Expr::add(i("x"), i("x")).unwrap();
    let cs = vec![
        cand(cmp(Cmp::Ge, i("x"), Expr::Int(0))),
        cand(eq(i("y"), two_x)),
        cand(cmp(Cmp::Ge, i("y"), i("x"))),
        cand(cmp(Cmp::Le, i("x"), Expr::Int(5))),
    ];
    Toy { name: "counters", problem: p, candidates: cs, boolean: false }
}

/// A lock that can only be taken while free, with closed-form candidates
/// `init ∨ B` next to plain ones.
pub fn lock() -> Toy {
    let init = Expr::And(vec![not(b("held")), not(b("owner"))]);
    let take = Expr::And(vec![not(b("held")), bp("held"), bp("owner")]);
    let release = Expr::And(vec![b("held"), not(bp("held")), not(bp("owner"))]);
    let stay = Expr::And(vec![eq(bp("held"), b("held")), eq(bp("owner"), b("owner"))]);
    let p = problem("lock", init.clone(), imp(b("owner"), b("held")), vec![take, release, stay]);
    let guarded = |body: Expr| HoudiniCandidate {
        label: body.to_string(),
        formula: Expr::Or(vec![init.clone(), body]),
        init_guarded: true,
    };
    let cs = vec![
        guarded(imp(b("held"), b("owner"))),
        cand(imp(b("owner"), b("held"))),
        guarded(not(b("held"))),
        cand(b("owner")),
    ];
    Toy { name: "lock", problem: p, candidates: cs, boolean: true }
}

pub fn all() -> Vec<Toy> {
    vec![shift_register(), cascade(), counters(), lock()]
}

pub fn empty() -> Problem {
    problem("empty", Expr::tt(), Expr::tt(), vec![Expr::tt()])
}
