//! Houdini on a hand-built system: two counters stepping by 1 and 2.
//! Candidates that are not inductive get dropped round by round.

use std::time::Duration;

use dcv::inference::{find_inductive_invariant, HoudiniCandidate, HoudiniConfig, Problem};
use dcv::logic::{Cmp, Expr, Sort, Var};
use dcv::solver::SolverConfig;

fn main() {
    let x = Var::state("x", Sort::Int);
    let y = Var::state("y", Sort::Int);
    let (xe, ye) = (x.expr(), y.expr());
    let (xp, yp) = (x.primed().unwrap().expr(), y.primed().unwrap().expr());
    let n = |k| Expr::Int(k);

    let problem = Problem {
        name: "counters".into(),
        init: Expr::and(vec![Expr::eq(xe.clone(), n(0)).unwrap(), Expr::eq(ye.clone(), n(0)).unwrap()]).unwrap(),
        axioms: Expr::tt(),
        prop: Expr::tt(),
        transitions: vec![(
            "tick".into(),
            Expr::and(vec![
                Expr::eq(xp, Expr::add(xe.clone(), n(1)).unwrap()).unwrap(),
                Expr::eq(yp, Expr::add(ye.clone(), n(2)).unwrap()).unwrap(),
            ])
            .unwrap(),
        )],
    };
    let formulas = vec![
        Expr::cmp(Cmp::Ge, xe.clone(), n(0)).unwrap(),
        Expr::eq(ye.clone(), Expr::add(xe.clone(), xe.clone()).unwrap()).unwrap(),
        Expr::cmp(Cmp::Ge, ye.clone(), xe.clone()).unwrap(),
        Expr::cmp(Cmp::Le, xe, n(5)).unwrap(),
        Expr::cmp(Cmp::Le, ye, n(10)).unwrap(),
    ];
    let candidates: Vec<HoudiniCandidate> = formulas
        .into_iter()
        .map(|f| HoudiniCandidate {
            label: f.to_string(),
            formula: f,
            init_guarded: false,
        })
        .collect();

    let cfg = HoudiniConfig {
        solver: SolverConfig::new(std::env::var("DCV_SOLVER").unwrap_or_else(|_| "z3".into())),
        qtimeout: Duration::from_secs(10),
        deadline: None,
    };
    let r = find_inductive_invariant(&problem, &candidates, &cfg).expect("solver runs");
    for round in &r.rounds {
        for &i in &round.refuted {
            println!("round {}: drop {}", round.index, candidates[i].label);
        }
    }
    println!("inductive:");
    for &i in &r.survivors {
        println!("  {}", candidates[i].label);
    }
}
