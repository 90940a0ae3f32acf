//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails. Takes several minutes (the auction contract
//! dominates).

mod common;

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::interp::{Interp, State, Table, Tx};
use dcv::inference::{verify_contract, PropertyResult, Stage, Verdict, VerifierConfig};
use dcv::logic::{Expr, Sort, Var};
use dcv::solver::{Obligation, SolverConfig};

type Outcome = Result<String, String>;

struct Run {
    results: Vec<PropertyResult>,
    wall: Duration,
}

fn verify(file: &str, budget: Duration) -> Run {
    let (vc, compiled) = common::compiled(file);
    let cfg = VerifierConfig {
        budget,
        ..VerifierConfig::with_solver(common::solver())
    };
    let start = Instant::now();
    let results = verify_contract(&vc, &compiled, &cfg).expect("solver runs");
    Run {
        results,
        wall: start.elapsed(),
    }
}

fn all_verified(r: &Run) -> bool {
    r.results.iter().all(|p| p.verdict.is_verified())
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

/// ∀u. wins[u] ⟹ hasWinner
fn winner_lemma(compiled: &dcv::compiler::Compiled) -> Expr {
    let ts = &compiled.system;
    let wins = ts.state_var("wins").unwrap().var();
    let has = ts.state_var("hasWinner").unwrap().var();
    let u = Var::local("u", Sort::UInt);
    let body = Expr::implies(Expr::select(wins.expr(), vec![u.expr()]).unwrap(), has.expr()).unwrap();
    Expr::forall(vec![u], body).unwrap()
}

fn equivalent(axioms: &Expr, a: &Expr, b: &Expr) -> bool {
    let both = Expr::And(vec![
        Expr::implies(a.clone(), b.clone()).unwrap(),
        Expr::implies(b.clone(), a.clone()).unwrap(),
    ]);
    let o = Obligation::new("acceptance.equiv", vec![axioms.clone()], both);
    SolverConfig::new(common::solver())
        .check(&o, Duration::from_secs(30), false)
        .map(|out| out.is_valid())
        .unwrap_or(false)
}

fn criterion1(voting: &Run) -> Outcome {
    let (_, compiled) = common::compiled("voting.dcn");
    let target = winner_lemma(&compiled);
    let [p] = &voting.results[..] else {
        return Err("expected one property".into());
    };
    let Verdict::Verified { invariant, lemmas, .. } = &p.verdict else {
        return Err(format!("voting is {}", p.verdict.label()));
    };
    let conjuncts = match invariant {
        Expr::And(xs) => xs.clone(),
        e => vec![e.clone()],
    };
    let hit = conjuncts.iter().position(|c| equivalent(&compiled.system.axioms, c, &target));
    let Some(k) = hit else {
        return Err("no conjunct equivalent to ∀u. wins[u] ⟹ hasWinner".into());
    };
    ensure(voting.wall <= Duration::from_secs(60), format!("took {:.1?}", voting.wall))?;
    let text = lemmas.get(k).cloned().unwrap_or_else(|| conjuncts[k].to_string());
    Ok(format!("verified in {:.1?}, conjunct `{text}` is equivalent to ∀u. wins[u] ⟹ hasWinner", voting.wall))
}

fn needs_houdini(name: &str, r: &Run, limit: Duration) -> Result<String, String> {
    for p in &r.results {
        let Verdict::Verified { stage, .. } = &p.verdict else {
            return Err(format!("{name}/{} is {}", p.property, p.verdict.label()));
        };
        ensure(*stage == Stage::Houdini, format!("{name}/{} verified at stage {}", p.property, stage.name()))?;
        let refuted: usize = p.rounds.iter().map(|r| r.refuted.len()).sum();
        ensure(refuted >= 1, format!("{name}: no candidate refuted"))?;
        ensure(p.stats.survivors >= 1, format!("{name}: no survivors"))?;
    }
    ensure(r.wall <= limit, format!("{name} took {:.1?}", r.wall))?;
    let p = &r.results[0];
    let refuted: usize = p.rounds.iter().map(|r| r.refuted.len()).sum();
    Ok(format!(
        "{name}: {} rounds, {refuted} refuted, {} survivors, {:.1?}",
        p.rounds.len(),
        p.stats.survivors,
        r.wall
    ))
}

fn criterion2(voting: &Run, auction: &Run) -> Outcome {
    let a = needs_houdini("voting", voting, Duration::from_secs(3600))?;
    let b = needs_houdini("auction", auction, Duration::from_secs(30 * 60))?;
    Ok(format!("{a}; {b}"))
}

fn criterion3(runs: &BTreeMap<String, Run>) -> Outcome {
    ensure(runs.len() == 7, format!("{} contracts in the corpus", runs.len()))?;
    let mut parts = Vec::new();
    for (name, r) in runs {
        ensure(all_verified(r), format!("{name} not verified"))?;
        ensure(r.wall <= Duration::from_secs(3600), format!("{name} took {:.1?}", r.wall))?;
        parts.push(format!("{name} {:.0?}", r.wall));
    }
    Ok(parts.join(", "))
}

fn criterion4() -> Outcome {
    let start = Instant::now();
    let st = common::oracle_equivalence("voting.dcn", 2);
    let t = start.elapsed();
    ensure(st.discrepancies.is_empty(), format!("{} discrepancies, first: {}", st.discrepancies.len(), st.discrepancies.first().cloned().unwrap_or_default()))?;
    ensure(st.pairs > 0, "no successor pairs compared")?;
    ensure(t <= Duration::from_secs(300), format!("took {t:.1?}"))?;
    Ok(format!("{} states, {} steps, {} pairs, 0 discrepancies, {t:.1?}", st.states, st.steps, st.pairs))
}

/// A reachable state of the buggy voting contract in which both proposals
/// win, with `voters` voters, two proposals and quorum 2.
fn two_winners(voters: i64) -> Result<Vec<Tx>, String> {
    let contract = common::parsed("mutants/voting_buggy.dcn");
    let it = Interp::new(&contract);
    let mut init: State = it.empty_state();
    init.insert("isVoter".into(), Table::Keyed((0..voters).map(|v| (vec![v], vec![1])).collect()));
    init.insert("quorumSize".into(), Table::Keyed(BTreeMap::from([(vec![], vec![2])])));
    let rule = it.transaction_rules()[0];
    let txs: Vec<Tx> = (0..voters)
        .flat_map(|s| (0..2).map(move |p| Tx { rule, args: vec![p], sender: s, value: 0 }))
        .collect();
    let bad = |s: &State| (0..2).all(|p| it.row(s, "wins", &[p]) == [1]);
    match it.search(&[init], &txs, 1_000_000, bad) {
        (_, Some((_, path))) => Ok(path),
        (n, None) => Err(format!("no two-winner state among {n} reachable states with {voters} voters")),
    }
}

fn show(path: &[Tx]) -> String {
    path.iter().map(|t| format!("{}→{}", t.sender, t.args[0])).collect::<Vec<_>>().join(" ")
}

fn criterion5() -> Outcome {
    let mut parts = Vec::new();
    for f in common::mutant_files() {
        let name = f.file_stem().unwrap().to_string_lossy().into_owned();
        let r = verify(&format!("mutants/{name}.dcn"), Duration::from_secs(120));
        ensure(!r.results.iter().any(|p| p.verdict.is_verified()), format!("mutant {name} verified"))?;
        parts.push(name);
    }
    ensure(parts.len() == 7, format!("{} mutants", parts.len()))?;
    let mutants = format!("{} mutants unknown", parts.len());
    // each voter still votes once, so four voters are the fewest that can
    // put two proposals at quorum 2
    let four = match two_winners(4) {
        Ok(p) => format!("4 voters reach two winners via {}", show(&p)),
        Err(e) => e,
    };
    let path = two_winners(3).map_err(|e| format!("{mutants}; {e}; {four}"))?;
    Ok(format!("{mutants}; voting_buggy reaches two winners via votes {}", show(&path)))
}

fn criterion6() -> Outcome {
    let mut n = 0;
    for t in common::toys::all() {
        let (got, want) = common::toys::check_optimal(&t);
        ensure(got == want, format!("{}: houdini {got:?}, brute force {want:?}", t.name))?;
        n += 1;
    }
    ensure(n >= 3, "fewer than three toy systems")?;
    Ok(format!("{n} toy systems match brute force"))
}

fn criterion7() -> Outcome {
    let (ok, elapsed, lines) = common::stub::never_verified();
    ensure(ok, format!("a stub led to verified: {lines:?}"))?;
    ensure(elapsed < Duration::from_secs(10), format!("took {elapsed:.1?}"))?;
    Ok(format!("{} stub runs, none verified, {elapsed:.1?}", lines.len()))
}

fn criterion8() -> Outcome {
    let (same, n) = common::dump_smt_twice();
    ensure(n > 0, "no scripts dumped")?;
    ensure(same, "dumps differ")?;
    Ok(format!("{n} scripts byte-identical"))
}

fn guarded(f: impl FnOnce() -> Outcome) -> Outcome {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(format!("panicked: {msg}"))
    })
}

fn main() {
    // `cargo test --test acceptance -- 4 5` runs only those criteria
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let wanted = |k: usize| only.is_empty() || only.contains(&k);
    let mut runs = BTreeMap::new();
    let corpus = guarded(|| {
        if !(1..=3).any(wanted) {
            return Ok(String::new());
        }
        for f in common::corpus_files() {
            let name = f.file_stem().unwrap().to_string_lossy().into_owned();
            let r = verify(&format!("{name}.dcn"), Duration::from_secs(3600));
            eprintln!("  {name}: {} in {:.1?}", if all_verified(&r) { "verified" } else { "unknown" }, r.wall);
            runs.insert(name, r);
        }
        Ok(String::new())
    });
    let need = |names: &[&str]| -> Result<(), String> {
        corpus.clone()?;
        for n in names {
            ensure(runs.contains_key(*n), format!("{n}.dcn missing from the corpus"))?;
        }
        Ok(())
    };
    let results: [Box<dyn FnOnce() -> Outcome>; 8] = [
        Box::new(|| guarded(|| {
            need(&["voting"])?;
            criterion1(&runs["voting"])
        })),
        Box::new(|| guarded(|| {
            need(&["voting", "auction"])?;
            criterion2(&runs["voting"], &runs["auction"])
        })),
        Box::new(|| guarded(|| {
            need(&[])?;
            criterion3(&runs)
        })),
        Box::new(|| guarded(criterion4)),
        Box::new(|| guarded(criterion5)),
        Box::new(|| guarded(criterion6)),
        Box::new(|| guarded(criterion7)),
        Box::new(|| guarded(criterion8)),
    ];
    let mut failed = 0;
    for (i, f) in results.into_iter().enumerate() {
        if !wanted(i + 1) {
            continue;
        }
        match f() {
            Ok(m) => println!("criterion {}: PASS {m}", i + 1),
            Err(m) => {
                failed += 1;
                println!("criterion {}: FAIL {m}", i + 1)
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
