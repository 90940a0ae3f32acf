#![allow(dead_code)]

pub mod enumerate;
pub mod interp;
pub mod stub;
pub mod toys;

use std::path::PathBuf;

use dcv::compiler::{compile, Compiled};
use dcv::frontend::ast::{ColumnType, Contract};
use dcv::frontend::{load, parse, ValidatedContract};
use dcv::logic::eval::Domains;
use dcv::logic::{free_vars, VarKind};

use enumerate::{env_of, primed_slots, solutions, states};
use interp::{Interp, Tx};

pub fn corpus() -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/corpus"))
}

pub fn solver() -> String {
    std::env::var("DCV_SOLVER").unwrap_or_else(|_| "z3".into())
}

pub fn source(name: &str) -> String {
    let p = corpus().join(name);
    std::fs::read_to_string(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

pub fn parsed(name: &str) -> Contract {
    parse("c", &source(name)).expect("parses")
}

pub fn compiled(name: &str) -> (ValidatedContract, Compiled) {
    let vc = load("c", &source(name)).expect("valid contract");
    let c = compile(&vc).expect("compiles");
    (vc, c)
}

/// Column values of the finite voting instance: two addresses, two
/// proposals, vote counts up to 3, the given quorum.
pub fn voting_domain(contract: &Contract, quorum: i64) -> impl Fn(&str, usize) -> Vec<i64> + '_ {
    move |rel: &str, col: usize| {
        let d = contract.decl(rel).unwrap();
        match (rel, d.columns[col].ty) {
            ("votes", ColumnType::Uint) if col == 1 => (0..=3).collect(),
            ("quorumSize", _) => vec![quorum],
            _ => vec![0, 1],
        }
    }
}

#[derive(Debug, Default)]
pub struct OracleStats {
    pub states: usize,
    pub steps: usize,
    pub pairs: usize,
    pub discrepancies: Vec<String>,
}

/// Compare, for every state and transaction of the instance, the successors
/// admitted by the compiled formula against the interpreter's.
pub fn oracle_equivalence(file: &str, quorum: i64) -> OracleStats {
    oracle_compare(file, file, quorum, 1)
}

/// As `oracle_equivalence`, with the formula compiled from `formula_file`,
/// the interpreter running `interp_file`, and every `stride`-th state.
pub fn oracle_compare(formula_file: &str, interp_file: &str, quorum: i64, stride: usize) -> OracleStats {
    let contract = parsed(interp_file);
    let (_, c) = compiled(formula_file);
    let ts = &c.system;
    let it = Interp::new(&contract);
    let dom = voting_domain(&contract, quorum);
    let svs = ts.state_vars.clone();
    let all = states(&it, &dom);
    let slots = primed_slots(&it, &svs, &dom);
    let doms = Domains {
        ints: vec![-1, 0, 1, 2, 3],
        uints: vec![0, 1, 2, 3],
        addrs: vec![0, 1],
    };
    let mut stats = OracleStats {
        states: all.len(),
        ..Default::default()
    };
    for t in &ts.transitions {
        let free = free_vars(&t.formula);
        assert!(
            free.iter().all(|v| matches!(v.kind, VarKind::State { .. } | VarKind::Param)),
            "transition `{}` has intermediate versions",
            t.name
        );
        let handler = contract.rules[t.rule]
            .body
            .iter()
            .filter_map(|l| l.as_atom())
            .find(|a| a.relation.starts_with("recv_"))
            .unwrap();
        let param_dom: Vec<Vec<i64>> = t.params.iter().map(|_| vec![0, 1]).collect();
        for s in all.iter().step_by(stride) {
            let base = env_of(&it, &svs, s, false);
            for vals in enumerate::product(&param_dom) {
                let get = |name: &str| t.params.iter().position(|p| p.name == name).map(|i| vals[i]);
                let tx = Tx {
                    rule: t.rule,
                    args: handler.args.iter().map(|a| get(a.var().unwrap()).unwrap()).collect(),
                    sender: get("sender").unwrap_or(0),
                    value: get("value").unwrap_or(0),
                };
                let mut env = base.clone();
                for (p, &v) in t.params.iter().zip(&vals) {
                    env.insert(p.clone(), dcv::logic::eval::Value::Int(v));
                }
                let found = solutions(&t.formula, &env, &slots, &doms);
                let found: Vec<_> = found
                    .into_iter()
                    .map(|e| e.into_iter().filter(|(v, _)| matches!(v.kind, VarKind::State { primed: true })).collect::<dcv::logic::eval::Env>())
                    .collect();
                let expected: Vec<_> = it
                    .step(s, &tx)
                    .map(|n| env_of(&it, &svs, &n, true))
                    .filter(|e| slots.iter().all(|alts| alts.iter().any(|a| a.iter().all(|(v, x)| e.get(v) == Some(x)))))
                    .into_iter()
                    .collect();
                stats.steps += 1;
                stats.pairs += found.len();
                if found != expected {
                    stats.discrepancies.push(format!(
                        "{} {:?} from {:?}: formula admits {} successors, interpreter {}",
                        t.name,
                        vals,
                        s,
                        found.len(),
                        expected.len()
                    ));
                }
            }
        }
    }
    stats
}

/// The shipped corpus, sorted.
pub fn corpus_files() -> Vec<PathBuf> {
    dcv::cli::bench::corpus_files(&corpus()).expect("corpus directory")
}

/// Shipped mutants, sorted.
pub fn mutant_files() -> Vec<PathBuf> {
    dcv::cli::bench::corpus_files(&corpus().join("mutants")).expect("mutant directory")
}

/// Run `compile --dump-smt` twice over the corpus; whether every script
/// came out byte-identical, and how many scripts there were.
pub fn dump_smt_twice() -> (bool, usize) {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        for f in corpus_files() {
            let o = std::process::Command::new(env!("CARGO_BIN_EXE_dcv"))
                .args(["compile", f.to_str().unwrap(), "--dump-smt", d.path().to_str().unwrap()])
                .output()
                .expect("runs");
            assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        }
    }
    let read = |d: &std::path::Path| -> std::collections::BTreeMap<String, Vec<u8>> {
        std::fs::read_dir(d)
            .unwrap()
            .map(|e| {
                let p = e.unwrap().path();
                (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap())
            })
            .collect()
    };
    let (a, b) = (read(dirs[0].path()), read(dirs[1].path()));
    (a == b, a.len())
}
