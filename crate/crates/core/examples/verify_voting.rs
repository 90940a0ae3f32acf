//! Prove "at most one winning proposal" for the voting contract and print
//! the inferred invariant.
//!
//!     cargo run --example verify_voting
//!     DCV_SOLVER=/path/to/z3 cargo run --example verify_voting -- corpus/voting.dcn

use std::path::PathBuf;

use dcv::inference::{verify_contract, Verdict, VerifierConfig};

fn main() {
    let path: PathBuf = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/corpus/voting.dcn")));
    let src = std::fs::read_to_string(&path).expect("readable contract");
    let vc = dcv::frontend::load("voting", &src).unwrap_or_else(|ds| {
        for d in ds {
            eprintln!("{}", d.render(&path.display().to_string()));
        }
        std::process::exit(2)
    });
    let compiled = dcv::compiler::compile(&vc).expect("compiles");
    let cfg = VerifierConfig::with_solver(std::env::var("DCV_SOLVER").unwrap_or_else(|_| "z3".into()));
    for r in verify_contract(&vc, &compiled, &cfg).expect("solver runs") {
        for line in r.trace_lines().iter().filter(|l| !l.starts_with("  ")) {
            println!("{line}");
        }
        match &r.verdict {
            Verdict::Verified { stage, lemmas, .. } => {
                println!("{}: verified at {} stage in {:.2?}", r.property, stage.name(), r.stats.wall);
                for l in lemmas {
                    println!("  {l}");
                }
            }
            Verdict::Unknown { reason, .. } => println!("{}: unknown ({})", r.property, reason.code()),
        }
        println!(
            "  {} predicates, {} candidates, {} survivors, {} queries",
            r.stats.predicates, r.stats.candidates, r.stats.survivors, r.stats.queries
        );
    }
}
