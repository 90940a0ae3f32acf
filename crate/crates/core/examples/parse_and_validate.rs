//! Diagnostics for a broken contract, then the pretty-printed form of the
//! fixed one and how its rules were classified.

use dcv::frontend::{load, printer, RuleKind};

const BROKEN: &str = "
.decl recv_deposit(amount: uint)
.decl balance(owner: address, n: uint)[0]
.decl overdrawn(owner: address)
.violation overdrawn
balance(p, n) :- recv_deposit(m), msgSender(p), balance(p), n = b + m.
overdrawn(p) :- balance(p, n), n < 0, q > 1.
";

fn main() {
    if let Err(diags) = load("bank", BROKEN) {
        for d in &diags {
            println!("{}", d.render("bank.dcn"));
        }
    }

    let fixed = BROKEN.replace("balance(p),", "balance(p, b),").replace(", q > 1", "");
    let vc = load("bank", &fixed).expect("valid after the fix");
    println!("\n{}", printer::contract(&vc.contract));
    for (rule, kind) in vc.contract.rules.iter().zip(&vc.kinds) {
        let kind = match kind {
            RuleKind::Transaction => "transaction",
            RuleKind::ViolationQuery => "violation",
            RuleKind::Join => "join",
            RuleKind::Aggregation => "aggregation",
        };
        println!("{kind:>12}: {}", rule.head.relation);
    }
}
