//! Source printer. Output re-parses to the same AST (modulo spans).

use std::fmt::Write;

use super::ast::*;

fn arg(a: &Arg) -> String {
    match a {
        Arg::Var(v) if is_wildcard_name(v) => "_".to_string(),
        Arg::Var(v) => v.clone(),
        Arg::Const(c) => c.to_string(),
    }
}

pub fn atom(a: &Atom) -> String {
    let args: Vec<_> = a.args.iter().map(arg).collect();
    format!("{}({})", a.relation, args.join(", "))
}

pub fn literal(l: &Literal) -> String {
    match l {
        Literal::Atom(a) => atom(a),
        Literal::Condition { lhs, op, rhs, .. } => {
            format!("{} {} {}", arg(lhs), op.symbol(), arg(rhs))
        }
        Literal::Function {
            out, op, lhs, rhs, ..
        } => format!("{out} = {} {} {}", arg(lhs), op.symbol(), arg(rhs)),
        Literal::Aggregate {
            out,
            kind,
            var,
            atom: a,
            ..
        } => match var {
            Some(v) => format!("{out} = {} {v}: {}", kind.keyword(), atom(a)),
            None => format!("{out} = {}: {}", kind.keyword(), atom(a)),
        },
    }
}

pub fn rule(r: &Rule) -> String {
    let body: Vec<_> = r.body.iter().map(literal).collect();
    format!("{} :- {}.", atom(&r.head), body.join(", "))
}

pub fn decl(d: &RelationDecl) -> String {
    let cols: Vec<_> = d
        .columns
        .iter()
        .map(|c| format!("{}: {}", c.name, c.ty))
        .collect();
    let mut s = format!(
        ".decl {}{}({})",
        if d.singleton { "*" } else { "" },
        d.name,
        cols.join(", ")
    );
    if !d.keys.is_empty() {
        let keys: Vec<_> = d.keys.iter().map(|k| k.to_string()).collect();
        write!(s, "[{}]", keys.join(",")).unwrap();
    }
    s
}

/// Declarations, then annotations, then rules.
pub fn contract(c: &Contract) -> String {
    let mut out = String::new();
    for d in &c.decls {
        out.push_str(&decl(d));
        out.push('\n');
    }
    if !c.annotations.is_empty() {
        out.push('\n');
    }
    for a in &c.annotations {
        writeln!(out, ".{} {}", a.kind.keyword(), a.relation).unwrap();
    }
    if !c.rules.is_empty() {
        out.push('\n');
    }
    for r in &c.rules {
        out.push_str(&rule(r));
        out.push('\n');
    }
    out
}
