//! Stable infix printer.

use std::fmt;

use super::expr::{Cmp, Expr, Var, VarKind};

// binding strength; higher binds tighter
const P_QUANT: u8 = 0;
const P_IMPLIES: u8 = 1;
const P_XOR: u8 = 2;
const P_OR: u8 = 3;
const P_AND: u8 = 4;
const P_NOT: u8 = 5;
const P_CMP: u8 = 6;
const P_ADD: u8 = 7;
const P_MUL: u8 = 8;
const P_ATOM: u8 = 9;

fn prec(e: &Expr) -> u8 {
    use super::expr::ArithOp::*;
    match e {
        Expr::Forall(..) | Expr::Exists(..) => P_QUANT,
        Expr::Implies(..) => P_IMPLIES,
        Expr::Xor(..) => P_XOR,
        Expr::Or(xs) if xs.len() > 1 => P_OR,
        Expr::And(xs) if xs.len() > 1 => P_AND,
        Expr::Or(_) | Expr::And(_) => P_ATOM,
        Expr::Not(_) => P_NOT,
        Expr::Cmp(..) => P_CMP,
        Expr::Arith(Add | Sub, ..) => P_ADD,
        Expr::Arith(Mul | Div, ..) => P_MUL,
        Expr::Int(n) if *n < 0 => P_ADD,
        _ => P_ATOM,
    }
}

fn var_name(v: &Var) -> String {
    match v.kind {
        VarKind::State { primed: true } => format!("{}'", v.name),
        _ => v.name.clone(),
    }
}

/// Print `e`, parenthesized when it binds looser than `min`.
fn write_at(f: &mut String, e: &Expr, min: u8) {
    let p = prec(e);
    if p < min {
        f.push('(');
        write_expr(f, e);
        f.push(')');
    } else {
        write_expr(f, e);
    }
}

fn join(f: &mut String, xs: &[Expr], sep: &str, min: u8) {
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            f.push_str(sep);
        }
        write_at(f, x, min);
    }
}

fn write_expr(f: &mut String, e: &Expr) {
    match e {
        Expr::Var(v) => f.push_str(&var_name(v)),
        Expr::Bool(b) => f.push_str(if *b { "true" } else { "false" }),
        Expr::Int(n) => f.push_str(&n.to_string()),
        Expr::Arith(op, a, b) => {
            let p = prec(e);
            write_at(f, a, p);
            f.push(' ');
            f.push_str(op.symbol());
            f.push(' ');
            // left associative
            write_at(f, b, p + 1);
        }
        Expr::Select(m, ks) => {
            write_at(f, m, P_ATOM);
            f.push('[');
            join(f, ks, ",", P_QUANT + 1);
            f.push(']');
        }
        Expr::Store(m, ks, v) => {
            f.push_str("Store(");
            write_expr(f, m);
            f.push_str(", ");
            if ks.len() == 1 {
                write_at(f, &ks[0], P_QUANT + 1);
            } else {
                f.push('(');
                join(f, ks, ", ", P_QUANT + 1);
                f.push(')');
            }
            f.push_str(", ");
            write_at(f, v, P_QUANT + 1);
            f.push(')');
        }
        Expr::ConstMap(_, v) => {
            f.push_str("{_ ↦ ");
            write_at(f, v, P_QUANT + 1);
            f.push('}');
        }
        Expr::Ite(c, t, x) => {
            f.push_str("ite(");
            write_at(f, c, P_QUANT + 1);
            f.push_str(", ");
            write_at(f, t, P_QUANT + 1);
            f.push_str(", ");
            write_at(f, x, P_QUANT + 1);
            f.push(')');
        }
        Expr::Cmp(op, a, b) => {
            write_at(f, a, P_ADD);
            f.push(' ');
            f.push_str(op.symbol());
            f.push(' ');
            write_at(f, b, P_ADD);
        }
        Expr::Not(a) => {
            // ¬(a = b) reads better as a ≠ b
            if let Expr::Cmp(Cmp::Eq, x, y) = &**a {
                if !x.is_bool() {
                    write_expr(f, &Expr::Cmp(Cmp::Ne, x.clone(), y.clone()));
                    return;
                }
            }
            f.push('¬');
            write_at(f, a, P_NOT);
        }
        Expr::And(xs) if xs.is_empty() => f.push_str("true"),
        Expr::Or(xs) if xs.is_empty() => f.push_str("false"),
        Expr::And(xs) if xs.len() == 1 => write_expr(f, &xs[0]),
        Expr::Or(xs) if xs.len() == 1 => write_expr(f, &xs[0]),
        Expr::And(xs) => join(f, xs, " ∧ ", P_AND + 1),
        Expr::Or(xs) => join(f, xs, " ∨ ", P_OR + 1),
        Expr::Implies(a, b) => {
            write_at(f, a, P_IMPLIES + 1);
            f.push_str(" ⟹ ");
            write_at(f, b, P_IMPLIES);
        }
        Expr::Xor(a, b) => {
            // parenthesize conjunctions too; `a ∧ b ⊕ c` reads ambiguously
            write_at(f, a, P_AND + 1);
            f.push_str(" ⊕ ");
            write_at(f, b, P_AND + 1);
        }
        Expr::Forall(vs, b) | Expr::Exists(vs, b) => {
            f.push(if matches!(e, Expr::Forall(..)) { '∀' } else { '∃' });
            let names: Vec<String> = vs.iter().map(var_name).collect();
            f.push_str(&names.join(", "));
            f.push_str(". ");
            write_expr(f, b);
        }
    }
}

pub fn to_string(e: &Expr) -> String {
    let mut s = String::new();
    write_expr(&mut s, e);
    s
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&to_string(self))
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&var_name(self))
    }
}
