//! Equivalence-preserving cleanup. Keeps printed formulas and SMT scripts
//! small; never changes meaning over any domain.

use std::collections::BTreeSet;

use super::eval::int_div;
use super::expr::{ArithOp, Cmp, Expr, Var};
use super::subst::{free_vars, map_children, substitute, Subst};

pub fn simplify(e: &Expr) -> Expr {
    let once = map_children(e, simplify);
    step(once)
}

fn step(e: Expr) -> Expr {
    match e {
        Expr::Arith(op, a, b) => match (&*a, &*b) {
            (Expr::Int(x), Expr::Int(y)) => {
                let v = match op {
                    ArithOp::Add => x.checked_add(*y),
                    ArithOp::Sub => x.checked_sub(*y),
                    ArithOp::Mul => x.checked_mul(*y),
                    ArithOp::Div if *y != 0 => Some(int_div(*x, *y)),
                    ArithOp::Div => None,
                };
                v.map(Expr::Int).unwrap_or(Expr::Arith(op, a, b))
            }
            (_, Expr::Int(0)) if matches!(op, ArithOp::Add | ArithOp::Sub) => *a,
            (Expr::Int(0), _) if op == ArithOp::Add => *b,
            _ => Expr::Arith(op, a, b),
        },
        Expr::Select(m, ks) => match *m {
            Expr::Store(_, sk, v) if sk == ks => *v,
            Expr::ConstMap(_, v) => *v,
            Expr::Store(inner, sk, _) if distinct_consts(&sk, &ks) => step(Expr::Select(inner, ks)),
            m => Expr::Select(Box::new(m), ks),
        },
        Expr::Ite(c, t, x) => match *c {
            Expr::Bool(true) => *t,
            Expr::Bool(false) => *x,
            _ if t == x => *t,
            c => Expr::Ite(Box::new(c), t, x),
        },
        Expr::Cmp(op, a, b) => cmp(op, *a, *b),
        Expr::Not(a) => not(*a),
        Expr::And(xs) => and(xs),
        Expr::Or(xs) => or(xs),
        Expr::Implies(a, b) => match (*a, *b) {
            (Expr::Bool(true), b) => b,
            (Expr::Bool(false), _) | (_, Expr::Bool(true)) => Expr::Bool(true),
            (a, Expr::Bool(false)) => not(a),
            (a, b) if a == b => Expr::Bool(true),
            (a, b) => Expr::Implies(Box::new(a), Box::new(b)),
        },
        Expr::Xor(a, b) => match (*a, *b) {
            (Expr::Bool(false), x) | (x, Expr::Bool(false)) => x,
            (Expr::Bool(true), x) | (x, Expr::Bool(true)) => not(x),
            (a, b) if a == b => Expr::Bool(false),
            (a, b) => Expr::Xor(Box::new(a), Box::new(b)),
        },
        Expr::Forall(vs, b) => quant(true, vs, *b),
        Expr::Exists(vs, b) => quant(false, vs, *b),
        e => e,
    }
}

fn distinct_consts(a: &[Expr], b: &[Expr]) -> bool {
    a.iter().zip(b).any(|(x, y)| match (x, y) {
        (Expr::Int(m), Expr::Int(n)) => m != n,
        (Expr::Bool(m), Expr::Bool(n)) => m != n,
        _ => false,
    })
}

fn cmp(op: Cmp, a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Int(x), Expr::Int(y)) => {
            return Expr::Bool(match op {
                Cmp::Eq => x == y,
                Cmp::Ne => x != y,
                Cmp::Lt => x < y,
                Cmp::Le => x <= y,
                Cmp::Gt => x > y,
                Cmp::Ge => x >= y,
            })
        }
        (Expr::Bool(x), Expr::Bool(y)) if !op.is_ordering() => {
            return Expr::Bool((x == y) == (op == Cmp::Eq));
        }
        _ => {}
    }
    if a == b {
        return Expr::Bool(matches!(op, Cmp::Eq | Cmp::Le | Cmp::Ge));
    }
    // b = true ~> b, b = false ~> ¬b
    if !op.is_ordering() {
        let positive = op == Cmp::Eq;
        match (&a, &b) {
            (x, Expr::Bool(v)) | (Expr::Bool(v), x) => {
                return if *v == positive { x.clone() } else { not(x.clone()) };
            }
            _ => {}
        }
    }
    Expr::Cmp(op, Box::new(a), Box::new(b))
}

fn not(a: Expr) -> Expr {
    match a {
        Expr::Bool(b) => Expr::Bool(!b),
        Expr::Not(x) => *x,
        Expr::Cmp(op, x, y) if op.is_ordering() || op == Cmp::Ne => Expr::Cmp(op.negate(), x, y),
        a => Expr::Not(Box::new(a)),
    }
}

fn and(xs: Vec<Expr>) -> Expr {
    let mut out: Vec<Expr> = Vec::new();
    let mut seen = BTreeSet::new();
    for x in xs {
        let parts = match x {
            Expr::And(ys) => ys,
            other => vec![other],
        };
        for p in parts {
            match p {
                Expr::Bool(true) => {}
                Expr::Bool(false) => return Expr::Bool(false),
                p => {
                    if seen.insert(p.clone()) {
                        out.push(p);
                    }
                }
            }
        }
    }
    for x in &out {
        if seen.contains(&not(x.clone())) {
            return Expr::Bool(false);
        }
    }
    match out.len() {
        0 => Expr::Bool(true),
        1 => out.pop().unwrap(),
        _ => Expr::And(out),
    }
}

fn or(xs: Vec<Expr>) -> Expr {
    let mut out: Vec<Expr> = Vec::new();
    let mut seen = BTreeSet::new();
    for x in xs {
        let parts = match x {
            Expr::Or(ys) => ys,
            other => vec![other],
        };
        for p in parts {
            match p {
                Expr::Bool(false) => {}
                Expr::Bool(true) => return Expr::Bool(true),
                p => {
                    if seen.insert(p.clone()) {
                        out.push(p);
                    }
                }
            }
        }
    }
    match out.len() {
        0 => Expr::Bool(false),
        1 => out.pop().unwrap(),
        _ => Expr::Or(out),
    }
}

/// `x = t` or `t = x` with `x` not free in `t`.
fn definition<'a>(e: &'a Expr, v: &Var) -> Option<&'a Expr> {
    if let Expr::Cmp(Cmp::Eq, a, b) = e {
        for (l, r) in [(a, b), (b, a)] {
            if let Expr::Var(x) = &**l {
                if x == v && !free_vars(r).contains(v) {
                    return Some(r);
                }
            }
        }
    }
    None
}

fn quant(universal: bool, vs: Vec<Var>, body: Expr) -> Expr {
    let fv = free_vars(&body);
    let mut vs: Vec<Var> = vs.into_iter().filter(|v| fv.contains(v)).collect();
    let mut body = body;
    // one-point rule: ∃x. x = t ∧ φ  ~>  φ[t/x],  ∀x. x = t ⟹ φ  ~>  φ[t/x]
    loop {
        let mut hit = None;
        'outer: for (i, v) in vs.iter().enumerate() {
            let conj: Vec<&Expr> = match (&body, universal) {
                (Expr::And(xs), false) => xs.iter().collect(),
                (Expr::Implies(a, _), true) => match &**a {
                    Expr::And(xs) => xs.iter().collect(),
                    a => vec![a],
                },
                (e, false) => vec![e],
                _ => vec![],
            };
            for (j, c) in conj.iter().enumerate() {
                if let Some(t) = definition(c, v) {
                    // the term must not mention other binders of this block
                    if free_vars(t).iter().all(|w| !vs.contains(w)) {
                        hit = Some((i, j, t.clone()));
                        break 'outer;
                    }
                }
            }
        }
        let Some((i, j, t)) = hit else { break };
        let v = vs.remove(i);
        let rest = match (body, universal) {
            (Expr::And(mut xs), false) => {
                xs.remove(j);
                Expr::And(xs)
            }
            (Expr::Implies(a, b), true) => {
                let prem = match *a {
                    Expr::And(mut xs) => {
                        xs.remove(j);
                        Expr::And(xs)
                    }
                    _ => Expr::Bool(true),
                };
                Expr::Implies(Box::new(prem), b)
            }
            (_, false) => Expr::Bool(true),
            _ => unreachable!(),
        };
        let sigma = Subst::from([(v, t)]);
        body = simplify(&substitute(&rest, &sigma).expect("one-point substitution is well-sorted"));
        let fv = free_vars(&body);
        vs.retain(|v| fv.contains(v));
    }
    if vs.is_empty() {
        return body;
    }
    if let Expr::Bool(_) = body {
        return body;
    }
    if universal {
        Expr::Forall(vs, Box::new(body))
    } else {
        Expr::Exists(vs, Box::new(body))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::sort::Sort;

    #[test]
    fn bool_equalities_collapse() {
        let b = Var::state("hasWinner", Sort::Bool).expr();
        let e = Expr::eq(b.clone(), Expr::ff()).unwrap();
        assert_eq!(simplify(&e).to_string(), "¬hasWinner");
        let e = Expr::eq(b, Expr::tt()).unwrap();
        assert_eq!(simplify(&e).to_string(), "hasWinner");
    }

    #[test]
    fn one_point_exists() {
        let x = Var::local("x", Sort::UInt);
        let y = Var::state("y", Sort::UInt);
        let body = Expr::and(vec![
            Expr::eq(x.expr(), y.expr()).unwrap(),
            Expr::cmp(Cmp::Gt, x.expr(), Expr::Int(0)).unwrap(),
        ])
        .unwrap();
        let e = Expr::exists(vec![x], body).unwrap();
        assert_eq!(simplify(&e).to_string(), "y > 0");
    }

    #[test]
    fn read_over_write() {
        let m = Var::state("m", Sort::map(vec![Sort::UInt], Sort::UInt));
        let k = Var::local("k", Sort::UInt);
        let st = Expr::store(m.expr(), vec![k.expr()], Expr::Int(5)).unwrap();
        let e = Expr::select(st, vec![k.expr()]).unwrap();
        assert_eq!(simplify(&e), Expr::Int(5));
    }
}
