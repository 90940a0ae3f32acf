//! SMT-LIB v2 emission.
//!
//! All numeric sorts map to `Int`; maps become nested arrays, one level per
//! key. Output depends only on the obligation, so two runs produce identical
//! bytes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use crate::logic::{free_vars, ArithOp, Cmp, Expr, Sort, Var};

/// A validity query: do the assumptions entail the goal?
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Obligation {
    pub name: String,
    pub assumptions: Vec<Expr>,
    pub goal: Expr,
}

impl Obligation {
    pub fn new(name: impl Into<String>, assumptions: Vec<Expr>, goal: Expr) -> Obligation {
        Obligation {
            name: name.into(),
            assumptions,
            goal,
        }
    }

    /// Free variables of the whole query, sorted.
    pub fn decls(&self) -> Vec<Var> {
        let mut vs = BTreeSet::new();
        for a in &self.assumptions {
            vs.extend(free_vars(a));
        }
        vs.extend(free_vars(&self.goal));
        vs.into_iter().collect()
    }
}

const RESERVED: &[&str] = &[
    "and", "or", "not", "xor", "ite", "=>", "=", "distinct", "true", "false", "forall", "exists", "let", "match", "par",
    "select", "store", "div", "mod", "abs", "Int", "Bool", "Array", "Real", "to_real", "to_int", "is_int", "_", "!",
    "as", "NUMERAL", "DECIMAL", "STRING", "BINARY", "HEXADECIMAL",
];

fn is_simple(s: &str) -> bool {
    let extra = |c: char| "~!@$%^&*_-+=<>.?/".contains(c);
    let mut cs = s.chars();
    match cs.next() {
        Some(c) if c.is_ascii_alphabetic() || extra(c) => {}
        _ => return false,
    }
    cs.all(|c| c.is_ascii_alphanumeric() || extra(c))
}

/// Render a symbol, quoting with bars when it is not a plain SMT-LIB symbol.
pub fn symbol(name: &str) -> String {
    if is_simple(name) && !RESERVED.contains(&name) {
        name.to_string()
    } else {
        format!("|{}|", name.replace(['|', '\\'], "_"))
    }
}

pub fn sort(s: &Sort) -> String {
    match s {
        Sort::Bool => "Bool".into(),
        Sort::Int | Sort::UInt | Sort::Addr => "Int".into(),
        Sort::Map(keys, v) => keys
            .iter()
            .rev()
            .fold(sort(v), |acc, k| format!("(Array {} {acc})", sort(k))),
    }
}

/// Free-variable naming for one script. Distinct variables always get
/// distinct symbols.
#[derive(Debug, Clone, Default)]
pub struct SymbolTable {
    pub by_var: BTreeMap<Var, String>,
    used: BTreeSet<String>,
}

impl SymbolTable {
    pub fn new(vars: &[Var]) -> SymbolTable {
        let mut t = SymbolTable::default();
        for v in vars {
            t.declare(v);
        }
        t
    }

    fn fresh(&mut self, base: &str) -> String {
        let mut s = base.to_string();
        let mut i = 1;
        while self.used.contains(&s) {
            s = format!("{base}!{i}");
            i += 1;
        }
        self.used.insert(s.clone());
        s
    }

    pub fn declare(&mut self, v: &Var) -> String {
        if let Some(s) = self.by_var.get(v) {
            return s.clone();
        }
        let s = self.fresh(&v.display_name());
        self.by_var.insert(v.clone(), s.clone());
        s
    }

    /// Symbol → variable, for reading models back.
    pub fn inverse(&self) -> BTreeMap<String, Var> {
        self.by_var.iter().map(|(v, s)| (s.clone(), v.clone())).collect()
    }
}

struct Printer<'a> {
    table: &'a SymbolTable,
    used: BTreeSet<String>,
    scope: Vec<(Var, String)>,
}

impl Printer<'_> {
    fn lookup(&self, v: &Var) -> String {
        if let Some((_, s)) = self.scope.iter().rev().find(|(b, _)| b == v) {
            return symbol(s);
        }
        match self.table.by_var.get(v) {
            Some(s) => symbol(s),
            // undeclared: emit the name and let the solver complain
            None => symbol(&v.display_name()),
        }
    }

    fn bind(&mut self, v: &Var) -> String {
        let base = v.display_name();
        let mut s = base.clone();
        let mut i = 1;
        while self.used.contains(&s) || self.scope.iter().any(|(_, t)| *t == s) {
            s = format!("{base}!b{i}");
            i += 1;
        }
        self.scope.push((v.clone(), s.clone()));
        s
    }

    fn nary(&mut self, out: &mut String, op: &str, xs: &[&Expr]) {
        write!(out, "({op}").unwrap();
        for x in xs {
            out.push(' ');
            self.expr(out, x);
        }
        out.push(')');
    }

    fn select(&mut self, out: &mut String, m: &Expr, ks: &[Expr]) {
        for _ in ks {
            out.push_str("(select ");
        }
        self.expr(out, m);
        for k in ks {
            out.push(' ');
            self.expr(out, k);
            out.push(')');
        }
    }

    /// `m[k1..kn := v]` over nested arrays.
    fn store(&mut self, out: &mut String, m: &Expr, ks: &[Expr], v: &Expr) {
        out.push_str("(store ");
        self.expr(out, m);
        out.push(' ');
        self.expr(out, &ks[0]);
        out.push(' ');
        if ks.len() == 1 {
            self.expr(out, v);
        } else {
            let inner = Expr::Select(Box::new(m.clone()), vec![ks[0].clone()]);
            self.store(out, &inner, &ks[1..], v);
        }
        out.push(')');
    }

    /// `((as const (Array K ...)) v)`, one level per key.
    fn const_map(&mut self, out: &mut String, keys: &[Sort], v: &Expr) {
        let inner = keys[1..].iter().rev().fold(sort(&v.sort()), |acc, k| format!("(Array {} {acc})", sort(k)));
        write!(out, "((as const (Array {} {inner})) ", sort(&keys[0])).unwrap();
        if keys.len() == 1 {
            self.expr(out, v);
        } else {
            self.const_map(out, &keys[1..], v);
        }
        out.push(')');
    }

    fn expr(&mut self, out: &mut String, e: &Expr) {
        match e {
            Expr::Var(v) => out.push_str(&self.lookup(v)),
            Expr::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            Expr::Int(n) if *n < 0 => write!(out, "(- {})", n.unsigned_abs()).unwrap(),
            Expr::Int(n) => write!(out, "{n}").unwrap(),
            Expr::Arith(op, a, b) => {
                let s = match op {
                    ArithOp::Add => "+",
                    ArithOp::Sub => "-",
                    ArithOp::Mul => "*",
                    ArithOp::Div => "div",
                };
                self.nary(out, s, &[a, b]);
            }
            Expr::Select(m, ks) => self.select(out, m, ks),
            Expr::Store(m, ks, v) => self.store(out, m, ks, v),
            Expr::ConstMap(s, v) => {
                let Sort::Map(keys, _) = s else { unreachable!("constant map of scalar sort") };
                self.const_map(out, keys, v);
            }
            Expr::Ite(c, t, x) => self.nary(out, "ite", &[c, t, x]),
            Expr::Cmp(op, a, b) => {
                let s = match op {
                    Cmp::Eq => "=",
                    Cmp::Ne => "distinct",
                    Cmp::Lt => "<",
                    Cmp::Le => "<=",
                    Cmp::Gt => ">",
                    Cmp::Ge => ">=",
                };
                self.nary(out, s, &[a, b]);
            }
            Expr::Not(a) => self.nary(out, "not", &[a]),
            Expr::And(xs) if xs.is_empty() => out.push_str("true"),
            Expr::Or(xs) if xs.is_empty() => out.push_str("false"),
            Expr::And(xs) if xs.len() == 1 => self.expr(out, &xs[0]),
            Expr::Or(xs) if xs.len() == 1 => self.expr(out, &xs[0]),
            Expr::And(xs) => self.nary(out, "and", &xs.iter().collect::<Vec<_>>()),
            Expr::Or(xs) => self.nary(out, "or", &xs.iter().collect::<Vec<_>>()),
            Expr::Implies(a, b) => self.nary(out, "=>", &[a, b]),
            Expr::Xor(a, b) => self.nary(out, "xor", &[a, b]),
            Expr::Forall(vs, b) | Expr::Exists(vs, b) if vs.is_empty() => self.expr(out, b),
            Expr::Forall(vs, b) | Expr::Exists(vs, b) => {
                let q = if matches!(e, Expr::Forall(..)) { "forall" } else { "exists" };
                write!(out, "({q} (").unwrap();
                let mark = self.scope.len();
                for (i, v) in vs.iter().enumerate() {
                    let s = self.bind(v);
                    if i > 0 {
                        out.push(' ');
                    }
                    write!(out, "({} {})", symbol(&s), sort(&v.sort)).unwrap();
                }
                out.push_str(") ");
                self.expr(out, b);
                self.scope.truncate(mark);
                out.push(')');
            }
        }
    }
}

/// Render one term against a symbol table.
pub fn term(e: &Expr, table: &SymbolTable) -> String {
    let mut p = Printer {
        table,
        used: table.by_var.values().cloned().collect(),
        scope: Vec::new(),
    };
    let mut out = String::new();
    p.expr(&mut out, e);
    out
}

pub fn declarations(table: &SymbolTable) -> String {
    let mut out = String::new();
    let mut rows: Vec<(&String, &Var)> = table.by_var.iter().map(|(v, s)| (s, v)).collect();
    rows.sort();
    for (s, v) in rows {
        writeln!(out, "(declare-fun {} () {})", symbol(s), sort(&v.sort)).unwrap();
    }
    out
}

pub const PRELUDE: &str = "(set-option :produce-models true)\n(set-logic ALL)\n";

/// Standalone script: satisfiable iff the obligation is invalid.
pub fn script(o: &Obligation) -> (String, SymbolTable) {
    let table = SymbolTable::new(&o.decls());
    let mut out = String::new();
    writeln!(out, "; {}", o.name.replace('\n', " ")).unwrap();
    out.push_str(PRELUDE);
    out.push_str(&declarations(&table));
    for a in &o.assumptions {
        writeln!(out, "(assert {})", term(a, &table)).unwrap();
    }
    writeln!(out, "(assert (not {}))", term(&o.goal, &table)).unwrap();
    out.push_str("(check-sat)\n");
    (out, table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::VarKind;

    #[test]
    fn quoting() {
        assert_eq!(symbol("votes"), "votes");
        assert_eq!(symbol("votes'"), "|votes'|");
        assert_eq!(symbol("x#1"), "|x#1|");
        assert_eq!(symbol("div"), "|div|");
        assert_eq!(symbol("1a"), "|1a|");
    }

    #[test]
    fn nested_store() {
        let m = Var::state("m", Sort::map(vec![Sort::Addr, Sort::UInt], Sort::Bool));
        let a = Var::new("a", Sort::Addr, VarKind::Param);
        let e = Expr::store(m.expr(), vec![a.expr(), Expr::Int(-1)], Expr::tt()).unwrap();
        let t = SymbolTable::new(&[m.clone(), a]);
        assert_eq!(sort(&m.sort), "(Array Int (Array Int Bool))");
        assert_eq!(term(&e, &t), "(store m a (store (select m a) (- 1) true))");
    }

    #[test]
    fn bound_names_avoid_free_ones() {
        let u_free = Var::new("u", Sort::Int, VarKind::Param);
        let u_bound = Var::local("u", Sort::Int);
        let e = Expr::forall(
            vec![u_bound.clone()],
            Expr::cmp(Cmp::Le, u_bound.expr(), u_free.expr()).unwrap(),
        )
        .unwrap();
        let t = SymbolTable::new(&[u_free]);
        assert_eq!(term(&e, &t), "(forall ((u!b1 Int)) (<= u!b1 u))");
    }

    #[test]
    fn clashing_free_names_are_split() {
        let a = Var::new("x", Sort::Int, VarKind::Param);
        let b = Var::local("x", Sort::Int);
        let t = SymbolTable::new(&[a.clone(), b.clone()]);
        assert_ne!(t.by_var[&a], t.by_var[&b]);
    }
}
