//! Sorted terms and formulas.

use thiserror::Error;

use super::sort::Sort;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarKind {
    State { primed: bool },
    /// Quantified or rule-local variable.
    Local,
    /// Transition parameter.
    Param,
    /// Intermediate version of a state variable inside one transition.
    Aux,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    pub name: String,
    pub sort: Sort,
    pub kind: VarKind,
}

impl Var {
    pub fn new(name: impl Into<String>, sort: Sort, kind: VarKind) -> Var {
        Var {
            name: name.into(),
            sort,
            kind,
        }
    }

    pub fn local(name: impl Into<String>, sort: Sort) -> Var {
        Var::new(name, sort, VarKind::Local)
    }

    pub fn state(name: impl Into<String>, sort: Sort) -> Var {
        Var::new(name, sort, VarKind::State { primed: false })
    }

    pub fn is_state(&self) -> bool {
        matches!(self.kind, VarKind::State { .. })
    }

    pub fn is_primed(&self) -> bool {
        matches!(self.kind, VarKind::State { primed: true })
    }

    /// Next-state twin of an unprimed state variable.
    pub fn primed(&self) -> Result<Var, LogicError> {
        match self.kind {
            VarKind::State { primed: false } => Ok(Var {
                kind: VarKind::State { primed: true },
                ..self.clone()
            }),
            VarKind::State { primed: true } => Err(LogicError::DoublePrime(self.name.clone())),
            _ => Err(LogicError::NotState(self.name.clone())),
        }
    }

    pub fn unprimed(&self) -> Var {
        match self.kind {
            VarKind::State { .. } => Var {
                kind: VarKind::State { primed: false },
                ..self.clone()
            },
            _ => self.clone(),
        }
    }

    /// Name as printed: `x'` for primed state variables.
    pub fn display_name(&self) -> String {
        if self.is_primed() {
            format!("{}'", self.name)
        } else {
            self.name.clone()
        }
    }

    pub fn expr(&self) -> Expr {
        Expr::Var(self.clone())
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum LogicError {
    #[error("sort mismatch: {0}")]
    Sort(String),
    #[error("variable `{0}` is already primed")]
    DoublePrime(String),
    #[error("`{0}` is not a state variable")]
    NotState(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl ArithOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
            ArithOp::Div => "/",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Cmp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl Cmp {
    pub fn symbol(self) -> &'static str {
        match self {
            Cmp::Eq => "=",
            Cmp::Ne => "≠",
            Cmp::Lt => "<",
            Cmp::Le => "≤",
            Cmp::Gt => ">",
            Cmp::Ge => "≥",
        }
    }

    pub fn negate(self) -> Cmp {
        match self {
            Cmp::Eq => Cmp::Ne,
            Cmp::Ne => Cmp::Eq,
            Cmp::Lt => Cmp::Ge,
            Cmp::Le => Cmp::Gt,
            Cmp::Gt => Cmp::Le,
            Cmp::Ge => Cmp::Lt,
        }
    }

    pub fn is_ordering(self) -> bool {
        !matches!(self, Cmp::Eq | Cmp::Ne)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Expr {
    Var(Var),
    Bool(bool),
    Int(i64),
    Arith(ArithOp, Box<Expr>, Box<Expr>),
    Select(Box<Expr>, Vec<Expr>),
    Store(Box<Expr>, Vec<Expr>, Box<Expr>),
    /// Map of the given sort holding the value everywhere.
    ConstMap(Sort, Box<Expr>),
    Ite(Box<Expr>, Box<Expr>, Box<Expr>),
    Cmp(Cmp, Box<Expr>, Box<Expr>),
    Not(Box<Expr>),
    And(Vec<Expr>),
    Or(Vec<Expr>),
    Implies(Box<Expr>, Box<Expr>),
    Xor(Box<Expr>, Box<Expr>),
    Forall(Vec<Var>, Box<Expr>),
    Exists(Vec<Var>, Box<Expr>),
}

fn sort_err<T>(msg: String) -> Result<T, LogicError> {
    Err(LogicError::Sort(msg))
}

fn expect_bool(e: &Expr, ctx: &str) -> Result<(), LogicError> {
    match e.sort() {
        Sort::Bool => Ok(()),
        s => sort_err(format!("{ctx} expects bool, found {s}")),
    }
}

impl Expr {
    /// Sort of a well-sorted expression.
    pub fn sort(&self) -> Sort {
        match self {
            Expr::Var(v) => v.sort.clone(),
            Expr::Bool(_) => Sort::Bool,
            Expr::Int(_) => Sort::Int,
            Expr::Arith(..) => Sort::Int,
            Expr::Select(m, _) => match m.sort() {
                Sort::Map(_, v) => *v,
                s => s,
            },
            Expr::Store(m, _, _) => m.sort(),
            Expr::ConstMap(s, _) => s.clone(),
            Expr::Ite(_, t, _) => t.sort(),
            _ => Sort::Bool,
        }
    }

    pub fn is_bool(&self) -> bool {
        self.sort() == Sort::Bool
    }

    pub fn tt() -> Expr {
        Expr::Bool(true)
    }

    pub fn ff() -> Expr {
        Expr::Bool(false)
    }

    pub fn arith(op: ArithOp, a: Expr, b: Expr) -> Result<Expr, LogicError> {
        for x in [&a, &b] {
            if !x.sort().is_numeric() {
                return sort_err(format!("`{}` needs numeric operands, found {}", op.symbol(), x.sort()));
            }
        }
        Ok(Expr::Arith(op, Box::new(a), Box::new(b)))
    }

    pub fn add(a: Expr, b: Expr) -> Result<Expr, LogicError> {
        Expr::arith(ArithOp::Add, a, b)
    }

    pub fn sub(a: Expr, b: Expr) -> Result<Expr, LogicError> {
        Expr::arith(ArithOp::Sub, a, b)
    }

    pub fn select(m: Expr, keys: Vec<Expr>) -> Result<Expr, LogicError> {
        let Sort::Map(ks, _) = m.sort() else {
            return sort_err(format!("read from non-map of sort {}", m.sort()));
        };
        check_keys(&ks, &keys)?;
        Ok(Expr::Select(Box::new(m), keys))
    }

    pub fn store(m: Expr, keys: Vec<Expr>, v: Expr) -> Result<Expr, LogicError> {
        let Sort::Map(ks, vs) = m.sort() else {
            return sort_err(format!("store into non-map of sort {}", m.sort()));
        };
        check_keys(&ks, &keys)?;
        if !vs.unifies(&v.sort()) {
            return sort_err(format!("storing {} into map with values {vs}", v.sort()));
        }
        Ok(Expr::Store(Box::new(m), keys, Box::new(v)))
    }

    pub fn const_map(sort: Sort, v: Expr) -> Result<Expr, LogicError> {
        match &sort {
            Sort::Map(_, vs) if vs.unifies(&v.sort()) => Ok(Expr::ConstMap(sort, Box::new(v))),
            _ => sort_err(format!("constant map of sort {sort} cannot hold {}", v.sort())),
        }
    }

    pub fn ite(c: Expr, t: Expr, e: Expr) -> Result<Expr, LogicError> {
        expect_bool(&c, "ite condition")?;
        if !t.sort().unifies(&e.sort()) {
            return sort_err(format!("ite branches {} and {}", t.sort(), e.sort()));
        }
        Ok(Expr::Ite(Box::new(c), Box::new(t), Box::new(e)))
    }

    pub fn cmp(op: Cmp, a: Expr, b: Expr) -> Result<Expr, LogicError> {
        let (sa, sb) = (a.sort(), b.sort());
        if op.is_ordering() {
            if !sa.is_numeric() || !sb.is_numeric() {
                return sort_err(format!("`{}` needs numeric operands, found {sa} and {sb}", op.symbol()));
            }
        } else if !sa.unifies(&sb) {
            return sort_err(format!("cannot compare {sa} with {sb}"));
        }
        Ok(Expr::Cmp(op, Box::new(a), Box::new(b)))
    }

    pub fn eq(a: Expr, b: Expr) -> Result<Expr, LogicError> {
        Expr::cmp(Cmp::Eq, a, b)
    }

    pub fn not(a: Expr) -> Result<Expr, LogicError> {
        expect_bool(&a, "¬")?;
        Ok(Expr::Not(Box::new(a)))
    }

    pub fn and(items: Vec<Expr>) -> Result<Expr, LogicError> {
        for i in &items {
            expect_bool(i, "∧")?;
        }
        Ok(Expr::And(items))
    }

    pub fn or(items: Vec<Expr>) -> Result<Expr, LogicError> {
        for i in &items {
            expect_bool(i, "∨")?;
        }
        Ok(Expr::Or(items))
    }

    pub fn implies(a: Expr, b: Expr) -> Result<Expr, LogicError> {
        expect_bool(&a, "⟹")?;
        expect_bool(&b, "⟹")?;
        Ok(Expr::Implies(Box::new(a), Box::new(b)))
    }

    pub fn xor(a: Expr, b: Expr) -> Result<Expr, LogicError> {
        expect_bool(&a, "⊕")?;
        expect_bool(&b, "⊕")?;
        Ok(Expr::Xor(Box::new(a), Box::new(b)))
    }

    pub fn forall(vars: Vec<Var>, body: Expr) -> Result<Expr, LogicError> {
        expect_bool(&body, "∀")?;
        Ok(if vars.is_empty() {
            body
        } else {
            Expr::Forall(vars, Box::new(body))
        })
    }

    pub fn exists(vars: Vec<Var>, body: Expr) -> Result<Expr, LogicError> {
        expect_bool(&body, "∃")?;
        Ok(if vars.is_empty() {
            body
        } else {
            Expr::Exists(vars, Box::new(body))
        })
    }

    /// Direct children, in order.
    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Var(_) | Expr::Bool(_) | Expr::Int(_) => vec![],
            Expr::Arith(_, a, b) | Expr::Cmp(_, a, b) | Expr::Implies(a, b) | Expr::Xor(a, b) => {
                vec![a, b]
            }
            Expr::Select(m, ks) => std::iter::once(&**m).chain(ks.iter()).collect(),
            Expr::Store(m, ks, v) => std::iter::once(&**m)
                .chain(ks.iter())
                .chain(std::iter::once(&**v))
                .collect(),
            Expr::Ite(c, t, e) => vec![c, t, e],
            Expr::Not(a) | Expr::ConstMap(_, a) => vec![a],
            Expr::And(xs) | Expr::Or(xs) => xs.iter().collect(),
            Expr::Forall(_, b) | Expr::Exists(_, b) => vec![b],
        }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    pub fn mentions_state(&self) -> bool {
        super::subst::free_vars(self).iter().any(Var::is_state)
    }
}

fn check_keys(ks: &[Sort], keys: &[Expr]) -> Result<(), LogicError> {
    if ks.len() != keys.len() {
        return sort_err(format!("map expects {} keys, found {}", ks.len(), keys.len()));
    }
    for (s, k) in ks.iter().zip(keys) {
        if !s.unifies(&k.sort()) {
            return sort_err(format!("key of sort {} where {s} expected", k.sort()));
        }
    }
    Ok(())
}
