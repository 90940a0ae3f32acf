//! Syntax tree for DeCon contracts.

use std::fmt;

/// One-based source position.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl Span {
    pub fn new(line: u32, col: u32) -> Self {
        Span { line, col }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ColumnType {
    Address,
    Uint,
    Int,
    Bool,
}

impl ColumnType {
    pub fn is_numeric(self) -> bool {
        matches!(self, ColumnType::Uint | ColumnType::Int)
    }

    pub fn keyword(self) -> &'static str {
        match self {
            ColumnType::Address => "address",
            ColumnType::Uint => "uint",
            ColumnType::Int => "int",
            ColumnType::Bool => "bool",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        match s {
            "address" => Some(ColumnType::Address),
            "uint" => Some(ColumnType::Uint),
            "int" => Some(ColumnType::Int),
            "bool" => Some(ColumnType::Bool),
            _ => None,
        }
    }
}

impl fmt::Display for ColumnType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnDecl {
    pub name: String,
    pub ty: ColumnType,
}

/// Prefix that marks a transaction handler relation.
pub const HANDLER_PREFIX: &str = "recv_";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationDecl {
    pub name: String,
    pub columns: Vec<ColumnDecl>,
    /// Primary key column indices as written; empty means "all columns".
    pub keys: Vec<usize>,
    pub singleton: bool,
    pub span: Span,
}

impl RelationDecl {
    pub fn arity(&self) -> usize {
        self.columns.len()
    }

    pub fn is_handler(&self) -> bool {
        self.name.starts_with(HANDLER_PREFIX)
    }

    /// Effective key columns. Singletons have none.
    pub fn key_columns(&self) -> Vec<usize> {
        if self.singleton {
            Vec::new()
        } else if self.keys.is_empty() {
            (0..self.columns.len()).collect()
        } else {
            self.keys.clone()
        }
    }

    /// Columns that are not part of the key.
    pub fn value_columns(&self) -> Vec<usize> {
        let keys = self.key_columns();
        (0..self.columns.len())
            .filter(|i| !keys.contains(i))
            .collect()
    }

    /// A relation whose every column is a key is a set of tuples.
    pub fn is_membership(&self) -> bool {
        !self.singleton && self.value_columns().is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AnnotationKind {
    Init,
    Violation,
    Public,
}

impl AnnotationKind {
    pub fn keyword(self) -> &'static str {
        match self {
            AnnotationKind::Init => "init",
            AnnotationKind::Violation => "violation",
            AnnotationKind::Public => "public",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Annotation {
    pub kind: AnnotationKind,
    pub relation: String,
    pub span: Span,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Const {
    Bool(bool),
    Int(i64),
}

impl fmt::Display for Const {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Const::Bool(b) => write!(f, "{b}"),
            Const::Int(n) => write!(f, "{n}"),
        }
    }
}

/// Argument of a literal. Wildcards are parsed into fresh variables whose
/// names start with `_`, which user identifiers never do.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Arg {
    Var(String),
    Const(Const),
}

impl Arg {
    pub fn var(&self) -> Option<&str> {
        match self {
            Arg::Var(v) => Some(v),
            Arg::Const(_) => None,
        }
    }
}

pub fn is_wildcard_name(name: &str) -> bool {
    name.starts_with('_')
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    pub relation: String,
    pub args: Vec<Arg>,
    pub span: Span,
}

impl Atom {
    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.args.iter().filter_map(Arg::var)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Gt,
    Lt,
    Ge,
    Le,
    Ne,
    Eq,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Gt => ">",
            CmpOp::Lt => "<",
            CmpOp::Ge => ">=",
            CmpOp::Le => "<=",
            CmpOp::Ne => "!=",
            CmpOp::Eq => "==",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FnOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl FnOp {
    pub fn symbol(self) -> &'static str {
        match self {
            FnOp::Add => "+",
            FnOp::Sub => "-",
            FnOp::Mul => "*",
            FnOp::Div => "/",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AggKind {
    Sum,
    Max,
    Min,
    Count,
}

impl AggKind {
    pub fn keyword(self) -> &'static str {
        match self {
            AggKind::Sum => "sum",
            AggKind::Max => "max",
            AggKind::Min => "min",
            AggKind::Count => "count",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        match s {
            "sum" => Some(AggKind::Sum),
            "max" => Some(AggKind::Max),
            "min" => Some(AggKind::Min),
            "count" => Some(AggKind::Count),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Literal {
    Atom(Atom),
    Condition {
        lhs: Arg,
        op: CmpOp,
        rhs: Arg,
        span: Span,
    },
    Function {
        out: String,
        op: FnOp,
        lhs: Arg,
        rhs: Arg,
        span: Span,
    },
    Aggregate {
        out: String,
        kind: AggKind,
        var: Option<String>,
        atom: Atom,
        span: Span,
    },
}

impl Literal {
    pub fn span(&self) -> Span {
        match self {
            Literal::Atom(a) => a.span,
            Literal::Condition { span, .. }
            | Literal::Function { span, .. }
            | Literal::Aggregate { span, .. } => *span,
        }
    }

    pub fn as_atom(&self) -> Option<&Atom> {
        match self {
            Literal::Atom(a) => Some(a),
            _ => None,
        }
    }

    /// Every variable the literal mentions, in order of appearance.
    pub fn vars(&self) -> Vec<&str> {
        match self {
            Literal::Atom(a) => a.vars().collect(),
            Literal::Condition { lhs, rhs, .. } => lhs.var().into_iter().chain(rhs.var()).collect(),
            Literal::Function { out, lhs, rhs, .. } => std::iter::once(out.as_str())
                .chain(lhs.var())
                .chain(rhs.var())
                .collect(),
            Literal::Aggregate { out, atom, .. } => {
                std::iter::once(out.as_str()).chain(atom.vars()).collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub head: Atom,
    pub body: Vec<Literal>,
    pub span: Span,
}

impl Rule {
    /// Relations read by the body, including aggregated ones.
    pub fn body_relations(&self) -> impl Iterator<Item = &str> {
        self.body.iter().filter_map(|l| match l {
            Literal::Atom(a) => Some(a.relation.as_str()),
            Literal::Aggregate { atom, .. } => Some(atom.relation.as_str()),
            _ => None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contract {
    pub name: String,
    pub decls: Vec<RelationDecl>,
    pub annotations: Vec<Annotation>,
    pub rules: Vec<Rule>,
}

impl Contract {
    pub fn decl(&self, name: &str) -> Option<&RelationDecl> {
        self.decls.iter().find(|d| d.name == name)
    }

    pub fn annotated(&self, kind: AnnotationKind) -> impl Iterator<Item = &str> {
        self.annotations
            .iter()
            .filter(move |a| a.kind == kind)
            .map(|a| a.relation.as_str())
    }

    pub fn has_annotation(&self, kind: AnnotationKind, relation: &str) -> bool {
        self.annotated(kind).any(|r| r == relation)
    }

    /// Copy with every span reset, for structural comparison.
    pub fn without_spans(&self) -> Contract {
        let mut c = self.clone();
        let zero = Span::default();
        for d in &mut c.decls {
            d.span = zero;
        }
        for a in &mut c.annotations {
            a.span = zero;
        }
        for r in &mut c.rules {
            r.span = zero;
            r.head.span = zero;
            for l in &mut r.body {
                match l {
                    Literal::Atom(a) => a.span = zero,
                    Literal::Condition { span, .. } | Literal::Function { span, .. } => {
                        *span = zero
                    }
                    Literal::Aggregate { span, atom, .. } => {
                        *span = zero;
                        atom.span = zero;
                    }
                }
            }
        }
        c
    }
}
