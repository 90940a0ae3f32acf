//! Semantic checks and rule classification.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::ast::*;
use super::diagnostic::Diagnostic;

pub const MSG_SENDER: &str = "msgSender";
pub const MSG_VALUE: &str = "msgValue";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RuleKind {
    Transaction,
    Join,
    Aggregation,
    ViolationQuery,
}

impl RuleKind {
    pub fn name(self) -> &'static str {
        match self {
            RuleKind::Transaction => "transaction",
            RuleKind::Join => "join",
            RuleKind::Aggregation => "aggregation",
            RuleKind::ViolationQuery => "violation query",
        }
    }
}

/// What causes a rule body to be evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TriggerMode {
    /// The body literal at this index is the freshly inserted tuple.
    Literal(usize),
    /// Every literal reads state; unbound key variables become locals.
    Check,
}

/// Evaluation order for one rule under one trigger.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plan {
    pub order: Vec<usize>,
    /// Variables introduced as free locals (check mode only), in order.
    pub locals: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct ValidatedContract {
    pub contract: Contract,
    pub kinds: Vec<RuleKind>,
    /// Index of the `recv_` literal, for transaction rules.
    pub triggers: Vec<Option<usize>>,
    /// Column type of every variable, per rule.
    pub var_types: Vec<BTreeMap<String, ColumnType>>,
    builtins: Vec<RelationDecl>,
}

fn builtin_decls() -> Vec<RelationDecl> {
    let mk = |name: &str, col: &str, ty| RelationDecl {
        name: name.to_string(),
        columns: vec![ColumnDecl {
            name: col.to_string(),
            ty,
        }],
        keys: Vec::new(),
        singleton: false,
        span: Span::default(),
    };
    vec![
        mk(MSG_SENDER, "v", ColumnType::Address),
        mk(MSG_VALUE, "v", ColumnType::Uint),
    ]
}

pub fn is_builtin(name: &str) -> bool {
    name == MSG_SENDER || name == MSG_VALUE
}

impl ValidatedContract {
    pub fn name(&self) -> &str {
        &self.contract.name
    }

    pub fn decl(&self, name: &str) -> Option<&RelationDecl> {
        self.contract
            .decl(name)
            .or_else(|| self.builtins.iter().find(|d| d.name == name))
    }

    pub fn rules(&self) -> &[Rule] {
        &self.contract.rules
    }

    pub fn rules_of_kind(&self, kind: RuleKind) -> impl Iterator<Item = usize> + '_ {
        (0..self.kinds.len()).filter(move |&i| self.kinds[i] == kind)
    }

    pub fn var_type(&self, rule: usize, var: &str) -> ColumnType {
        self.var_types[rule]
            .get(var)
            .copied()
            .unwrap_or(ColumnType::Int)
    }

    /// Relations that appear in some rule head.
    pub fn written_relations(&self) -> BTreeSet<&str> {
        self.contract
            .rules
            .iter()
            .zip(&self.kinds)
            .filter(|(_, k)| **k != RuleKind::ViolationQuery)
            .map(|(r, _)| r.head.relation.as_str())
            .collect()
    }

    /// Rules re-evaluated when a tuple of `relation` is inserted, with the
    /// index of the literal that receives the tuple. Source order.
    pub fn dependents(&self, relation: &str) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, r) in self.contract.rules.iter().enumerate() {
            if matches!(self.kinds[i], RuleKind::Transaction | RuleKind::ViolationQuery) {
                continue;
            }
            if let Some(j) = r
                .body
                .iter()
                .position(|l| l.as_atom().is_some_and(|a| a.relation == relation))
            {
                out.push((i, j));
            }
        }
        out
    }

    /// Binding order for rule `ri` under `mode`.
    pub fn plan(&self, ri: usize, mode: TriggerMode) -> Result<Plan, Diagnostic> {
        plan_rule(self, &self.contract.rules[ri], mode)
    }
}

/// Sequence the literals so that every map read has its keys bound.
fn plan_rule(vc: &ValidatedContract, rule: &Rule, mode: TriggerMode) -> Result<Plan, Diagnostic> {
    let mut bound: BTreeSet<String> = BTreeSet::new();
    let mut order = Vec::new();
    let mut locals = Vec::new();
    let mut pending: Vec<usize> = (0..rule.body.len()).collect();
    if let TriggerMode::Literal(t) = mode {
        bound.extend(rule.body[t].vars().into_iter().map(String::from));
        order.push(t);
        pending.retain(|&i| i != t);
    }
    let is_bound = |bound: &BTreeSet<String>, a: &Arg| a.var().map_or(true, |v| bound.contains(v));
    loop {
        let mut progressed = false;
        let mut i = 0;
        while i < pending.len() {
            let li = pending[i];
            let ready = match &rule.body[li] {
                Literal::Atom(a) if is_builtin(&a.relation) => true,
                Literal::Atom(a) => {
                    let decl = vc.decl(&a.relation).expect("declared");
                    let keys_bound = decl
                        .key_columns()
                        .iter()
                        .all(|&k| is_bound(&bound, &a.args[k]));
                    if !keys_bound && mode == TriggerMode::Check {
                        for &k in &decl.key_columns() {
                            if let Some(v) = a.args[k].var() {
                                if bound.insert(v.to_string()) {
                                    locals.push(v.to_string());
                                }
                            }
                        }
                        true
                    } else {
                        keys_bound
                    }
                }
                Literal::Condition { lhs, rhs, .. } => is_bound(&bound, lhs) && is_bound(&bound, rhs),
                Literal::Function { lhs, rhs, .. } => is_bound(&bound, lhs) && is_bound(&bound, rhs),
                Literal::Aggregate { atom, .. } => {
                    // group-by variables come from the companion atom
                    let decl = vc.decl(&rule.head.relation).expect("declared");
                    let _ = atom;
                    decl.key_columns()
                        .iter()
                        .all(|&k| is_bound(&bound, &rule.head.args[k]))
                }
            };
            if ready {
                bound.extend(rule.body[li].vars().into_iter().map(String::from));
                if let Literal::Aggregate { atom, .. } = &rule.body[li] {
                    // variables local to the aggregate do not escape
                    for v in atom.vars() {
                        if !rule.body.iter().enumerate().any(|(j, l)| {
                            j != li && l.vars().contains(&v)
                        }) && rule.head.vars().all(|h| h != v)
                        {
                            bound.remove(v);
                        }
                    }
                }
                order.push(li);
                pending.remove(i);
                progressed = true;
            } else {
                i += 1;
            }
        }
        if pending.is_empty() {
            break;
        }
        if !progressed {
            let li = pending[0];
            let lit = &rule.body[li];
            let missing: Vec<&str> = lit
                .vars()
                .into_iter()
                .filter(|v| !bound.contains(*v) && !is_wildcard_name(v))
                .collect();
            let what = if missing.is_empty() {
                "a wildcard key".to_string()
            } else {
                format!("variable `{}`", missing.join("`, `"))
            };
            let ctx = match mode {
                TriggerMode::Literal(t) => match &rule.body[t] {
                    Literal::Atom(a) => format!(" when triggered by `{}`", a.relation),
                    _ => String::new(),
                },
                TriggerMode::Check => String::new(),
            };
            return Err(Diagnostic::error(
                lit.span(),
                format!("{what} is not determined{ctx}; every key must be bound before a relation is read"),
            ));
        }
    }
    for v in rule.head.vars() {
        if !bound.contains(v) {
            return Err(Diagnostic::error(
                rule.head.span,
                format!("unbound head variable `{v}`"),
            ));
        }
    }
    Ok(Plan { order, locals })
}

struct Checker<'a> {
    c: &'a Contract,
    builtins: Vec<RelationDecl>,
    diags: Vec<Diagnostic>,
}

impl<'a> Checker<'a> {
    fn decl(&self, name: &str) -> Option<&RelationDecl> {
        self.c
            .decl(name)
            .or_else(|| self.builtins.iter().find(|d| d.name == name))
    }

    fn err(&mut self, span: Span, msg: impl Into<String>) {
        self.diags.push(Diagnostic::error(span, msg));
    }

    fn check_decls(&mut self) {
        let mut seen: HashMap<&str, Span> = HashMap::new();
        for d in &self.c.decls {
            if let Some(prev) = seen.insert(&d.name, d.span) {
                self.err(d.span, format!("relation `{}` already declared at {prev}", d.name));
            }
            if is_builtin(&d.name) {
                self.err(d.span, format!("`{}` is a built-in relation and cannot be declared", d.name));
            }
            if d.columns.is_empty() && !d.is_handler() {
                self.err(d.span, format!("relation `{}` has no columns", d.name));
            }
            let mut cols = BTreeSet::new();
            for col in &d.columns {
                if !cols.insert(col.name.as_str()) {
                    self.err(d.span, format!("duplicate column `{}` in `{}`", col.name, d.name));
                }
            }
            for (i, &k) in d.keys.iter().enumerate() {
                if k >= d.columns.len() {
                    self.err(
                        d.span,
                        format!("primary key index {k} out of range for `{}` with {} columns", d.name, d.columns.len()),
                    );
                }
                if i > 0 && d.keys[i - 1] >= k {
                    self.err(d.span, format!("primary keys of `{}` must be strictly increasing", d.name));
                }
            }
            if d.is_handler() && d.singleton {
                self.err(d.span, format!("transaction handler `{}` cannot be a singleton", d.name));
            }
        }
    }

    fn check_annotations(&mut self) {
        for a in &self.c.annotations {
            match self.c.decl(&a.relation) {
                None => self.err(a.span, format!("annotation on undeclared relation `{}`", a.relation)),
                Some(d) if d.is_handler() => self.err(
                    a.span,
                    format!("transaction handler `{}` cannot be annotated `.{}`", a.relation, a.kind.keyword()),
                ),
                Some(_) => {}
            }
            if a.kind == AnnotationKind::Init
                && self.c.has_annotation(AnnotationKind::Violation, &a.relation)
            {
                self.err(a.span, format!("`{}` cannot be both init and violation", a.relation));
            }
            if a.kind == AnnotationKind::Violation
                && !self.c.rules.iter().any(|r| r.head.relation == a.relation)
            {
                self.err(a.span, format!("violation relation `{}` has no defining rule", a.relation));
            }
        }
    }

    /// Arity and column typing of one atom; records variable types.
    fn check_atom(&mut self, a: &Atom, types: &mut BTreeMap<String, ColumnType>) -> bool {
        let Some(d) = self.decl(&a.relation).cloned() else {
            self.err(a.span, format!("undeclared relation `{}`", a.relation));
            return false;
        };
        if d.arity() != a.args.len() {
            self.err(
                a.span,
                format!("`{}` expects {} arguments, found {}", a.relation, d.arity(), a.args.len()),
            );
            return false;
        }
        for (arg, col) in a.args.iter().zip(&d.columns) {
            match arg {
                Arg::Const(Const::Bool(_)) if col.ty != ColumnType::Bool => self.err(
                    a.span,
                    format!("boolean constant in {} column `{}` of `{}`", col.ty, col.name, a.relation),
                ),
                Arg::Const(Const::Int(_)) if col.ty == ColumnType::Bool => self.err(
                    a.span,
                    format!("integer constant in bool column `{}` of `{}`", col.name, a.relation),
                ),
                Arg::Const(_) => {}
                Arg::Var(v) => match types.get(v) {
                    None => {
                        types.insert(v.clone(), col.ty);
                    }
                    Some(&t) if compatible(t, col.ty) => {}
                    Some(&t) => self.err(
                        a.span,
                        format!("variable `{v}` used as {t} and as {} (column `{}` of `{}`)", col.ty, col.name, a.relation),
                    ),
                },
            }
        }
        true
    }

    fn arg_type(&self, a: &Arg, types: &BTreeMap<String, ColumnType>) -> Option<ColumnType> {
        match a {
            Arg::Const(Const::Bool(_)) => Some(ColumnType::Bool),
            Arg::Const(Const::Int(_)) => None,
            Arg::Var(v) => types.get(v).copied(),
        }
    }

    fn check_rule(&mut self, ri: usize) -> (Option<RuleKind>, Option<usize>, BTreeMap<String, ColumnType>) {
        let r = &self.c.rules[ri];
        let mut types = BTreeMap::new();
        let mut ok = true;
        let head_ok = self.check_atom(&r.head, &mut types);
        ok &= head_ok;
        if head_ok {
            let hd = self.decl(&r.head.relation).unwrap();
            if hd.is_handler() {
                self.err(r.head.span, format!("transaction handler `{}` cannot appear in a rule head", r.head.relation));
                ok = false;
            }
            if is_builtin(&r.head.relation) {
                self.err(r.head.span, format!("built-in `{}` cannot appear in a rule head", r.head.relation));
                ok = false;
            }
        }
        let mut handlers = Vec::new();
        let mut has_agg = false;
        let mut has_env = false;
        for (li, l) in r.body.iter().enumerate() {
            match l {
                Literal::Atom(a) => {
                    ok &= self.check_atom(a, &mut types);
                    if a.relation.starts_with(HANDLER_PREFIX) {
                        handlers.push(li);
                    }
                    if is_builtin(&a.relation) {
                        has_env = true;
                    }
                    if self.c.has_annotation(AnnotationKind::Violation, &a.relation) {
                        self.err(a.span, format!("violation relation `{}` cannot be read by a rule", a.relation));
                        ok = false;
                    }
                }
                Literal::Aggregate { atom, .. } => {
                    has_agg = true;
                    let mut inner = types.clone();
                    ok &= self.check_atom(atom, &mut inner);
                    for (k, v) in inner {
                        types.entry(k).or_insert(v);
                    }
                }
                _ => {}
            }
        }
        // typing of conditions, functions and aggregates
        for l in &r.body {
            match l {
                Literal::Condition { lhs, op, rhs, span } => {
                    let (lt, rt) = (self.arg_type(lhs, &types), self.arg_type(rhs, &types));
                    let t = lt.or(rt);
                    if let (Some(a), Some(b)) = (lt, rt) {
                        if !compatible(a, b) {
                            self.err(*span, format!("cannot compare {a} with {b}"));
                            ok = false;
                            continue;
                        }
                    }
                    if matches!(t, Some(ColumnType::Bool | ColumnType::Address))
                        && !matches!(op, CmpOp::Eq | CmpOp::Ne)
                    {
                        self.err(*span, format!("operator `{}` is not defined on {}", op.symbol(), t.unwrap()));
                        ok = false;
                    }
                    if t.is_none() && lhs.var().is_none() && rhs.var().is_none() {
                        // two integer constants: fine
                    }
                }
                Literal::Function { out, op, lhs, rhs, span } => {
                    for a in [lhs, rhs] {
                        if let Some(t) = self.arg_type(a, &types) {
                            if !t.is_numeric() {
                                self.err(*span, format!("operator `{}` needs numeric operands, found {t}", op.symbol()));
                                ok = false;
                            }
                        }
                    }
                    let signed = *op == FnOp::Sub
                        || [lhs, rhs]
                            .iter()
                            .any(|a| self.arg_type(a, &types) == Some(ColumnType::Int));
                    match types.get(out) {
                        Some(t) if !t.is_numeric() => {
                            self.err(*span, format!("`{out}` is {t} but is assigned an arithmetic result"));
                            ok = false;
                        }
                        Some(_) => {}
                        None => {
                            types.insert(out.clone(), if signed { ColumnType::Int } else { ColumnType::Uint });
                        }
                    }
                }
                Literal::Aggregate { out, kind, var, atom, span } => {
                    match (kind, var) {
                        (AggKind::Count, Some(_)) => {
                            self.err(*span, "`count` takes no aggregated variable");
                            ok = false;
                        }
                        (AggKind::Count, None) => {}
                        (_, None) => {
                            self.err(*span, format!("`{}` needs an aggregated variable", kind.keyword()));
                            ok = false;
                        }
                        (_, Some(v)) => {
                            if !atom.vars().any(|x| x == v) {
                                self.err(*span, format!("aggregated variable `{v}` does not occur in `{}`", atom.relation));
                                ok = false;
                            }
                        }
                    }
                    let out_t = match (kind, var) {
                        (AggKind::Count, _) => ColumnType::Uint,
                        (_, Some(v)) => self
                            .decl(&atom.relation)
                            .and_then(|d| {
                                atom.args.iter().position(|a| a.var() == Some(v)).map(|i| d.columns[i].ty)
                            })
                            .unwrap_or(ColumnType::Int),
                        _ => ColumnType::Int,
                    };
                    if !out_t.is_numeric() {
                        self.err(*span, format!("cannot aggregate {out_t} values"));
                        ok = false;
                    }
                    match types.get(out) {
                        Some(t) if !t.is_numeric() => {
                            self.err(*span, format!("`{out}` is {t} but holds an aggregate"));
                            ok = false;
                        }
                        Some(_) => {}
                        None => {
                            types.insert(out.clone(), out_t);
                        }
                    }
                }
                Literal::Atom(_) => {}
            }
        }
        if !ok {
            return (None, None, types);
        }

        let is_violation = self.c.has_annotation(AnnotationKind::Violation, &r.head.relation);
        let kind = if is_violation {
            if !handlers.is_empty() || has_env || has_agg {
                self.err(r.span, format!(
                    "violation query `{}` may only read state (no handlers, environment literals or aggregates)",
                    r.head.relation
                ));
                return (None, None, types);
            }
            RuleKind::ViolationQuery
        } else if !handlers.is_empty() {
            if handlers.len() > 1 {
                self.err(r.span, format!(
                    "transaction rule for `{}` has {} handler literals; exactly one is allowed",
                    r.head.relation,
                    handlers.len()
                ));
                return (None, None, types);
            }
            if has_agg {
                self.err(r.span, "aggregates are not allowed in transaction rules");
                return (None, None, types);
            }
            RuleKind::Transaction
        } else if has_agg {
            if has_env {
                self.err(r.span, "environment literals are only allowed in transaction rules");
                return (None, None, types);
            }
            if !self.check_aggregation_shape(r) {
                return (None, None, types);
            }
            RuleKind::Aggregation
        } else {
            if has_env {
                self.err(r.span, "environment literals are only allowed in transaction rules");
                return (None, None, types);
            }
            if !r.body.iter().any(|l| l.as_atom().is_some()) {
                self.err(r.span, "rule body needs at least one relational literal");
                return (None, None, types);
            }
            RuleKind::Join
        };
        let trig = if kind == RuleKind::Transaction { Some(handlers[0]) } else { None };
        (Some(kind), trig, types)
    }

    fn check_aggregation_shape(&mut self, r: &Rule) -> bool {
        let shape_err = |s: &mut Self, msg: String| {
            s.err(r.span, msg);
            false
        };
        let (atom, agg) = match r.body.as_slice() {
            [Literal::Atom(a), agg @ Literal::Aggregate { .. }] => (a, agg),
            _ => {
                return shape_err(
                    self,
                    "an aggregation rule body must be one relational literal followed by one aggregator".into(),
                )
            }
        };
        let Literal::Aggregate { out, var, atom: inner, .. } = agg else {
            unreachable!()
        };
        if inner.relation != atom.relation {
            return shape_err(self, format!(
                "aggregator reads `{}` but the rule iterates `{}`",
                inner.relation, atom.relation
            ));
        }
        for (x, z) in atom.args.iter().zip(&inner.args) {
            let both_wild = x.var().is_some_and(is_wildcard_name) && z.var().is_some_and(is_wildcard_name);
            if !both_wild && x != z {
                return shape_err(self, format!(
                    "aggregator pattern must repeat the pattern of `{}` (wildcards may differ)",
                    atom.relation
                ));
            }
        }
        let head_decl = self.decl(&r.head.relation).unwrap().clone();
        let keys = head_decl.key_columns();
        let outs: Vec<usize> = (0..r.head.args.len())
            .filter(|&i| r.head.args[i].var() == Some(out))
            .collect();
        if outs.len() != 1 || keys.contains(&outs[0]) || head_decl.value_columns().len() != 1 {
            return shape_err(self, format!(
                "aggregate `{out}` must fill the single value column of `{}`",
                r.head.relation
            ));
        }
        let head_keys: BTreeSet<&str> = keys.iter().filter_map(|&k| r.head.args[k].var()).collect();
        if keys.iter().any(|&k| r.head.args[k].var().is_none()) {
            return shape_err(self, "aggregation head keys must be variables".into());
        }
        let group: BTreeSet<&str> = inner
            .vars()
            .filter(|v| !is_wildcard_name(v) && Some(*v) != var.as_deref())
            .collect();
        if group != head_keys {
            return shape_err(self, format!(
                "aggregation groups by {{{}}} but `{}` is keyed by {{{}}}",
                group.iter().copied().collect::<Vec<_>>().join(", "),
                r.head.relation,
                head_keys.iter().copied().collect::<Vec<_>>().join(", ")
            ));
        }
        true
    }
}

fn compatible(a: ColumnType, b: ColumnType) -> bool {
    a == b || (a.is_numeric() && b.is_numeric())
}

/// Dependency edges: body relation -> head relation. Transaction rules fire
/// only on their handler, so they contribute only the handler edge.
fn find_cycle(c: &Contract, kinds: &[RuleKind], triggers: &[Option<usize>]) -> Option<Vec<String>> {
    let mut edges: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    let mut first_def: HashMap<&str, usize> = HashMap::new();
    for (i, r) in c.rules.iter().enumerate() {
        first_def.entry(r.head.relation.as_str()).or_insert(i);
        let sources: Vec<&str> = match kinds[i] {
            RuleKind::Transaction => {
                vec![r.body[triggers[i].unwrap()].as_atom().unwrap().relation.as_str()]
            }
            _ => r.body_relations().collect(),
        };
        for s in sources {
            let e = edges.entry(s).or_default();
            if !e.contains(&r.head.relation.as_str()) {
                e.push(&r.head.relation);
            }
        }
    }
    // iterative DFS with colors
    let nodes: Vec<&str> = edges.keys().copied().collect();
    let mut color: HashMap<&str, u8> = HashMap::new();
    for &start in &nodes {
        if color.get(start).copied().unwrap_or(0) != 0 {
            continue;
        }
        let mut stack: Vec<(&str, usize)> = vec![(start, 0)];
        color.insert(start, 1);
        while let Some((n, idx)) = stack.last().copied() {
            let succ = edges.get(n).map(|v| v.as_slice()).unwrap_or(&[]);
            if idx < succ.len() {
                stack.last_mut().unwrap().1 += 1;
                let m = succ[idx];
                match color.get(m).copied().unwrap_or(0) {
                    0 => {
                        color.insert(m, 1);
                        stack.push((m, 0));
                    }
                    1 => {
                        let pos = stack.iter().position(|(x, _)| *x == m).unwrap();
                        let mut cyc: Vec<&str> = stack[pos..].iter().map(|(x, _)| *x).collect();
                        let rot = (0..cyc.len())
                            .min_by_key(|&i| first_def.get(cyc[i]).copied().unwrap_or(usize::MAX))
                            .unwrap();
                        cyc.rotate_left(rot);
                        let mut names: Vec<String> = cyc.iter().map(|s| s.to_string()).collect();
                        names.push(names[0].clone());
                        return Some(names);
                    }
                    _ => {}
                }
            } else {
                color.insert(n, 2);
                stack.pop();
            }
        }
    }
    None
}

pub fn validate(c: Contract) -> Result<ValidatedContract, Vec<Diagnostic>> {
    let mut ck = Checker {
        c: &c,
        builtins: builtin_decls(),
        diags: Vec::new(),
    };
    ck.check_decls();
    ck.check_annotations();
    let mut kinds = Vec::new();
    let mut triggers = Vec::new();
    let mut var_types = Vec::new();
    let mut all_classified = true;
    for ri in 0..c.rules.len() {
        let (k, t, types) = ck.check_rule(ri);
        all_classified &= k.is_some();
        kinds.push(k.unwrap_or(RuleKind::Join));
        triggers.push(t);
        var_types.push(types);
    }
    let mut diags = ck.diags;
    if !all_classified || !diags.is_empty() {
        diags.sort_by_key(|d| (d.line, d.col));
        return Err(diags);
    }
    if !kinds.contains(&RuleKind::Transaction) {
        diags.push(Diagnostic::error(Span::new(1, 1), "contract has no transaction rule"));
    }
    if c.annotated(AnnotationKind::Violation).next().is_none() {
        diags.push(Diagnostic::error(Span::new(1, 1), "contract has no `.violation` annotation"));
    }
    if let Some(cycle) = find_cycle(&c, &kinds, &triggers) {
        let span = c
            .rules
            .iter()
            .find(|r| r.head.relation == cycle[0])
            .map(|r| r.span)
            .unwrap_or_default();
        diags.push(Diagnostic::error(
            span,
            format!("recursive rules are not supported: dependency cycle {}", cycle.join(" → ")),
        ));
    }
    let vc = ValidatedContract {
        contract: c,
        kinds,
        triggers,
        var_types,
        builtins: builtin_decls(),
    };
    if diags.is_empty() {
        let written = vc.written_relations();
        for (ri, r) in vc.contract.rules.iter().enumerate() {
            if vc.kinds[ri] == RuleKind::Aggregation {
                let src = &r.body[0].as_atom().unwrap().relation;
                if !written.contains(src.as_str()) {
                    diags.push(Diagnostic::error(
                        r.span,
                        format!("aggregation over `{src}`, which no rule writes, is never maintained"),
                    ));
                }
            }
            let modes: Vec<TriggerMode> = match vc.kinds[ri] {
                RuleKind::Transaction => vec![TriggerMode::Literal(vc.triggers[ri].unwrap())],
                RuleKind::ViolationQuery => vec![TriggerMode::Check],
                _ => {
                    let mut m = vec![TriggerMode::Check];
                    let mut seen = BTreeSet::new();
                    for (li, l) in r.body.iter().enumerate() {
                        if let Literal::Atom(a) = l {
                            if written.contains(a.relation.as_str()) && seen.insert(a.relation.as_str()) {
                                m.push(TriggerMode::Literal(li));
                            }
                        }
                    }
                    m
                }
            };
            for mode in modes {
                if let Err(d) = vc.plan(ri, mode) {
                    if !diags.contains(&d) {
                        diags.push(d);
                    }
                }
            }
        }
    }
    if diags.is_empty() {
        Ok(vc)
    } else {
        diags.sort_by_key(|d| (d.line, d.col));
        Err(diags)
    }
}
