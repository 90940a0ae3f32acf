//! Reference interpreter: runs a parsed contract on concrete tables.
//!
//! A transaction inserts its handler tuple. Every rule reading an inserted
//! relation is evaluated with the new tuple bound at its first literal over
//! that relation, and the head it derives is inserted in turn, depth first
//! and in rule order. Bodies see the tables as they are at that moment.
//! Aggregates are maintained from the triggering tuple: count adds one, sum
//! adds the new value less the value it replaces, max/min compare.
//!
//! Keyed relations are total: a missing row reads as zeros.

use std::collections::{BTreeMap, BTreeSet};

use dcv::frontend::ast::{AggKind, AnnotationKind, Arg, Atom, CmpOp, ColumnType, Const, Contract, FnOp, Literal, RelationDecl};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Table {
    Set(BTreeSet<Vec<i64>>),
    /// Key columns to value columns; all-zero rows are left out.
    Keyed(BTreeMap<Vec<i64>, Vec<i64>>),
}

pub type State = BTreeMap<String, Table>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tx {
    /// Index of the transaction rule.
    pub rule: usize,
    pub args: Vec<i64>,
    pub sender: i64,
    pub value: i64,
}

type Bindings = BTreeMap<String, i64>;

pub struct Interp<'a> {
    pub contract: &'a Contract,
}

fn konst(c: &Const) -> i64 {
    match c {
        Const::Bool(b) => *b as i64,
        Const::Int(n) => *n,
    }
}

fn value_of(a: &Arg, b: &Bindings) -> Option<i64> {
    match a {
        Arg::Const(c) => Some(konst(c)),
        Arg::Var(v) => b.get(v).copied(),
    }
}

fn unify(a: &Arg, x: i64, b: &mut Bindings) -> bool {
    match value_of(a, b) {
        Some(y) => x == y,
        None => {
            b.insert(a.var().unwrap().to_string(), x);
            true
        }
    }
}

fn compare(op: CmpOp, x: i64, y: i64) -> bool {
    match op {
        CmpOp::Gt => x > y,
        CmpOp::Lt => x < y,
        CmpOp::Ge => x >= y,
        CmpOp::Le => x <= y,
        CmpOp::Ne => x != y,
        CmpOp::Eq => x == y,
    }
}

fn apply(op: FnOp, x: i64, y: i64) -> i64 {
    match op {
        FnOp::Add => x + y,
        FnOp::Sub => x - y,
        FnOp::Mul => x * y,
        FnOp::Div if y == 0 => 0,
        FnOp::Div => x.div_euclid(y),
    }
}

impl<'a> Interp<'a> {
    pub fn new(contract: &'a Contract) -> Self {
        Interp { contract }
    }

    fn decl(&self, rel: &str) -> &RelationDecl {
        self.contract.decl(rel).unwrap_or_else(|| panic!("undeclared `{rel}`"))
    }

    fn is_violation(&self, rel: &str) -> bool {
        self.contract.has_annotation(AnnotationKind::Violation, rel)
    }

    fn is_handler_rule(&self, ri: usize) -> bool {
        self.contract.rules[ri]
            .body
            .iter()
            .any(|l| l.as_atom().is_some_and(|a| self.decl_opt(&a.relation).is_some_and(|d| d.is_handler())))
    }

    fn decl_opt(&self, rel: &str) -> Option<&RelationDecl> {
        self.contract.decl(rel)
    }

    /// Relations held as tables.
    pub fn state_relations(&self) -> Vec<&RelationDecl> {
        self.contract
            .decls
            .iter()
            .filter(|d| !d.is_handler() && !self.is_violation(&d.name))
            .collect()
    }

    pub fn transaction_rules(&self) -> Vec<usize> {
        (0..self.contract.rules.len()).filter(|&i| self.is_handler_rule(i)).collect()
    }

    /// Relations some rule writes.
    pub fn written(&self) -> BTreeSet<&str> {
        self.contract.rules.iter().map(|r| r.head.relation.as_str()).collect()
    }

    /// Relations whose initial contents are free: `.init` or never written.
    pub fn free_at_init(&self) -> Vec<&RelationDecl> {
        let written = self.written();
        self.state_relations()
            .into_iter()
            .filter(|d| {
                self.contract.has_annotation(AnnotationKind::Init, &d.name) || !written.contains(d.name.as_str())
            })
            .collect()
    }

    pub fn empty_table(&self, d: &RelationDecl) -> Table {
        if d.is_membership() {
            Table::Set(BTreeSet::new())
        } else {
            Table::Keyed(BTreeMap::new())
        }
    }

    pub fn empty_state(&self) -> State {
        self.state_relations()
            .into_iter()
            .map(|d| (d.name.clone(), self.empty_table(d)))
            .collect()
    }

    /// Value columns of the row at `key`.
    pub fn row(&self, st: &State, rel: &str, key: &[i64]) -> Vec<i64> {
        let d = self.decl(rel);
        match &st[rel] {
            Table::Keyed(m) => m.get(key).cloned().unwrap_or_else(|| vec![0; d.value_columns().len()]),
            Table::Set(_) => panic!("`{rel}` has no value columns"),
        }
    }

    pub fn contains(&self, st: &State, rel: &str, tuple: &[i64]) -> bool {
        match &st[rel] {
            Table::Set(s) => s.contains(tuple),
            Table::Keyed(_) => {
                let d = self.decl(rel);
                let key: Vec<i64> = d.key_columns().iter().map(|&k| tuple[k]).collect();
                let vals: Vec<i64> = d.value_columns().iter().map(|&k| tuple[k]).collect();
                self.row(st, rel, &key) == vals
            }
        }
    }

    /// Insert `tuple`; returns the replaced values by column.
    fn insert(&self, st: &mut State, rel: &str, tuple: &[i64]) -> BTreeMap<usize, i64> {
        let d = self.decl(rel);
        let mut old = BTreeMap::new();
        let table = st.get_mut(rel).unwrap_or_else(|| panic!("no table `{rel}`"));
        match table {
            Table::Set(s) => {
                s.insert(tuple.to_vec());
            }
            Table::Keyed(m) => {
                let key: Vec<i64> = d.key_columns().iter().map(|&k| tuple[k]).collect();
                let cols = d.value_columns();
                let prev = m.get(&key).cloned().unwrap_or_else(|| vec![0; cols.len()]);
                for (&c, &v) in cols.iter().zip(&prev) {
                    old.insert(c, v);
                }
                let vals: Vec<i64> = cols.iter().map(|&k| tuple[k]).collect();
                if vals.iter().all(|&v| v == 0) {
                    m.remove(&key);
                } else {
                    m.insert(key, vals);
                }
            }
        }
        old
    }

    /// Rules reading `rel`, with the position of their first literal over it.
    fn dependents(&self, rel: &str) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, r) in self.contract.rules.iter().enumerate() {
            if self.is_handler_rule(i) || self.is_violation(&r.head.relation) {
                continue;
            }
            if let Some(j) = r.body.iter().position(|l| l.as_atom().is_some_and(|a| a.relation == rel)) {
                out.push((i, j));
            }
        }
        out
    }

    /// Successor of `s` under `tx`, or `None` when a uint column would go
    /// negative.
    pub fn step(&self, s: &State, tx: &Tx) -> Option<State> {
        let rule = &self.contract.rules[tx.rule];
        let h = rule
            .body
            .iter()
            .position(|l| l.as_atom().is_some_and(|a| self.decl_opt(&a.relation).is_some_and(|d| d.is_handler())))
            .expect("transaction rule");
        let mut st = s.clone();
        self.fire(&mut st, tx.rule, h, &tx.args, &BTreeMap::new(), tx);
        self.nonnegative(&st).then_some(st)
    }

    fn nonnegative(&self, st: &State) -> bool {
        self.state_relations().into_iter().all(|d| match &st[&d.name] {
            Table::Set(_) => true,
            Table::Keyed(m) => {
                let cols = d.value_columns();
                m.values().all(|vals| {
                    cols.iter()
                        .zip(vals)
                        .all(|(&c, &v)| d.columns[c].ty != ColumnType::Uint || v >= 0)
                })
            }
        })
    }

    fn fire(&self, st: &mut State, ri: usize, lit: usize, tuple: &[i64], old: &BTreeMap<usize, i64>, tx: &Tx) {
        let rule = &self.contract.rules[ri];
        let Literal::Atom(trig) = &rule.body[lit] else { unreachable!() };
        let mut b = Bindings::new();
        if !trig.args.iter().zip(tuple).all(|(a, &x)| unify(a, x, &mut b)) {
            return;
        }
        let pending: Vec<usize> = (0..rule.body.len()).filter(|&i| i != lit).collect();
        let mut heads = BTreeSet::new();
        self.solve(st, ri, &pending, b, tuple, old, tx, &mut heads);
        assert!(
            heads.len() <= 1,
            "rule {ri} derives {} tuples from one insertion",
            heads.len()
        );
        let Some(head) = heads.into_iter().next() else { return };
        let head_rel = &rule.head.relation;
        let replaced = self.insert(st, head_rel, &head);
        for (dr, dl) in self.dependents(head_rel) {
            self.fire(st, dr, dl, &head, &replaced, tx);
        }
    }

    fn ready(&self, ri: usize, l: &Literal, b: &Bindings) -> bool {
        let bound = |a: &Arg| value_of(a, b).is_some();
        match l {
            Literal::Atom(a) if a.relation == "msgSender" || a.relation == "msgValue" => true,
            Literal::Atom(a) => {
                self.decl(&a.relation).key_columns().iter().all(|&k| bound(&a.args[k]))
            }
            Literal::Condition { lhs, rhs, .. } => bound(lhs) && bound(rhs),
            Literal::Function { lhs, rhs, .. } => bound(lhs) && bound(rhs),
            Literal::Aggregate { .. } => {
                let head = &self.contract.rules[ri].head;
                self.decl(&head.relation).key_columns().iter().all(|&k| bound(&head.args[k]))
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn solve(
        &self,
        st: &State,
        ri: usize,
        pending: &[usize],
        b: Bindings,
        trigger: &[i64],
        old: &BTreeMap<usize, i64>,
        tx: &Tx,
        heads: &mut BTreeSet<Vec<i64>>,
    ) {
        let rule = &self.contract.rules[ri];
        if pending.is_empty() {
            let head = rule
                .head
                .args
                .iter()
                .map(|a| value_of(a, &b).expect("head variable bound by the body"))
                .collect();
            heads.insert(head);
            return;
        }
        let pick = pending
            .iter()
            .position(|&i| self.ready(ri, &rule.body[i], &b));
        let Some(pos) = pick else {
            // a set atom with free columns: try every row
            let pos = pending
                .iter()
                .position(|&i| matches!(&rule.body[i], Literal::Atom(a) if self.decl(&a.relation).is_membership()))
                .expect("no literal can be evaluated");
            let Literal::Atom(a) = &rule.body[pending[pos]] else { unreachable!() };
            let rest: Vec<usize> = pending.iter().copied().filter(|&i| i != pending[pos]).collect();
            let Table::Set(rows) = &st[&a.relation] else { unreachable!() };
            for row in rows {
                let mut b2 = b.clone();
                if a.args.iter().zip(row).all(|(x, &v)| unify(x, v, &mut b2)) {
                    self.solve(st, ri, &rest, b2, trigger, old, tx, heads);
                }
            }
            return;
        };
        let li = pending[pos];
        let rest: Vec<usize> = pending.iter().copied().filter(|&i| i != li).collect();
        let mut b = b;
        let ok = match &rule.body[li] {
            Literal::Atom(a) if a.relation == "msgSender" => unify(&a.args[0], tx.sender, &mut b),
            Literal::Atom(a) if a.relation == "msgValue" => unify(&a.args[0], tx.value, &mut b),
            Literal::Atom(a) => self.match_atom(st, a, &mut b),
            Literal::Condition { lhs, op, rhs, .. } => {
                compare(*op, value_of(lhs, &b).unwrap(), value_of(rhs, &b).unwrap())
            }
            Literal::Function { out, op, lhs, rhs, .. } => {
                let v = apply(*op, value_of(lhs, &b).unwrap(), value_of(rhs, &b).unwrap());
                unify(&Arg::Var(out.clone()), v, &mut b)
            }
            Literal::Aggregate { out, kind, var, atom, .. } => {
                let head = &rule.head;
                let hd = self.decl(&head.relation);
                let key: Vec<i64> = hd.key_columns().iter().map(|&k| value_of(&head.args[k], &b).unwrap()).collect();
                let cur = self.row(st, &head.relation, &key)[0];
                let new = || {
                    let v = var.as_ref().unwrap();
                    let col = atom.args.iter().position(|x| x.var() == Some(v.as_str())).unwrap();
                    (col, trigger[col])
                };
                let v = match kind {
                    AggKind::Count => cur + 1,
                    AggKind::Sum => {
                        let (col, n) = new();
                        cur + n - old.get(&col).copied().unwrap_or(0)
                    }
                    AggKind::Max => cur.max(new().1),
                    AggKind::Min => cur.min(new().1),
                };
                unify(&Arg::Var(out.clone()), v, &mut b)
            }
        };
        if ok {
            self.solve(st, ri, &rest, b, trigger, old, tx, heads);
        }
    }

    fn match_atom(&self, st: &State, a: &Atom, b: &mut Bindings) -> bool {
        let d = self.decl(&a.relation);
        if d.is_membership() {
            let tuple: Vec<i64> = a.args.iter().map(|x| value_of(x, b).unwrap()).collect();
            return self.contains(st, &a.relation, &tuple);
        }
        let key: Vec<i64> = d.key_columns().iter().map(|&k| value_of(&a.args[k], b).unwrap()).collect();
        let row = self.row(st, &a.relation, &key);
        d.value_columns().iter().zip(row).all(|(&c, v)| unify(&a.args[c], v, b))
    }

    /// States reachable from `inits` by `txs`, breadth first, up to `limit`
    /// states. Returns the first state satisfying `bad` with its path.
    pub fn search(
        &self,
        inits: &[State],
        txs: &[Tx],
        limit: usize,
        bad: impl Fn(&State) -> bool,
    ) -> (usize, Option<(State, Vec<Tx>)>) {
        let mut seen: BTreeMap<State, Option<(State, Tx)>> = BTreeMap::new();
        let mut queue = std::collections::VecDeque::new();
        for s in inits {
            if seen.insert(s.clone(), None).is_none() {
                queue.push_back(s.clone());
            }
        }
        while let Some(s) = queue.pop_front() {
            if bad(&s) {
                let mut path = Vec::new();
                let mut cur = s.clone();
                while let Some(Some((prev, tx))) = seen.get(&cur) {
                    path.push(tx.clone());
                    cur = prev.clone();
                }
                path.reverse();
                return (seen.len(), Some((s, path)));
            }
            if seen.len() >= limit {
                continue;
            }
            for tx in txs {
                if let Some(t) = self.step(&s, tx) {
                    if !seen.contains_key(&t) {
                        seen.insert(t.clone(), Some((s.clone(), tx.clone())));
                        queue.push_back(t);
                    }
                }
            }
        }
        (seen.len(), None)
    }
}
