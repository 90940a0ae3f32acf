//! Rule-tree encoding: body, head update and dependents, with the untaken
//! branch framing every write of the subtree.
//!
//! A state variable written k times along one transaction gets the version
//! chain `x#1 .. x#(k-1), x'` in pre-order. Reads see the latest version at
//! their position, so later rules observe earlier updates.

use std::collections::BTreeMap;

use crate::frontend::{TriggerMode, ValidatedContract};
use crate::logic::{Expr, Layout, StateSpace, StateVar, Var, VarKind};

use super::body::{BodyEncoder, EnvParams, Trigger};
use super::CompileError;

/// Encoding of one rule firing and everything it triggers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleEncoding {
    pub rule: usize,
    pub body: Expr,
    /// `new_version = f(old_version)` equations for the head.
    pub updates: Vec<Expr>,
    pub dependents: Vec<RuleEncoding>,
    /// `new_version = old_version` for every write in the subtree.
    pub frames: Vec<Expr>,
}

impl RuleEncoding {
    pub fn true_branch(&self) -> Expr {
        let mut xs = vec![self.body.clone()];
        xs.extend(self.updates.iter().cloned());
        xs.extend(self.dependents.iter().map(RuleEncoding::formula));
        Expr::And(xs)
    }

    pub fn false_branch(&self) -> Expr {
        let mut xs = vec![Expr::Not(Box::new(self.body.clone()))];
        xs.extend(self.frames.iter().cloned());
        Expr::And(xs)
    }

    /// TrueBranch ⊕ FalseBranch
    pub fn formula(&self) -> Expr {
        Expr::Xor(Box::new(self.true_branch()), Box::new(self.false_branch()))
    }

    /// Pre-order walk.
    pub fn walk(&self, f: &mut dyn FnMut(&RuleEncoding)) {
        f(self);
        for d in &self.dependents {
            d.walk(f);
        }
    }
}

/// Count writes per state variable in the tree rooted at `ri`.
fn subtree_writes(vc: &ValidatedContract, gamma: &StateSpace, ri: usize, counts: &mut BTreeMap<String, usize>) {
    let head = &vc.rules()[ri].head.relation;
    if let Some(l) = gamma.get(head) {
        for sv in l.vars() {
            *counts.entry(sv.name.clone()).or_default() += 1;
        }
    }
    for (dr, _) in vc.dependents(head) {
        subtree_writes(vc, gamma, dr, counts);
    }
}

pub struct TreeEncoder<'a> {
    vc: &'a ValidatedContract,
    gamma: &'a StateSpace,
    env: Option<EnvParams>,
    total: BTreeMap<String, usize>,
    done: BTreeMap<String, usize>,
    /// Intermediate versions introduced so far.
    pub aux: Vec<Var>,
}

impl<'a> TreeEncoder<'a> {
    pub fn new(vc: &'a ValidatedContract, gamma: &'a StateSpace, root: usize, env: Option<EnvParams>) -> Self {
        let mut total = BTreeMap::new();
        subtree_writes(vc, gamma, root, &mut total);
        TreeEncoder {
            vc,
            gamma,
            env,
            total,
            done: BTreeMap::new(),
            aux: Vec::new(),
        }
    }

    /// State variables written somewhere in the tree.
    pub fn written(&self) -> impl Iterator<Item = &str> {
        self.total.keys().map(String::as_str)
    }

    fn version(&self, sv: &StateVar, i: usize) -> Var {
        let n = self.total.get(&sv.name).copied().unwrap_or(0);
        if i == 0 {
            sv.var()
        } else if i == n {
            sv.primed()
        } else {
            Var::new(format!("{}#{i}", sv.name), sv.sort.clone(), VarKind::Aux)
        }
    }

    fn current(&self, sv: &StateVar) -> Expr {
        self.version(sv, self.done.get(&sv.name).copied().unwrap_or(0)).expr()
    }

    /// Advance `sv` by one version; returns (new, previous).
    fn advance(&mut self, sv: &StateVar) -> (Var, Var) {
        let i = self.done.get(&sv.name).copied().unwrap_or(0);
        let prev = self.version(sv, i);
        let next = self.version(sv, i + 1);
        if matches!(next.kind, VarKind::Aux) {
            self.aux.push(next.clone());
        }
        self.done.insert(sv.name.clone(), i + 1);
        (next, prev)
    }

    /// EncodeDeConRule for rule `ri` fired by `trigger` at literal `lit`.
    pub fn encode(&mut self, ri: usize, lit: usize, trigger: &Trigger) -> Result<RuleEncoding, CompileError> {
        let rule = &self.vc.rules()[ri];
        let mut be = BodyEncoder::new(self.vc, self.gamma, ri);
        {
            let snapshot = self.done.clone();
            let this = &*self;
            let read = |sv: &StateVar| {
                let i = snapshot.get(&sv.name).copied().unwrap_or(0);
                this.version(sv, i).expr()
            };
            be.encode(TriggerMode::Literal(lit), Some(trigger), self.env.as_ref(), &read)?;
        }
        let body = Expr::And(be.constraints.clone());
        let head_args = rule
            .head
            .args
            .iter()
            .map(|a| be.term(a))
            .collect::<Result<Vec<_>, _>>()?;

        let layout = self
            .gamma
            .get(&rule.head.relation)
            .ok_or_else(|| CompileError::Internal(format!("no state for head `{}`", rule.head.relation)))?
            .clone();
        let mut updates = Vec::new();
        let mut frames = Vec::new();
        let mut old = BTreeMap::new();
        match &layout {
            Layout::Singleton(vars) => {
                for (col, (sv, arg)) in vars.iter().zip(&head_args).enumerate() {
                    old.insert(col, self.current(sv));
                    let (new, prev) = self.advance(sv);
                    updates.push(Expr::eq(new.expr(), arg.clone())?);
                    frames.push(Expr::eq(new.expr(), prev.expr())?);
                }
            }
            Layout::Keyed { keys, values } => {
                let ks: Vec<Expr> = keys.iter().map(|&k| head_args[k].clone()).collect();
                for (col, sv) in values {
                    old.insert(*col, Expr::select(self.current(sv), ks.clone())?);
                    let (new, prev) = self.advance(sv);
                    let st = Expr::store(prev.expr(), ks.clone(), head_args[*col].clone())?;
                    updates.push(Expr::eq(new.expr(), st)?);
                    frames.push(Expr::eq(new.expr(), prev.expr())?);
                }
            }
            Layout::Membership(sv) => {
                let (new, prev) = self.advance(sv);
                let st = Expr::store(prev.expr(), head_args.clone(), Expr::tt())?;
                updates.push(Expr::eq(new.expr(), st)?);
                frames.push(Expr::eq(new.expr(), prev.expr())?);
            }
        }

        let child_trigger = Trigger {
            relation: rule.head.relation.clone(),
            args: head_args,
            old,
        };
        let mut dependents = Vec::new();
        for (dr, dl) in self.vc.dependents(&rule.head.relation) {
            let enc = self.encode(dr, dl, &child_trigger)?;
            frames.extend(enc.frames.iter().cloned());
            dependents.push(enc);
        }
        Ok(RuleEncoding {
            rule: ri,
            body,
            updates,
            dependents,
            frames,
        })
    }
}
