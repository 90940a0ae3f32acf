//! Rule-body encoding under a trigger.
//!
//! Variables are eliminated as they are bound: a trigger literal binds its
//! variables to the trigger's terms, a state read binds value variables to
//! map reads, and functions bind their outputs. What remains are
//! constraints, so the encoded body has no free rule variables except the
//! locals introduced in check mode.

use std::collections::BTreeMap;

use crate::frontend::ast::{AggKind, Arg, CmpOp, Const, FnOp, Literal};
use crate::frontend::validate::{MSG_SENDER, MSG_VALUE};
use crate::frontend::{TriggerMode, ValidatedContract};
use crate::logic::{ArithOp, Cmp, Expr, Layout, Sort, StateSpace, StateVar, Var};

use super::CompileError;

/// The freshly inserted tuple that fires a rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trigger {
    pub relation: String,
    pub args: Vec<Expr>,
    /// Value a replaced row held, per column, for keyed relations.
    pub old: BTreeMap<usize, Expr>,
}

/// Transaction-environment parameters.
#[derive(Debug, Clone)]
pub struct EnvParams {
    pub sender: Var,
    pub value: Var,
}

pub fn cmp_op(op: CmpOp) -> Cmp {
    match op {
        CmpOp::Gt => Cmp::Gt,
        CmpOp::Lt => Cmp::Lt,
        CmpOp::Ge => Cmp::Ge,
        CmpOp::Le => Cmp::Le,
        CmpOp::Ne => Cmp::Ne,
        CmpOp::Eq => Cmp::Eq,
    }
}

pub fn arith_op(op: FnOp) -> ArithOp {
    match op {
        FnOp::Add => ArithOp::Add,
        FnOp::Sub => ArithOp::Sub,
        FnOp::Mul => ArithOp::Mul,
        FnOp::Div => ArithOp::Div,
    }
}

pub fn const_expr(c: &Const) -> Expr {
    match c {
        Const::Bool(b) => Expr::Bool(*b),
        Const::Int(n) => Expr::Int(*n),
    }
}

pub struct BodyEncoder<'a> {
    pub vc: &'a ValidatedContract,
    pub gamma: &'a StateSpace,
    pub rule: usize,
    pub bindings: BTreeMap<String, Expr>,
    pub constraints: Vec<Expr>,
    pub locals: Vec<Var>,
}

impl<'a> BodyEncoder<'a> {
    pub fn new(vc: &'a ValidatedContract, gamma: &'a StateSpace, rule: usize) -> Self {
        BodyEncoder {
            vc,
            gamma,
            rule,
            bindings: BTreeMap::new(),
            constraints: Vec::new(),
            locals: Vec::new(),
        }
    }

    fn sort_of(&self, var: &str) -> Sort {
        Sort::from_column(self.vc.var_type(self.rule, var))
    }

    pub fn term(&self, a: &Arg) -> Result<Expr, CompileError> {
        match a {
            Arg::Const(c) => Ok(const_expr(c)),
            Arg::Var(v) => self
                .bindings
                .get(v)
                .cloned()
                .ok_or_else(|| CompileError::Internal(format!("variable `{v}` used before it is bound"))),
        }
    }

    /// Bind an unbound variable to `t`, otherwise constrain it to equal `t`.
    fn unify(&mut self, a: &Arg, t: Expr) -> Result<(), CompileError> {
        if let Arg::Var(v) = a {
            if !self.bindings.contains_key(v) {
                self.bindings.insert(v.clone(), t);
                return Ok(());
            }
        }
        let lhs = self.term(a)?;
        self.constraints.push(Expr::eq(lhs, t)?);
        Ok(())
    }

    fn bind_local(&mut self, a: &Arg) {
        if let Arg::Var(v) = a {
            if !self.bindings.contains_key(v) {
                let var = Var::local(v.clone(), self.sort_of(v));
                self.bindings.insert(v.clone(), var.expr());
                self.locals.push(var);
            }
        }
    }

    /// Encode the whole body. `read` yields the current version of a state
    /// variable.
    pub fn encode(
        &mut self,
        mode: TriggerMode,
        trigger: Option<&Trigger>,
        env: Option<&EnvParams>,
        read: &dyn Fn(&StateVar) -> Expr,
    ) -> Result<(), CompileError> {
        let plan = self.vc.plan(self.rule, mode).map_err(|d| CompileError::Internal(d.message))?;
        let rule = &self.vc.rules()[self.rule];
        for &li in &plan.order {
            let lit = &rule.body[li];
            match (lit, mode) {
                (Literal::Atom(a), TriggerMode::Literal(t)) if t == li => {
                    let trig = trigger.ok_or_else(|| CompileError::Internal("missing trigger".into()))?;
                    for (arg, term) in a.args.iter().zip(&trig.args) {
                        self.unify(arg, term.clone())?;
                    }
                }
                (Literal::Atom(a), _) if a.relation == MSG_SENDER || a.relation == MSG_VALUE => {
                    let env = env.ok_or_else(|| CompileError::Internal("environment literal outside a transaction".into()))?;
                    let p = if a.relation == MSG_SENDER { &env.sender } else { &env.value };
                    self.unify(&a.args[0], p.expr())?;
                }
                (Literal::Atom(a), _) => {
                    let layout = self
                        .gamma
                        .get(&a.relation)
                        .ok_or_else(|| CompileError::Internal(format!("no state for `{}`", a.relation)))?
                        .clone();
                    let decl = self.vc.decl(&a.relation).unwrap();
                    if mode == TriggerMode::Check {
                        for &k in &decl.key_columns() {
                            self.bind_local(&a.args[k]);
                        }
                    }
                    match layout {
                        Layout::Singleton(vars) => {
                            for (arg, sv) in a.args.iter().zip(&vars) {
                                self.unify(arg, read(sv))?;
                            }
                        }
                        Layout::Keyed { keys, values } => {
                            let ks = keys.iter().map(|&k| self.term(&a.args[k])).collect::<Result<Vec<_>, _>>()?;
                            for (col, sv) in &values {
                                let sel = Expr::select(read(sv), ks.clone())?;
                                self.unify(&a.args[*col], sel)?;
                            }
                        }
                        Layout::Membership(sv) => {
                            let ks = a.args.iter().map(|x| self.term(x)).collect::<Result<Vec<_>, _>>()?;
                            self.constraints.push(Expr::select(read(&sv), ks)?);
                        }
                    }
                }
                (Literal::Condition { lhs, op, rhs, .. }, _) => {
                    let c = Expr::cmp(cmp_op(*op), self.term(lhs)?, self.term(rhs)?)?;
                    self.constraints.push(c);
                }
                (Literal::Function { out, op, lhs, rhs, .. }, _) => {
                    let t = Expr::arith(arith_op(*op), self.term(lhs)?, self.term(rhs)?)?;
                    self.unify(&Arg::Var(out.clone()), t)?;
                }
                (Literal::Aggregate { out, kind, var, atom, .. }, _) => {
                    let head = &rule.head;
                    let hdecl = self.vc.decl(&head.relation).unwrap();
                    let keys = hdecl.key_columns();
                    let ks = keys.iter().map(|&k| self.term(&head.args[k])).collect::<Result<Vec<_>, _>>()?;
                    let cur = {
                        let layout = self.gamma.get(&head.relation).unwrap();
                        let sv = match layout {
                            Layout::Singleton(vs) => vs[0].clone(),
                            Layout::Keyed { values, .. } => values[0].1.clone(),
                            Layout::Membership(_) => {
                                return Err(CompileError::Internal("aggregate into a membership relation".into()))
                            }
                        };
                        if ks.is_empty() {
                            read(&sv)
                        } else {
                            Expr::select(read(&sv), ks)?
                        }
                    };
                    let value = match mode {
                        TriggerMode::Check => cur,
                        TriggerMode::Literal(_) => {
                            let trig = trigger.ok_or_else(|| CompileError::Internal("missing trigger".into()))?;
                            let n = || -> Result<(usize, Expr), CompileError> {
                                let v = var.as_ref().unwrap();
                                let col = atom.args.iter().position(|x| x.var() == Some(v.as_str())).unwrap();
                                Ok((col, trig.args[col].clone()))
                            };
                            match kind {
                                AggKind::Count => Expr::add(cur, Expr::Int(1))?,
                                AggKind::Sum => {
                                    let (col, n) = n()?;
                                    let plus = Expr::add(cur, n)?;
                                    match trig.old.get(&col) {
                                        Some(old) => Expr::sub(plus, old.clone())?,
                                        None => plus,
                                    }
                                }
                                AggKind::Max | AggKind::Min => {
                                    let (_, n) = n()?;
                                    let op = if *kind == AggKind::Max { Cmp::Gt } else { Cmp::Lt };
                                    Expr::ite(Expr::cmp(op, n.clone(), cur.clone())?, n, cur)?
                                }
                            }
                        }
                    };
                    self.unify(&Arg::Var(out.clone()), value)?;
                }
            }
        }
        Ok(())
    }

    pub fn body(&self) -> Expr {
        Expr::And(self.constraints.clone())
    }
}
