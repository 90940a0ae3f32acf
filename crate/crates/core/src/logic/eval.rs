//! Concrete evaluation over finite domains.
//!
//! Quantifiers range over the configured finite domain of each sort, so this
//! is exact only for small instances. Used by tests and model checking.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use super::expr::{ArithOp, Cmp, Expr, Var};
use super::sort::Sort;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Bool(bool),
    Int(i64),
    /// Total map: `default` everywhere except `entries`. Normalized so that
    /// no entry equals the default, which makes `==` extensional.
    Map {
        default: Box<Value>,
        entries: BTreeMap<Vec<Value>, Value>,
    },
}

impl Value {
    pub fn constant_map(default: Value) -> Value {
        Value::Map {
            default: Box::new(default),
            entries: BTreeMap::new(),
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(n) => Some(*n),
            _ => None,
        }
    }

    pub fn read(&self, keys: &[Value]) -> Value {
        match self {
            Value::Map { default, entries } => entries.get(keys).cloned().unwrap_or_else(|| (**default).clone()),
            other => other.clone(),
        }
    }

    pub fn write(&self, keys: Vec<Value>, v: Value) -> Value {
        match self {
            Value::Map { default, entries } => {
                let mut entries = entries.clone();
                if v == **default {
                    entries.remove(&keys);
                } else {
                    entries.insert(keys, v);
                }
                Value::Map {
                    default: default.clone(),
                    entries,
                }
            }
            other => other.clone(),
        }
    }

    /// Zero of a sort: false, 0, or the constant map of the value zero.
    pub fn zero(sort: &Sort) -> Value {
        match sort {
            Sort::Bool => Value::Bool(false),
            Sort::Map(_, v) => Value::constant_map(Value::zero(v)),
            _ => Value::Int(0),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(n) => write!(f, "{n}"),
            Value::Map { default, entries } => {
                f.write_str("{")?;
                for (k, v) in entries {
                    let ks: Vec<String> = k.iter().map(|x| x.to_string()).collect();
                    write!(f, "{} ↦ {v}, ", ks.join(","))?;
                }
                write!(f, "_ ↦ {default}}}")
            }
        }
    }
}

/// Finite carrier sets for quantifier evaluation.
#[derive(Debug, Clone)]
pub struct Domains {
    pub ints: Vec<i64>,
    pub uints: Vec<i64>,
    pub addrs: Vec<i64>,
}

impl Domains {
    pub fn small() -> Domains {
        Domains {
            ints: (-2..=2).collect(),
            uints: (0..=3).collect(),
            addrs: (0..=1).collect(),
        }
    }

    pub fn of(&self, sort: &Sort) -> Vec<Value> {
        match sort {
            Sort::Bool => vec![Value::Bool(false), Value::Bool(true)],
            Sort::Int => self.ints.iter().map(|&n| Value::Int(n)).collect(),
            Sort::UInt => self.uints.iter().map(|&n| Value::Int(n)).collect(),
            Sort::Addr => self.addrs.iter().map(|&n| Value::Int(n)).collect(),
            Sort::Map(..) => panic!("no finite domain for map sorts"),
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("unassigned variable `{0}`")]
    Unassigned(String),
    #[error("ill-sorted value in {0}")]
    Sort(String),
}

pub type Env = BTreeMap<Var, Value>;

/// Integer division as in SMT-LIB (`div`), with x / 0 = 0.
pub fn int_div(a: i64, b: i64) -> i64 {
    if b == 0 {
        0
    } else {
        a.div_euclid(b)
    }
}

pub fn eval(e: &Expr, env: &Env, dom: &Domains) -> Result<Value, EvalError> {
    let ev = |x: &Expr| eval(x, env, dom);
    let int = |x: &Expr| -> Result<i64, EvalError> {
        ev(x)?.as_int().ok_or_else(|| EvalError::Sort(x.to_string()))
    };
    let boolean = |x: &Expr| -> Result<bool, EvalError> {
        ev(x)?.as_bool().ok_or_else(|| EvalError::Sort(x.to_string()))
    };
    Ok(match e {
        Expr::Var(v) => env
            .get(v)
            .cloned()
            .ok_or_else(|| EvalError::Unassigned(v.display_name()))?,
        Expr::Bool(b) => Value::Bool(*b),
        Expr::Int(n) => Value::Int(*n),
        Expr::Arith(op, a, b) => {
            let (x, y) = (int(a)?, int(b)?);
            Value::Int(match op {
                ArithOp::Add => x.wrapping_add(y),
                ArithOp::Sub => x.wrapping_sub(y),
                ArithOp::Mul => x.wrapping_mul(y),
                ArithOp::Div => int_div(x, y),
            })
        }
        Expr::Select(m, ks) => {
            let m = ev(m)?;
            let ks = ks.iter().map(ev).collect::<Result<Vec<_>, _>>()?;
            m.read(&ks)
        }
        Expr::Store(m, ks, v) => {
            let m = ev(m)?;
            let ks = ks.iter().map(ev).collect::<Result<Vec<_>, _>>()?;
            m.write(ks, ev(v)?)
        }
        Expr::ConstMap(_, v) => Value::constant_map(ev(v)?),
        Expr::Ite(c, t, x) => {
            if boolean(c)? {
                ev(t)?
            } else {
                ev(x)?
            }
        }
        Expr::Cmp(op, a, b) => {
            let (x, y) = (ev(a)?, ev(b)?);
            Value::Bool(match op {
                Cmp::Eq => x == y,
                Cmp::Ne => x != y,
                _ => {
                    let (x, y) = (
                        x.as_int().ok_or_else(|| EvalError::Sort(a.to_string()))?,
                        y.as_int().ok_or_else(|| EvalError::Sort(b.to_string()))?,
                    );
                    match op {
                        Cmp::Lt => x < y,
                        Cmp::Le => x <= y,
                        Cmp::Gt => x > y,
                        _ => x >= y,
                    }
                }
            })
        }
        Expr::Not(a) => Value::Bool(!boolean(a)?),
        Expr::And(xs) => {
            for x in xs {
                if !boolean(x)? {
                    return Ok(Value::Bool(false));
                }
            }
            Value::Bool(true)
        }
        Expr::Or(xs) => {
            for x in xs {
                if boolean(x)? {
                    return Ok(Value::Bool(true));
                }
            }
            Value::Bool(false)
        }
        Expr::Implies(a, b) => Value::Bool(!boolean(a)? || boolean(b)?),
        Expr::Xor(a, b) => Value::Bool(boolean(a)? != boolean(b)?),
        Expr::Forall(vs, b) | Expr::Exists(vs, b) => {
            let universal = matches!(e, Expr::Forall(..));
            let mut local = env.clone();
            let r = quantify(vs, b, &mut local, dom, universal)?;
            Value::Bool(r)
        }
    })
}

fn quantify(vs: &[Var], body: &Expr, env: &mut Env, dom: &Domains, universal: bool) -> Result<bool, EvalError> {
    let Some((v, rest)) = vs.split_first() else {
        return eval(body, env, dom)?
            .as_bool()
            .ok_or_else(|| EvalError::Sort(body.to_string()));
    };
    for val in dom.of(&v.sort) {
        env.insert(v.clone(), val);
        let r = quantify(rest, body, env, dom, universal)?;
        if r != universal {
            env.remove(v);
            return Ok(r);
        }
    }
    env.remove(v);
    Ok(universal)
}

pub fn holds(e: &Expr, env: &Env, dom: &Domains) -> Result<bool, EvalError> {
    eval(e, env, dom)?
        .as_bool()
        .ok_or_else(|| EvalError::Sort(e.to_string()))
}
