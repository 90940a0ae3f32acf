//! Finite instances: every table over given column domains, the map from
//! tables to state-variable values, and exhaustive search for the
//! successors a transition formula admits.

use std::collections::{BTreeMap, BTreeSet};

use dcv::frontend::ast::{ColumnType, RelationDecl};
use dcv::logic::eval::{eval, Domains, Env, EvalError, Value};
use dcv::logic::{Expr, Sort, StateVar, Var};

use super::interp::{Interp, State, Table};

/// Cartesian product of `sets`.
pub fn product(sets: &[Vec<i64>]) -> Vec<Vec<i64>> {
    sets.iter().fold(vec![vec![]], |acc, s| {
        acc.iter()
            .flat_map(|p| {
                s.iter().map(move |&x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect()
    })
}

/// Every table of `d` whose columns take values in `dom(column)`.
pub fn tables(d: &RelationDecl, dom: &dyn Fn(usize) -> Vec<i64>) -> Vec<Table> {
    if d.is_membership() {
        let tuples = product(&(0..d.arity()).map(dom).collect::<Vec<_>>());
        assert!(tuples.len() <= 16, "too many tuples for {}", d.name);
        (0..1u32 << tuples.len())
            .map(|mask| {
                Table::Set(
                    tuples
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| mask >> i & 1 == 1)
                        .map(|(_, t)| t.clone())
                        .collect(),
                )
            })
            .collect()
    } else {
        let keys = product(&d.key_columns().into_iter().map(dom).collect::<Vec<_>>());
        let rows = product(&d.value_columns().into_iter().map(dom).collect::<Vec<_>>());
        product(&vec![(0..rows.len() as i64).collect(); keys.len()])
            .into_iter()
            .map(|choice| {
                Table::Keyed(
                    keys.iter()
                        .zip(choice)
                        .map(|(k, c)| (k.clone(), rows[c as usize].clone()))
                        .filter(|(_, r)| r.iter().any(|&v| v != 0))
                        .collect(),
                )
            })
            .collect()
    }
}

/// Every state of the instance, relation by relation.
pub fn states(it: &Interp, dom: &dyn Fn(&str, usize) -> Vec<i64>) -> Vec<State> {
    let mut out = vec![State::new()];
    for d in it.state_relations() {
        let ts = tables(d, &|c| dom(&d.name, c));
        out = out
            .iter()
            .flat_map(|s| {
                ts.iter().map(move |t| {
                    let mut s = s.clone();
                    s.insert(d.name.clone(), t.clone());
                    s
                })
            })
            .collect();
    }
    out
}

fn scalar(n: i64, sort: &Sort) -> Value {
    match sort {
        Sort::Bool => Value::Bool(n != 0),
        _ => Value::Int(n),
    }
}

fn column_sort(ty: ColumnType) -> Sort {
    match ty {
        ColumnType::Bool => Sort::Bool,
        ColumnType::Int => Sort::Int,
        ColumnType::Uint => Sort::UInt,
        ColumnType::Address => Sort::Addr,
    }
}

/// Value of state variable `sv` in `st`.
pub fn value(it: &Interp, st: &State, sv: &StateVar) -> Value {
    let d = it.contract.decl(&sv.relation).unwrap();
    let key_sorts: Vec<Sort> = d.key_columns().iter().map(|&k| column_sort(d.columns[k].ty)).collect();
    let keyv = |k: &[i64]| k.iter().zip(&key_sorts).map(|(&x, s)| scalar(x, s)).collect::<Vec<_>>();
    match &st[&sv.relation] {
        Table::Set(rows) => rows.iter().fold(Value::constant_map(Value::Bool(false)), |m, r| {
            m.write(keyv(r), Value::Bool(true))
        }),
        Table::Keyed(rows) => {
            let col = d.columns.iter().position(|c| c.name == sv.column).unwrap();
            let vi = d.value_columns().iter().position(|&c| c == col).unwrap();
            let vs = column_sort(d.columns[col].ty);
            if d.key_columns().is_empty() {
                let row = it.row(st, &sv.relation, &[]);
                scalar(row[vi], &vs)
            } else {
                rows.iter().fold(Value::zero(&sv.sort), |m, (k, r)| m.write(keyv(k), scalar(r[vi], &vs)))
            }
        }
    }
}

/// Environment assigning `st` to the state variables, primed or not.
pub fn env_of(it: &Interp, svs: &[StateVar], st: &State, primed: bool) -> Env {
    svs.iter()
        .map(|sv| {
            let v = if primed { sv.primed() } else { sv.var() };
            (v, value(it, st, sv))
        })
        .collect()
}

/// Three-valued truth of `e` under a partial environment.
pub fn kleene(e: &Expr, env: &Env, dom: &Domains) -> Option<bool> {
    match e {
        Expr::Not(a) => kleene(a, env, dom).map(|x| !x),
        Expr::And(xs) => {
            let mut open = false;
            for x in xs {
                match kleene(x, env, dom) {
                    Some(false) => return Some(false),
                    None => open = true,
                    Some(true) => {}
                }
            }
            (!open).then_some(true)
        }
        Expr::Or(xs) => {
            let mut open = false;
            for x in xs {
                match kleene(x, env, dom) {
                    Some(true) => return Some(true),
                    None => open = true,
                    Some(false) => {}
                }
            }
            (!open).then_some(false)
        }
        Expr::Implies(a, b) => match (kleene(a, env, dom), kleene(b, env, dom)) {
            (Some(false), _) | (_, Some(true)) => Some(true),
            (Some(true), Some(false)) => Some(false),
            _ => None,
        },
        Expr::Xor(a, b) => Some(kleene(a, env, dom)? != kleene(b, env, dom)?),
        _ => match eval(e, env, dom) {
            Ok(v) => Some(v.as_bool().expect("boolean formula")),
            Err(EvalError::Unassigned(_)) => None,
            Err(err) => panic!("{err}"),
        },
    }
}

/// Every assignment to `slots` (each a list of alternative partial
/// environments) that, added to `base`, satisfies `f`.
pub fn solutions(f: &Expr, base: &Env, slots: &[Vec<Env>], dom: &Domains) -> Vec<Env> {
    fn go(f: &Expr, env: &mut Env, slots: &[Vec<Env>], dom: &Domains, out: &mut Vec<Env>) {
        if kleene(f, env, dom) == Some(false) {
            return;
        }
        let Some((first, rest)) = slots.split_first() else {
            assert_eq!(kleene(f, env, dom), Some(true), "formula undecided under a full assignment");
            out.push(env.clone());
            return;
        };
        for choice in first {
            let saved: Vec<(Var, Option<Value>)> =
                choice.iter().map(|(v, x)| (v.clone(), env.insert(v.clone(), x.clone()))).collect();
            go(f, env, rest, dom, out);
            for (v, prev) in saved {
                match prev {
                    Some(x) => env.insert(v, x),
                    None => env.remove(&v),
                };
            }
        }
    }
    let mut out = Vec::new();
    go(f, &mut base.clone(), slots, dom, &mut out);
    out
}

/// Per relation, the primed environments of every table in the instance.
pub fn primed_slots(it: &Interp, svs: &[StateVar], dom: &dyn Fn(&str, usize) -> Vec<i64>) -> Vec<Vec<Env>> {
    it.state_relations()
        .into_iter()
        .map(|d| {
            let mine: Vec<StateVar> = svs.iter().filter(|sv| sv.relation == d.name).cloned().collect();
            let mut seen = BTreeSet::new();
            tables(d, &|c| dom(&d.name, c))
                .into_iter()
                .map(|t| {
                    let st: State = BTreeMap::from([(d.name.clone(), t)]);
                    env_of(it, &mine, &st, true)
                })
                .filter(|e| seen.insert(e.clone()))
                .collect()
        })
        .collect()
}
