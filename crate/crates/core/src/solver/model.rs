//! Reading `(get-model)` output back into values.
//!
//! Handles the array shapes z3 and cvc5 print: constant arrays, `store`
//! chains, `(_ as-array f)` pointing at an `ite` chain, and `lambda`.
//! Anything else leaves the variable out of the model.

use std::collections::BTreeMap;
use std::fmt;

use crate::logic::eval::{Env, Value};
use crate::logic::{Sort, Var};

use super::emit::SymbolTable;
use super::sexp::{parse_all, Sexp};

/// A (possibly partial) assignment to the declared variables.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Model {
    pub values: BTreeMap<Var, Value>,
}

impl Model {
    pub fn env(&self) -> Env {
        self.values.clone()
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        self.values.iter().find(|(v, _)| v.display_name() == name).map(|(_, x)| x)
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (v, x) in &self.values {
            writeln!(f, "  {} = {x}", v.display_name())?;
        }
        Ok(())
    }
}

struct Defs<'a> {
    funs: BTreeMap<String, (&'a [Sexp], &'a Sexp)>,
}

/// Parse a model response against the table used to emit the query.
pub fn parse_model(text: &str, table: &SymbolTable) -> Result<Model, String> {
    let top = parse_all(text)?;
    // z3 wraps in `(model ...)` in some versions, bare list in others
    let items: Vec<&Sexp> = match top.as_slice() {
        [Sexp::List(xs)] if xs.first().and_then(Sexp::atom) == Some("error") => {
            return Err(format!("solver error instead of a model: {}", top[0]))
        }
        [Sexp::List(xs)] => {
            let xs = if xs.first().and_then(Sexp::atom) == Some("model") { &xs[1..] } else { &xs[..] };
            xs.iter().collect()
        }
        _ => return Err("expected a single model list".into()),
    };
    let mut defs = Defs { funs: BTreeMap::new() };
    for it in &items {
        let Some(xs) = it.list() else { continue };
        if it.head() != Some("define-fun") || xs.len() != 5 {
            continue;
        }
        let (Some(name), Some(params)) = (xs[1].atom(), xs[2].list()) else { continue };
        defs.funs.insert(name.to_string(), (params, &xs[4]));
    }
    let inverse = table.inverse();
    let mut model = Model::default();
    for (sym, (params, body)) in &defs.funs {
        if !params.is_empty() {
            continue;
        }
        let Some(var) = inverse.get(sym) else { continue };
        if let Some(v) = value(body, &var.sort, &defs, &BTreeMap::new()) {
            model.values.insert(var.clone(), v);
        }
    }
    Ok(model)
}

fn int(s: &Sexp) -> Option<i64> {
    match s {
        Sexp::Atom(a) => a.parse().ok(),
        Sexp::List(xs) if xs.len() == 2 && xs[0].atom() == Some("-") => int(&xs[1]).map(|n| -n),
        _ => None,
    }
}

/// Scalar value, looking through bound parameters.
fn scalar(s: &Sexp, sort: &Sort, bound: &BTreeMap<String, Value>) -> Option<Value> {
    if let Some(a) = s.atom() {
        if let Some(v) = bound.get(a) {
            return Some(v.clone());
        }
    }
    match sort {
        Sort::Bool => match s.atom()? {
            "true" => Some(Value::Bool(true)),
            "false" => Some(Value::Bool(false)),
            _ => None,
        },
        _ => int(s).map(Value::Int),
    }
}

fn value(s: &Sexp, sort: &Sort, defs: &Defs, bound: &BTreeMap<String, Value>) -> Option<Value> {
    match sort {
        Sort::Map(keys, v) => {
            // nested arrays: read the first key level, recurse for the rest
            let inner = if keys.len() == 1 {
                (**v).clone()
            } else {
                Sort::Map(keys[1..].to_vec(), v.clone())
            };
            let level = array(s, &keys[0], &inner, defs)?;
            flatten(level)
        }
        _ => scalar(s, sort, bound),
    }
}

/// One array level: default plus explicit entries.
fn array(s: &Sexp, key: &Sort, elem: &Sort, defs: &Defs) -> Option<(Value, Vec<(Value, Value)>)> {
    let xs = s.list()?;
    // ((as const (Array ..)) d)
    if xs.len() == 2 && xs[0].head() == Some("as") && xs[0].list()?.get(1)?.atom() == Some("const") {
        return Some((value(&xs[1], elem, defs, &BTreeMap::new())?, vec![]));
    }
    match s.head()? {
        "store" if xs.len() == 4 => {
            let (d, mut es) = array(&xs[1], key, elem, defs)?;
            let k = scalar(&xs[2], key, &BTreeMap::new())?;
            let v = value(&xs[3], elem, defs, &BTreeMap::new())?;
            es.retain(|(k2, _)| *k2 != k);
            es.push((k, v));
            Some((d, es))
        }
        "_" if xs.len() == 3 && xs[1].atom() == Some("as-array") => {
            let (params, body) = defs.funs.get(xs[2].atom()?)?;
            let p = params.first()?.list()?.first()?.atom()?;
            ite_chain(p, body, key, elem, defs)
        }
        "lambda" if xs.len() == 3 => {
            let p = xs[1].list()?.first()?.list()?.first()?.atom()?;
            ite_chain(p, &xs[2], key, elem, defs)
        }
        _ => None,
    }
}

/// `(ite (= p k1) v1 (ite (= p k2) v2 d))` as entries and default.
fn ite_chain(p: &str, body: &Sexp, key: &Sort, elem: &Sort, defs: &Defs) -> Option<(Value, Vec<(Value, Value)>)> {
    let mut entries = Vec::new();
    let mut cur = body;
    loop {
        match cur.list() {
            Some(xs) if cur.head() == Some("ite") && xs.len() == 4 => {
                let c = xs[1].list()?;
                if c.len() != 3 || c[0].atom() != Some("=") {
                    return None;
                }
                let k = if c[1].atom() == Some(p) {
                    &c[2]
                } else if c[2].atom() == Some(p) {
                    &c[1]
                } else {
                    return None;
                };
                let k = scalar(k, key, &BTreeMap::new())?;
                let v = value(&xs[2], elem, defs, &BTreeMap::new())?;
                if !entries.iter().any(|(k2, _): &(Value, Value)| *k2 == k) {
                    entries.push((k, v));
                }
                cur = &xs[3];
            }
            _ => break,
        }
    }
    let d = value(cur, elem, defs, &BTreeMap::new())?;
    Some((d, entries))
}

/// Turn one level (whose elements may themselves be maps) into a flat
/// multi-key map. Fails when inner defaults differ, which a single default
/// cannot express.
fn flatten((default, entries): (Value, Vec<(Value, Value)>)) -> Option<Value> {
    match &default {
        Value::Map {
            default: dd,
            entries: de,
        } => {
            let mut out = Value::constant_map((**dd).clone());
            let mut fill = |prefix: Vec<Value>, m: &Value| -> Option<()> {
                let Value::Map { default: d2, entries: e2 } = m else { return None };
                if d2 != dd {
                    return None;
                }
                for (k, v) in e2 {
                    let mut key = prefix.clone();
                    key.extend(k.iter().cloned());
                    out = out.write(key, v.clone());
                }
                Some(())
            };
            if !de.is_empty() {
                return None;
            }
            for (k, m) in &entries {
                fill(vec![k.clone()], m)?;
            }
            Some(out)
        }
        _ => {
            let mut out = Value::constant_map(default);
            for (k, v) in entries {
                out = out.write(vec![k], v);
            }
            Some(out)
        }
    }
}
