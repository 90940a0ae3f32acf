//! Free variables, capture-avoiding substitution and priming.

use std::collections::{BTreeMap, BTreeSet};

use super::expr::{Expr, LogicError, Var};

pub type Subst = BTreeMap<Var, Expr>;

pub fn free_vars(e: &Expr) -> BTreeSet<Var> {
    let mut out = BTreeSet::new();
    collect(e, &mut Vec::new(), &mut out);
    out
}

fn collect<'a>(e: &'a Expr, bound: &mut Vec<&'a Var>, out: &mut BTreeSet<Var>) {
    match e {
        Expr::Var(v) => {
            if !bound.contains(&v) {
                out.insert(v.clone());
            }
        }
        Expr::Forall(vs, b) | Expr::Exists(vs, b) => {
            let n = bound.len();
            bound.extend(vs.iter());
            collect(b, bound, out);
            bound.truncate(n);
        }
        _ => {
            for c in e.children() {
                collect(c, bound, out);
            }
        }
    }
}

/// Replace free occurrences of the mapped variables.
pub fn substitute(e: &Expr, sigma: &Subst) -> Result<Expr, LogicError> {
    for (v, t) in sigma {
        if !v.sort.unifies(&t.sort()) {
            return Err(LogicError::Sort(format!(
                "cannot substitute {} term for `{}` of sort {}",
                t.sort(),
                v.name,
                v.sort
            )));
        }
    }
    let range_vars: BTreeSet<Var> = sigma.values().flat_map(free_vars).collect();
    Ok(subst_rec(e, sigma, &range_vars))
}

fn subst_rec(e: &Expr, sigma: &Subst, range_vars: &BTreeSet<Var>) -> Expr {
    if sigma.is_empty() {
        return e.clone();
    }
    match e {
        Expr::Var(v) => sigma.get(v).cloned().unwrap_or_else(|| e.clone()),
        Expr::Forall(vs, b) | Expr::Exists(vs, b) => {
            let mut inner = sigma.clone();
            for v in vs {
                inner.remove(v);
            }
            // rename binders that would capture a variable of the range
            let mut new_vs = Vec::with_capacity(vs.len());
            let taken: BTreeSet<String> = range_vars
                .iter()
                .chain(free_vars(b).iter())
                .map(|v| v.name.clone())
                .collect();
            for v in vs {
                if range_vars.contains(v) {
                    let mut i = 1;
                    let fresh = loop {
                        let cand = format!("{}~{i}", v.name);
                        if !taken.contains(&cand) && !vs.iter().any(|w| w.name == cand) {
                            break cand;
                        }
                        i += 1;
                    };
                    let nv = Var { name: fresh, ..v.clone() };
                    inner.insert(v.clone(), nv.expr());
                    new_vs.push(nv);
                } else {
                    new_vs.push(v.clone());
                }
            }
            let body = subst_rec(b, &inner, range_vars);
            match e {
                Expr::Forall(..) => Expr::Forall(new_vs, Box::new(body)),
                _ => Expr::Exists(new_vs, Box::new(body)),
            }
        }
        _ => map_children(e, |c| subst_rec(c, sigma, range_vars)),
    }
}

/// Rebuild `e` with each direct child transformed.
pub fn map_children(e: &Expr, mut f: impl FnMut(&Expr) -> Expr) -> Expr {
    let b = |x: &Expr, f: &mut dyn FnMut(&Expr) -> Expr| Box::new(f(x));
    match e {
        Expr::Var(_) | Expr::Bool(_) | Expr::Int(_) => e.clone(),
        Expr::Arith(op, x, y) => Expr::Arith(*op, b(x, &mut f), b(y, &mut f)),
        Expr::Cmp(op, x, y) => Expr::Cmp(*op, b(x, &mut f), b(y, &mut f)),
        Expr::Implies(x, y) => Expr::Implies(b(x, &mut f), b(y, &mut f)),
        Expr::Xor(x, y) => Expr::Xor(b(x, &mut f), b(y, &mut f)),
        Expr::Select(m, ks) => Expr::Select(b(m, &mut f), ks.iter().map(&mut f).collect()),
        Expr::Store(m, ks, v) => {
            let m2 = b(m, &mut f);
            let ks2 = ks.iter().map(&mut f).collect();
            Expr::Store(m2, ks2, b(v, &mut f))
        }
        Expr::Ite(c, t, x) => Expr::Ite(b(c, &mut f), b(t, &mut f), b(x, &mut f)),
        Expr::ConstMap(s, v) => Expr::ConstMap(s.clone(), b(v, &mut f)),
        Expr::Not(x) => Expr::Not(b(x, &mut f)),
        Expr::And(xs) => Expr::And(xs.iter().map(&mut f).collect()),
        Expr::Or(xs) => Expr::Or(xs.iter().map(&mut f).collect()),
        Expr::Forall(vs, x) => Expr::Forall(vs.clone(), b(x, &mut f)),
        Expr::Exists(vs, x) => Expr::Exists(vs.clone(), b(x, &mut f)),
    }
}

/// Replace every free unprimed state variable by its primed twin.
pub fn prime(e: &Expr) -> Result<Expr, LogicError> {
    let mut sigma = Subst::new();
    for v in free_vars(e) {
        if v.is_primed() {
            return Err(LogicError::DoublePrime(v.name));
        }
        if v.is_state() {
            sigma.insert(v.clone(), v.primed()?.expr());
        }
    }
    substitute(e, &sigma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::sort::Sort;

    fn wins() -> Var {
        Var::state("wins", Sort::map(vec![Sort::UInt], Sort::Bool))
    }

    fn has_winner() -> Var {
        Var::state("hasWinner", Sort::Bool)
    }

    fn lemma() -> Expr {
        let u = Var::local("u", Sort::UInt);
        let body = Expr::implies(
            Expr::select(wins().expr(), vec![u.expr()]).unwrap(),
            has_winner().expr(),
        )
        .unwrap();
        Expr::forall(vec![u], body).unwrap()
    }

    #[test]
    fn free_vars_skip_bound() {
        let fv = free_vars(&lemma());
        let names: Vec<_> = fv.iter().map(|v| v.name.as_str()).collect();
        assert_eq!(names, vec!["hasWinner", "wins"]);
    }

    #[test]
    fn prime_twice_is_rejected() {
        let p = prime(&lemma()).unwrap();
        assert!(free_vars(&p).iter().all(|v| v.is_primed()));
        assert_eq!(prime(&p), Err(LogicError::DoublePrime("hasWinner".into())));
    }

    #[test]
    fn substitution_avoids_capture() {
        let u = Var::local("u", Sort::UInt);
        let x = Var::local("x", Sort::UInt);
        // ∀u. wins[x] with x := u must not capture
        let f = Expr::forall(
            vec![u.clone()],
            Expr::select(wins().expr(), vec![x.expr()]).unwrap(),
        )
        .unwrap();
        let g = substitute(&f, &Subst::from([(x, u.expr())])).unwrap();
        assert!(free_vars(&g).contains(&u));
    }

    #[test]
    fn substitution_checks_sorts() {
        let x = Var::local("x", Sort::UInt);
        assert!(substitute(&x.expr(), &Subst::from([(x.clone(), Expr::tt())])).is_err());
    }
}
