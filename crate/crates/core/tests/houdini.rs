//! Houdini against brute force on toy systems: the survivors must be the
//! largest candidate subset whose conjunction is inductive.

mod common;

use std::collections::BTreeSet;

use common::toys;

fn optimal(t: toys::Toy) -> BTreeSet<usize> {
    let (got, want) = toys::check_optimal(&t);
    assert_eq!(got, want, "{}: houdini survivors differ from brute force", t.name);
    got
}

#[test]
fn shift_register() {
    assert_eq!(optimal(toys::shift_register()), BTreeSet::from([0, 1, 2]));
}

#[test]
fn cascade_to_empty() {
    assert!(optimal(toys::cascade()).is_empty());
}

#[test]
fn counters() {
    assert_eq!(optimal(toys::counters()), BTreeSet::from([0, 1, 2]));
}

#[test]
fn lock_with_property_in_premise() {
    assert_eq!(optimal(toys::lock()), BTreeSet::from([0, 1]));
}

#[test]
fn no_candidates() {
    assert!(toys::houdini(&toys::empty(), &[]).is_empty());
}
