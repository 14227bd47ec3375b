//! Windowed generation-closure checks: the index-0 part plus the four index
//! carriers span everything the window can see.

mod common;

use common::{rational_def, z4_def};
use std::collections::BTreeSet;
use xulie::{generation_closure, AlgebraDef, Element, Monomial, MonomialWindow};

fn assert_full_coverage(def: &AlgebraDef, window: &MonomialWindow) {
    let reached = generation_closure(def, window).unwrap();
    let all: BTreeSet<Monomial> = window.monomials(def).into_iter().collect();
    let missing: Vec<_> = all.difference(&reached).take(5).collect();
    assert!(
        missing.is_empty(),
        "{} of {} window monomials unreached, e.g. {:?}",
        all.len() - reached.len(),
        all.len(),
        missing
    );
    assert_eq!(reached.len(), all.len());
}

#[test]
fn trivial_shape_closure_is_the_window() {
    let def = z4_def([false; 4]);
    assert_full_coverage(&def, &MonomialWindow::new(2, 0));
}

#[test]
fn full_shape_window_is_generated() {
    let def = z4_def([true; 4]);
    assert_full_coverage(&def, &MonomialWindow::new(2, 1));
}

#[test]
fn mixed_shape_window_is_generated() {
    let def = z4_def([true, false, true, false]);
    assert_full_coverage(&def, &MonomialWindow::new(2, 1));
}

#[test]
fn rational_lattice_window_is_generated() {
    let def = rational_def();
    assert_full_coverage(&def, &MonomialWindow::new(1, 1));
}

#[test]
fn partial_generators_reach_only_their_span() {
    // A single index-0 generator brackets into a proper subspace.
    let def = z4_def([false; 4]);
    let window = MonomialWindow::new(1, 0);
    let g = Element::monomial(Monomial::of_vec(xulie::Vec4::from_ints([1, 0, 0, 0])));
    let reached = xulie::span_closure(&def, &[g], &window).unwrap();
    let total = window.monomials(&def).len();
    assert!(reached.len() < total);
    assert!(reached.contains(&Monomial::of_vec(xulie::Vec4::from_ints([1, 0, 0, 0]))));
}
