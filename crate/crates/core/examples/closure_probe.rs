use std::collections::BTreeSet;
use xulie::{generation_closure, AlgebraDef, Monomial, MonomialWindow, ShapeVector};

fn main() {
    let def = AlgebraDef::new(xulie::z4(), ShapeVector::new([true; 4]), 16).unwrap();
    for (cb, lb) in [(1i64, 1u32), (2, 1)] {
        let window = MonomialWindow::new(cb, lb);
        let t = std::time::Instant::now();
        let reached = generation_closure(&def, &window).unwrap();
        let all: BTreeSet<Monomial> = window.monomials(&def).into_iter().collect();
        let missing: Vec<_> = all.difference(&reached).take(8).collect();
        println!(
            "window ({cb},{lb}): reached {}/{} in {:?}; missing sample: {:?}",
            reached.len(),
            all.len(),
            t.elapsed(),
            missing
        );
    }
}
