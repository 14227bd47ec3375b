//! Shared fixtures for the integration suites.

use xulie::{AlgebraDef, Element, Lattice, Scalar, ShapeVector, SplitMix64, Vec4};

pub fn z4_def(flags: [bool; 4]) -> AlgebraDef {
    AlgebraDef::new(xulie::z4(), ShapeVector::new(flags), 16).unwrap()
}

/// The four standard configurations the acceptance criteria cycle through.
pub fn standard_configs() -> Vec<AlgebraDef> {
    vec![
        z4_def([false; 4]),
        z4_def([true; 4]),
        z4_def([true, false, true, false]),
        rational_def(),
    ]
}

/// A valid subgroup with non-integer basis entries: span{(1/2)e₁, e₂, (1/3)e₃, e₄}.
pub fn rational_lattice() -> Lattice {
    Lattice::canonical_basis(vec![
        Vec4::new([
            Scalar::new(1, 2),
            Scalar::zero(),
            Scalar::zero(),
            Scalar::zero(),
        ]),
        Vec4::from_ints([0, 1, 0, 0]),
        Vec4::new([
            Scalar::zero(),
            Scalar::zero(),
            Scalar::new(1, 3),
            Scalar::zero(),
        ]),
        Vec4::from_ints([0, 0, 0, 1]),
    ])
    .unwrap()
}

pub fn rational_def() -> AlgebraDef {
    AlgebraDef::new(
        rational_lattice(),
        ShapeVector::new([false, true, false, true]),
        16,
    )
    .unwrap()
}

/// One random monomial as a singleton element.
pub fn rand_mono(def: &AlgebraDef, rng: &mut SplitMix64) -> Element {
    Element::monomial(xulie::algebra::draw_monomial(def, 3, 2, rng).unwrap())
}

/// A short random combination (one or two terms, rational coefficients).
pub fn rand_elem(def: &AlgebraDef, rng: &mut SplitMix64) -> Element {
    let mut e = rand_mono(def, rng).scale(&rand_scalar(rng));
    if rng.bool() {
        e.add_scaled(&rand_mono(def, rng), &rand_scalar(rng));
    }
    e
}

pub fn rand_scalar(rng: &mut SplitMix64) -> Scalar {
    let mut n = rng.int_in(-6, 6);
    if n == 0 {
        n = 1;
    }
    let d = rng.int_in(1, 4);
    Scalar::new(n, d)
}
