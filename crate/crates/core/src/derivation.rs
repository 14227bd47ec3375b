//! The derivation family of ℬ(Γ, J).
//!
//! Operators: inner ad_g, the diagonal d_μ for additive μ with μ(σ) = 0,
//! the index-lowering ∂_{t_p}, the outer d_p (available when σ₁ ∈ Γ and the
//! slot p is pinned), the outer d̄₂ (available on the derived quotient), and
//! linear combinations. Unavailable operators are construction errors, not
//! silent zeros: a zero would hide a misconfigured algebra. Classification
//! into locally nilpotent / semisimple / locally finite happens on a
//! canonical form in which ad_1 and ad_{x^{−σ}} are folded into their
//! diagonal-plus-lowering coordinates.

use crate::algebra::{AlgebraDef, AlgebraError};
use crate::element::{Element, Monomial};
use crate::lattice::{sigma, Lattice};
use crate::scalar::Scalar;
use crate::vec4::{Axis, Vec4};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DerivationError {
    #[error("operator unavailable in this algebra: {reason}")]
    Unavailable { reason: String },
    #[error("additive function must vanish on sigma, got {value}")]
    MuSigmaNonzero { value: Scalar },
    #[error("additive function needs {expected} basis values, got {got}")]
    MuArity { expected: usize, got: usize },
    #[error("exponent {alpha} is outside the subgroup")]
    NotInLattice { alpha: Vec4 },
    #[error("canonical inner part must not contain 1 or x^(-sigma)")]
    MalformedCanonical,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// An additive function μ: Γ → ℚ given by its values on the canonical basis
/// rows, constrained by μ(σ) = 0.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AdditiveFn {
    values: Vec<Scalar>,
}

impl AdditiveFn {
    pub fn new(lattice: &Lattice, values: Vec<Scalar>) -> Result<Self, DerivationError> {
        let mu = AdditiveFn { values };
        mu.check(lattice)?;
        Ok(mu)
    }

    /// Unvalidated values, e.g. fresh from deserialization; `check` runs at
    /// first use.
    pub fn from_raw(values: Vec<Scalar>) -> Self {
        AdditiveFn { values }
    }

    pub fn zero(lattice: &Lattice) -> Self {
        AdditiveFn {
            values: vec![Scalar::zero(); lattice.rank()],
        }
    }

    pub fn values(&self) -> &[Scalar] {
        &self.values
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(Scalar::is_zero)
    }

    pub fn check(&self, lattice: &Lattice) -> Result<(), DerivationError> {
        if self.values.len() != lattice.rank() {
            return Err(DerivationError::MuArity {
                expected: lattice.rank(),
                got: self.values.len(),
            });
        }
        let value = self.eval(lattice, &sigma())?;
        if !value.is_zero() {
            return Err(DerivationError::MuSigmaNonzero { value });
        }
        Ok(())
    }

    /// μ(α) through the basis expansion of α.
    pub fn eval(&self, lattice: &Lattice, alpha: &Vec4) -> Result<Scalar, DerivationError> {
        let z = lattice
            .coords_of(alpha)
            .ok_or_else(|| DerivationError::NotInLattice {
                alpha: alpha.clone(),
            })?;
        Ok(z
            .iter()
            .zip(&self.values)
            .map(|(c, v)| &Scalar::from_bigint(c.clone()) * v)
            .sum())
    }

    fn add_scaled(&mut self, other: &[Scalar], c: &Scalar) {
        for (slot, v) in self.values.iter_mut().zip(other) {
            *slot += &(v * c);
        }
    }
}

/// A member of the derivation family, as written down.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DerivationOp {
    /// Inner derivation ad_g = [g, ·].
    Ad { generator: Element },
    /// d_μ: x^{α,i} ↦ μ(α)·x^{α,i}.
    Dmu { basis_values: AdditiveFn },
    /// ∂_{t_p}: x^{α,i} ↦ i_p·x^{α,i−1_{[p]}}.
    Dt { p: Axis },
    /// The outer d_p, defined when σ₁ ∈ Γ and slot p is pinned.
    OuterDp { p: Axis },
    /// The outer d̄₂, defined on the derived quotient.
    Dbar2,
    Combination { terms: Vec<(Scalar, DerivationOp)> },
}

impl DerivationOp {
    pub fn ad(def: &AlgebraDef, generator: Element) -> Result<Self, DerivationError> {
        def.validate_element(&generator)?;
        Ok(DerivationOp::Ad { generator })
    }

    pub fn dmu(def: &AlgebraDef, mu: AdditiveFn) -> Result<Self, DerivationError> {
        mu.check(def.lattice())?;
        Ok(DerivationOp::Dmu { basis_values: mu })
    }

    pub fn dt(def: &AlgebraDef, p: Axis) -> Result<Self, DerivationError> {
        check_dt_available(def, p)?;
        Ok(DerivationOp::Dt { p })
    }

    pub fn outer_dp(def: &AlgebraDef, p: Axis) -> Result<Self, DerivationError> {
        check_outer_available(def, p)?;
        Ok(DerivationOp::OuterDp { p })
    }

    pub fn dbar2(def: &AlgebraDef) -> Result<Self, DerivationError> {
        check_dbar2_available(def)?;
        Ok(DerivationOp::Dbar2)
    }

    pub fn combination(terms: Vec<(Scalar, DerivationOp)>) -> Self {
        DerivationOp::Combination { terms }
    }

    /// Applies the operator. Availability is re-checked here so that raw
    /// (deserialized) operators cannot bypass the construction rules.
    pub fn apply(&self, def: &AlgebraDef, u: &Element) -> Result<Element, DerivationError> {
        match self {
            DerivationOp::Ad { generator } => Ok(def.bracket(generator, u)?),
            DerivationOp::Dmu { basis_values } => {
                basis_values.check(def.lattice())?;
                let mut out = Element::zero();
                for (m, c) in u.iter() {
                    let factor = basis_values.eval(def.lattice(), &m.alpha)?;
                    out.add_term(m.clone(), c * &factor);
                }
                Ok(out)
            }
            DerivationOp::Dt { p } => {
                check_dt_available(def, *p)?;
                let mut out = Element::zero();
                for (m, c) in u.iter() {
                    let ip = m.index.get(*p);
                    if ip > 0 {
                        let lowered = m.index.minus_unit(*p).expect("slot nonzero");
                        out.add_term(
                            Monomial::new(m.alpha.clone(), lowered),
                            c * &Scalar::from(ip),
                        );
                    }
                }
                Ok(def.project(out)?)
            }
            DerivationOp::OuterDp { p } => {
                check_outer_available(def, *p)?;
                Ok(def.project(apply_outer(*p, u))?)
            }
            DerivationOp::Dbar2 => {
                check_dbar2_available(def)?;
                let mut out = Element::zero();
                let up = Vec4::from_ints([2, 0, -1, 0]);
                let down = Vec4::from_ints([1, 0, -2, 0]);
                for (m, c) in u.iter() {
                    let b2 = m.alpha.coord(Axis::A2);
                    let b4 = m.alpha.coord(Axis::A4);
                    out.add_term(Monomial::new(&m.alpha + &up, m.index), c * b2);
                    out.add_term(Monomial::new(&m.alpha + &down, m.index), -(c * b4));
                }
                Ok(def.project(out)?)
            }
            DerivationOp::Combination { terms } => {
                let mut out = Element::zero();
                for (c, op) in terms {
                    out.add_scaled(&op.apply(def, u)?, c);
                }
                Ok(out)
            }
        }
    }
}

fn check_dt_available(def: &AlgebraDef, p: Axis) -> Result<(), DerivationError> {
    if !def.shape().allows(p) {
        return Err(DerivationError::Unavailable {
            reason: format!("index slot {p} is pinned to zero, so the lowering operator is 0"),
        });
    }
    Ok(())
}

fn check_outer_available(def: &AlgebraDef, p: Axis) -> Result<(), DerivationError> {
    if !def.distinguished().sigma1_member {
        return Err(DerivationError::Unavailable {
            reason: "outer d_p needs sigma1 in the subgroup".to_string(),
        });
    }
    if def.shape().allows(p) {
        return Err(DerivationError::Unavailable {
            reason: format!("outer d_{p} needs index slot {p} pinned to zero"),
        });
    }
    Ok(())
}

fn check_dbar2_available(def: &AlgebraDef) -> Result<(), DerivationError> {
    if !def.is_derived_quotient() {
        return Err(DerivationError::Unavailable {
            reason: "the extra outer operator needs the derived quotient (all slots pinned, sigma2 in the subgroup)"
                .to_string(),
        });
    }
    Ok(())
}

fn apply_outer(p: Axis, u: &Element) -> Element {
    let e1 = Vec4::unit(Axis::A1);
    let me3 = Vec4::from_ints([0, 0, -1, 0]);
    let mut out = Element::zero();
    for (m, c) in u.iter() {
        let beta = &m.alpha;
        let j = &m.index;
        match p {
            Axis::A1 => {
                let shifted = beta + &e1;
                out.add_term(Monomial::new(shifted.clone(), *j), c * beta.coord(Axis::A2));
                if let Some(low) = j.minus_unit(Axis::A2) {
                    out.add_term(
                        Monomial::new(shifted, low),
                        c * &Scalar::from(j.get(Axis::A2)),
                    );
                }
            }
            Axis::A2 => {
                let shifted = beta + &e1;
                out.add_term(
                    Monomial::new(shifted.clone(), *j),
                    -(c * beta.coord(Axis::A1)),
                );
                if let Some(low) = j.minus_unit(Axis::A1) {
                    out.add_term(
                        Monomial::new(shifted, low),
                        -(c * &Scalar::from(j.get(Axis::A1))),
                    );
                }
            }
            Axis::A3 => {
                let shifted = beta + &me3;
                out.add_term(Monomial::new(shifted.clone(), *j), c * beta.coord(Axis::A4));
                if let Some(low) = j.minus_unit(Axis::A4) {
                    out.add_term(
                        Monomial::new(shifted, low),
                        c * &Scalar::from(j.get(Axis::A4)),
                    );
                }
            }
            Axis::A4 => {
                let shifted = beta + &me3;
                let b3p1 = beta.coord(Axis::A3) + &Scalar::one();
                out.add_term(Monomial::new(shifted.clone(), *j), -(c * &b3p1));
                if let Some(low) = j.minus_unit(Axis::A3) {
                    out.add_term(
                        Monomial::new(shifted, low),
                        -(c * &Scalar::from(j.get(Axis::A3))),
                    );
                }
            }
            _ => unreachable!(),
        }
    }
    out
}

/// d([u,v]) − [d(u),v] − [u,d(v)]; identically zero for every operator of
/// the family.
pub fn leibniz_defect(
    def: &AlgebraDef,
    op: &DerivationOp,
    u: &Element,
    v: &Element,
) -> Result<Element, DerivationError> {
    let uv = def.bracket(u, v)?;
    let lhs = op.apply(def, &uv)?;
    let du = op.apply(def, u)?;
    let dv = op.apply(def, v)?;
    let r1 = def.bracket(&du, v)?;
    let r2 = def.bracket(u, &dv)?;
    Ok(&(&lhs - &r1) - &r2)
}

/// A derivation in canonical coordinates: ad-part with 1 and x^{−σ} folded
/// out, plus the lowering, diagonal and outer coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalDerivation {
    inner: Element,
    dt: [Scalar; 4],
    mu: AdditiveFn,
    outer: [Scalar; 4],
    dbar2: Scalar,
}

impl CanonicalDerivation {
    pub fn new(
        def: &AlgebraDef,
        inner: Element,
        dt: [Scalar; 4],
        mu: AdditiveFn,
        outer: [Scalar; 4],
        dbar2: Scalar,
    ) -> Result<Self, DerivationError> {
        def.validate_element(&inner)?;
        let xms = Monomial::of_vec(-&sigma());
        for (m, _) in inner.iter() {
            if *m == Monomial::one() || *m == xms {
                return Err(DerivationError::MalformedCanonical);
            }
        }
        mu.check(def.lattice())?;
        for p in Axis::ALL {
            if !dt[p.index()].is_zero() {
                check_dt_available(def, p)?;
            }
            if !outer[p.index()].is_zero() {
                check_outer_available(def, p)?;
            }
        }
        if !dbar2.is_zero() {
            check_dbar2_available(def)?;
        }
        Ok(CanonicalDerivation {
            inner,
            dt,
            mu,
            outer,
            dbar2,
        })
    }

    pub fn zero(def: &AlgebraDef) -> Self {
        CanonicalDerivation {
            inner: Element::zero(),
            dt: zeros(),
            mu: AdditiveFn::zero(def.lattice()),
            outer: zeros(),
            dbar2: Scalar::zero(),
        }
    }

    pub fn inner(&self) -> &Element {
        &self.inner
    }

    pub fn dt(&self) -> &[Scalar; 4] {
        &self.dt
    }

    pub fn mu(&self) -> &AdditiveFn {
        &self.mu
    }

    pub fn outer(&self) -> &[Scalar; 4] {
        &self.outer
    }

    pub fn dbar2(&self) -> &Scalar {
        &self.dbar2
    }

    pub fn scale(&self, c: &Scalar) -> CanonicalDerivation {
        CanonicalDerivation {
            inner: self.inner.scale(c),
            dt: self.dt.clone().map(|x| &x * c),
            mu: AdditiveFn::from_raw(self.mu.values.iter().map(|v| v * c).collect()),
            outer: self.outer.clone().map(|x| &x * c),
            dbar2: &self.dbar2 * c,
        }
    }

    pub fn apply(&self, def: &AlgebraDef, u: &Element) -> Result<Element, DerivationError> {
        let mut out = def.bracket(&self.inner, u)?;
        let mut raw = Element::zero();
        for (m, c) in u.iter() {
            out.add_term(m.clone(), c * &self.mu.eval(def.lattice(), &m.alpha)?);
            for p in Axis::ALL {
                let coef = &self.dt[p.index()];
                if coef.is_zero() {
                    continue;
                }
                let ip = m.index.get(p);
                if ip > 0 {
                    let lowered = Monomial::new(m.alpha.clone(), m.index.minus_unit(p).unwrap());
                    raw.add_term(lowered, c * coef * &Scalar::from(ip));
                }
            }
        }
        for p in Axis::ALL {
            let coef = &self.outer[p.index()];
            if !coef.is_zero() {
                raw.add_scaled(&apply_outer(p, u), coef);
            }
        }
        out.add_scaled(&def.project(raw)?, &Scalar::one());
        if !self.dbar2.is_zero() {
            let piece = DerivationOp::Dbar2.apply(def, u)?;
            out.add_scaled(&piece, &self.dbar2);
        }
        Ok(out)
    }

    /// Placement in the locally finite hierarchy.
    pub fn classify(&self) -> DerivationClass {
        let outer_present =
            self.outer.iter().any(|c| !c.is_zero()) || !self.dbar2.is_zero();
        if !self.inner.is_zero() || outer_present {
            return DerivationClass::NotLocallyFinite;
        }
        if self.mu.is_zero() {
            DerivationClass::LocallyNilpotent
        } else if self.dt.iter().all(Scalar::is_zero) {
            DerivationClass::Semisimple
        } else {
            DerivationClass::LocallyFinite
        }
    }
}

fn zeros() -> [Scalar; 4] {
    [
        Scalar::zero(),
        Scalar::zero(),
        Scalar::zero(),
        Scalar::zero(),
    ]
}

#[derive(Debug, Copy, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivationClass {
    LocallyNilpotent,
    Semisimple,
    LocallyFinite,
    NotLocallyFinite,
}

/// Which of the two foldable inner derivations to express in canonical
/// coordinates.
#[derive(Debug, Copy, Clone, PartialEq, Eq)]
pub enum SpecialAd {
    /// ad_1 = d_ν + ∂_{t₄} with ν(β) = β₄.
    One,
    /// ad_{x^{−σ}} = d_μ − ∂_{t₂} with μ(β) = −β₂.
    XMinusSigma,
}

fn special_parts(def: &AlgebraDef, which: SpecialAd) -> (Vec<Scalar>, [Scalar; 4]) {
    let basis = def.lattice().basis();
    let mut dt = zeros();
    let values = match which {
        SpecialAd::One => {
            if def.shape().allows(Axis::A4) {
                dt[Axis::A4.index()] = Scalar::one();
            }
            basis.iter().map(|row| row.coord(Axis::A4).clone()).collect()
        }
        SpecialAd::XMinusSigma => {
            if def.shape().allows(Axis::A2) {
                dt[Axis::A2.index()] = -Scalar::one();
            }
            basis.iter().map(|row| -row.coord(Axis::A2)).collect()
        }
    };
    (values, dt)
}

/// Canonical coordinates of ad_1 or ad_{x^{−σ}}.
pub fn decompose_ad_special(def: &AlgebraDef, which: SpecialAd) -> CanonicalDerivation {
    let (values, dt) = special_parts(def, which);
    CanonicalDerivation::new(
        def,
        Element::zero(),
        dt,
        AdditiveFn::from_raw(values),
        zeros(),
        Scalar::zero(),
    )
    .expect("special decompositions are always available")
}

/// Folds an operator expression into canonical coordinates, splitting 1 and
/// x^{−σ} out of every ad generator.
pub fn canonicalize(
    def: &AlgebraDef,
    op: &DerivationOp,
) -> Result<CanonicalDerivation, DerivationError> {
    let mut inner = Element::zero();
    let mut dt = zeros();
    let mut mu = AdditiveFn::zero(def.lattice());
    let mut outer = zeros();
    let mut dbar2 = Scalar::zero();
    fold(
        def,
        op,
        &Scalar::one(),
        &mut inner,
        &mut dt,
        &mut mu,
        &mut outer,
        &mut dbar2,
    )?;
    CanonicalDerivation::new(def, inner, dt, mu, outer, dbar2)
}

#[allow(clippy::too_many_arguments)]
fn fold(
    def: &AlgebraDef,
    op: &DerivationOp,
    scale: &Scalar,
    inner: &mut Element,
    dt: &mut [Scalar; 4],
    mu: &mut AdditiveFn,
    outer: &mut [Scalar; 4],
    dbar2: &mut Scalar,
) -> Result<(), DerivationError> {
    match op {
        DerivationOp::Ad { generator } => {
            def.validate_element(generator)?;
            let xms = Monomial::of_vec(-&sigma());
            for (m, c) in generator.iter() {
                let cs = c * scale;
                let special = if *m == Monomial::one() {
                    Some(SpecialAd::One)
                } else if *m == xms {
                    Some(SpecialAd::XMinusSigma)
                } else {
                    None
                };
                match special {
                    Some(which) => {
                        let (values, sdt) = special_parts(def, which);
                        mu.add_scaled(&values, &cs);
                        for k in 0..4 {
                            dt[k] += &(&sdt[k] * &cs);
                        }
                    }
                    None => inner.add_term(m.clone(), cs),
                }
            }
        }
        DerivationOp::Dmu { basis_values } => {
            basis_values.check(def.lattice())?;
            mu.add_scaled(basis_values.values(), scale);
        }
        DerivationOp::Dt { p } => {
            check_dt_available(def, *p)?;
            dt[p.index()] += scale;
        }
        DerivationOp::OuterDp { p } => {
            check_outer_available(def, *p)?;
            outer[p.index()] += scale;
        }
        DerivationOp::Dbar2 => {
            check_dbar2_available(def)?;
            *dbar2 += scale;
        }
        DerivationOp::Combination { terms } => {
            for (c, sub) in terms {
                fold(def, sub, &(scale * c), inner, dt, mu, outer, dbar2)?;
            }
        }
    }
    Ok(())
}

/// Matrix of the operator on the span of the iterates u, op(u), op²(u), …,
/// when that span closes within `steps` applications.
#[derive(Debug, Clone, PartialEq)]
pub enum LocalMatrixResult {
    /// Row-major matrix M with op(u_j) = Σ_i M[i][j]·u_i over the iterate
    /// basis u_0 = u, u_1 = op(u), ….
    Closed(Vec<Vec<Scalar>>),
    /// No linear dependence showed up within the allowed applications. Says
    /// nothing about the operator beyond this window.
    DidNotClose,
}

pub fn local_matrix(
    def: &AlgebraDef,
    op: &DerivationOp,
    u: &Element,
    steps: u32,
) -> Result<LocalMatrixResult, DerivationError> {
    assert!(steps >= 1);
    if u.is_zero() {
        return Ok(LocalMatrixResult::Closed(Vec::new()));
    }

    // Reduced rows with their expression in the iterate basis.
    let mut rows: Vec<(Element, Vec<Scalar>)> = Vec::new();
    let mut iterates: Vec<Element> = Vec::new();

    let push = |v: Element, iterate_count: usize, rows: &mut Vec<(Element, Vec<Scalar>)>| {
        let mut vec = v;
        let mut rep = vec![Scalar::zero(); iterate_count + 1];
        rep[iterate_count] = Scalar::one();
        loop {
            let Some((lead, coef)) = vec.leading().map(|(m, c)| (m.clone(), c.clone())) else {
                // Dependent: iterate_k = Σ −rep_i·u_i over i < k.
                let expr: Vec<Scalar> = rep[..iterate_count].iter().map(|c| -c).collect();
                return Err(expr);
            };
            match rows.iter().find(|(r, _)| {
                r.leading().map(|(m, _)| m) == Some(&lead)
            }) {
                Some((r, rrep)) => {
                    let r = r.clone();
                    let rrep = rrep.clone();
                    vec.add_scaled(&r, &-coef.clone());
                    for (k, x) in rrep.iter().enumerate() {
                        rep[k] -= &(x * &coef);
                    }
                }
                None => {
                    // Normalize the leading coefficient to 1.
                    let inv = coef.recip();
                    rows.push((vec.scale(&inv), rep.iter().map(|c| c * &inv).collect()));
                    return Ok(());
                }
            }
        }
    };

    let mut cur = u.clone();
    match push(cur.clone(), 0, &mut rows) {
        Ok(()) => iterates.push(cur.clone()),
        Err(_) => unreachable!("nonzero vector cannot be dependent on nothing"),
    }
    for _ in 0..steps {
        cur = op.apply(def, &cur)?;
        match push(cur.clone(), iterates.len(), &mut rows) {
            Ok(()) => iterates.push(cur.clone()),
            Err(expr) => {
                let d = iterates.len();
                let mut matrix = vec![vec![Scalar::zero(); d]; d];
                for j in 0..d.saturating_sub(1) {
                    matrix[j + 1][j] = Scalar::one();
                }
                for (i, c) in expr.into_iter().enumerate() {
                    matrix[i][d - 1] = c;
                }
                return Ok(LocalMatrixResult::Closed(matrix));
            }
        }
    }
    Ok(LocalMatrixResult::DidNotClose)
}
