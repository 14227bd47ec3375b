//! Classification maps between the algebras ℬ(Γ, J).
//!
//! A shear is the block matrix acting on exponents by
//! β ↦ (β₁+a₁β₂, a₂β₂, β₃+a₃β₄, a₄β₄) (case I), or that followed by the
//! coordinate-pair swap (case II). Together with a character χ: Γ → ℚ∖{0}
//! satisfying χ(σ) = a₂/a₄ it induces an algebra isomorphism ψ, built here
//! explicitly and checked by [`hom_defect`]. The bounded [`search_params`]
//! decides isomorphism of concrete pairs, honestly returning `Unknown` when
//! its integer boxes are exhausted.

use crate::algebra::{AlgebraDef, AlgebraError};
use crate::element::{Element, Monomial, MultiIndex, ShapeVector};
use crate::hnf::RowHnf;
use crate::lattice::{sigma, Lattice, LatticeError};
use crate::scalar::Scalar;
use crate::vec4::{Axis, Vec4};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IsoError {
    #[error("a2 and a4 must be nonzero")]
    DegenerateShear,
    #[error("shear constraint violated: {0}")]
    ShearShapeConstraint(String),
    #[error("no rational {n}-th root of {target} exists")]
    NonRationalRoot { target: Scalar, n: u32 },
    #[error("sigma is not a member of the subgroup")]
    NoSigma,
    #[error("character values must be nonzero")]
    ZeroCharacterValue,
    #[error("character needs {expected} basis values, got {got}")]
    CharacterArity { expected: usize, got: usize },
    #[error("character fails chi(sigma) = a2/a4: got {got}, want {want}")]
    CharacterConstraint { got: Scalar, want: Scalar },
    #[error("shapes are incompatible with case {case:?}")]
    ShapeIncompatible { case: IsoCase },
    #[error("the shear does not map the source subgroup onto the target")]
    LatticeMismatch,
    #[error("image index is forbidden by the target shape")]
    TargetShapeViolation,
    #[error("exponent {alpha} is outside the subgroup")]
    NotInLattice { alpha: Vec4 },
    #[error("flip target failed validation: {0}")]
    InvalidFlipTarget(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// Which of the two matrix shapes the shear uses.
#[derive(Debug, Copy, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum IsoCase {
    I,
    II,
}

/// Shear parameters (a₁, a₂, a₃, a₄) with a₂, a₄ ≠ 0, plus the case.
#[derive(Debug, Clone, PartialEq)]
pub struct ShearParams {
    case: IsoCase,
    a: [Scalar; 4],
}

impl ShearParams {
    pub fn new(case: IsoCase, a: [Scalar; 4]) -> Result<Self, IsoError> {
        if a[1].is_zero() || a[3].is_zero() {
            return Err(IsoError::DegenerateShear);
        }
        Ok(ShearParams { case, a })
    }

    pub fn identity(case: IsoCase) -> Self {
        ShearParams {
            case,
            a: [Scalar::zero(), Scalar::one(), Scalar::zero(), Scalar::one()],
        }
    }

    pub fn case(&self) -> IsoCase {
        self.case
    }

    pub fn a(&self) -> &[Scalar; 4] {
        &self.a
    }

    /// a₁ = 0 is forced when J₁ = {0} ≠ J₂, and a₃ = 0 when J₃ = {0} ≠ J₄.
    pub fn check_shape_constraints(&self, shape: &ShapeVector) -> Result<(), IsoError> {
        let m = shape.flags();
        if !m[0] && m[1] && !self.a[0].is_zero() {
            return Err(IsoError::ShearShapeConstraint(
                "a1 must vanish when slot 1 is pinned and slot 2 is active".to_string(),
            ));
        }
        if !m[2] && m[3] && !self.a[2].is_zero() {
            return Err(IsoError::ShearShapeConstraint(
                "a3 must vanish when slot 3 is pinned and slot 4 is active".to_string(),
            ));
        }
        Ok(())
    }

    /// The block-diagonal image (β₁+a₁β₂, a₂β₂, β₃+a₃β₄, a₄β₄).
    fn block_image(&self, beta: &Vec4) -> Vec4 {
        let [a1, a2, a3, a4] = &self.a;
        let b = beta.coords();
        Vec4::new([
            &b[0] + &(a1 * &b[1]),
            a2 * &b[1],
            &b[2] + &(a3 * &b[3]),
            a4 * &b[3],
        ])
    }

    /// The exponent map φ of the classification.
    pub fn phi_apply(&self, beta: &Vec4) -> Vec4 {
        let img = self.block_image(beta);
        match self.case {
            IsoCase::I => img,
            IsoCase::II => img.swap_pairs(),
        }
    }

    /// Inverse of φ (well defined since a₂, a₄ ≠ 0).
    pub fn phi_inverse_apply(&self, image: &Vec4) -> Vec4 {
        let u = match self.case {
            IsoCase::I => image.clone(),
            IsoCase::II => image.swap_pairs(),
        };
        let [a1, a2, a3, a4] = &self.a;
        let c = u.coords();
        let b2 = &c[1] / a2;
        let b4 = &c[3] / a4;
        Vec4::new([&c[0] - &(a1 * &b2), b2, &c[2] - &(a3 * &b4), b4])
    }
}

/// A multiplicative map χ: Γ → ℚ∖{0}, given by nonzero values on the
/// canonical basis rows and extended by integer exponents.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Character {
    values: Vec<Scalar>,
}

impl Character {
    pub fn new(lattice: &Lattice, values: Vec<Scalar>) -> Result<Self, IsoError> {
        if values.len() != lattice.rank() {
            return Err(IsoError::CharacterArity {
                expected: lattice.rank(),
                got: values.len(),
            });
        }
        if values.iter().any(Scalar::is_zero) {
            return Err(IsoError::ZeroCharacterValue);
        }
        Ok(Character { values })
    }

    pub fn values(&self) -> &[Scalar] {
        &self.values
    }

    /// χ(α) = Π values[k]^{z_k} over the basis expansion α = Σ z_k·b_k.
    pub fn eval(&self, lattice: &Lattice, alpha: &Vec4) -> Result<Scalar, IsoError> {
        let z = lattice
            .coords_of(alpha)
            .ok_or_else(|| IsoError::NotInLattice {
                alpha: alpha.clone(),
            })?;
        let mut acc = Scalar::one();
        for (c, v) in z.iter().zip(&self.values) {
            let e = c.to_i64().expect("basis coordinate fits i64");
            acc *= &v.pow(e);
        }
        Ok(acc)
    }
}

/// Builds a character with χ(σ) = `target`, putting the whole value on the
/// first basis row that carries a nonzero coordinate of σ and 1 everywhere
/// else. Fails with `NonRationalRoot` when that forces an irrational root.
pub fn build_character(lattice: &Lattice, target: &Scalar) -> Result<Character, IsoError> {
    assert!(!target.is_zero(), "character target must be nonzero");
    let z = lattice.coords_of(&sigma()).ok_or(IsoError::NoSigma)?;
    let (k0, c0) = z
        .iter()
        .enumerate()
        .find(|(_, c)| !c.is_zero())
        .map(|(k, c)| (k, c.clone()))
        .expect("sigma is nonzero");
    let n = c0.to_i64().expect("coordinate fits i64");
    let base = if n < 0 { target.recip() } else { target.clone() };
    let root = base
        .nth_root(n.unsigned_abs() as u32)
        .ok_or_else(|| IsoError::NonRationalRoot {
            target: target.clone(),
            n: n.unsigned_abs() as u32,
        })?;
    let mut values = vec![Scalar::one(); lattice.rank()];
    values[k0] = root;
    Character::new(lattice, values)
}

/// A verified isomorphism ψ: ℬ(Γ, J) → ℬ(Γ′, J′).
#[derive(Debug, Clone)]
pub struct IsoMap {
    params: ShearParams,
    chi: Character,
    source: AlgebraDef,
    target: AlgebraDef,
}

/// Serialized form of an [`IsoMap`]: the algebras travel separately.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IsoMapSpec {
    pub case: IsoCase,
    pub a: [Scalar; 4],
    pub chi_basis_values: Vec<Scalar>,
}

impl IsoMap {
    /// Validates every invariant: shape compatibility, the shear shape
    /// constraints, χ(σ) = a₂/a₄, and that φ carries Γ exactly onto Γ′.
    pub fn new(
        params: ShearParams,
        chi: Character,
        source: &AlgebraDef,
        target: &AlgebraDef,
    ) -> Result<Self, IsoError> {
        let compatible = match params.case {
            IsoCase::I => source.shape() == target.shape(),
            IsoCase::II => *source.shape() == target.shape().swap_pairs(),
        };
        if !compatible {
            return Err(IsoError::ShapeIncompatible { case: params.case });
        }
        params.check_shape_constraints(source.shape())?;
        if chi.values.len() != source.lattice().rank() {
            return Err(IsoError::CharacterArity {
                expected: source.lattice().rank(),
                got: chi.values.len(),
            });
        }
        let got = chi.eval(source.lattice(), &sigma())?;
        let want = &params.a[1] / &params.a[3];
        if got != want {
            return Err(IsoError::CharacterConstraint { got, want });
        }
        if !verify_lattice_iso(&params, source.lattice(), target.lattice()) {
            return Err(IsoError::LatticeMismatch);
        }
        Ok(IsoMap {
            params,
            chi,
            source: source.clone(),
            target: target.clone(),
        })
    }

    pub fn from_spec(
        spec: &IsoMapSpec,
        source: &AlgebraDef,
        target: &AlgebraDef,
    ) -> Result<Self, IsoError> {
        let params = ShearParams::new(spec.case, spec.a.clone())?;
        let chi = Character::new(source.lattice(), spec.chi_basis_values.clone())?;
        IsoMap::new(params, chi, source, target)
    }

    pub fn to_spec(&self) -> IsoMapSpec {
        IsoMapSpec {
            case: self.params.case,
            a: self.params.a.clone(),
            chi_basis_values: self.chi.values.clone(),
        }
    }

    pub fn params(&self) -> &ShearParams {
        &self.params
    }

    pub fn chi(&self) -> &Character {
        &self.chi
    }

    pub fn source(&self) -> &AlgebraDef {
        &self.source
    }

    pub fn target(&self) -> &AlgebraDef {
        &self.target
    }

    /// ψ of a basis symbol.
    pub fn psi_apply(&self, m: &Monomial) -> Result<Element, IsoError> {
        psi_image(&self.params, &self.chi, &self.source, &self.target, m)
    }

    /// Linear extension of ψ.
    pub fn psi_apply_element(&self, u: &Element) -> Result<Element, IsoError> {
        apply_monomial_map(|m| self.psi_apply(m), u)
    }

    /// ψ([u,v]) − [ψ(u), ψ(v)].
    pub fn hom_defect(&self, u: &Element, v: &Element) -> Result<Element, IsoError> {
        hom_defect(&self.source, &self.target, |m| self.psi_apply(m), u, v)
    }
}

/// The raw image formula, without the global invariant checks; the negative
/// controls use it to drive deliberately corrupted maps.
///
/// ψ(x^{β,i}) = a₄⁻¹·χ(β)·y^{β′}·t′₁^{i₁}(a₂t′₂+a₁t′₁)^{i₂}t′₃^{i₃}(a₄t′₄+a₃t′₃)^{i₄}
/// for case I (β′ = φ(β)), expanded binomially; case II composes that with
/// the coordinate-pair flip, landing on exponent −φ(β)−σ with swapped index.
pub fn psi_image(
    params: &ShearParams,
    chi: &Character,
    source: &AlgebraDef,
    target: &AlgebraDef,
    m: &Monomial,
) -> Result<Element, IsoError> {
    let [a1, a2, a3, a4] = &params.a;
    let chi_b = chi.eval(source.lattice(), &m.alpha)?;
    let mut base = &a4.recip() * &chi_b;
    // Case II routes through the pair flip, which carries (−1)^{|i|}; the
    // level is constant across the binomial expansion below.
    if params.case == IsoCase::II && m.index.level() % 2 == 1 {
        base = -base;
    }
    let (i1, i2, i3, i4) = (
        m.index.get(Axis::A1),
        m.index.get(Axis::A2),
        m.index.get(Axis::A3),
        m.index.get(Axis::A4),
    );
    let exponent = match params.case {
        IsoCase::I => params.phi_apply(&m.alpha),
        IsoCase::II => &(-&params.phi_apply(&m.alpha)) - &sigma(),
    };
    let mut out = Element::zero();
    for k2 in 0..=i2 {
        let c2 = &(&binomial(i2, k2) * &a2.pow(i64::from(k2))) * &a1.pow(i64::from(i2 - k2));
        if c2.is_zero() {
            continue;
        }
        for k4 in 0..=i4 {
            let c4 = &(&binomial(i4, k4) * &a4.pow(i64::from(k4))) * &a3.pow(i64::from(i4 - k4));
            if c4.is_zero() {
                continue;
            }
            let idx = MultiIndex::new([i1 + (i2 - k2), k2, i3 + (i4 - k4), k4]);
            let idx = match params.case {
                IsoCase::I => idx,
                IsoCase::II => idx.swap_pairs(),
            };
            if !idx.respects(target.shape()) {
                return Err(IsoError::TargetShapeViolation);
            }
            out.add_term(
                Monomial::new(exponent.clone(), idx),
                &(&base * &c2) * &c4,
            );
        }
    }
    Ok(target.project(out)?)
}

fn binomial(n: u32, k: u32) -> Scalar {
    let mut acc = BigInt::one();
    for j in 0..k.min(n - k) {
        acc = acc * BigInt::from(n - j) / BigInt::from(j + 1);
    }
    Scalar::from_bigint(acc)
}

/// Extends a monomial map linearly.
pub fn apply_monomial_map<F>(map: F, u: &Element) -> Result<Element, IsoError>
where
    F: Fn(&Monomial) -> Result<Element, IsoError>,
{
    let mut out = Element::zero();
    for (m, c) in u.iter() {
        out.add_scaled(&map(m)?, c);
    }
    Ok(out)
}

/// ψ([u,v]) − [ψ(u), ψ(v)] for an arbitrary monomial map ψ; zero exactly
/// when ψ respects the bracket on this pair.
pub fn hom_defect<F>(
    source: &AlgebraDef,
    target: &AlgebraDef,
    map: F,
    u: &Element,
    v: &Element,
) -> Result<Element, IsoError>
where
    F: Fn(&Monomial) -> Result<Element, IsoError>,
{
    let uv = source.bracket(u, v)?;
    let lhs = apply_monomial_map(&map, &uv)?;
    let pu = apply_monomial_map(&map, u)?;
    let pv = apply_monomial_map(&map, v)?;
    let rhs = target.bracket(&pu, &pv)?;
    Ok(&lhs - &rhs)
}

/// The flipped companion algebra ℬ̃ of ℬ′ and the isomorphism
/// y^{α′,i′} ↦ (−1)^{|i′|}·z^{−α̃−σ, ĩ} onto it, where ~ swaps the
/// coordinate pairs.
///
/// The sign is forced: each bracket term dropping the total index level by
/// δ transforms with a factor (−1)^δ under the swap, and (−1)^{|i′|}
/// absorbs exactly that. Without it the map fails the bracket identity on
/// indexed symbols (it is only correct index-free).
#[derive(Debug, Clone)]
pub struct FlipMap {
    target: AlgebraDef,
}

impl FlipMap {
    pub fn target(&self) -> &AlgebraDef {
        &self.target
    }

    /// Target symbol z^{−α̃−σ, ĩ}, without the sign.
    pub fn monomial_image(&self, m: &Monomial) -> Monomial {
        Monomial::new(
            &(-&m.alpha.swap_pairs()) - &sigma(),
            m.index.swap_pairs(),
        )
    }

    /// Full image of one basis symbol, sign included.
    pub fn image(&self, m: &Monomial) -> Element {
        let sign = if m.index.level() % 2 == 1 {
            Scalar::from(-1)
        } else {
            Scalar::one()
        };
        Element::term(self.monomial_image(m), sign)
    }

    pub fn apply(&self, u: &Element) -> Result<Element, IsoError> {
        let raw = apply_monomial_map(|m| Ok(self.image(m)), u)?;
        Ok(self.target.project(raw)?)
    }
}

/// Builds ℬ̃ from ℬ′: swapped subgroup, swapped shape, and the flip map.
pub fn flip_construct(def_prime: &AlgebraDef, search_bound: u32) -> Result<FlipMap, IsoError> {
    let gens: Vec<Vec4> = def_prime
        .lattice()
        .basis()
        .iter()
        .map(Vec4::swap_pairs)
        .collect();
    let lattice = Lattice::canonical_basis(gens)?;
    let shape = def_prime.shape().swap_pairs();
    let target = AlgebraDef::new(lattice, shape, search_bound)
        .map_err(|e| IsoError::InvalidFlipTarget(e.to_string()))?;
    Ok(FlipMap { target })
}

/// φ(source basis) ⊆ target and φ⁻¹(target basis) ⊆ source, exactly.
pub fn verify_lattice_iso(params: &ShearParams, source: &Lattice, target: &Lattice) -> bool {
    source
        .basis()
        .iter()
        .all(|b| target.contains(&params.phi_apply(b)))
        && target
            .basis()
            .iter()
            .all(|b| source.contains(&params.phi_inverse_apply(b)))
}

/// Outcome of the bounded isomorphism search.
#[derive(Debug)]
pub enum SearchOutcome {
    Found(Box<IsoMap>),
    NotIsomorphic(ObstructionReason),
    Unknown,
}

#[derive(Debug, Copy, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ObstructionReason {
    /// J matches neither J′ nor its pair swap.
    ShapeIncompatible,
}

/// Searches for a witness isomorphism by matching the coordinate-pair
/// projections of the two subgroups as plane lattices, enumerating the
/// integer coordinates of the projected basis images over
/// [−bound, bound]², then verifying every surviving candidate in full.
/// Deterministic: candidates are tried in a fixed order.
pub fn search_params(source: &AlgebraDef, target: &AlgebraDef, bound: i64) -> SearchOutcome {
    let mut any_case = false;
    for case in [IsoCase::I, IsoCase::II] {
        let compatible = match case {
            IsoCase::I => source.shape() == target.shape(),
            IsoCase::II => *source.shape() == target.shape().swap_pairs(),
        };
        if !compatible {
            continue;
        }
        any_case = true;

        let p12 = PlaneLattice::project(source.lattice(), [Axis::A1, Axis::A2]);
        let p34 = PlaneLattice::project(source.lattice(), [Axis::A3, Axis::A4]);
        let q12 = PlaneLattice::project(target.lattice(), [Axis::A1, Axis::A2]);
        let q34 = PlaneLattice::project(target.lattice(), [Axis::A3, Axis::A4]);
        let (front, back) = match case {
            IsoCase::I => (
                shear_candidates(&p12, &q12, bound),
                shear_candidates(&p34, &q34, bound),
            ),
            IsoCase::II => (
                shear_candidates(&p12, &q34, bound),
                shear_candidates(&p34, &q12, bound),
            ),
        };
        for (a1, a2) in &front {
            for (a3, a4) in &back {
                let Ok(params) = ShearParams::new(
                    case,
                    [a1.clone(), a2.clone(), a3.clone(), a4.clone()],
                ) else {
                    continue;
                };
                if params.check_shape_constraints(source.shape()).is_err() {
                    continue;
                }
                if !verify_lattice_iso(&params, source.lattice(), target.lattice()) {
                    continue;
                }
                let Ok(chi) = build_character(source.lattice(), &(a2 / a4)) else {
                    continue;
                };
                if let Ok(iso) = IsoMap::new(params, chi, source, target) {
                    return SearchOutcome::Found(Box::new(iso));
                }
            }
        }
    }
    if any_case {
        SearchOutcome::Unknown
    } else {
        SearchOutcome::NotIsomorphic(ObstructionReason::ShapeIncompatible)
    }
}

/// The pair (J, canonical basis of Γ): equality is necessary for two
/// presentations to be literally the same point of the structure space;
/// orbit equivalence is what [`search_params`] decides.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructureDescriptor {
    pub shape: ShapeVector,
    pub lattice_basis: Vec<Vec4>,
}

pub fn structure_descriptor(def: &AlgebraDef) -> StructureDescriptor {
    StructureDescriptor {
        shape: *def.shape(),
        lattice_basis: def.lattice().basis().to_vec(),
    }
}

/// A rank-≤2 lattice in ℚ², as a projection of Γ onto a coordinate pair.
struct PlaneLattice {
    basis: Vec<[Scalar; 2]>,
    scaled: RowHnf,
    scale: BigInt,
}

impl PlaneLattice {
    fn project(lattice: &Lattice, axes: [Axis; 2]) -> PlaneLattice {
        let gens: Vec<[Scalar; 2]> = lattice
            .basis()
            .iter()
            .map(|row| [row.coord(axes[0]).clone(), row.coord(axes[1]).clone()])
            .collect();
        let mut scale = BigInt::one();
        for g in &gens {
            for c in g {
                scale = scale.lcm(c.denom());
            }
        }
        let scale_s = Scalar::from_bigint(scale.clone());
        let int_rows: Vec<Vec<BigInt>> = gens
            .iter()
            .map(|g| {
                g.iter()
                    .map(|c| (c * &scale_s).as_integer().expect("cleared denominator"))
                    .collect()
            })
            .collect();
        let scaled = RowHnf::compute(&int_rows);
        let basis = scaled
            .rows
            .iter()
            .map(|row| {
                [
                    &Scalar::from_bigint(row[0].clone()) / &scale_s,
                    &Scalar::from_bigint(row[1].clone()) / &scale_s,
                ]
            })
            .collect();
        PlaneLattice {
            basis,
            scaled,
            scale,
        }
    }

    fn rank(&self) -> usize {
        self.basis.len()
    }

    fn contains(&self, v: &[Scalar; 2]) -> bool {
        let scale_s = Scalar::from_bigint(self.scale.clone());
        let mut target = Vec::with_capacity(2);
        for c in v {
            match (c * &scale_s).as_integer() {
                Some(n) => target.push(n),
                None => return false,
            }
        }
        self.scaled.solve(&target).is_some()
    }
}

fn plane_apply(s: &Scalar, t: &Scalar, v: &[Scalar; 2]) -> [Scalar; 2] {
    [&v[0] + &(s * &v[1]), t * &v[1]]
}

fn plane_inverse_apply(s: &Scalar, t: &Scalar, v: &[Scalar; 2]) -> [Scalar; 2] {
    let b = &v[1] / t;
    [&v[0] - &(s * &b), b]
}

/// All (s, t), t ≠ 0, with P·(1 0; s t) = Q whose projected basis images
/// have integer coordinates in the box, in a fixed order.
fn shear_candidates(p: &PlaneLattice, q: &PlaneLattice, bound: i64) -> Vec<(Scalar, Scalar)> {
    if p.rank() != 2 || q.rank() != 2 {
        return Vec::new();
    }
    let mut found: BTreeSet<(Scalar, Scalar)> = BTreeSet::new();
    let qb = &q.basis;
    let image = |z0: i64, z1: i64| -> [Scalar; 2] {
        let (c0, c1) = (Scalar::from(z0), Scalar::from(z1));
        [
            &(&qb[0][0] * &c0) + &(&qb[1][0] * &c1),
            &(&qb[0][1] * &c0) + &(&qb[1][1] * &c1),
        ]
    };
    for z11 in -bound..=bound {
        for z12 in -bound..=bound {
            let w1 = image(z11, z12);
            for z21 in -bound..=bound {
                for z22 in -bound..=bound {
                    let w2 = image(z21, z22);
                    let mut s: Option<Scalar> = None;
                    let mut t: Option<Scalar> = None;
                    let mut ok = true;
                    for (row, w) in p.basis.iter().zip([&w1, &w2]) {
                        if row[1].is_zero() {
                            if w[0] != row[0] || !w[1].is_zero() {
                                ok = false;
                                break;
                            }
                        } else {
                            let s_k = &(&w[0] - &row[0]) / &row[1];
                            let t_k = &w[1] / &row[1];
                            match (&s, &t) {
                                (None, None) => {
                                    s = Some(s_k);
                                    t = Some(t_k);
                                }
                                (Some(s0), Some(t0)) => {
                                    if *s0 != s_k || *t0 != t_k {
                                        ok = false;
                                        break;
                                    }
                                }
                                _ => unreachable!(),
                            }
                        }
                    }
                    if !ok {
                        continue;
                    }
                    let (Some(s), Some(t)) = (s, t) else {
                        continue;
                    };
                    if t.is_zero() || found.contains(&(s.clone(), t.clone())) {
                        continue;
                    }
                    let maps_onto = p
                        .basis
                        .iter()
                        .all(|r| q.contains(&plane_apply(&s, &t, r)))
                        && q.basis
                            .iter()
                            .all(|r| p.contains(&plane_inverse_apply(&s, &t, r)));
                    if maps_onto {
                        found.insert((s, t));
                    }
                }
            }
        }
    }
    found.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::element::ShapeVector;
    use crate::lattice::z4;

    fn def(flags: [bool; 4]) -> AlgebraDef {
        AlgebraDef::new(z4(), ShapeVector::new(flags), 16).unwrap()
    }

    fn params(case: IsoCase, a: [i64; 4]) -> ShearParams {
        ShearParams::new(case, a.map(Scalar::from)).unwrap()
    }

    /// The algebra on φ(ℤ⁴) with the shape matching `p` against `src`.
    fn image_def(src: &AlgebraDef, p: &ShearParams) -> AlgebraDef {
        let gens: Vec<Vec4> = src.lattice().basis().iter().map(|b| p.phi_apply(b)).collect();
        let lattice = Lattice::canonical_basis(gens).unwrap();
        let shape = match p.case() {
            IsoCase::I => *src.shape(),
            IsoCase::II => src.shape().swap_pairs(),
        };
        AlgebraDef::new(lattice, shape, 16).unwrap()
    }

    #[test]
    fn phi_examples() {
        let id = params(IsoCase::I, [0, 1, 0, 1]);
        let beta = Vec4::from_ints([2, 3, 4, 5]);
        assert_eq!(id.phi_apply(&beta), beta);

        let p = params(IsoCase::I, [1, 2, 0, 1]);
        assert_eq!(
            p.phi_apply(&Vec4::from_ints([1, 1, 0, 0])),
            Vec4::from_ints([2, 2, 0, 0])
        );

        let q = params(IsoCase::II, [0, 1, 0, 1]);
        assert_eq!(
            q.phi_apply(&Vec4::from_ints([1, 2, 3, 4])),
            Vec4::from_ints([3, 4, 1, 2])
        );
    }

    #[test]
    fn phi_is_additive_and_invertible() {
        let p = ShearParams::new(
            IsoCase::II,
            [
                Scalar::new(1, 3),
                Scalar::new(-2, 1),
                Scalar::new(5, 2),
                Scalar::new(7, 3),
            ],
        )
        .unwrap();
        let a = Vec4::from_ints([1, -2, 3, 4]);
        let b = Vec4::from_ints([-5, 7, 0, 2]);
        assert_eq!(p.phi_apply(&(&a + &b)), &p.phi_apply(&a) + &p.phi_apply(&b));
        assert_eq!(p.phi_inverse_apply(&p.phi_apply(&a)), a);
        assert_eq!(p.phi_apply(&p.phi_inverse_apply(&b)), b);
    }

    #[test]
    fn shear_composition_laws() {
        // Case I ∘ case I is the case-I shear with composed parameters.
        let p = params(IsoCase::I, [1, 2, -1, 3]);
        let q = params(IsoCase::I, [2, -1, 4, 2]);
        let composed = ShearParams::new(
            IsoCase::I,
            [
                &p.a()[0] + &(&q.a()[0] * &p.a()[1]),
                &p.a()[1] * &q.a()[1],
                &p.a()[2] + &(&q.a()[2] * &p.a()[3]),
                &p.a()[3] * &q.a()[3],
            ],
        )
        .unwrap();
        for v in [
            Vec4::from_ints([1, 0, 0, 0]),
            Vec4::from_ints([0, 1, 0, 0]),
            Vec4::from_ints([0, 0, 1, 0]),
            Vec4::from_ints([0, 0, 0, 1]),
            Vec4::from_ints([3, -1, 2, 5]),
        ] {
            assert_eq!(q.phi_apply(&p.phi_apply(&v)), composed.phi_apply(&v));
        }

        // Case II ∘ case II lands back in case I.
        let p = params(IsoCase::II, [1, 2, -1, 3]);
        let q = params(IsoCase::II, [2, -1, 4, 2]);
        let composed = ShearParams::new(
            IsoCase::I,
            [
                &p.a()[0] + &(&q.a()[2] * &p.a()[1]),
                &p.a()[1] * &q.a()[3],
                &p.a()[2] + &(&q.a()[0] * &p.a()[3]),
                &p.a()[3] * &q.a()[1],
            ],
        )
        .unwrap();
        for v in [
            Vec4::from_ints([1, 0, 0, 0]),
            Vec4::from_ints([0, 1, 0, 0]),
            Vec4::from_ints([0, 0, 1, 0]),
            Vec4::from_ints([0, 0, 0, 1]),
            Vec4::from_ints([3, -1, 2, 5]),
        ] {
            assert_eq!(q.phi_apply(&p.phi_apply(&v)), composed.phi_apply(&v));
        }
    }

    #[test]
    fn character_construction() {
        let l = z4();
        let chi = build_character(&l, &Scalar::from(2)).unwrap();
        assert_eq!(
            chi.values(),
            &[
                Scalar::from(2),
                Scalar::one(),
                Scalar::one(),
                Scalar::one()
            ]
        );
        assert_eq!(chi.eval(&l, &sigma()).unwrap(), Scalar::from(2));

        let ones = build_character(&l, &Scalar::one()).unwrap();
        assert!(ones.values().iter().all(Scalar::is_one));

        // Multiplicativity on random combinations.
        let mut rng = crate::rng::SplitMix64::new(12);
        for _ in 0..100 {
            let z1: Vec<i64> = (0..4).map(|_| rng.int_in(-4, 4)).collect();
            let z2: Vec<i64> = (0..4).map(|_| rng.int_in(-4, 4)).collect();
            let v1 = Vec4::from_ints([z1[0], z1[1], z1[2], z1[3]]);
            let v2 = Vec4::from_ints([z2[0], z2[1], z2[2], z2[3]]);
            let lhs = chi.eval(&l, &(&v1 + &v2)).unwrap();
            let rhs = &chi.eval(&l, &v1).unwrap() * &chi.eval(&l, &v2).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn character_without_sigma_or_root() {
        // σ ∉ span{(2,0,2,0), e₂, e₄}.
        let l = Lattice::canonical_basis(vec![
            Vec4::from_ints([2, 0, 2, 0]),
            Vec4::from_ints([0, 1, 0, 0]),
            Vec4::from_ints([0, 0, 0, 1]),
        ])
        .unwrap();
        assert!(matches!(
            build_character(&l, &Scalar::from(2)),
            Err(IsoError::NoSigma)
        ));

        // σ = 1·(2,0,2,0) − 1·(1,0,1,0)? Use a lattice where σ needs a square root.
        let l = Lattice::canonical_basis(vec![
            Vec4::new([
                Scalar::new(1, 2),
                Scalar::zero(),
                Scalar::new(1, 2),
                Scalar::zero(),
            ]),
            Vec4::from_ints([0, 1, 0, 0]),
            Vec4::from_ints([0, 0, 0, 1]),
        ])
        .unwrap();
        // σ = 2·(1/2, 0, 1/2, 0), so χ(σ) = v² and target 2 has no rational root.
        assert!(matches!(
            build_character(&l, &Scalar::from(2)),
            Err(IsoError::NonRationalRoot { .. })
        ));
        // Target 9/4 does.
        let chi = build_character(&l, &Scalar::new(9, 4)).unwrap();
        assert_eq!(chi.eval(&l, &sigma()).unwrap(), Scalar::new(9, 4));
    }

    #[test]
    fn identity_iso_is_the_identity_on_symbols() {
        let d = def([true; 4]);
        let iso = IsoMap::new(
            params(IsoCase::I, [0, 1, 0, 1]),
            build_character(d.lattice(), &Scalar::one()).unwrap(),
            &d,
            &d,
        )
        .unwrap();
        let m = Monomial::new(Vec4::from_ints([2, -1, 0, 3]), MultiIndex::new([1, 2, 0, 1]));
        assert_eq!(iso.psi_apply(&m).unwrap(), Element::monomial(m));
    }

    #[test]
    fn psi_scales_sigma_by_the_character() {
        let d = def([false; 4]);
        let p = params(IsoCase::I, [0, 2, 0, 1]);
        let target = image_def(&d, &p);
        let chi = build_character(d.lattice(), &Scalar::from(2)).unwrap();
        let iso = IsoMap::new(p, chi, &d, &target).unwrap();
        let got = iso.psi_apply(&Monomial::of_vec(sigma())).unwrap();
        assert_eq!(
            got,
            Element::monomial(Monomial::of_vec(sigma())).scale(&Scalar::from(2))
        );
    }

    #[test]
    fn psi_expands_mixed_index_binomially() {
        let d = def([true; 4]);
        let p = params(IsoCase::I, [1, 2, 0, 1]);
        let target = image_def(&d, &p);
        let chi = build_character(d.lattice(), &Scalar::from(2)).unwrap();
        let iso = IsoMap::new(p.clone(), chi.clone(), &d, &target).unwrap();

        let beta = Vec4::from_ints([0, 1, 0, 0]);
        let m = Monomial::new(beta.clone(), MultiIndex::new([0, 1, 0, 0]));
        let got = iso.psi_apply(&m).unwrap();

        let beta_img = p.phi_apply(&beta);
        let chi_beta = chi.eval(d.lattice(), &beta).unwrap();
        let mut want = Element::term(
            Monomial::new(beta_img.clone(), MultiIndex::new([0, 1, 0, 0])),
            &Scalar::from(2) * &chi_beta,
        );
        want.add_term(
            Monomial::new(beta_img, MultiIndex::new([1, 0, 0, 0])),
            chi_beta,
        );
        assert_eq!(got, want);
    }

    #[test]
    fn flip_swaps_everything() {
        let d = def([true; 4]);
        let flip = flip_construct(&d, 16).unwrap();
        assert_eq!(flip.target().shape(), &ShapeVector::full());
        let m = Monomial::of_vec(Vec4::from_ints([1, 2, 3, 4]));
        assert_eq!(
            flip.monomial_image(&m).alpha,
            Vec4::from_ints([-4, -4, -2, -2])
        );

        let mixed = def([true, false, false, true]);
        let flip = flip_construct(&mixed, 16).unwrap();
        assert_eq!(
            flip.target().shape(),
            &ShapeVector::new([false, true, true, false])
        );
    }

    #[test]
    fn flip_is_a_homomorphism() {
        let d = def([true; 4]);
        let flip = flip_construct(&d, 16).unwrap();
        let mut rng = crate::rng::SplitMix64::new(77);
        for _ in 0..100 {
            let u = Element::monomial(crate::algebra::draw_monomial(&d, 2, 2, &mut rng).unwrap());
            let v = Element::monomial(crate::algebra::draw_monomial(&d, 2, 2, &mut rng).unwrap());
            let defect = hom_defect(&d, flip.target(), |m| Ok(flip.image(m)), &u, &v).unwrap();
            assert!(defect.is_zero(), "flip defect on {u} vs {v}: {defect}");
        }
    }

    #[test]
    fn flip_sign_tracks_index_level() {
        let d = def([true; 4]);
        let flip = flip_construct(&d, 16).unwrap();
        let even = Monomial::new(Vec4::from_ints([1, 0, 0, 0]), MultiIndex::new([1, 1, 0, 0]));
        let odd = Monomial::new(Vec4::from_ints([1, 0, 0, 0]), MultiIndex::new([0, 0, 1, 0]));
        assert_eq!(flip.image(&even).coeff(&flip.monomial_image(&even)), Scalar::one());
        assert_eq!(flip.image(&odd).coeff(&flip.monomial_image(&odd)), Scalar::from(-1));
    }

    #[test]
    fn lattice_iso_verification() {
        let l = z4();
        assert!(verify_lattice_iso(
            &params(IsoCase::I, [0, 1, 0, 1]),
            &l,
            &l
        ));
        // a₂ = 2 shrinks the second axis: not onto ℤ⁴.
        let p = params(IsoCase::I, [1, 2, 0, 1]);
        assert!(!verify_lattice_iso(&p, &l, &l));
        let image = Lattice::canonical_basis(
            l.basis().iter().map(|b| p.phi_apply(b)).collect(),
        )
        .unwrap();
        assert!(verify_lattice_iso(&p, &l, &image));
    }

    #[test]
    fn search_finds_identity_and_round_trips() {
        let d = def([true; 4]);
        match search_params(&d, &d, 4) {
            SearchOutcome::Found(iso) => {
                assert!(verify_lattice_iso(
                    iso.params(),
                    d.lattice(),
                    d.lattice()
                ));
            }
            other => panic!("expected Found, got {other:?}"),
        }

        let p = ShearParams::new(
            IsoCase::I,
            [
                Scalar::one(),
                Scalar::from(2),
                Scalar::one(),
                Scalar::from(3),
            ],
        )
        .unwrap();
        let target = image_def(&d, &p);
        match search_params(&d, &target, 6) {
            SearchOutcome::Found(iso) => {
                // Any valid witness is acceptable.
                assert!(verify_lattice_iso(
                    iso.params(),
                    d.lattice(),
                    target.lattice()
                ));
            }
            other => panic!("expected Found, got {other:?}"),
        }
    }

    #[test]
    fn search_reports_shape_obstruction() {
        let a = def([true, false, false, false]);
        let b = def([false, false, false, true]);
        assert!(matches!(
            search_params(&a, &b, 4),
            SearchOutcome::NotIsomorphic(ObstructionReason::ShapeIncompatible)
        ));
    }

    #[test]
    fn descriptor_is_presentation_independent() {
        let d = def([true; 4]);
        let other = AlgebraDef::new(
            Lattice::canonical_basis(vec![
                Vec4::from_ints([1, 1, 0, 0]),
                Vec4::from_ints([0, 1, 0, 0]),
                Vec4::from_ints([0, 0, 1, 1]),
                Vec4::from_ints([0, 0, 0, 1]),
                Vec4::from_ints([1, 2, 3, 4]),
            ])
            .unwrap(),
            ShapeVector::full(),
            16,
        )
        .unwrap();
        assert_eq!(structure_descriptor(&d), structure_descriptor(&other));
        assert_eq!(
            structure_descriptor(&d).lattice_basis,
            vec![
                Vec4::from_ints([1, 0, 0, 0]),
                Vec4::from_ints([0, 1, 0, 0]),
                Vec4::from_ints([0, 0, 1, 0]),
                Vec4::from_ints([0, 0, 0, 1]),
            ]
        );
    }
}
