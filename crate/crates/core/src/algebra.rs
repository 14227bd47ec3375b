//! The algebras ℬ(Γ, J).
//!
//! Two independent routes to the bracket are kept side by side:
//! [`AlgebraDef::bracket`] expands the eight-term structure-constant form,
//! while [`AlgebraDef::bracket_oracle`] evaluates the defining product-rule
//! expression x^σ(∂₁u·∂₂v − ∂₁v·∂₂u) + (u+∂₃u)∂₄v − (v+∂₃v)∂₄u through the
//! semigroup product alone. They must agree exactly; the test suites hold
//! them against each other.
//!
//! The quotient removes the single central symbol x^{σ₁,0}. When J = {0}
//! and σ₂ ∈ Γ the algebra is the derived subalgebra and x^{σ₂,0} is excluded
//! from the basis as well; the bracket then *asserts* that no σ₂ coefficient
//! ever appears (a nonzero one would mean the expansion itself is wrong, so
//! it is an error, never a silent projection).

use crate::element::{Element, Monomial, MultiIndex, ShapeVector};
use crate::lattice::{sigma, sigma1, sigma2, DistinguishedElements, Lattice, LatticeError};
use crate::rng::SplitMix64;
use crate::scalar::Scalar;
use crate::vec4::{Axis, Vec4};
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("subgroup admissibility fails: {condition}")]
    InvalidGamma { condition: &'static str },
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("bracket left the derived subalgebra: coefficient {coefficient} on x^(sigma2,0)")]
    ClosureViolation { coefficient: Scalar },
    #[error("exponent {alpha} is not a point of the subgroup")]
    NotInLattice { alpha: Vec4 },
    #[error("index {index} uses a slot pinned to zero by the shape")]
    IndexShapeViolation { index: MultiIndex },
    #[error("{monomial} is excluded from the basis")]
    ExcludedMonomial { monomial: Monomial },
    #[error("monomial sampling exhausted after {attempts} rerolls")]
    SamplingExhausted { attempts: u32 },
}

/// A fully validated algebra ℬ(Γ, J).
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraDef {
    lattice: Lattice,
    shape: ShapeVector,
    dist: DistinguishedElements,
    is_derived_quotient: bool,
}

impl AlgebraDef {
    /// Validates Γ, locates the distinguished elements, and fixes the
    /// quotient flavor (derived subalgebra iff J = {0} and σ₂ ∈ Γ).
    pub fn new(
        lattice: Lattice,
        shape: ShapeVector,
        search_bound: u32,
    ) -> Result<Self, AlgebraError> {
        let report = lattice.validate_gamma();
        if let Some(condition) = report.first_failure() {
            return Err(AlgebraError::InvalidGamma { condition });
        }
        let dist = lattice.find_distinguished(search_bound)?;
        let is_derived_quotient = shape.is_trivial() && dist.sigma2_member;
        Ok(AlgebraDef {
            lattice,
            shape,
            dist,
            is_derived_quotient,
        })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn shape(&self) -> &ShapeVector {
        &self.shape
    }

    pub fn distinguished(&self) -> &DistinguishedElements {
        &self.dist
    }

    pub fn is_derived_quotient(&self) -> bool {
        self.is_derived_quotient
    }

    /// Is x^{α,i} outside the basis of this algebra?
    pub fn is_excluded(&self, m: &Monomial) -> bool {
        if !m.index.is_zero() {
            return false;
        }
        (self.dist.sigma1_member && m.alpha == sigma1())
            || (self.is_derived_quotient && m.alpha == sigma2())
    }

    pub fn validate_monomial(&self, m: &Monomial) -> Result<(), AlgebraError> {
        if !self.lattice.contains(&m.alpha) {
            return Err(AlgebraError::NotInLattice {
                alpha: m.alpha.clone(),
            });
        }
        if !m.index.respects(&self.shape) {
            return Err(AlgebraError::IndexShapeViolation { index: m.index });
        }
        if self.is_excluded(m) {
            return Err(AlgebraError::ExcludedMonomial {
                monomial: m.clone(),
            });
        }
        Ok(())
    }

    pub fn validate_element(&self, u: &Element) -> Result<(), AlgebraError> {
        u.iter().try_for_each(|(m, _)| self.validate_monomial(m))
    }

    /// Validated x^{α,i} constructor.
    pub fn monomial(&self, alpha: Vec4, index: MultiIndex) -> Result<Monomial, AlgebraError> {
        let m = Monomial::new(alpha, index);
        self.validate_monomial(&m)?;
        Ok(m)
    }

    /// Applies the quotient to a raw semigroup-algebra expression.
    pub(crate) fn project(&self, mut raw: Element) -> Result<Element, AlgebraError> {
        if self.dist.sigma1_member {
            raw.remove_term(&Monomial::of_vec(sigma1()));
        }
        if self.is_derived_quotient {
            let coefficient = raw.coeff(&Monomial::of_vec(sigma2()));
            if !coefficient.is_zero() {
                return Err(AlgebraError::ClosureViolation { coefficient });
            }
        }
        Ok(raw)
    }

    /// The bracket, via the expanded structure-constant form.
    pub fn bracket(&self, u: &Element, v: &Element) -> Result<Element, AlgebraError> {
        let mut acc = Element::zero();
        for (ma, ca) in u.iter() {
            for (mb, cb) in v.iter() {
                bracket_monomials_into(&mut acc, ma, mb, &(ca * cb));
            }
        }
        self.project(acc)
    }

    /// The bracket, via the defining product-rule expression. Independent of
    /// [`Self::bracket`]: only the semigroup product and the ∂_p appear.
    pub fn bracket_oracle(&self, u: &Element, v: &Element) -> Result<Element, AlgebraError> {
        let d1u = partial(Axis::A1, u);
        let d2u = partial(Axis::A2, u);
        let d1v = partial(Axis::A1, v);
        let d2v = partial(Axis::A2, v);
        let d4u = partial(Axis::A4, u);
        let d4v = partial(Axis::A4, v);
        let u3 = u + &partial(Axis::A3, u);
        let v3 = v + &partial(Axis::A3, v);
        let x_sigma = Element::monomial(Monomial::of_vec(sigma()));
        let skew = &product(&d1u, &d2v) - &product(&d1v, &d2u);
        let raw = &(&product(&x_sigma, &skew) + &product(&u3, &d4v)) - &product(&v3, &d4u);
        self.project(raw)
    }

    /// Splits `u` by the projection α ↦ (α₂, α₄); concatenating the parts
    /// reproduces `u`.
    pub fn grade(&self, u: &Element) -> BTreeMap<GradingKey, Element> {
        let mut out: BTreeMap<GradingKey, Element> = BTreeMap::new();
        for (m, c) in u.iter() {
            let key = GradingKey {
                lambda2: m.alpha.coord(Axis::A2).clone(),
                lambda4: m.alpha.coord(Axis::A4).clone(),
            };
            out.entry(key)
                .or_insert_with(Element::zero)
                .add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn is_in_subspace(&self, u: &Element, which: Subspace) -> bool {
        u.iter().all(|(m, _)| self.monomial_in_subspace(m, which))
    }

    fn monomial_in_subspace(&self, m: &Monomial, which: Subspace) -> bool {
        match which {
            Subspace::B0 => {
                m.index.is_zero() && m.alpha != sigma1() && m.alpha != sigma2()
            }
            Subspace::BStar => {
                m.alpha.coord(Axis::A2).is_zero()
                    && m.alpha.coord(Axis::A4).is_zero()
                    && m.index.get(Axis::A2) == 0
                    && m.index.get(Axis::A4) == 0
            }
            Subspace::BF => m.index.is_zero() && (m.alpha.is_zero() || m.alpha == -&sigma()),
        }
    }

    /// The pattern cutting out {u : [1, u] = [x^{−σ}, u] = 0}:
    /// α₂ = α₄ = i₂ = i₄ = 0, or α = σ₁ with level |i| = 1.
    pub fn centralizes_bf_pattern(&self, m: &Monomial) -> bool {
        self.monomial_in_subspace(m, Subspace::BStar)
            || (m.alpha == sigma1() && m.index.level() == 1)
    }
}

/// GradingKey λ = (λ₂, λ₄), the image of an exponent under α ↦ (α₂, α₄).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GradingKey {
    pub lambda2: Scalar,
    pub lambda4: Scalar,
}

impl GradingKey {
    pub fn plus(&self, other: &GradingKey) -> GradingKey {
        GradingKey {
            lambda2: &self.lambda2 + &other.lambda2,
            lambda4: &self.lambda4 + &other.lambda4,
        }
    }
}

/// The distinguished subspaces with a direct monomial characterization.
#[derive(Debug, Copy, Clone, PartialEq, Eq)]
pub enum Subspace {
    /// Index-0 part avoiding σ₁, σ₂: the subalgebra ℬ(Γ, {0}).
    B0,
    /// α₂ = α₄ = i₂ = i₄ = 0.
    BStar,
    /// span{1, x^{−σ}}: the ad-locally-finite elements.
    BF,
}

/// x^{α,i}·x^{β,j} = x^{α+β,i+j}.
pub fn monomial_mul(a: &Monomial, b: &Monomial) -> Monomial {
    Monomial::new(&a.alpha + &b.alpha, a.index.plus(&b.index))
}

/// Bilinear extension of the semigroup product.
pub fn product(u: &Element, v: &Element) -> Element {
    let mut out = Element::zero();
    for (ma, ca) in u.iter() {
        for (mb, cb) in v.iter() {
            out.add_term(monomial_mul(ma, mb), ca * cb);
        }
    }
    out
}

/// ∂_p(x^{α,i}) = α_p·x^{α,i} + i_p·x^{α,i−1_{[p]}}, extended linearly.
pub fn partial(p: Axis, u: &Element) -> Element {
    let mut out = Element::zero();
    for (m, c) in u.iter() {
        let ap = m.alpha.coord(p);
        if !ap.is_zero() {
            out.add_term(m.clone(), c * ap);
        }
        let ip = m.index.get(p);
        if ip > 0 {
            let lowered = m.index.minus_unit(p).expect("slot checked nonzero");
            out.add_term(
                Monomial::new(m.alpha.clone(), lowered),
                c * &Scalar::from(ip),
            );
        }
    }
    out
}

/// Feeds the eight structure-constant terms of [x^{α,i}, x^{β,j}] to `f`
/// as (coefficient, σ-shifted?, index). Terms whose index would go negative
/// vanish; zero coefficients are skipped.
fn for_each_bracket_term(a: &Monomial, b: &Monomial, mut f: impl FnMut(Scalar, bool, MultiIndex)) {
    let al = a.alpha.coords();
    let be = b.alpha.coords();
    let i = &a.index;
    let j = &b.index;
    let s = |n: u32| Scalar::from(n);
    let ij = i.plus(j);
    let one = Scalar::one();
    let a3p1 = &al[2] + &one;
    let b3p1 = &be[2] + &one;

    let mut push = |coef: Scalar, shifted: bool, index: Option<MultiIndex>| {
        if let Some(idx) = index {
            if !coef.is_zero() {
                f(coef, shifted, idx);
            }
        }
    };

    let (i1, i2, i3, i4) = (
        i.get(Axis::A1),
        i.get(Axis::A2),
        i.get(Axis::A3),
        i.get(Axis::A4),
    );
    let (j1, j2, j3, j4) = (
        j.get(Axis::A1),
        j.get(Axis::A2),
        j.get(Axis::A3),
        j.get(Axis::A4),
    );

    push(&al[0] * &be[1] - &be[0] * &al[1], true, Some(ij));
    push(
        &al[0] * &s(j2) - &be[0] * &s(i2),
        true,
        ij.minus_unit(Axis::A2),
    );
    push(
        &s(i1) * &be[1] - &s(j1) * &al[1],
        true,
        ij.minus_unit(Axis::A1),
    );
    push(
        Scalar::from(i64::from(i1) * i64::from(j2) - i64::from(j1) * i64::from(i2)),
        true,
        ij.minus_unit(Axis::A1).and_then(|x| x.minus_unit(Axis::A2)),
    );
    push(&a3p1 * &be[3] - &b3p1 * &al[3], false, Some(ij));
    push(
        &a3p1 * &s(j4) - &b3p1 * &s(i4),
        false,
        ij.minus_unit(Axis::A4),
    );
    push(
        &s(i3) * &be[3] - &s(j3) * &al[3],
        false,
        ij.minus_unit(Axis::A3),
    );
    push(
        Scalar::from(i64::from(i3) * i64::from(j4) - i64::from(j3) * i64::from(i4)),
        false,
        ij.minus_unit(Axis::A3).and_then(|x| x.minus_unit(Axis::A4)),
    );
}

/// The eight structure-constant terms of [x^{α,i}, x^{β,j}], scaled,
/// accumulated into `acc`.
fn bracket_monomials_into(acc: &mut Element, a: &Monomial, b: &Monomial, scale: &Scalar) {
    if scale.is_zero() {
        return;
    }
    let sum = &a.alpha + &b.alpha;
    let sum_sigma = &sum + &sigma();
    for_each_bracket_term(a, b, |coef, shifted, idx| {
        let alpha = if shifted { &sum_sigma } else { &sum };
        acc.add_term(Monomial::new(alpha.clone(), idx), &coef * scale);
    });
}

const SAMPLE_REROLLS: u32 = 1000;

/// One deterministic pseudo-random basis monomial for the given seed.
pub fn sample_monomial(
    def: &AlgebraDef,
    coord_bound: i64,
    index_bound: u32,
    seed: u64,
) -> Result<Monomial, AlgebraError> {
    draw_monomial(def, coord_bound, index_bound, &mut SplitMix64::new(seed))
}

/// Draws a valid monomial from the running stream: exponent z·basis with
/// z ∈ [−coord_bound, coord_bound]^rank, index entries in [0, index_bound]
/// on the active slots. Excluded symbols are rerolled.
pub fn draw_monomial(
    def: &AlgebraDef,
    coord_bound: i64,
    index_bound: u32,
    rng: &mut SplitMix64,
) -> Result<Monomial, AlgebraError> {
    assert!(coord_bound >= 1 && index_bound >= 1, "bounds must be >= 1");
    for _ in 0..SAMPLE_REROLLS {
        let z: Vec<BigInt> = (0..def.lattice.rank())
            .map(|_| BigInt::from(rng.int_in(-coord_bound, coord_bound)))
            .collect();
        let alpha = def.lattice.linear_combination(&z);
        let mut idx = [0u32; 4];
        for p in Axis::ALL {
            if def.shape.allows(p) {
                idx[p.index()] = rng.below(u64::from(index_bound) + 1) as u32;
            }
        }
        let m = Monomial::new(alpha, MultiIndex::new(idx));
        if !def.is_excluded(&m) {
            return Ok(m);
        }
    }
    Err(AlgebraError::SamplingExhausted {
        attempts: SAMPLE_REROLLS,
    })
}

/// A finite box of basis monomials: exponents with basis coordinates in
/// [−coord_bound, coord_bound] and index level |i| ≤ level_bound.
#[derive(Debug, Copy, Clone)]
pub struct MonomialWindow {
    pub coord_bound: i64,
    pub level_bound: u32,
}

impl MonomialWindow {
    pub fn new(coord_bound: i64, level_bound: u32) -> Self {
        MonomialWindow {
            coord_bound,
            level_bound,
        }
    }

    /// Every valid basis monomial in the window, in a fixed order.
    pub fn monomials(&self, def: &AlgebraDef) -> Vec<Monomial> {
        let rank = def.lattice().rank();
        let indices = self.indices(def.shape());
        let mut out = Vec::new();
        let mut z = vec![-self.coord_bound; rank];
        loop {
            let zb: Vec<BigInt> = z.iter().map(|&k| BigInt::from(k)).collect();
            let alpha = def.lattice().linear_combination(&zb);
            for idx in &indices {
                let m = Monomial::new(alpha.clone(), *idx);
                if !def.is_excluded(&m) {
                    out.push(m);
                }
            }
            // Odometer step over the coordinate box.
            let mut k = 0;
            loop {
                if k == rank {
                    return out;
                }
                if z[k] < self.coord_bound {
                    z[k] += 1;
                    break;
                }
                z[k] = -self.coord_bound;
                k += 1;
            }
        }
    }

    /// All shape-respecting indices with level ≤ level_bound.
    pub fn indices(&self, shape: &ShapeVector) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let l = self.level_bound;
        let cap = |p: Axis| if shape.allows(p) { l } else { 0 };
        for i1 in 0..=cap(Axis::A1) {
            for i2 in 0..=cap(Axis::A2) {
                for i3 in 0..=cap(Axis::A3) {
                    for i4 in 0..=cap(Axis::A4) {
                        if i1 + i2 + i3 + i4 <= l {
                            out.push(MultiIndex::new([i1, i2, i3, i4]));
                        }
                    }
                }
            }
        }
        out
    }

    pub fn contains(&self, def: &AlgebraDef, m: &Monomial) -> bool {
        if m.index.level() > self.level_bound || !m.index.respects(def.shape()) {
            return false;
        }
        match def.lattice().coords_of(&m.alpha) {
            None => false,
            Some(z) => z.iter().all(|c| {
                c.to_i64()
                    .is_some_and(|v| v.abs() <= self.coord_bound)
            }),
        }
    }
}

/// Monomials reachable from the standard generating family inside the
/// window: the index-0 window part together with the four index carriers
/// x^{τ₂,1_{[1]}}, x^{η,1_{[2]}}, x^{τ₄,1_{[3]}}, x^{γ,1_{[4]}} (those whose
/// slot is active).
pub fn generation_closure(
    def: &AlgebraDef,
    window: &MonomialWindow,
) -> Result<BTreeSet<Monomial>, AlgebraError> {
    let mut gens: Vec<Element> = window
        .monomials(def)
        .into_iter()
        .filter(|m| m.index.is_zero())
        .map(Element::monomial)
        .collect();
    let d = def.distinguished();
    let carriers = [
        (Axis::A1, &d.tau2),
        (Axis::A2, &d.eta),
        (Axis::A3, &d.tau4),
        (Axis::A4, &d.gamma),
    ];
    for (p, alpha) in carriers {
        if def.shape().allows(p) {
            gens.push(Element::monomial(Monomial::new(
                alpha.clone(),
                MultiIndex::unit(p),
            )));
        }
    }
    span_closure(def, &gens, window)
}

/// Closes the span of `generators` under the bracket, truncating every
/// output to the window, and reports which window monomials end up inside
/// the span. A bounded shadow of an infinite-dimensional statement: partial
/// coverage is data, not an error.
pub fn span_closure(
    def: &AlgebraDef,
    generators: &[Element],
    window: &MonomialWindow,
) -> Result<BTreeSet<Monomial>, AlgebraError> {
    for g in generators {
        def.validate_element(g)?;
    }
    let mut space = ClosureSpace::new(def, window)?;
    let mut pair_queue: VecDeque<(usize, usize)> = VecDeque::new();

    for g in generators {
        let v = space.vector_of(g)?;
        if let Some(t) = space.insert(v) {
            for s in 0..t {
                pair_queue.push_back((s, t));
            }
        }
    }

    // Breadth-first over pairs: keeps bracket words shallow, which keeps the
    // rational coefficients small. Pairs of rows supported entirely on the
    // index-0 layer bracket back into that layer, so they are dead weight
    // once the whole layer is pivoted.
    while !space.is_full_rank() {
        let Some((s, t)) = pair_queue.pop_front() else {
            break;
        };
        if space.flat[s] && space.flat[t] && space.index0_layer_covered() {
            continue;
        }
        let w = space.bracket_ids(s, t);
        if let Some(t_new) = space.insert(w) {
            for s2 in 0..t_new {
                pair_queue.push_back((s2, t_new));
            }
        }
    }

    let mut reached = BTreeSet::new();
    if space.is_full_rank() {
        for id in 0..space.window_count {
            reached.insert(space.table[id as usize].monomial.clone());
        }
    } else {
        for id in 0..space.window_count {
            if space.reduces_to_zero(id) {
                reached.insert(space.table[id as usize].monomial.clone());
            }
        }
    }
    Ok(reached)
}

type SparseVec = Vec<(u32, Scalar)>;

struct IdEntry {
    z: [i64; 4],
    monomial: Monomial,
}

/// Indexed window space with a leading-term echelon basis.
struct ClosureSpace<'a> {
    def: &'a AlgebraDef,
    window: &'a MonomialWindow,
    table: Vec<IdEntry>,
    ids: HashMap<([i64; 4], MultiIndex), u32>,
    window_count: u32,
    z_sigma: [i64; 4],
    rows: HashMap<u32, SparseVec>,
    basis: Vec<SparseVec>,
    /// Per basis row: is the support entirely index-0?
    flat: Vec<bool>,
    index0_total: usize,
    index0_pivots: usize,
}

impl<'a> ClosureSpace<'a> {
    fn new(def: &'a AlgebraDef, window: &'a MonomialWindow) -> Result<Self, AlgebraError> {
        let mut space = ClosureSpace {
            def,
            window,
            table: Vec::new(),
            ids: HashMap::new(),
            window_count: 0,
            z_sigma: [0; 4],
            rows: HashMap::new(),
            basis: Vec::new(),
            flat: Vec::new(),
            index0_total: 0,
            index0_pivots: 0,
        };
        space.z_sigma = space.coords_i64(&sigma())?;
        for m in window.monomials(def) {
            let z = space.coords_i64(&m.alpha)?;
            space.intern(z, m);
        }
        space.window_count = space.table.len() as u32;
        Ok(space)
    }

    /// Every interned symbol is a pivot: the span is the whole space.
    fn is_full_rank(&self) -> bool {
        self.basis.len() == self.table.len()
    }

    fn index0_layer_covered(&self) -> bool {
        self.index0_pivots == self.index0_total
    }

    fn coords_i64(&self, alpha: &Vec4) -> Result<[i64; 4], AlgebraError> {
        let z = self
            .def
            .lattice()
            .coords_of(alpha)
            .ok_or_else(|| AlgebraError::NotInLattice {
                alpha: alpha.clone(),
            })?;
        let mut out = [0i64; 4];
        for (slot, c) in out.iter_mut().zip(&z) {
            *slot = c.to_i64().expect("coordinate fits i64");
        }
        Ok(out)
    }

    fn intern(&mut self, z: [i64; 4], m: Monomial) -> u32 {
        if let Some(&id) = self.ids.get(&(z, m.index)) {
            return id;
        }
        let id = self.table.len() as u32;
        self.ids.insert((z, m.index), id);
        if m.index.is_zero() {
            self.index0_total += 1;
        }
        self.table.push(IdEntry { z, monomial: m });
        id
    }

    /// Converts an element into id space, interning any monomial outside the
    /// window (generators may sit outside it).
    fn vector_of(&mut self, el: &Element) -> Result<SparseVec, AlgebraError> {
        let mut v: Vec<(u32, Scalar)> = Vec::with_capacity(el.len());
        for (m, c) in el.iter() {
            let z = self.coords_i64(&m.alpha)?;
            v.push((self.intern(z, m.clone()), c.clone()));
        }
        v.sort_by_key(|&(id, _)| id);
        Ok(v)
    }

    fn lookup_window(&self, z: &[i64; 4], index: MultiIndex) -> Option<u32> {
        if index.level() > self.window.level_bound {
            return None;
        }
        if z.iter().any(|&c| c.abs() > self.window.coord_bound) {
            return None;
        }
        self.ids.get(&(*z, index)).copied()
    }

    /// Bracket of two stored basis vectors, truncated to the window.
    fn bracket_ids(&self, s: usize, t: usize) -> SparseVec {
        let mut acc: HashMap<u32, Scalar> = HashMap::new();
        for (ia, ca) in &self.basis[s] {
            for (ib, cb) in &self.basis[t] {
                let scale = ca * cb;
                let ea = &self.table[*ia as usize];
                let eb = &self.table[*ib as usize];
                let mut z_plain = [0i64; 4];
                let mut z_shift = [0i64; 4];
                for k in 0..4 {
                    z_plain[k] = ea.z[k] + eb.z[k];
                    z_shift[k] = z_plain[k] + self.z_sigma[k];
                }
                for_each_bracket_term(&ea.monomial, &eb.monomial, |coef, shifted, idx| {
                    let z = if shifted { &z_shift } else { &z_plain };
                    if let Some(id) = self.lookup_window(z, idx) {
                        let slot = acc.entry(id).or_insert_with(Scalar::zero);
                        *slot += &(&coef * &scale);
                    }
                });
            }
        }
        let mut v: SparseVec = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        v.sort_by_key(|&(id, _)| id);
        v
    }

    /// Leading-term reduction against the echelon rows.
    fn reduce(&self, mut v: SparseVec) -> SparseVec {
        loop {
            let Some((lead, coef)) = v.last().cloned() else {
                return v;
            };
            let Some(row) = self.rows.get(&lead) else {
                return v;
            };
            v = sparse_sub_scaled(&v, row, &coef);
        }
    }

    fn reduces_to_zero(&self, id: u32) -> bool {
        self.reduce(vec![(id, Scalar::one())]).is_empty()
    }

    /// Inserts a vector; returns the index of the new basis entry, if it was
    /// independent.
    fn insert(&mut self, v: SparseVec) -> Option<usize> {
        let v = self.reduce(v);
        let (lead, coef) = v.last().cloned()?;
        let inv = coef.recip();
        let normalized: SparseVec = v.iter().map(|(id, c)| (*id, c * &inv)).collect();
        if self.table[lead as usize].monomial.index.is_zero() {
            self.index0_pivots += 1;
        }
        self.flat.push(
            normalized
                .iter()
                .all(|(id, _)| self.table[*id as usize].monomial.index.is_zero()),
        );
        self.rows.insert(lead, normalized.clone());
        self.basis.push(normalized);
        Some(self.basis.len() - 1)
    }
}

fn sparse_sub_scaled(v: &SparseVec, row: &SparseVec, coef: &Scalar) -> SparseVec {
    // v − coef·row, both sorted by id.
    let mut out = Vec::with_capacity(v.len() + row.len());
    let (mut a, mut b) = (0, 0);
    while a < v.len() || b < row.len() {
        if b == row.len() || (a < v.len() && v[a].0 < row[b].0) {
            out.push(v[a].clone());
            a += 1;
        } else if a == v.len() || row[b].0 < v[a].0 {
            let c = -(&row[b].1 * coef);
            if !c.is_zero() {
                out.push((row[b].0, c));
            }
            b += 1;
        } else {
            let c = &v[a].1 - &(&row[b].1 * coef);
            if !c.is_zero() {
                out.push((v[a].0, c));
            }
            a += 1;
            b += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::z4;

    fn def(flags: [bool; 4]) -> AlgebraDef {
        AlgebraDef::new(z4(), ShapeVector::new(flags), 16).unwrap()
    }

    fn xv(coords: [i64; 4]) -> Element {
        Element::monomial(Monomial::of_vec(Vec4::from_ints(coords)))
    }

    fn xm(coords: [i64; 4], idx: [u32; 4]) -> Element {
        Element::monomial(Monomial::new(Vec4::from_ints(coords), MultiIndex::new(idx)))
    }

    #[test]
    fn semigroup_product() {
        let one = Monomial::one();
        let s = Monomial::of_vec(Vec4::from_ints([1, 0, 1, 0]));
        assert_eq!(monomial_mul(&s, &one), s);

        let a = Monomial::new(Vec4::from_ints([1, 0, 0, 0]), MultiIndex::new([1, 0, 0, 0]));
        let b = Monomial::new(Vec4::from_ints([0, 1, 0, 0]), MultiIndex::new([2, 0, 0, 0]));
        assert_eq!(
            monomial_mul(&a, &b),
            Monomial::new(Vec4::from_ints([1, 1, 0, 0]), MultiIndex::new([3, 0, 0, 0]))
        );
    }

    #[test]
    fn product_is_commutative() {
        let d = def([true; 4]);
        let mut rng = SplitMix64::new(11);
        for _ in 0..100 {
            let a = Element::monomial(draw_monomial(&d, 3, 2, &mut rng).unwrap());
            let b = Element::monomial(draw_monomial(&d, 3, 2, &mut rng).unwrap());
            assert_eq!(product(&a, &b), product(&b, &a));
        }
    }

    #[test]
    fn partial_of_a_monomial() {
        let u = xm([2, 0, 0, 0], [3, 0, 0, 0]);
        let got = partial(Axis::A1, &u);
        let mut want = xm([2, 0, 0, 0], [3, 0, 0, 0]).scale(&Scalar::from(2));
        want.add_scaled(&xm([2, 0, 0, 0], [2, 0, 0, 0]), &Scalar::from(3));
        assert_eq!(got, want);

        assert!(partial(Axis::A3, &Element::one()).is_zero());
    }

    #[test]
    fn partials_commute() {
        let d = def([true; 4]);
        let mut rng = SplitMix64::new(5);
        for _ in 0..100 {
            let mut u = Element::monomial(draw_monomial(&d, 3, 2, &mut rng).unwrap());
            u.add_scaled(
                &Element::monomial(draw_monomial(&d, 3, 2, &mut rng).unwrap()),
                &Scalar::new(-2, 3),
            );
            let d12 = partial(Axis::A1, &partial(Axis::A2, &u));
            let d21 = partial(Axis::A2, &partial(Axis::A1, &u));
            assert_eq!(d12, d21);
        }
    }

    #[test]
    fn bracket_identities_with_tau_elements() {
        for d in [def([false; 4]), def([true; 4])] {
            let dist = d.distinguished().clone();
            let tau2 = Element::monomial(Monomial::of_vec(dist.tau2.clone()));
            let tau4 = Element::monomial(Monomial::of_vec(dist.tau4.clone()));

            // [1, x^{τ₄}] = b·x^{τ₄}
            let got = d.bracket(&Element::one(), &tau4).unwrap();
            assert_eq!(got, tau4.scale(&dist.b));

            // [x^{τ₂}, x^{τ₄}] = 0
            assert!(d.bracket(&tau2, &tau4).unwrap().is_zero());

            // [x^{−σ}, x^{τ₂}] = −a·x^{τ₂}
            let xms = Element::monomial(Monomial::of_vec(-&sigma()));
            let got = d.bracket(&xms, &tau2).unwrap();
            assert_eq!(got, tau2.scale(&-&dist.a));
        }
    }

    #[test]
    fn bracket_pairing_with_opposite_exponent() {
        let d = def([true; 4]);
        let alpha = Vec4::from_ints([2, 3, 1, 5]);
        let opp = &(-&alpha) - &sigma();
        let got = d
            .bracket(
                &Element::monomial(Monomial::of_vec(alpha)),
                &Element::monomial(Monomial::of_vec(opp)),
            )
            .unwrap();
        let mut want = Element::one().scale(&Scalar::from(3));
        want.add_scaled(
            &Element::monomial(Monomial::of_vec(-&sigma())),
            &Scalar::from(-5),
        );
        assert_eq!(got, want);
    }

    #[test]
    fn bracket_of_anything_with_itself_vanishes() {
        let d = def([true, false, true, false]);
        let mut rng = SplitMix64::new(3);
        for _ in 0..50 {
            let mut u = Element::monomial(draw_monomial(&d, 3, 2, &mut rng).unwrap());
            u.add_scaled(
                &Element::monomial(draw_monomial(&d, 3, 2, &mut rng).unwrap()),
                &Scalar::new(7, 2),
            );
            assert!(d.bracket(&u, &u).unwrap().is_zero());
        }
    }

    #[test]
    fn oracle_hand_expansion() {
        // Only the −∂₁(v)∂₂(u) term contributes.
        let d = def([false; 4]);
        let got = d
            .bracket_oracle(&xv([0, 1, 0, 0]), &xv([1, 0, 0, 0]))
            .unwrap();
        assert_eq!(got, xv([2, 1, 1, 0]).scale(&Scalar::from(-1)));
        assert_eq!(
            got,
            d.bracket(&xv([0, 1, 0, 0]), &xv([1, 0, 0, 0])).unwrap()
        );

        assert!(d
            .bracket_oracle(&Element::one(), &Element::one())
            .unwrap()
            .is_zero());
    }

    #[test]
    fn quotient_drops_sigma1_symbol() {
        // α + β + σ = σ₁ with structure constant 1, so the whole bracket
        // collapses to zero in the quotient.
        let d = def([false; 4]);
        let u = xv([1, 1, 0, 0]);
        let v = xv([-2, -1, -2, 0]);
        let got = d.bracket(&u, &v).unwrap();
        assert!(got.is_zero());
        assert_eq!(got, d.bracket_oracle(&u, &v).unwrap());
    }

    #[test]
    fn grading_examples() {
        let d = def([true; 4]);
        let mut u = xv([1, 2, 0, 3]);
        u.add_scaled(&xv([5, 2, 7, 3]), &Scalar::one());
        let parts = d.grade(&u);
        assert_eq!(parts.len(), 1);
        let key = GradingKey {
            lambda2: Scalar::from(2),
            lambda4: Scalar::from(3),
        };
        assert_eq!(parts[&key], u);

        let mut w = Element::one();
        w.add_scaled(&xv([-1, 0, -1, 0]), &Scalar::one());
        let parts = d.grade(&w);
        assert_eq!(parts.len(), 1);
        assert!(parts.contains_key(&GradingKey {
            lambda2: Scalar::zero(),
            lambda4: Scalar::zero(),
        }));
    }

    #[test]
    fn subspace_examples() {
        let d = def([true; 4]);
        let xms = xv([-1, 0, -1, 0]);
        assert!(d.is_in_subspace(&xms, Subspace::BF));
        assert!(d.is_in_subspace(&xms, Subspace::BStar));
        assert!(!d.is_in_subspace(&xv([0, 1, 0, 0]), Subspace::BStar));
        assert!(d.is_in_subspace(&xv([0, 1, 0, 0]), Subspace::B0));
        assert!(!d.is_in_subspace(&xm([1, 0, 0, 0], [1, 0, 0, 0]), Subspace::B0));
    }

    #[test]
    fn sampler_is_deterministic_and_valid() {
        let d = def([true, false, true, false]);
        let a = sample_monomial(&d, 3, 2, 99).unwrap();
        let b = sample_monomial(&d, 3, 2, 99).unwrap();
        assert_eq!(a, b);
        let mut rng = SplitMix64::new(4);
        let mut nonzero_index = 0;
        for _ in 0..100 {
            let m = draw_monomial(&d, 2, 2, &mut rng).unwrap();
            d.validate_monomial(&m).unwrap();
            if !m.index.is_zero() {
                nonzero_index += 1;
            }
        }
        assert!(nonzero_index >= 1);
    }

    #[test]
    fn monomial_validation_rejects_bad_input() {
        let d = def([false, true, false, true]);
        let err = d
            .validate_monomial(&Monomial::new(
                Vec4::from_ints([1, 0, 0, 0]),
                MultiIndex::new([1, 0, 0, 0]),
            ))
            .unwrap_err();
        assert!(matches!(err, AlgebraError::IndexShapeViolation { .. }));

        let err = d
            .validate_monomial(&Monomial::new(
                Vec4::new([
                    Scalar::new(1, 2),
                    Scalar::zero(),
                    Scalar::zero(),
                    Scalar::zero(),
                ]),
                MultiIndex::zero(),
            ))
            .unwrap_err();
        assert!(matches!(err, AlgebraError::NotInLattice { .. }));

        let err = d
            .validate_monomial(&Monomial::of_vec(sigma1()))
            .unwrap_err();
        assert!(matches!(err, AlgebraError::ExcludedMonomial { .. }));
    }

    #[test]
    fn window_enumeration_counts() {
        let d = def([false; 4]);
        let w = MonomialWindow::new(1, 2);
        // 3^4 exponents minus the two excluded symbols (σ₁ and σ₂ is outside
        // the box: (1,0,-2,0) has a coordinate of modulus 2).
        let ms = w.monomials(&d);
        assert_eq!(ms.len(), 80);
        for m in &ms {
            assert!(w.contains(&d, m));
            d.validate_monomial(m).unwrap();
        }
        assert!(!w.contains(&d, &Monomial::of_vec(Vec4::from_ints([2, 0, 0, 0]))));
    }

    #[test]
    fn closure_with_trivial_shape_is_the_window() {
        let d = def([false; 4]);
        let w = MonomialWindow::new(1, 0);
        let reached = generation_closure(&d, &w).unwrap();
        let all: BTreeSet<Monomial> = w.monomials(&d).into_iter().collect();
        assert_eq!(reached, all);
    }

    #[test]
    fn closure_of_empty_generator_set_is_empty() {
        let d = def([true; 4]);
        let w = MonomialWindow::new(1, 1);
        let reached = span_closure(&d, &[], &w).unwrap();
        assert!(reached.is_empty());
    }
}
