//! Basis symbols x^{α,i} and sparse exact linear combinations of them.

use crate::scalar::Scalar;
use crate::vec4::{Axis, Vec4};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};

/// Which index slots are active: `true` allows arbitrary natural-number
/// indices on that axis, `false` pins them to zero.
#[derive(Debug, Copy, Clone, PartialEq, Eq, Hash)]
pub struct ShapeVector([bool; 4]);

impl ShapeVector {
    pub fn new(flags: [bool; 4]) -> Self {
        ShapeVector(flags)
    }

    /// All four index slots active.
    pub fn full() -> Self {
        ShapeVector([true; 4])
    }

    /// All four index slots pinned to zero.
    pub fn trivial() -> Self {
        ShapeVector([false; 4])
    }

    pub fn allows(&self, p: Axis) -> bool {
        self.0[p.index()]
    }

    /// True when every slot is pinned (J = {0}).
    pub fn is_trivial(&self) -> bool {
        self.0.iter().all(|m| !m)
    }

    pub fn flags(&self) -> [bool; 4] {
        self.0
    }

    /// (m₃, m₄, m₁, m₂): swap the axis pairs (1,2) and (3,4).
    pub fn swap_pairs(&self) -> ShapeVector {
        ShapeVector([self.0[2], self.0[3], self.0[0], self.0[1]])
    }
}

impl fmt::Display for ShapeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v: Vec<u8> = self.0.iter().map(|&m| u8::from(m)).collect();
        write!(f, "({},{},{},{})", v[0], v[1], v[2], v[3])
    }
}

impl Serialize for ShapeVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.0.map(u8::from).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ShapeVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let flags = <[u8; 4]>::deserialize(deserializer)?;
        let mut out = [false; 4];
        for (k, f) in flags.into_iter().enumerate() {
            out[k] = match f {
                0 => false,
                1 => true,
                other => {
                    return Err(de::Error::custom(format!(
                        "shape flags must be 0 or 1, got {other}"
                    )))
                }
            };
        }
        Ok(ShapeVector(out))
    }
}

/// A 4-tuple of natural-number indices i = (i₁, i₂, i₃, i₄).
#[derive(Debug, Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MultiIndex([u32; 4]);

impl MultiIndex {
    pub fn new(i: [u32; 4]) -> Self {
        MultiIndex(i)
    }

    pub fn zero() -> Self {
        MultiIndex([0; 4])
    }

    pub fn unit(p: Axis) -> Self {
        let mut i = [0; 4];
        i[p.index()] = 1;
        MultiIndex(i)
    }

    pub fn get(&self, p: Axis) -> u32 {
        self.0[p.index()]
    }

    pub fn entries(&self) -> [u32; 4] {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0 == [0; 4]
    }

    /// The level |i| = Σ i_p.
    pub fn level(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn plus(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex([
            self.0[0] + other.0[0],
            self.0[1] + other.0[1],
            self.0[2] + other.0[2],
            self.0[3] + other.0[3],
        ])
    }

    /// i − 1_{[p]}, or None when that slot is already zero.
    pub fn minus_unit(&self, p: Axis) -> Option<MultiIndex> {
        let mut i = self.0;
        i[p.index()] = i[p.index()].checked_sub(1)?;
        Some(MultiIndex(i))
    }

    pub fn respects(&self, shape: &ShapeVector) -> bool {
        Axis::ALL.iter().all(|&p| shape.allows(p) || self.get(p) == 0)
    }

    /// (i₃, i₄, i₁, i₂).
    pub fn swap_pairs(&self) -> MultiIndex {
        MultiIndex([self.0[2], self.0[3], self.0[0], self.0[1]])
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{},{})", self.0[0], self.0[1], self.0[2], self.0[3])
    }
}

/// A basis symbol x^{α,i}.
///
/// Field order matters: the derived total order (exponent first, then index)
/// is the canonical term order used everywhere.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Monomial {
    pub alpha: Vec4,
    pub index: MultiIndex,
}

impl Monomial {
    pub fn new(alpha: Vec4, index: MultiIndex) -> Self {
        Monomial { alpha, index }
    }

    /// The identity symbol 1 = x^{0,0}.
    pub fn one() -> Self {
        Monomial::new(Vec4::zero(), MultiIndex::zero())
    }

    /// x^{α,0}.
    pub fn of_vec(alpha: Vec4) -> Self {
        Monomial::new(alpha, MultiIndex::zero())
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.index.is_zero() {
            write!(f, "x^{}", self.alpha)
        } else {
            write!(f, "x^{{{},{}}}", self.alpha, self.index)
        }
    }
}

/// A finite linear combination of basis symbols with nonzero exact
/// coefficients, iterated in the canonical term order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Element {
    terms: BTreeMap<Monomial, Scalar>,
}

impl Element {
    pub fn zero() -> Self {
        Element {
            terms: BTreeMap::new(),
        }
    }

    pub fn monomial(m: Monomial) -> Self {
        Element::term(m, Scalar::one())
    }

    pub fn term(m: Monomial, c: Scalar) -> Self {
        let mut e = Element::zero();
        e.add_term(m, c);
        e
    }

    pub fn one() -> Self {
        Element::monomial(Monomial::one())
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, Scalar)>) -> Self {
        let mut e = Element::zero();
        for (m, c) in terms {
            e.add_term(m, c);
        }
        e
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Monomial, &Scalar)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> Scalar {
        self.terms.get(m).cloned().unwrap_or_else(Scalar::zero)
    }

    /// Largest term in the canonical order.
    pub fn leading(&self) -> Option<(&Monomial, &Scalar)> {
        self.terms.iter().next_back()
    }

    /// Adds `c·m`, merging and dropping zeros.
    pub fn add_term(&mut self, m: Monomial, c: Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += &c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    /// Removes the term on `m` and returns its coefficient.
    pub fn remove_term(&mut self, m: &Monomial) -> Scalar {
        self.terms.remove(m).unwrap_or_else(Scalar::zero)
    }

    pub fn scale(&self, c: &Scalar) -> Element {
        if c.is_zero() {
            return Element::zero();
        }
        Element {
            terms: self
                .terms
                .iter()
                .map(|(m, x)| (m.clone(), x * c))
                .collect(),
        }
    }

    pub fn add_scaled(&mut self, other: &Element, c: &Scalar) {
        if c.is_zero() {
            return;
        }
        for (m, x) in &other.terms {
            self.add_term(m.clone(), x * c);
        }
    }
}

impl Add<&Element> for &Element {
    type Output = Element;
    fn add(self, rhs: &Element) -> Element {
        let mut out = self.clone();
        out.add_scaled(rhs, &Scalar::one());
        out
    }
}

impl Sub<&Element> for &Element {
    type Output = Element;
    fn sub(self, rhs: &Element) -> Element {
        let mut out = self.clone();
        out.add_scaled(rhs, &Scalar::from(-1));
        out
    }
}

impl Neg for &Element {
    type Output = Element;
    fn neg(self) -> Element {
        self.scale(&Scalar::from(-1))
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}·{m}")?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    alpha: Vec4,
    index: MultiIndex,
    coeff: Scalar,
}

impl Serialize for Element {
    /// Array of {alpha, index, coeff} objects in canonical term order;
    /// round-trips bit-exactly.
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let reprs: Vec<TermRepr> = self
            .terms
            .iter()
            .map(|(m, c)| TermRepr {
                alpha: m.alpha.clone(),
                index: m.index,
                coeff: c.clone(),
            })
            .collect();
        reprs.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Element {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let reprs = Vec::<TermRepr>::deserialize(deserializer)?;
        let mut e = Element::zero();
        for r in reprs {
            if r.coeff.is_zero() {
                return Err(de::Error::custom("zero coefficient in element"));
            }
            e.add_term(Monomial::new(r.alpha, r.index), r.coeff);
        }
        Ok(e)
    }
}
