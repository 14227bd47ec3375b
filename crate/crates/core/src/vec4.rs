//! Points of ℚ⁴ and the coordinate-axis index type.

use crate::scalar::Scalar;
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// One of the four coordinate axes, numbered 1 to 4.
#[derive(Debug, Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Axis(u8);

impl Axis {
    pub const A1: Axis = Axis(1);
    pub const A2: Axis = Axis(2);
    pub const A3: Axis = Axis(3);
    pub const A4: Axis = Axis(4);
    pub const ALL: [Axis; 4] = [Axis(1), Axis(2), Axis(3), Axis(4)];

    pub fn new(p: u8) -> Option<Axis> {
        (1..=4).contains(&p).then_some(Axis(p))
    }

    /// 1-based axis number.
    pub fn number(self) -> u8 {
        self.0
    }

    /// 0-based array index.
    pub fn index(self) -> usize {
        usize::from(self.0) - 1
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Serialize for Axis {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_u8(self.0)
    }
}

impl<'de> Deserialize<'de> for Axis {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let p = u8::deserialize(deserializer)?;
        Axis::new(p).ok_or_else(|| de::Error::custom(format!("axis must be 1..=4, got {p}")))
    }
}

/// A point of ℚ⁴, written α = (α₁, α₂, α₃, α₄).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Vec4([Scalar; 4]);

impl Vec4 {
    pub fn new(coords: [Scalar; 4]) -> Self {
        Vec4(coords)
    }

    pub fn from_ints(coords: [i64; 4]) -> Self {
        Vec4(coords.map(Scalar::from))
    }

    pub fn zero() -> Self {
        Vec4([Scalar::zero(), Scalar::zero(), Scalar::zero(), Scalar::zero()])
    }

    /// a·e_p: the vector with `a` in slot `p` and zeros elsewhere.
    pub fn axis(p: Axis, a: Scalar) -> Self {
        let mut v = Vec4::zero();
        v.0[p.index()] = a;
        v
    }

    pub fn unit(p: Axis) -> Self {
        Vec4::axis(p, Scalar::one())
    }

    pub fn coord(&self, p: Axis) -> &Scalar {
        &self.0[p.index()]
    }

    pub fn coords(&self) -> &[Scalar; 4] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Scalar::is_zero)
    }

    /// (v₃, v₄, v₁, v₂): swap the first coordinate pair with the second.
    pub fn swap_pairs(&self) -> Vec4 {
        Vec4([
            self.0[2].clone(),
            self.0[3].clone(),
            self.0[0].clone(),
            self.0[1].clone(),
        ])
    }
}

impl fmt::Display for Vec4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}, {})", self.0[0], self.0[1], self.0[2], self.0[3])
    }
}

impl fmt::Debug for Vec4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Add<&Vec4> for &Vec4 {
    type Output = Vec4;
    fn add(self, rhs: &Vec4) -> Vec4 {
        let mut out = self.clone();
        for k in 0..4 {
            out.0[k] += &rhs.0[k];
        }
        out
    }
}

impl Sub<&Vec4> for &Vec4 {
    type Output = Vec4;
    fn sub(self, rhs: &Vec4) -> Vec4 {
        let mut out = self.clone();
        for k in 0..4 {
            out.0[k] -= &rhs.0[k];
        }
        out
    }
}

impl Neg for &Vec4 {
    type Output = Vec4;
    fn neg(self) -> Vec4 {
        Vec4([-&self.0[0], -&self.0[1], -&self.0[2], -&self.0[3]])
    }
}

impl Mul<&Scalar> for &Vec4 {
    type Output = Vec4;
    fn mul(self, rhs: &Scalar) -> Vec4 {
        Vec4([
            &self.0[0] * rhs,
            &self.0[1] * rhs,
            &self.0[2] * rhs,
            &self.0[3] * rhs,
        ])
    }
}
