//! Finitely generated additive subgroups Γ of ℚ⁴.
//!
//! A subgroup is presented by a finite generating set. Clearing denominators
//! with one common scale turns it into an integer row lattice whose Hermite
//! normal form, rescaled back, is the canonical basis: equal subgroups get
//! identical bases no matter how they were presented. Membership, axis-line
//! sections and the distinguished-element searches are all answered exactly
//! through that basis.

use crate::hnf::RowHnf;
use crate::scalar::Scalar;
use crate::vec4::{Axis, Vec4};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use thiserror::Error;

/// σ = (1, 0, 1, 0), the fixed reference vector of the whole construction.
pub fn sigma() -> Vec4 {
    Vec4::from_ints([1, 0, 1, 0])
}

/// σ₁ = (0, 0, −1, 0).
pub fn sigma1() -> Vec4 {
    Vec4::from_ints([0, 0, -1, 0])
}

/// σ₂ = (1, 0, −2, 0).
pub fn sigma2() -> Vec4 {
    Vec4::from_ints([1, 0, -2, 0])
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("a lattice needs at least one nonzero generator")]
    EmptyLattice,
    #[error("distinguished-element search exhausted after {bound} steps looking for {what}")]
    SearchExhausted { what: String, bound: u32 },
}

/// A finitely generated additive subgroup of ℚ⁴ with its canonical basis.
#[derive(Debug, Clone)]
pub struct Lattice {
    generators: Vec<Vec4>,
    basis: Vec<Vec4>,
    scale: BigInt,
    scaled: RowHnf,
}

impl PartialEq for Lattice {
    /// Equality of subgroups, via the canonical basis.
    fn eq(&self, other: &Self) -> bool {
        self.basis == other.basis
    }
}

impl Eq for Lattice {}

impl Lattice {
    /// Canonical basis of the subgroup generated by `generators`.
    pub fn canonical_basis(generators: Vec<Vec4>) -> Result<Lattice, LatticeError> {
        if generators.iter().all(Vec4::is_zero) {
            return Err(LatticeError::EmptyLattice);
        }
        let mut scale = BigInt::one();
        for g in &generators {
            for c in g.coords() {
                scale = scale.lcm(c.denom());
            }
        }
        let scale_s = Scalar::from_bigint(scale.clone());
        let int_rows: Vec<Vec<BigInt>> = generators
            .iter()
            .map(|g| {
                g.coords()
                    .iter()
                    .map(|c| (c * &scale_s).as_integer().expect("cleared denominator"))
                    .collect()
            })
            .collect();
        let scaled = RowHnf::compute(&int_rows);
        let basis = scaled
            .rows
            .iter()
            .map(|row| {
                Vec4::new([0, 1, 2, 3].map(|k| {
                    &Scalar::from_bigint(row[k].clone()) / &scale_s
                }))
            })
            .collect();
        Ok(Lattice {
            generators,
            basis,
            scale,
            scaled,
        })
    }

    pub fn generators(&self) -> &[Vec4] {
        &self.generators
    }

    /// The canonical (Hermite-normal-form) basis rows.
    pub fn basis(&self) -> &[Vec4] {
        &self.basis
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn scale(&self) -> &BigInt {
        &self.scale
    }

    /// Integer coordinates of `v` in the canonical basis, if `v` lies in the
    /// subgroup.
    pub fn coords_of(&self, v: &Vec4) -> Option<Vec<BigInt>> {
        let scale_s = Scalar::from_bigint(self.scale.clone());
        let mut target = Vec::with_capacity(4);
        for c in v.coords() {
            target.push((c * &scale_s).as_integer()?);
        }
        self.scaled.solve(&target)
    }

    /// Exact membership test.
    pub fn contains(&self, v: &Vec4) -> bool {
        self.coords_of(v).is_some()
    }

    /// The lattice point with the given integer coordinates.
    pub fn linear_combination(&self, z: &[BigInt]) -> Vec4 {
        assert_eq!(z.len(), self.rank());
        let mut acc = Vec4::zero();
        for (c, row) in z.iter().zip(&self.basis) {
            acc = &acc + &(row * &Scalar::from_bigint(c.clone()));
        }
        acc
    }

    /// The set {t ∈ ℚ : base + t·e_p ∈ Γ}, described exactly.
    ///
    /// `base = None` means the linear section Γ ∩ ℚ·e_p; that section always
    /// contains t = 0, so it reports `Empty` exactly when it is the trivial
    /// subgroup {0}. Affine sections report genuine single points as
    /// step-0 cosets.
    pub fn line_intersections(&self, p: Axis, base: Option<&Vec4>) -> LineSet {
        let zero = Vec4::zero();
        let base = base.unwrap_or(&zero);
        let linear = base.is_zero();
        let scale_s = Scalar::from_bigint(self.scale.clone());
        let c: Vec<Scalar> = base.coords().iter().map(|x| x * &scale_s).collect();

        // Off-axis coordinates of the scaled base must be integers.
        let mut target = Vec::with_capacity(3);
        for (k, ck) in c.iter().enumerate() {
            if k == p.index() {
                continue;
            }
            match ck.as_integer() {
                Some(n) => target.push(n),
                None => return LineSet::Empty,
            }
        }

        let projected: Vec<Vec<BigInt>> = self
            .scaled
            .rows
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|&(k, _)| k != p.index())
                    .map(|(_, x)| x.clone())
                    .collect()
            })
            .collect();
        let ph = RowHnf::compute(&projected);
        let Some(y) = ph.solve(&target) else {
            return LineSet::Empty;
        };

        // Coordinates of one solution in the scaled basis rows.
        let rows = self.rank();
        let mut z0 = vec![BigInt::zero(); rows];
        for (yi, urow) in y.iter().zip(&ph.transform) {
            for k in 0..rows {
                z0[k] += yi * &urow[k];
            }
        }
        let axis_value = |z: &[BigInt]| -> BigInt {
            z.iter()
                .zip(&self.scaled.rows)
                .map(|(zi, row)| zi * &row[p.index()])
                .sum()
        };
        let w0 = axis_value(&z0);

        let mut g = BigInt::zero();
        for k in ph.kernel() {
            g = g.gcd(&axis_value(k));
        }

        let t0 = &(Scalar::from_bigint(w0) - c[p.index()].clone()) / &scale_s;
        let step = &Scalar::from_bigint(g) / &scale_s;
        if linear && step.is_zero() {
            LineSet::Empty
        } else if step.is_zero() {
            LineSet::Coset { base: t0, step }
        } else {
            // Normalize the representative into [0, step).
            let q = &t0 / &step;
            let k = q.numer().div_floor(q.denom());
            let base = t0 - &step * &Scalar::from_bigint(k);
            LineSet::Coset { base, step }
        }
    }

    /// Checks the seven admissibility conditions on Γ.
    pub fn validate_gamma(&self) -> GammaReport {
        let mut checks = Vec::with_capacity(7);
        checks.push(GammaCheck {
            name: "sigma_membership",
            pass: self.contains(&sigma()),
        });
        for p in Axis::ALL {
            let pass = match self.line_intersections(p, None) {
                LineSet::Empty => false,
                LineSet::Coset { ref step, .. } => !step.is_zero(),
            };
            checks.push(GammaCheck {
                name: AXIS_CHECK_NAMES[p.index()],
                pass,
            });
        }
        for (q, name) in [(Axis::A1, "affine_line_q1"), (Axis::A3, "affine_line_q3")] {
            let next = Axis::new(q.number() + 1).unwrap();
            let base = Vec4::unit(q);
            let pass = !matches!(self.line_intersections(next, Some(&base)), LineSet::Empty);
            checks.push(GammaCheck { name, pass });
        }
        GammaReport { checks }
    }

    /// Locates τ₂, τ₄, γ, η and the σ₁/σ₂ membership flags.
    ///
    /// Each scalar is the first admissible value of its line section in the
    /// enumeration order t₀, t₀+s, t₀−s, t₀+2s, …, so the result is
    /// deterministic for a given subgroup.
    pub fn find_distinguished(
        &self,
        search_bound: u32,
    ) -> Result<DistinguishedElements, LatticeError> {
        let minus_e3 = Vec4::from_ints([0, 0, -1, 0]);
        let a = self.pick_line_value(Axis::A2, Some(&minus_e3), search_bound, "a", |t| {
            !t.is_zero()
        })?;
        let b = self.pick_line_value(Axis::A4, Some(&minus_e3), search_bound, "b", |t| {
            !t.is_zero()
        })?;
        let c = self.pick_line_value(Axis::A3, None, search_bound, "c", |t| {
            !t.is_zero() && t != &Scalar::from(-1) && t != &Scalar::from(-2)
        })?;
        let e = self.pick_line_value(Axis::A1, Some(&minus_e3), search_bound, "e", |t| {
            !t.is_zero() && t.abs() != Scalar::one()
        })?;

        let tau2 = Vec4::new([Scalar::zero(), a.clone(), Scalar::from(-1), Scalar::zero()]);
        let tau4 = Vec4::new([Scalar::zero(), Scalar::zero(), Scalar::from(-1), b.clone()]);
        let gamma = Vec4::axis(Axis::A3, c.clone());
        let eta = Vec4::new([e.clone(), Scalar::zero(), Scalar::from(-1), Scalar::zero()]);
        debug_assert!(self.contains(&tau2) && self.contains(&tau4));
        debug_assert!(self.contains(&gamma) && self.contains(&eta));

        Ok(DistinguishedElements {
            sigma: sigma(),
            sigma1: sigma1(),
            sigma1_member: self.contains(&sigma1()),
            sigma2: sigma2(),
            sigma2_member: self.contains(&sigma2()),
            tau1: -&sigma(),
            tau2,
            a,
            tau3: Vec4::zero(),
            tau4,
            b,
            gamma,
            c,
            eta,
            e,
        })
    }

    fn pick_line_value(
        &self,
        p: Axis,
        base: Option<&Vec4>,
        bound: u32,
        what: &str,
        admissible: impl Fn(&Scalar) -> bool,
    ) -> Result<Scalar, LatticeError> {
        self.line_intersections(p, base)
            .first_admissible(bound, admissible)
            .ok_or_else(|| LatticeError::SearchExhausted {
                what: what.to_string(),
                bound,
            })
    }
}

const AXIS_CHECK_NAMES: [&str; 4] = [
    "axis_line_1_nontrivial",
    "axis_line_2_nontrivial",
    "axis_line_3_nontrivial",
    "axis_line_4_nontrivial",
];

/// A section {t : base + t·e_p ∈ Γ} of Γ along one axis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LineSet {
    Empty,
    /// {base + k·step : k ∈ ℤ}; `step = 0` means the single point `base`.
    Coset { base: Scalar, step: Scalar },
}

impl LineSet {
    pub fn contains(&self, t: &Scalar) -> bool {
        match self {
            LineSet::Empty => false,
            LineSet::Coset { base, step } => {
                let diff = t - base;
                if step.is_zero() {
                    diff.is_zero()
                } else {
                    (diff / step).is_integer()
                }
            }
        }
    }

    /// First admissible value in the enumeration t₀, t₀+s, t₀−s, t₀+2s, …,
    /// trying at most `bound` steps away from the representative.
    pub fn first_admissible(
        &self,
        bound: u32,
        admissible: impl Fn(&Scalar) -> bool,
    ) -> Option<Scalar> {
        match self {
            LineSet::Empty => None,
            LineSet::Coset { base: t0, step } => {
                if admissible(t0) {
                    return Some(t0.clone());
                }
                if step.is_zero() {
                    return None;
                }
                for k in 1..=bound {
                    let offset = step * &Scalar::from(i64::from(k));
                    for t in [t0 + &offset, t0 - &offset] {
                        if admissible(&t) {
                            return Some(t);
                        }
                    }
                }
                None
            }
        }
    }
}

/// Outcome of one admissibility condition.
#[derive(Debug, Clone, Serialize)]
pub struct GammaCheck {
    pub name: &'static str,
    pub pass: bool,
}

/// Pass/fail for each of the seven admissibility conditions.
#[derive(Debug, Clone, Serialize)]
pub struct GammaReport {
    pub checks: Vec<GammaCheck>,
}

impl GammaReport {
    pub fn is_valid(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn first_failure(&self) -> Option<&'static str> {
        self.checks.iter().find(|c| !c.pass).map(|c| c.name)
    }
}

/// The fixed vectors every construction over a valid Γ relies on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistinguishedElements {
    pub sigma: Vec4,
    pub sigma1: Vec4,
    pub sigma1_member: bool,
    pub sigma2: Vec4,
    pub sigma2_member: bool,
    /// τ₁ = −σ.
    pub tau1: Vec4,
    /// τ₂ = (0, a, −1, 0) with a ≠ 0.
    pub tau2: Vec4,
    pub a: Scalar,
    /// τ₃ = 0.
    pub tau3: Vec4,
    /// τ₄ = (0, 0, −1, b) with b ≠ 0.
    pub tau4: Vec4,
    pub b: Scalar,
    /// γ = (0, 0, c, 0) with c ∉ {0, −1, −2}.
    pub gamma: Vec4,
    pub c: Scalar,
    /// η = (e, 0, −1, 0) with e ∉ {0, ±1}.
    pub eta: Vec4,
    pub e: Scalar,
}

impl Serialize for Lattice {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            generators: &'a [Vec4],
        }
        Repr {
            generators: &self.generators,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Lattice {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            generators: Vec<Vec4>,
        }
        let repr = Repr::deserialize(deserializer)?;
        Lattice::canonical_basis(repr.generators).map_err(de::Error::custom)
    }
}

impl fmt::Display for Lattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "lattice{{")?;
        for (k, row) in self.basis.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{row}")?;
        }
        write!(f, "}}")
    }
}

/// ℤ⁴, the standard example of a valid Γ.
pub fn z4() -> Lattice {
    Lattice::canonical_basis(vec![
        Vec4::from_ints([1, 0, 0, 0]),
        Vec4::from_ints([0, 1, 0, 0]),
        Vec4::from_ints([0, 0, 1, 0]),
        Vec4::from_ints([0, 0, 0, 1]),
    ])
    .expect("nonzero generators")
}
