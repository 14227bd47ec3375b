//! Exact computer algebra for the simple Lie algebras of Xu type.
//!
//! The algebras ℬ(Γ, J) are built from a finitely generated additive
//! subgroup Γ ⊂ ℚ⁴ containing σ = (1,0,1,0) and a shape J = J₁×…×J₄ with
//! each J_p either {0} or ℕ. The semigroup algebra on Γ×J carries the
//! bracket
//!
//! ```text
//! [u,v] = x^σ(∂₁u·∂₂v − ∂₁v·∂₂u) + (u+∂₃u)·∂₄v − (v+∂₃v)·∂₄u,
//! ```
//!
//! and ℬ(Γ, J) is its quotient by the central line 𝔽·x^{σ₁,0}. Everything
//! here is exact: scalars are arbitrary-precision rationals and every test
//! is an identity, never an approximation.
//!
//! Modules:
//! - [`lattice`]: subgroups Γ, canonical Hermite bases, admissibility,
//!   distinguished elements.
//! - [`algebra`]: the bracket in structure-constant form plus the product
//!   rule oracle, grading, distinguished subspaces, samplers, closure.
//! - [`derivation`]: the derivation family, the Leibniz check, and the
//!   locally finite / nilpotent / semisimple classification.
//! - [`iso`]: shear maps, characters, the algebra isomorphisms they induce,
//!   bounded isomorphism search and the structure descriptor.

pub mod algebra;
pub mod derivation;
pub mod element;
pub mod hnf;
pub mod iso;
pub mod lattice;
pub mod rng;
pub mod scalar;
pub mod vec4;

pub use algebra::{
    generation_closure, monomial_mul, partial, product, sample_monomial, span_closure, AlgebraDef,
    AlgebraError, GradingKey, MonomialWindow, Subspace,
};
pub use derivation::{
    canonicalize, decompose_ad_special, leibniz_defect, local_matrix, AdditiveFn,
    CanonicalDerivation, DerivationClass, DerivationError, DerivationOp, LocalMatrixResult,
    SpecialAd,
};
pub use element::{Element, Monomial, MultiIndex, ShapeVector};
pub use iso::{
    build_character, flip_construct, hom_defect, search_params, structure_descriptor,
    verify_lattice_iso, Character, IsoCase, IsoError, IsoMap, ObstructionReason, SearchOutcome,
    ShearParams, StructureDescriptor,
};
pub use lattice::{
    sigma, sigma1, sigma2, z4, DistinguishedElements, GammaReport, Lattice, LatticeError, LineSet,
};
pub use rng::SplitMix64;
pub use scalar::Scalar;
pub use vec4::{Axis, Vec4};
