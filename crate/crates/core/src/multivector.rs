//! Graded multivector arithmetic over a 4-dimensional Clifford algebra whose
//! generators are the coordinate differentials dx^mu, with
//!
//! ```text
//! dx^mu ∨ dx^nu + dx^nu ∨ dx^mu = 2 g^{mu nu} · 1
//! ```
//!
//! for a position-dependent metric. Coefficients are stored sparsely (absent
//! blade = zero) and never epsilon-pruned: tiny residues are exactly what the
//! verifiers measure.
//!
//! The Clifford product is computed by the 1-form recursion
//!
//! ```text
//! dx^mu ∨ v = dx^mu ∧ v + ι_w v          (w^nu = g^{mu nu})
//! A ∨ v     = a ∨ (A' ∨ v) − (ι_{a#} A') ∨ v     for a blade A = a ∧ A'
//! ```
//!
//! An independent product route for orthonormal frames (bitmask sign
//! algorithm) lives in [`orthonormal_blade_product`]; it is the oracle the
//! recursion is checked against.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::blade::{sort_indices, Blade, DIM};
use crate::matrix::{invert, Mat4};
use crate::scalar::{Coeff, Real};

#[derive(Debug, Error, PartialEq)]
pub enum AlgebraError {
    #[error("metric is singular within the conditioning bound")]
    SingularMetric,
    #[error("frame matrix is singular")]
    SingularFrame,
}

/// Metric data the Clifford product needs at one point: g and its inverse.
#[derive(Clone, Debug)]
pub struct CliffordContext<S: Coeff> {
    pub g: [[S; 4]; 4],
    pub ginv: [[S; 4]; 4],
}

impl<S: Coeff> CliffordContext<S> {
    /// Build from both matrices; the caller vouches that they are inverse.
    pub fn from_parts(g: [[S; 4]; 4], ginv: [[S; 4]; 4]) -> Self {
        CliffordContext { g, ginv }
    }

    pub fn minkowski() -> Self {
        let eta = std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                if i == j {
                    S::from_f64(if i == 0 { 1.0 } else { -1.0 })
                } else {
                    S::zero()
                }
            })
        });
        CliffordContext {
            g: eta.clone(),
            ginv: eta,
        }
    }
}

impl<S: Real> CliffordContext<S> {
    pub fn from_metric(g: Mat4<S>) -> Result<Self, AlgebraError> {
        let ginv = invert(&g, 1e-12).ok_or(AlgebraError::SingularMetric)?;
        Ok(CliffordContext { g, ginv })
    }
}

/// A graded element of the exterior/Clifford algebra at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct Multivector<S: Coeff> {
    coeffs: BTreeMap<Blade, S>,
}

impl<S: Coeff> Default for Multivector<S> {
    fn default() -> Self {
        Multivector::zero()
    }
}

impl<S: Coeff> Multivector<S> {
    pub fn zero() -> Self {
        Multivector {
            coeffs: BTreeMap::new(),
        }
    }

    pub fn scalar(c: S) -> Self {
        Multivector::from_blade(Blade::SCALAR, c)
    }

    pub fn one() -> Self {
        Multivector::scalar(S::one())
    }

    pub fn from_blade(b: Blade, c: S) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(b, c);
        Multivector { coeffs }
    }

    /// The coordinate differential dx^i.
    pub fn coordinate_form(i: usize) -> Self {
        Multivector::from_blade(Blade::axis(i), S::one())
    }

    /// Grade-1 element with the given covariant components.
    pub fn one_form(components: &[S; 4]) -> Self {
        let mut out = Multivector::zero();
        for (i, c) in components.iter().enumerate() {
            out.insert_add(Blade::axis(i), c.clone());
        }
        out
    }

    pub fn coeff(&self, b: Blade) -> S {
        self.coeffs.get(&b).cloned().unwrap_or_else(S::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (Blade, &S)> {
        self.coeffs.iter().map(|(b, c)| (*b, c))
    }

    pub fn insert_add(&mut self, b: Blade, c: S) {
        match self.coeffs.get_mut(&b) {
            Some(existing) => *existing = existing.add_ref(&c),
            None => {
                self.coeffs.insert(b, c);
            }
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let mut out = self.clone();
        for (b, c) in rhs.coeffs.iter() {
            out.insert_add(*b, c.clone());
        }
        out
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .map(|(b, c)| (*b, c.neg_ref()))
            .collect();
        Multivector { coeffs }
    }

    pub fn scale(&self, s: &S) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .map(|(b, c)| (*b, c.mul_ref(s)))
            .collect();
        Multivector { coeffs }
    }

    pub fn scale_f64(&self, x: f64) -> Self {
        self.scale(&S::from_f64(x))
    }

    pub fn grade_project(&self, k: usize) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .filter(|(b, _)| b.grade() == k)
            .map(|(b, c)| (*b, c.clone()))
            .collect();
        Multivector { coeffs }
    }

    /// Residual norm outside grade k.
    pub fn off_grade_norm(&self, k: usize) -> f64 {
        self.coeffs
            .iter()
            .filter(|(b, _)| b.grade() != k)
            .map(|(_, c)| c.mag())
            .fold(0.0, f64::max)
    }

    /// Reversion: each grade-k part picks up the sign (−1)^{k(k−1)/2}.
    pub fn reverse(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .map(|(b, c)| {
                let k = b.grade();
                let flip = (k * k.saturating_sub(1) / 2) % 2 == 1;
                (*b, if flip { c.neg_ref() } else { c.clone() })
            })
            .collect();
        Multivector { coeffs }
    }

    /// Largest coefficient magnitude; the residual norm used everywhere.
    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.values().map(Coeff::mag).fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, rhs: &Self, tol: f64) -> bool {
        self.sub(rhs).max_abs_coeff() <= tol
    }

    pub fn is_exactly_zero(&self) -> bool {
        self.coeffs.values().all(Coeff::is_zero)
    }

    /// Grades with a structurally present coefficient of magnitude above tol.
    pub fn support_grades(&self, tol: f64) -> Vec<usize> {
        let mut grades: Vec<usize> = self
            .coeffs
            .iter()
            .filter(|(_, c)| c.mag() > tol)
            .map(|(b, _)| b.grade())
            .collect();
        grades.sort_unstable();
        grades.dedup();
        grades
    }

    /// Coefficient at an arbitrary (possibly unsorted) index list, with the
    /// antisymmetry sign; zero when an index repeats.
    pub fn signed_coeff(&self, indices: &[usize]) -> S {
        let mut idx = indices.to_vec();
        match sort_indices(&mut idx) {
            None => S::zero(),
            Some((b, sign)) => {
                let c = self.coeff(b);
                if sign < 0 {
                    c.neg_ref()
                } else {
                    c
                }
            }
        }
    }
}

/// Permutation sign for merging two disjoint ascending index sets: counts
/// the pairs (i in a, j in b) with i > j.
fn merge_sign(a: u8, b: u8) -> i32 {
    let mut swaps = 0u32;
    for j in 0..DIM {
        if b & (1 << j) != 0 {
            swaps += (a >> (j + 1)).count_ones();
        }
    }
    if swaps % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Exterior product. On blades: zero when index sets intersect, otherwise
/// the signed union blade.
pub fn wedge<S: Coeff>(u: &Multivector<S>, v: &Multivector<S>) -> Multivector<S> {
    let mut out = Multivector::zero();
    for (ba, ca) in u.terms() {
        for (bb, cb) in v.terms() {
            if ba.bits() & bb.bits() != 0 {
                continue;
            }
            let sign = merge_sign(ba.bits(), bb.bits());
            let mut c = ca.mul_ref(cb);
            if sign < 0 {
                c = c.neg_ref();
            }
            out.insert_add(Blade::from_bits(ba.bits() | bb.bits()), c);
        }
    }
    out
}

/// Interior product by the (index-raised) vector w: the grade-lowering
/// antiderivation with ι_w(dx^mu) = w^mu.
pub fn interior<S: Coeff>(w: &[S; 4], u: &Multivector<S>) -> Multivector<S> {
    let mut out = Multivector::zero();
    for (b, c) in u.terms() {
        let idx = b.indices();
        for (pos, &i) in idx.iter().enumerate() {
            if w[i].is_zero() {
                continue;
            }
            let mut coeff = c.mul_ref(&w[i]);
            if pos % 2 == 1 {
                coeff = coeff.neg_ref();
            }
            out.insert_add(b.remove(i), coeff);
        }
    }
    out
}

/// dx^mu ∨ v = dx^mu ∧ v + ι_{g^{mu ·}} v
fn vector_clifford_mul<S: Coeff>(
    ctx: &CliffordContext<S>,
    mu: usize,
    v: &Multivector<S>,
) -> Multivector<S> {
    let form = Multivector::coordinate_form(mu);
    wedge(&form, v).add(&interior(&ctx.ginv[mu], v))
}

/// blade ∨ v by the recursion A ∨ v = a ∨ (A' ∨ v) − (ι_{a#} A') ∨ v.
fn blade_clifford_mul<S: Coeff>(
    ctx: &CliffordContext<S>,
    blade: Blade,
    v: &Multivector<S>,
) -> Multivector<S> {
    match blade.first_index() {
        None => v.clone(),
        Some(mu) => {
            let rest = blade.remove(mu);
            let inner = blade_clifford_mul(ctx, rest, v);
            let term1 = vector_clifford_mul(ctx, mu, &inner);
            let contracted = interior(&ctx.ginv[mu], &Multivector::from_blade(rest, S::one()));
            if contracted.is_exactly_zero() {
                term1
            } else {
                term1.sub(&clifford_mul(ctx, &contracted, v))
            }
        }
    }
}

/// The Clifford (geometric) product u ∨ v.
pub fn clifford_mul<S: Coeff>(
    ctx: &CliffordContext<S>,
    u: &Multivector<S>,
    v: &Multivector<S>,
) -> Multivector<S> {
    let mut out = Multivector::zero();
    for (b, c) in u.terms() {
        out = out.add(&blade_clifford_mul(ctx, b, v).scale(c));
    }
    out
}

pub fn commutator<S: Coeff>(
    ctx: &CliffordContext<S>,
    u: &Multivector<S>,
    v: &Multivector<S>,
) -> Multivector<S> {
    clifford_mul(ctx, u, v).sub(&clifford_mul(ctx, v, u))
}

pub fn anticommutator<S: Coeff>(
    ctx: &CliffordContext<S>,
    u: &Multivector<S>,
    v: &Multivector<S>,
) -> Multivector<S> {
    clifford_mul(ctx, u, v).add(&clifford_mul(ctx, v, u))
}

/// Product of basis blades in an orthonormal frame with diagonal signature
/// `signs`: sign from reordering plus one metric factor per annihilated pair,
/// result blade = symmetric difference. Independent of the recursion above.
pub fn orthonormal_blade_product(signs: &[f64; 4], a: Blade, b: Blade) -> (f64, Blade) {
    let mut factor = merge_sign(a.bits(), b.bits()) as f64;
    let common = a.bits() & b.bits();
    for i in 0..DIM {
        if common & (1 << i) != 0 {
            factor *= signs[i];
        }
    }
    (factor, Blade::from_bits(a.bits() ^ b.bits()))
}

/// Full multivector product in an orthonormal frame, via the bitmask rule.
pub fn orthonormal_mul<S: Coeff>(
    signs: &[f64; 4],
    u: &Multivector<S>,
    v: &Multivector<S>,
) -> Multivector<S> {
    let mut out = Multivector::zero();
    for (ba, ca) in u.terms() {
        for (bb, cb) in v.terms() {
            let (factor, blade) = orthonormal_blade_product(signs, ba, bb);
            out.insert_add(blade, ca.mul_ref(cb).mul_ref(&S::from_f64(factor)));
        }
    }
    out
}

/// Direction of a frame change. `ToOrthonormal` rewrites an element given on
/// coordinate-differential blades onto orthonormal co-frame blades;
/// `ToCoordinate` goes back.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum FrameDirection {
    ToOrthonormal,
    ToCoordinate,
}

/// Substitute each basis 1-form by a linear combination of target basis
/// 1-forms (`map[i]` = expansion of source form i) and expand blades.
pub fn map_one_forms<S: Coeff>(u: &Multivector<S>, map: &[[S; 4]; 4]) -> Multivector<S> {
    let mut out = Multivector::zero();
    for (b, c) in u.terms() {
        let mut term = Multivector::scalar(c.clone());
        for i in b.indices() {
            let image = Multivector::one_form(&map[i]);
            term = wedge(&term, &image);
        }
        out = out.add(&term);
    }
    out
}

/// Componentwise basis change using tetrad matrices `e` (e^a_mu) and `einv`
/// (e^mu_a). Round trips are the identity up to float noise.
pub fn change_frame<S: Coeff>(
    e: &[[S; 4]; 4],
    einv: &[[S; 4]; 4],
    u: &Multivector<S>,
    direction: FrameDirection,
) -> Multivector<S> {
    match direction {
        // dx^mu = e^mu_a ℓ^a: substitute rows of einv
        FrameDirection::ToOrthonormal => map_one_forms(u, einv),
        // ℓ^a = e^a_mu dx^mu: substitute rows of e
        FrameDirection::ToCoordinate => map_one_forms(u, e),
    }
}
