//! The gauge structure over a metric chart: the triple (H, I, K) built from
//! the orthonormal tetrad, the componentwise covariant derivative, the
//! grade-2 connection B_mu, the gauge-covariant derivative
//! D_mu = Y_mu − [B_mu, ·] and its field strength.
//!
//! Writing Y_mu for the Levi-Civita covariant derivative acting on form
//! components, the connection is built from the structure triple as
//!
//! ```text
//! B_mu = −(3/8) H∨(Y_mu H) + (1/4)(I∨(Y_mu I) + K∨(Y_mu K))
//!        + (1/8) H∨(I∨(Y_mu I) + K∨(Y_mu K))∨H
//!        − (1/8) I∨K∨H∨(Y_mu H)∨K∨I
//!        − (1/8) (K∨I∨(Y_mu I)∨K + I∨K∨(Y_mu K)∨I)
//! ```
//!
//! and the verifiers check that the system satisfies
//!
//! ```text
//! D_mu B_nu − D_nu B_mu + [B_mu, B_nu] = ½ C_{mu nu}
//! D_mu H = D_mu I = D_mu K = 0
//! H² = 1,  I² = K² = −1,  [H,I] = [H,K] = {I,K} = 0
//! ```
//!
//! Derivatives of already-derived quantities (the Y inside the field
//! strength) come from running the whole pipeline over second-order jets,
//! not from finite differences.

use thiserror::Error;

use crate::blade::Blade;
use crate::geometry::{
    self, curvature_bivector, geometry_at, GeometryError, MetricSpec, Tetrad, T3,
};
use crate::matrix::{mat_from_fn, Mat4};
use crate::multivector::{
    anticommutator, clifford_mul, commutator, CliffordContext, Multivector,
};
use crate::rng::SplitMix64;
use crate::scalar::{ChartScalar, Coeff, Differentiable, Jet1, Jet2, Real};

#[derive(Debug, Error)]
pub enum GaugeError {
    #[error("rotation is not orthogonal (deviation {0:.2e})")]
    NonOrthogonalRotation(f64),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// The additional structure: H grade-1, I and K grade-2, satisfying
/// H² = 1, I² = K² = −1, [H,I] = [H,K] = {I,K} = 0 at every point.
#[derive(Clone, Debug)]
pub struct StructureTriple<S: Coeff> {
    pub h: Multivector<S>,
    pub i: Multivector<S>,
    pub k: Multivector<S>,
}

pub type ConnectionField<S> = [Multivector<S>; 4];

/// Evaluator for one metric chart, with an optional constant spatial
/// rotation of the orthonormal frame (the frame-covariance probe).
pub struct GaugeSystem<'a> {
    spec: &'a MetricSpec,
    rotation: Option<[[f64; 3]; 3]>,
}

impl<'a> GaugeSystem<'a> {
    pub fn new(spec: &'a MetricSpec) -> Self {
        GaugeSystem {
            spec,
            rotation: None,
        }
    }

    /// Probe system with the spatial co-frame rotated by a constant matrix.
    /// The rotation must be orthogonal: it preserves eta and the timelike
    /// leg, so the rotated triple still satisfies the algebraic relations.
    pub fn with_rotation(
        spec: &'a MetricSpec,
        rotation: [[f64; 3]; 3],
    ) -> Result<Self, GaugeError> {
        let mut deviation = 0.0_f64;
        for i in 0..3 {
            for j in 0..3 {
                let mut dot = 0.0;
                for k in 0..3 {
                    dot += rotation[k][i] * rotation[k][j];
                }
                let want = if i == j { 1.0 } else { 0.0 };
                deviation = deviation.max((dot - want).abs());
            }
        }
        if deviation > 1e-10 {
            return Err(GaugeError::NonOrthogonalRotation(deviation));
        }
        Ok(GaugeSystem {
            spec,
            rotation: Some(rotation),
        })
    }

    pub fn spec(&self) -> &MetricSpec {
        self.spec
    }

    fn tetrad<S: ChartScalar>(&self, point: &[f64; 4]) -> Result<Tetrad<S>, GaugeError> {
        let mut tet = geometry::tetrad_at::<S>(self.spec, point)?;
        if let Some(rot) = &self.rotation {
            let lift = |x: f64| S::from_f64(x);
            let lambda: Mat4<S> = mat_from_fn(|a, b| {
                lift(match (a, b) {
                    (0, 0) => 1.0,
                    (0, _) | (_, 0) => 0.0,
                    _ => rot[a - 1][b - 1],
                })
            });
            // E' = Λ E, (E')⁻¹ = E⁻¹ Λᵀ
            let e = mat_from_fn(|a, mu| {
                let mut acc = S::from_f64(0.0);
                for b in 0..4 {
                    acc = acc + lambda[a][b] * tet.e[b][mu];
                }
                acc
            });
            let einv = mat_from_fn(|mu, a| {
                let mut acc = S::from_f64(0.0);
                for b in 0..4 {
                    acc = acc + tet.einv[mu][b] * lambda[a][b];
                }
                acc
            });
            tet = Tetrad {
                e,
                einv,
                smooth: tet.smooth,
            };
        }
        Ok(tet)
    }

    /// H = ℓ⁰, I = ℓ¹∨ℓ², K = ℓ¹∨ℓ³ from the (possibly rotated) tetrad.
    pub fn structure_at<S: ChartScalar>(
        &self,
        point: &[f64; 4],
    ) -> Result<(StructureTriple<S>, CliffordContext<S>), GaugeError> {
        let tet = self.tetrad::<S>(point)?;
        let g = self.spec.metric_at::<S>(point)?;
        let ctx =
            CliffordContext::from_metric(g).map_err(|_| GeometryError::SingularMetric)?;
        let l = |a: usize| Multivector::one_form(&tet.e[a]);
        let h = l(0);
        let i = clifford_mul(&ctx, &l(1), &l(2));
        let k = clifford_mul(&ctx, &l(1), &l(3));
        Ok((StructureTriple { h, i, k }, ctx))
    }

    /// Christoffel symbols one level below J, from the metric evaluated at J.
    pub fn christoffel<J: Differentiable>(
        &self,
        point: &[f64; 4],
    ) -> Result<[[[J::Lower; 4]; 4]; 4], GaugeError> {
        let g = self.spec.metric_at::<J>(point)?;
        Ok(geometry::christoffel_from_jets::<J>(&g)?)
    }

    /// All four components of the connection, one jet level below J.
    /// `J = Jet1` yields plain values; `J = Jet2` yields values with their
    /// first derivatives, which is what the field strength consumes.
    pub fn connection_all<J: Differentiable>(
        &self,
        point: &[f64; 4],
    ) -> Result<ConnectionField<J::Lower>, GaugeError> {
        self.spec.check_in_domain(point)?;
        let (trip, ctx_hi) = self.structure_at::<J>(point)?;
        let gamma = self.christoffel::<J>(point)?;
        let ctx = lower_context(&ctx_hi);
        let h = lower_mv(&trip.h);
        let i = lower_mv(&trip.i);
        let k = lower_mv(&trip.k);
        Ok(std::array::from_fn(|mu| {
            let uh = upsilon(&trip.h, &gamma, mu);
            let ui = upsilon(&trip.i, &gamma, mu);
            let uk = upsilon(&trip.k, &gamma, mu);
            connection_from_derivatives(&ctx, &h, &i, &k, &uh, &ui, &uk)
        }))
    }

    pub fn connection_b<J: Differentiable>(
        &self,
        point: &[f64; 4],
        mu: usize,
    ) -> Result<Multivector<J::Lower>, GaugeError> {
        Ok(self.connection_all::<J>(point)?[mu].clone())
    }

    /// Algebraic relation residuals at a point:
    /// [H²−1, I²+1, K²+1, [H,I], [H,K], {I,K}].
    pub fn eq3_residuals(&self, point: &[f64; 4]) -> Result<[f64; 6], GaugeError> {
        self.spec.check_in_domain(point)?;
        let (trip, ctx) = self.structure_at::<f64>(point)?;
        let one = Multivector::one();
        let sq = |x: &Multivector<f64>| clifford_mul(&ctx, x, x);
        Ok([
            sq(&trip.h).sub(&one).max_abs_coeff(),
            sq(&trip.i).add(&one).max_abs_coeff(),
            sq(&trip.k).add(&one).max_abs_coeff(),
            commutator(&ctx, &trip.h, &trip.i).max_abs_coeff(),
            commutator(&ctx, &trip.h, &trip.k).max_abs_coeff(),
            anticommutator(&ctx, &trip.i, &trip.k).max_abs_coeff(),
        ])
    }

    /// Every once-differentiated check at a point in one pass: the structure
    /// fields and their Y derivatives feed the covariant-constancy
    /// residuals, the proof relations, and the connection's grade purity.
    pub fn derivative_checks(&self, point: &[f64; 4]) -> Result<DerivativeChecks, GaugeError> {
        self.spec.check_in_domain(point)?;
        let (trip, ctx_hi) = self.structure_at::<Jet1>(point)?;
        let gamma = self.christoffel::<Jet1>(point)?;
        let ctx = lower_context(&ctx_hi);
        let h = lower_mv(&trip.h);
        let i = lower_mv(&trip.i);
        let k = lower_mv(&trip.k);

        let mut eq2 = Vec::with_capacity(4);
        let mut proof = Vec::with_capacity(4);
        let mut grade_purity = 0.0_f64;
        for mu in 0..4 {
            let uh = upsilon(&trip.h, &gamma, mu);
            let ui = upsilon(&trip.i, &gamma, mu);
            let uk = upsilon(&trip.k, &gamma, mu);

            let b = connection_from_derivatives(&ctx, &h, &i, &k, &uh, &ui, &uk);
            grade_purity = grade_purity.max(b.off_grade_norm(2));

            let scale = uh
                .max_abs_coeff()
                .max(ui.max_abs_coeff())
                .max(uk.max_abs_coeff());
            let residual = |field: &Multivector<f64>, uf: &Multivector<f64>| {
                uf.sub(&commutator(&ctx, &b, field)).max_abs_coeff()
            };
            eq2.push(Eq2Point {
                h: residual(&h, &uh),
                i: residual(&i, &ui),
                k: residual(&k, &uk),
                upsilon_scale: scale,
            });

            proof.push([
                anticommutator(&ctx, &uh, &h).max_abs_coeff(),
                anticommutator(&ctx, &ui, &i).max_abs_coeff(),
                anticommutator(&ctx, &uk, &k).max_abs_coeff(),
                anticommutator(&ctx, &uk, &i)
                    .add(&anticommutator(&ctx, &ui, &k))
                    .max_abs_coeff(),
                commutator(&ctx, &uh, &i)
                    .sub(&commutator(&ctx, &ui, &h))
                    .max_abs_coeff(),
                commutator(&ctx, &uh, &k)
                    .sub(&commutator(&ctx, &uk, &h))
                    .max_abs_coeff(),
            ]);
        }
        Ok(DerivativeChecks {
            eq2: eq2.try_into().unwrap(),
            proof: proof.try_into().unwrap(),
            grade_purity,
        })
    }

    /// D_mu residuals for H, I, K, plus the local Y scale they are judged
    /// against.
    pub fn eq2_residuals(&self, point: &[f64; 4], mu: usize) -> Result<Eq2Point, GaugeError> {
        Ok(self.derivative_checks(point)?.eq2[mu].clone())
    }

    /// The six auxiliary relations used by the direct-calculation proof:
    /// {YH,H}, {YI,I}, {YK,K}, {YK,I}+{YI,K}, [YH,I]−[YI,H], [YH,K]−[YK,H].
    pub fn proof_residuals(&self, point: &[f64; 4], mu: usize) -> Result<[f64; 6], GaugeError> {
        Ok(self.derivative_checks(point)?.proof[mu])
    }

    /// Largest off-grade-2 coefficient across the four connection
    /// components.
    pub fn grade_purity_residual(&self, point: &[f64; 4]) -> Result<f64, GaugeError> {
        Ok(self.derivative_checks(point)?.grade_purity)
    }

    /// F_{mu nu} and ½ C_{mu nu} for all six index pairs.
    pub fn field_strength_pairs(
        &self,
        point: &[f64; 4],
    ) -> Result<Vec<FieldStrengthPair>, GaugeError> {
        self.spec.check_in_domain(point)?;
        let b_jets: [Multivector<Jet1>; 4] = self.connection_all::<Jet2>(point)?;
        let b_vals: [Multivector<f64>; 4] = std::array::from_fn(|mu| lower_mv(&b_jets[mu]));
        let gamma = self.christoffel::<Jet1>(point)?;
        let geo = geometry_at(self.spec, point)?;
        let ctx = CliffordContext::from_parts(geo.g, geo.ginv);

        // ∇_mu B_nu: componentwise Y on the grade-2 value plus the
        // Christoffel term on the free lower index nu.
        let nabla = |mu: usize, nu: usize| -> Multivector<f64> {
            let mut out = upsilon(&b_jets[nu], &gamma, mu);
            for rho in 0..4 {
                out = out.sub(&b_vals[rho].scale_f64(gamma[rho][mu][nu]));
            }
            out
        };

        let mut pairs = Vec::with_capacity(6);
        for mu in 0..4 {
            for nu in (mu + 1)..4 {
                let bracket = commutator(&ctx, &b_vals[mu], &b_vals[nu]);
                // D_mu B_nu = ∇_mu B_nu − [B_mu, B_nu]
                let d_mu_b_nu = nabla(mu, nu).sub(&bracket);
                let d_nu_b_mu = nabla(nu, mu).add(&bracket); // −[B_nu,B_mu] = +[B_mu,B_nu]

                let f = d_mu_b_nu.sub(&d_nu_b_mu).add(&bracket);
                let half_c = curvature_bivector(&geo, mu, nu).scale_f64(0.5);
                pairs.push(FieldStrengthPair {
                    mu,
                    nu,
                    f,
                    half_c,
                });
            }
        }
        Ok(pairs)
    }

    /// Field-strength identity residuals at a point, with the data the
    /// best-fit F:C ratio is accumulated from.
    pub fn eq1_residuals(&self, point: &[f64; 4]) -> Result<Eq1Point, GaugeError> {
        let pairs = self.field_strength_pairs(point)?;
        let c_scale = pairs
            .iter()
            .map(|p| p.half_c.max_abs_coeff())
            .fold(0.0, f64::max);
        let max_abs_residual = pairs
            .iter()
            .map(|p| p.f.sub(&p.half_c).max_abs_coeff())
            .fold(0.0, f64::max);
        let mut dot_fc = 0.0;
        let mut dot_cc = 0.0;
        for p in &pairs {
            let c_full = p.half_c.scale_f64(2.0);
            dot_fc += mv_dot(&p.f, &c_full);
            dot_cc += mv_dot(&c_full, &c_full);
        }
        Ok(Eq1Point {
            max_abs_residual,
            c_scale,
            dot_fc,
            dot_cc,
        })
    }

    /// ½[C_{mu nu}, U] against the double-Y commutator on a polynomial test
    /// field: the convention anchor for C. Returns the relative residual.
    pub fn commutator_consistency(
        &self,
        point: &[f64; 4],
        field: &PolyField,
        mu: usize,
        nu: usize,
    ) -> Result<f64, GaugeError> {
        self.spec.check_in_domain(point)?;
        let u2: Multivector<Jet2> = field.eval(point);
        let gamma1 = self.christoffel::<Jet2>(point)?;
        let gamma0: T3 = lower_gamma(&gamma1);

        let first_nu = upsilon(&u2, &gamma1, nu);
        let first_mu = upsilon(&u2, &gamma1, mu);
        let lhs = upsilon(&first_nu, &gamma0, mu).sub(&upsilon(&first_mu, &gamma0, nu));

        let geo = geometry_at(self.spec, point)?;
        let ctx = CliffordContext::from_parts(geo.g, geo.ginv);
        let half_c = curvature_bivector(&geo, mu, nu).scale_f64(0.5);
        let rhs = commutator(&ctx, &half_c, &field.eval::<f64>(point));

        let denom = rhs.max_abs_coeff().max(1e-6);
        Ok(lhs.sub(&rhs).max_abs_coeff() / denom)
    }
}

#[derive(Clone, Debug)]
pub struct Eq2Point {
    pub h: f64,
    pub i: f64,
    pub k: f64,
    pub upsilon_scale: f64,
}

/// Output of [`GaugeSystem::derivative_checks`]: covariant-constancy
/// residuals per direction, the six proof relations per direction, and the
/// worst off-grade-2 coefficient of the connection.
#[derive(Clone, Debug)]
pub struct DerivativeChecks {
    pub eq2: [Eq2Point; 4],
    pub proof: [[f64; 6]; 4],
    pub grade_purity: f64,
}

#[derive(Clone, Debug)]
pub struct Eq1Point {
    pub max_abs_residual: f64,
    pub c_scale: f64,
    pub dot_fc: f64,
    pub dot_cc: f64,
}

#[derive(Clone, Debug)]
pub struct FieldStrengthPair {
    pub mu: usize,
    pub nu: usize,
    pub f: Multivector<f64>,
    pub half_c: Multivector<f64>,
}

/// Componentwise Levi-Civita covariant derivative along coordinate `mu`:
/// for every blade component, the partial of the (jet) coefficient minus one
/// Christoffel contraction per form index. Output is one jet level lower.
pub fn upsilon<J: Differentiable>(
    field: &Multivector<J>,
    gamma: &[[[J::Lower; 4]; 4]; 4],
    mu: usize,
) -> Multivector<J::Lower> {
    let mut out = Multivector::zero();
    for target in Blade::all() {
        let idx = target.indices();
        let mut val = field.coeff(target).partial(mu);
        for (pos, &nu_j) in idx.iter().enumerate() {
            for rho in 0..4 {
                let mut replaced = idx.clone();
                replaced[pos] = rho;
                let c = signed_lower_coeff(field, &replaced);
                val = val - gamma[rho][mu][nu_j] * c;
            }
        }
        if !Coeff::is_zero(&val) {
            out.insert_add(target, val);
        }
    }
    out
}

/// D_mu U = Y_mu U − [B_mu, U] at value level.
pub fn covariant_d(
    ctx: &CliffordContext<f64>,
    gamma: &T3,
    b_mu: &Multivector<f64>,
    field: &Multivector<Jet1>,
    mu: usize,
) -> Multivector<f64> {
    upsilon(field, gamma, mu).sub(&commutator(ctx, b_mu, &lower_mv(field)))
}

/// Formula for the connection in terms of the structure triple and its
/// covariant derivatives (all at the same level).
fn connection_from_derivatives<S: Coeff>(
    ctx: &CliffordContext<S>,
    h: &Multivector<S>,
    i: &Multivector<S>,
    k: &Multivector<S>,
    uh: &Multivector<S>,
    ui: &Multivector<S>,
    uk: &Multivector<S>,
) -> Multivector<S> {
    let m = |a: &Multivector<S>, b: &Multivector<S>| clifford_mul(ctx, a, b);

    let iui_kuk = m(i, ui).add(&m(k, uk));
    let huh = m(h, uh);
    let ik = m(i, k);
    let ki = m(k, i);

    let term1 = huh.scale_f64(-0.375);
    let term2 = iui_kuk.scale_f64(0.25);
    let term3 = m(&m(h, &iui_kuk), h).scale_f64(0.125);
    let term4 = m(&m(&ik, &huh), &ki).scale_f64(-0.125);
    let term5 = m(&m(&ki, ui), k)
        .add(&m(&m(&ik, uk), i))
        .scale_f64(-0.125);

    term1.add(&term2).add(&term3).add(&term4).add(&term5)
}

fn signed_lower_coeff<J: Differentiable>(field: &Multivector<J>, indices: &[usize]) -> J::Lower {
    let mut idx = indices.to_vec();
    match crate::blade::sort_indices(&mut idx) {
        None => <J::Lower as Real>::from_f64(0.0),
        Some((blade, sign)) => {
            let c = field.coeff(blade).lower();
            if sign < 0 {
                -c
            } else {
                c
            }
        }
    }
}

pub fn lower_mv<J: Differentiable>(mv: &Multivector<J>) -> Multivector<J::Lower> {
    let mut out = Multivector::zero();
    for (b, c) in mv.terms() {
        out.insert_add(b, c.lower());
    }
    out
}

fn lower_context<J: Differentiable>(ctx: &CliffordContext<J>) -> CliffordContext<J::Lower> {
    CliffordContext::from_parts(
        mat_from_fn(|a, b| ctx.g[a][b].lower()),
        mat_from_fn(|a, b| ctx.ginv[a][b].lower()),
    )
}

fn lower_gamma(gamma: &[[[Jet1; 4]; 4]; 4]) -> T3 {
    std::array::from_fn(|l| {
        std::array::from_fn(|m| std::array::from_fn(|n| gamma[l][m][n].v))
    })
}

/// Coefficientwise dot product of two multivectors.
pub fn mv_dot(a: &Multivector<f64>, b: &Multivector<f64>) -> f64 {
    let mut acc = 0.0;
    for (blade, c) in a.terms() {
        acc += c * b.coeff(blade);
    }
    acc
}

/// A multivector field with polynomial coordinate dependence: exactly
/// differentiable over jets, used by the curvature-commutator anchor test.
#[derive(Clone, Debug)]
pub struct PolyField {
    terms: Vec<(Blade, Vec<Monomial>)>,
}

#[derive(Clone, Debug)]
struct Monomial {
    coeff: f64,
    powers: [u8; 4],
}

impl PolyField {
    pub fn eval<S: ChartScalar>(&self, point: &[f64; 4]) -> Multivector<S> {
        let coords: [S; 4] = std::array::from_fn(|i| S::at_coordinate(point, i));
        let mut out = Multivector::zero();
        for (blade, monomials) in &self.terms {
            let mut acc = S::from_f64(0.0);
            for m in monomials {
                let mut v = S::from_f64(m.coeff);
                for (i, &p) in m.powers.iter().enumerate() {
                    if p > 0 {
                        v = v * coords[i].powi(p as i64);
                    }
                }
                acc = acc + v;
            }
            out.insert_add(*blade, acc);
        }
        out
    }

    /// Random low-degree field: a handful of blades, quadratic monomials.
    pub fn random(rng: &mut SplitMix64) -> PolyField {
        let mut terms = Vec::new();
        for blade in Blade::all() {
            if rng.next_f64() < 0.35 {
                let n = 1 + (rng.next_u64() % 2) as usize;
                let monomials = (0..n)
                    .map(|_| {
                        let mut powers = [0u8; 4];
                        for _ in 0..2 {
                            if rng.next_f64() < 0.6 {
                                powers[(rng.next_u64() % 4) as usize] += 1;
                            }
                        }
                        Monomial {
                            coeff: rng.in_range(-1.0, 1.0),
                            powers,
                        }
                    })
                    .collect();
                terms.push((blade, monomials));
            }
        }
        if terms.is_empty() {
            terms.push((
                Blade::axis(1),
                vec![Monomial {
                    coeff: 1.0,
                    powers: [0, 1, 0, 0],
                }],
            ));
        }
        PolyField { terms }
    }
}

/// Residual summary for one point of the frame-covariance probe: rebuild the
/// structure from a rotated tetrad and rerun every identity.
#[derive(Clone, Debug)]
pub struct FrameCovarianceReport {
    pub eq3_max: f64,
    pub eq2_max_relative: f64,
    pub proof_max: f64,
    pub eq1_max_relative: f64,
}

pub fn frame_covariance_at(
    spec: &MetricSpec,
    point: &[f64; 4],
    rotation: [[f64; 3]; 3],
) -> Result<FrameCovarianceReport, GaugeError> {
    let sys = GaugeSystem::with_rotation(spec, rotation)?;
    let eq3_max = sys
        .eq3_residuals(point)?
        .into_iter()
        .fold(0.0_f64, f64::max);
    let mut eq2_max_relative = 0.0_f64;
    let mut proof_max = 0.0_f64;
    for mu in 0..4 {
        let e2 = sys.eq2_residuals(point, mu)?;
        let denom = e2.upsilon_scale.max(1e-2);
        eq2_max_relative = eq2_max_relative
            .max(e2.h / denom)
            .max(e2.i / denom)
            .max(e2.k / denom);
        proof_max = proof_max.max(
            sys.proof_residuals(point, mu)?
                .into_iter()
                .fold(0.0_f64, f64::max),
        );
    }
    let e1 = sys.eq1_residuals(point)?;
    let eq1_max_relative = e1.max_abs_residual / e1.c_scale.max(1e-12);
    Ok(FrameCovarianceReport {
        eq3_max,
        eq2_max_relative,
        proof_max,
        eq1_max_relative,
    })
}

/// Proper rotation from a random axis and angle.
pub fn random_rotation(rng: &mut SplitMix64) -> [[f64; 3]; 3] {
    let theta = rng.in_range(0.0, std::f64::consts::TAU);
    let z = rng.in_range(-1.0, 1.0);
    let phi = rng.in_range(0.0, std::f64::consts::TAU);
    let s = (1.0 - z * z).sqrt();
    let axis = [s * phi.cos(), s * phi.sin(), z];
    rotation_about(axis, theta)
}

/// Rodrigues rotation about a unit axis.
pub fn rotation_about(axis: [f64; 3], angle: f64) -> [[f64; 3]; 3] {
    let (s, c) = angle.sin_cos();
    let omc = 1.0 - c;
    let [x, y, z] = axis;
    [
        [
            c + x * x * omc,
            x * y * omc - z * s,
            x * z * omc + y * s,
        ],
        [
            y * x * omc + z * s,
            c + y * y * omc,
            y * z * omc - x * s,
        ],
        [
            z * x * omc - y * s,
            z * y * omc + x * s,
            c + z * z * omc,
        ],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::builtin;
    use std::collections::BTreeMap;

    fn spec_named(name: &str) -> MetricSpec {
        builtin(name, &BTreeMap::new()).unwrap()
    }

    fn sample_points(spec: &MetricSpec, n: usize, seed: u64) -> Vec<[f64; 4]> {
        let mut rng = SplitMix64::new(seed);
        (0..n)
            .map(|_| std::array::from_fn(|i| rng.in_range(spec.domain[i].lo, spec.domain[i].hi)))
            .collect()
    }

    #[test]
    fn flat_structure_is_the_coordinate_triple() {
        let spec = spec_named("minkowski");
        let sys = GaugeSystem::new(&spec);
        let (trip, _) = sys.structure_at::<f64>(&[0.0; 4]).unwrap();
        assert!(trip.h.approx_eq(&Multivector::coordinate_form(0), 1e-15));
        let dx12 = Multivector::from_blade(Blade::from_indices(&[1, 2]), 1.0);
        let dx13 = Multivector::from_blade(Blade::from_indices(&[1, 3]), 1.0);
        assert!(trip.i.approx_eq(&dx12, 1e-15));
        assert!(trip.k.approx_eq(&dx13, 1e-15));
    }

    #[test]
    fn algebraic_relations_hold_on_curved_charts() {
        for name in ["schwarzschild", "flrw-exp", "de-sitter"] {
            let spec = spec_named(name);
            let sys = GaugeSystem::new(&spec);
            for point in sample_points(&spec, 12, 3) {
                for r in sys.eq3_residuals(&point).unwrap() {
                    assert!(r <= 1e-10, "{name} at {point:?}: residual {r}");
                }
            }
        }
    }

    #[test]
    fn flrw_h_squares_to_one_with_nonconstant_tetrad() {
        let spec = spec_named("flrw-exp");
        let sys = GaugeSystem::new(&spec);
        let (trip, ctx) = sys.structure_at::<f64>(&[0.3, 1.0, -2.0, 0.5]).unwrap();
        let sq = clifford_mul(&ctx, &trip.h, &trip.h);
        assert!(sq.sub(&Multivector::one()).max_abs_coeff() <= 1e-12);
    }

    #[test]
    fn upsilon_annihilates_constants_in_flat_space() {
        let spec = spec_named("minkowski");
        let sys = GaugeSystem::new(&spec);
        let gamma = sys.christoffel::<Jet1>(&[0.0; 4]).unwrap();
        let mut constant = Multivector::<Jet1>::zero();
        constant.insert_add(Blade::from_indices(&[0, 2]), Jet1::constant(1.5));
        constant.insert_add(Blade::SCALAR, Jet1::constant(-0.3));
        for mu in 0..4 {
            assert!(upsilon(&constant, &gamma, mu).is_exactly_zero());
        }
    }

    #[test]
    fn upsilon_annihilates_the_unit_scalar_everywhere() {
        let spec = spec_named("schwarzschild");
        let sys = GaugeSystem::new(&spec);
        let gamma = sys.christoffel::<Jet1>(&[0.0, 6.0, 1.2, 2.0]).unwrap();
        let one = Multivector::<Jet1>::scalar(Jet1::constant(1.0));
        for mu in 0..4 {
            assert_eq!(upsilon(&one, &gamma, mu).max_abs_coeff(), 0.0);
        }
    }

    #[test]
    fn upsilon_is_a_derivation_of_the_clifford_product() {
        let spec = spec_named("schwarzschild");
        let sys = GaugeSystem::new(&spec);
        let point = [0.0, 8.0, 1.0, 2.5];
        let (trip, ctx1) = sys.structure_at::<Jet1>(&point).unwrap();
        let gamma = sys.christoffel::<Jet1>(&point).unwrap();
        let ctx = lower_context(&ctx1);
        // products of structure fields give mixed-grade jet fields
        let u = clifford_mul(&ctx1, &trip.h, &trip.i);
        let v = clifford_mul(&ctx1, &trip.k, &trip.h);
        for mu in 0..4 {
            let lhs = upsilon(&clifford_mul(&ctx1, &u, &v), &gamma, mu);
            let rhs = clifford_mul(&ctx, &upsilon(&u, &gamma, mu), &lower_mv(&v)).add(
                &clifford_mul(&ctx, &lower_mv(&u), &upsilon(&v, &gamma, mu)),
            );
            assert!(
                lhs.approx_eq(&rhs, 1e-8),
                "Leibniz residual {} for mu={mu}",
                lhs.sub(&rhs).max_abs_coeff()
            );
        }
    }

    #[test]
    fn upsilon_kills_the_metric_built_volume_scalar() {
        // Y of g-built objects must vanish: test on I∨I = -1 differentiated
        let spec = spec_named("flrw-exp");
        let sys = GaugeSystem::new(&spec);
        let point = [0.4, 0.3, -1.0, 2.0];
        let (trip, ctx1) = sys.structure_at::<Jet1>(&point).unwrap();
        let gamma = sys.christoffel::<Jet1>(&point).unwrap();
        let ii = clifford_mul(&ctx1, &trip.i, &trip.i);
        for mu in 0..4 {
            assert!(
                upsilon(&ii, &gamma, mu).max_abs_coeff() < 1e-12,
                "Y of I² should vanish"
            );
        }
    }

    #[test]
    fn flat_connection_vanishes() {
        let spec = spec_named("minkowski");
        let sys = GaugeSystem::new(&spec);
        let b = sys.connection_all::<Jet1>(&[0.2, -3.0, 1.0, 4.0]).unwrap();
        for mu in 0..4 {
            assert!(
                b[mu].max_abs_coeff() <= 1e-14,
                "B_{mu} = {:?}",
                b[mu]
            );
        }
    }

    #[test]
    fn connection_is_pure_grade_two() {
        let spec = spec_named("schwarzschild");
        let sys = GaugeSystem::new(&spec);
        let res = sys.grade_purity_residual(&[0.0, 6.0, 1.0, 0.5]).unwrap();
        assert!(res <= 1e-10, "off-grade residual {res}");
    }

    #[test]
    fn connection_matches_the_spin_connection_route() {
        // Independent oracle: B_mu must coincide with the grade-2 element
        // sigma_mu = ¼ w_{mu a b} ℓ^a ∨ ℓ^b built from the tetrad's
        // connection coefficients w_mu^a_b = −(Y_mu ℓ^a)_nu e^nu_b.
        let eta = [1.0, -1.0, -1.0, -1.0];
        for name in ["schwarzschild", "flrw-exp", "de-sitter"] {
            let spec = spec_named(name);
            let sys = GaugeSystem::new(&spec);
            for point in sample_points(&spec, 4, 9) {
                let tet1 = geometry::tetrad_at::<Jet1>(&spec, &point).unwrap();
                let tet0 = geometry::tetrad_at::<f64>(&spec, &point).unwrap();
                let gamma = sys.christoffel::<Jet1>(&point).unwrap();
                let g = spec.metric_at::<f64>(&point).unwrap();
                let ctx = CliffordContext::from_metric(g).unwrap();

                let b = sys.connection_all::<Jet1>(&point).unwrap();

                // w[mu][a][b] with both frame indices down
                let mut sigma: Vec<Multivector<f64>> = Vec::new();
                for mu in 0..4 {
                    let mut s = Multivector::zero();
                    for a in 0..4 {
                        let la = Multivector::one_form(&tet1.e[a]);
                        let dla = upsilon(&la, &gamma, mu);
                        for b_idx in 0..4 {
                            let mut w_up = 0.0; // w_mu^a_b
                            for nu in 0..4 {
                                w_up -= dla.coeff(Blade::axis(nu)) * tet0.einv[nu][b_idx];
                            }
                            let w_down = eta[a] * w_up; // lower the first index
                            let lam = Multivector::one_form(&tet0.e[a]);
                            let lbm = Multivector::one_form(&tet0.e[b_idx]);
                            s = s.add(
                                &clifford_mul(&ctx, &lam, &lbm).scale_f64(0.25 * w_down),
                            );
                        }
                    }
                    sigma.push(s);
                }
                for mu in 0..4 {
                    let scale = sigma[mu].max_abs_coeff().max(1e-2);
                    let res = b[mu].sub(&sigma[mu]).max_abs_coeff() / scale;
                    assert!(
                        res < 1e-10,
                        "{name} at {point:?}, mu={mu}: |B - sigma| rel {res}"
                    );
                }
            }
        }
    }

    #[test]
    fn covariant_constancy_on_curved_charts() {
        for (name, tol_points) in [("flrw-exp", 6), ("schwarzschild", 6), ("de-sitter", 6)] {
            let spec = spec_named(name);
            let sys = GaugeSystem::new(&spec);
            for point in sample_points(&spec, tol_points, 21) {
                for mu in 0..4 {
                    let e2 = sys.eq2_residuals(&point, mu).unwrap();
                    let denom = e2.upsilon_scale.max(1e-2);
                    for r in [e2.h, e2.i, e2.k] {
                        assert!(
                            r / denom <= 1e-8,
                            "{name} at {point:?} mu={mu}: D residual {r} (scale {})",
                            e2.upsilon_scale
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn covariant_d_reduces_to_upsilon_for_zero_connection() {
        let spec = spec_named("schwarzschild");
        let sys = GaugeSystem::new(&spec);
        let point = [0.0, 7.0, 1.3, 1.0];
        let (trip, ctx1) = sys.structure_at::<Jet1>(&point).unwrap();
        let gamma = sys.christoffel::<Jet1>(&point).unwrap();
        let ctx = lower_context(&ctx1);
        let zero_b = Multivector::zero();
        for mu in 0..4 {
            let d = covariant_d(&ctx, &gamma, &zero_b, &trip.i, mu);
            let y = upsilon(&trip.i, &gamma, mu);
            assert!(d.approx_eq(&y, 0.0));
        }
    }

    #[test]
    fn field_strength_is_antisymmetric_and_flat_space_exact() {
        let spec = spec_named("minkowski");
        let sys = GaugeSystem::new(&spec);
        let pairs = sys.field_strength_pairs(&[0.0, 1.0, 2.0, 3.0]).unwrap();
        for p in &pairs {
            assert!(p.f.max_abs_coeff() <= 1e-14);
            assert!(p.half_c.max_abs_coeff() == 0.0);
        }
    }

    #[test]
    fn field_strength_matches_half_curvature_bivector() {
        for name in ["schwarzschild", "flrw-exp", "de-sitter"] {
            let spec = spec_named(name);
            let sys = GaugeSystem::new(&spec);
            for point in sample_points(&spec, 4, 55) {
                let e1 = sys.eq1_residuals(&point).unwrap();
                let rel = e1.max_abs_residual / e1.c_scale.max(1e-12);
                assert!(
                    rel <= 1e-6,
                    "{name} at {point:?}: eq1 relative residual {rel}"
                );
                let ratio = e1.dot_fc / e1.dot_cc;
                assert!(
                    (ratio - 0.5).abs() < 1e-4,
                    "{name}: best-fit ratio {ratio}"
                );
            }
        }
    }

    #[test]
    fn proof_relations_hold() {
        for name in ["minkowski", "flrw-exp", "schwarzschild"] {
            let spec = spec_named(name);
            let sys = GaugeSystem::new(&spec);
            for point in sample_points(&spec, 5, 77) {
                for mu in 0..4 {
                    for (slot, r) in sys
                        .proof_residuals(&point, mu)
                        .unwrap()
                        .into_iter()
                        .enumerate()
                    {
                        assert!(
                            r <= 1e-9,
                            "{name} at {point:?} mu={mu}: relation {slot} residual {r}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn commutator_consistency_anchors_the_convention() {
        let spec = spec_named("schwarzschild");
        let sys = GaugeSystem::new(&spec);
        let mut rng = SplitMix64::new(1234);
        for point in sample_points(&spec, 3, 88) {
            for _ in 0..4 {
                let field = PolyField::random(&mut rng);
                for mu in 0..4 {
                    for nu in (mu + 1)..4 {
                        let r = sys
                            .commutator_consistency(&point, &field, mu, nu)
                            .unwrap();
                        assert!(
                            r <= 1e-6,
                            "at {point:?} pair ({mu},{nu}): residual {r}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn identity_rotation_reproduces_the_connection_exactly() {
        let spec = spec_named("schwarzschild");
        let point = [0.0, 9.0, 1.1, 2.0];
        let id = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        let plain = GaugeSystem::new(&spec)
            .connection_all::<Jet1>(&point)
            .unwrap();
        let rotated = GaugeSystem::with_rotation(&spec, id)
            .unwrap()
            .connection_all::<Jet1>(&point)
            .unwrap();
        for mu in 0..4 {
            assert!(plain[mu].approx_eq(&rotated[mu], 0.0));
        }
    }

    #[test]
    fn quarter_turn_rotation_passes_all_identities() {
        let spec = spec_named("flrw-exp");
        // π/2 in the (2,3) plane
        let rot = rotation_about([1.0, 0.0, 0.0], std::f64::consts::FRAC_PI_2);
        let report = frame_covariance_at(&spec, &[0.5, 1.0, -2.0, 0.3], rot).unwrap();
        assert!(report.eq3_max <= 1e-10);
        assert!(report.eq2_max_relative <= 1e-8);
        assert!(report.proof_max <= 1e-9);
    }

    #[test]
    fn random_rotations_pass_field_strength_identity() {
        let spec = spec_named("schwarzschild");
        let mut rng = SplitMix64::new(5150);
        for point in sample_points(&spec, 2, 31) {
            let rot = random_rotation(&mut rng);
            let report = frame_covariance_at(&spec, &point, rot).unwrap();
            assert!(
                report.eq1_max_relative <= 1e-6,
                "eq1 residual {} at {point:?}",
                report.eq1_max_relative
            );
            assert!(report.eq3_max <= 1e-10);
        }
    }

    #[test]
    fn non_orthogonal_rotation_is_rejected() {
        let spec = spec_named("minkowski");
        let skew = [[1.0, 0.2, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        match GaugeSystem::with_rotation(&spec, skew) {
            Err(GaugeError::NonOrthogonalRotation(_)) => {}
            other => panic!("expected rejection, got {:?}", other.map(|_| ())),
        }
    }
}
