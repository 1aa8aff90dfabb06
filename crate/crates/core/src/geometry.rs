//! Chart geometry from a metric specification: inverse metric, Christoffel
//! symbols, Riemann tensor, curvature bivectors and an orthonormal tetrad,
//! all evaluated at chart points.
//!
//! Derivatives of the metric come from evaluating its component expressions
//! over jets ([`crate::scalar::Jet2`]), never from finite differences; the
//! finite-difference routes in this module exist only as independent oracles
//! for the verification suites.
//!
//! Conventions:
//!
//! ```text
//! Γ^l_{mn}   = ½ g^{lr} (∂_m g_{rn} + ∂_n g_{rm} − ∂_r g_{mn})
//! R^r_{smn}  = ∂_m Γ^r_{ns} − ∂_n Γ^r_{ms} + Γ^r_{ml} Γ^l_{ns} − Γ^r_{nl} Γ^l_{ms}
//! C_{mn}     = ½ R_{abmn} dx^a ∧ dx^b      (sum over all a,b)
//! ```
//!
//! with metric signature (+,−,−,−). A wrong global sign choice would fail the
//! curvature/commutator consistency check in [`crate::gauge`].

use std::collections::BTreeMap;

use thiserror::Error;

use crate::blade::Blade;
use crate::expr::{self, EvalError, ExprAst};
use crate::matrix::{invert, mat_from_fn, signature, symmetric_eigen, Mat4};
use crate::multivector::Multivector;
use crate::scalar::{ChartScalar, Differentiable, Jet1, Jet2, Real};

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("coordinate {coord}={value} outside validity domain ({lo}, {hi})")]
    OutOfDomain {
        coord: String,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("metric is singular within the conditioning bound")]
    SingularMetric,
    #[error("metric signature is ({positives},{negatives}), expected (1,3)")]
    SignatureViolation { positives: usize, negatives: usize },
    #[error("tetrad pivot breakdown at coordinate {index}")]
    PivotBreakdown { index: usize },
    #[error("tetrad is singular")]
    SingularTetrad,
    #[error("unknown builtin metric `{0}`")]
    UnknownBuiltin(String),
    #[error("unknown parameter `{0}` for metric `{1}`")]
    UnknownParameter(String, String),
    #[error(transparent)]
    Expr(#[from] EvalError),
}

/// Open interval; used both as validity domain and sampling window.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo < x && x < self.hi
    }
}

/// A 4-dimensional metric: coordinate names, symmetric component expressions
/// (lower triangle; missing entries are zero) and a validity domain per
/// coordinate. Margins around singular surfaces are built into the domain.
#[derive(Clone, Debug)]
pub struct MetricSpec {
    pub name: String,
    pub coords: [String; 4],
    components: [[Option<ExprAst>; 4]; 4],
    pub domain: [Interval; 4],
}

impl MetricSpec {
    /// Assemble from explicit (row, col, expression-source) entries.
    /// Symmetry is applied automatically; specifying both (i,j) and (j,i)
    /// is rejected.
    pub fn from_entries(
        name: &str,
        coords: [&str; 4],
        entries: &[(usize, usize, &str)],
        domain: [Interval; 4],
    ) -> Result<Self, String> {
        let coord_names: Vec<String> = coords.iter().map(|s| s.to_string()).collect();
        let mut components: [[Option<ExprAst>; 4]; 4] = Default::default();
        for &(i, j, src) in entries {
            if i >= 4 || j >= 4 {
                return Err(format!("component index ({i},{j}) out of range"));
            }
            let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
            if components[lo][hi].is_some() {
                return Err(format!("metric component ({i},{j}) specified twice"));
            }
            let ast = expr::parse(src, &coord_names).map_err(|e| {
                format!("g {i} {j}: {e}")
            })?;
            components[lo][hi] = Some(ast);
        }
        Ok(MetricSpec {
            name: name.to_string(),
            coords: std::array::from_fn(|i| coords[i].to_string()),
            components,
            domain,
        })
    }

    pub fn check_in_domain(&self, point: &[f64; 4]) -> Result<(), GeometryError> {
        for i in 0..4 {
            if !self.domain[i].contains(point[i]) {
                return Err(GeometryError::OutOfDomain {
                    coord: self.coords[i].clone(),
                    value: point[i],
                    lo: self.domain[i].lo,
                    hi: self.domain[i].hi,
                });
            }
        }
        Ok(())
    }

    /// Metric components at a point over any seedable scalar.
    pub fn metric_at<S: ChartScalar>(&self, point: &[f64; 4]) -> Result<Mat4<S>, GeometryError> {
        let vars = |i: usize| S::at_coordinate(point, i);
        let mut g = mat_from_fn(|_, _| S::from_f64(0.0));
        for i in 0..4 {
            for j in i..4 {
                if let Some(ast) = &self.components[i][j] {
                    let v = expr::eval(ast, &vars)?;
                    g[i][j] = v;
                    g[j][i] = v;
                }
            }
        }
        Ok(g)
    }

    /// Expression source for a component, if present (lower or upper entry).
    pub fn component_source(&self, i: usize, j: usize) -> Option<String> {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        self.components[lo][hi]
            .as_ref()
            .map(|ast| expr::pretty_named(ast, &self.coords.to_vec()))
    }
}

/// Builtin catalog entry: parameter names with defaults plus a human domain
/// description for the listing.
pub struct BuiltinInfo {
    pub name: &'static str,
    pub params: &'static [(&'static str, f64)],
    pub summary: &'static str,
    pub domain_note: &'static str,
}

pub fn catalog() -> Vec<BuiltinInfo> {
    vec![
        BuiltinInfo {
            name: "de-sitter",
            params: &[("lambda", 1.0)],
            summary: "de Sitter space, static patch, cosmological constant lambda",
            domain_note: "t in (-10,10), r in (0.15 L, 0.85 L) with L = sqrt(3/lambda), theta in (0.2, pi-0.2), phi in (0.1, 2 pi-0.1)",
        },
        BuiltinInfo {
            name: "flrw-exp",
            params: &[],
            summary: "spatially flat FLRW with scale factor exp(t)",
            domain_note: "t in (-1,1), x,y,z in (-5,5)",
        },
        BuiltinInfo {
            name: "minkowski",
            params: &[],
            summary: "flat spacetime, diag(1,-1,-1,-1)",
            domain_note: "t,x,y,z in (-10,10)",
        },
        BuiltinInfo {
            name: "schwarzschild",
            params: &[("M", 1.0)],
            summary: "Schwarzschild exterior of mass M",
            domain_note: "t in (-10,10), r > 3M (horizon margin 0.5 included, sampled up to 20M), theta in (0.2, pi-0.2), phi in (0.1, 2 pi-0.1)",
        },
    ]
}

/// Instantiate a builtin metric. Unknown parameters are rejected; missing
/// ones take their defaults.
pub fn builtin(name: &str, params: &BTreeMap<String, f64>) -> Result<MetricSpec, GeometryError> {
    let info = catalog()
        .into_iter()
        .find(|b| b.name == name)
        .ok_or_else(|| GeometryError::UnknownBuiltin(name.to_string()))?;
    for key in params.keys() {
        if !info.params.iter().any(|(p, _)| p == key) {
            return Err(GeometryError::UnknownParameter(
                key.clone(),
                name.to_string(),
            ));
        }
    }
    let get = |key: &str, default: f64| params.get(key).copied().unwrap_or(default);

    let spec = match name {
        "minkowski" => MetricSpec::from_entries(
            "minkowski",
            ["t", "x", "y", "z"],
            &[(0, 0, "1"), (1, 1, "-1"), (2, 2, "-1"), (3, 3, "-1")],
            [Interval::new(-10.0, 10.0); 4],
        ),
        "schwarzschild" => {
            let m = get("M", 1.0);
            let two_m = 2.0 * m;
            MetricSpec::from_entries(
                &format!("schwarzschild(M={m})"),
                ["t", "r", "theta", "phi"],
                &[
                    (0, 0, &format!("1 - {two_m}/r")),
                    (1, 1, &format!("-1/(1 - {two_m}/r)")),
                    (2, 2, "-r^2"),
                    (3, 3, "-r^2*sin(theta)^2"),
                ],
                [
                    Interval::new(-10.0, 10.0),
                    // horizon margin: r >= 2M (1 + 0.5)
                    Interval::new(3.0 * m, 20.0 * m),
                    Interval::new(0.2, std::f64::consts::PI - 0.2),
                    Interval::new(0.1, 2.0 * std::f64::consts::PI - 0.1),
                ],
            )
        }
        "flrw-exp" => MetricSpec::from_entries(
            "flrw-exp",
            ["t", "x", "y", "z"],
            &[
                (0, 0, "1"),
                (1, 1, "-exp(2*t)"),
                (2, 2, "-exp(2*t)"),
                (3, 3, "-exp(2*t)"),
            ],
            [
                Interval::new(-1.0, 1.0),
                Interval::new(-5.0, 5.0),
                Interval::new(-5.0, 5.0),
                Interval::new(-5.0, 5.0),
            ],
        ),
        "de-sitter" => {
            let lambda = get("lambda", 1.0);
            let c = lambda / 3.0;
            let l = (3.0 / lambda).sqrt();
            MetricSpec::from_entries(
                &format!("de-sitter(lambda={lambda})"),
                ["t", "r", "theta", "phi"],
                &[
                    (0, 0, &format!("1 - {c}*r^2")),
                    (1, 1, &format!("-1/(1 - {c}*r^2)")),
                    (2, 2, "-r^2"),
                    (3, 3, "-r^2*sin(theta)^2"),
                ],
                [
                    Interval::new(-10.0, 10.0),
                    Interval::new(0.15 * l, 0.85 * l),
                    Interval::new(0.2, std::f64::consts::PI - 0.2),
                    Interval::new(0.1, 2.0 * std::f64::consts::PI - 0.1),
                ],
            )
        }
        _ => unreachable!("catalog covers all builtins"),
    };
    spec.map_err(|msg| {
        // builtin sources are fixed strings; a parse failure is a bug
        panic!("builtin metric `{name}` failed to build: {msg}")
    })
}

pub type T2 = [[f64; 4]; 4];
pub type T3 = [[[f64; 4]; 4]; 4];
pub type T4 = [[[[f64; 4]; 4]; 4]; 4];

/// Everything the verifiers need at one chart point.
#[derive(Clone, Debug)]
pub struct GeometryAtPoint {
    pub point: [f64; 4],
    pub g: T2,
    pub ginv: T2,
    /// dg[l][m][n] = ∂_l g_{mn}
    pub dg: T3,
    /// gamma[l][m][n] = Γ^l_{mn}
    pub gamma: T3,
    /// dgamma[k][l][m][n] = ∂_k Γ^l_{mn}
    pub dgamma: T4,
    /// riemann[r][s][m][n] = R^r_{smn}
    pub riemann: T4,
    /// riemann_down[r][s][m][n] = R_{rsmn}
    pub riemann_down: T4,
}

/// Christoffel symbols one jet level below the metric's: a `Jet2` metric
/// yields `Jet1` symbols (values plus their first derivatives).
pub fn christoffel_from_jets<J: Differentiable>(
    g: &Mat4<J>,
) -> Result<[[[J::Lower; 4]; 4]; 4], GeometryError> {
    let g_low: Mat4<J::Lower> = mat_from_fn(|i, j| g[i][j].lower());
    let ginv = invert(&g_low, 1e-12).ok_or(GeometryError::SingularMetric)?;
    let dg = |l: usize, m: usize, n: usize| g[m][n].partial(l);
    let half = J::Lower::from_f64(0.5);
    Ok(std::array::from_fn(|l| {
        std::array::from_fn(|m| {
            std::array::from_fn(|n| {
                let mut acc = J::Lower::from_f64(0.0);
                for r in 0..4 {
                    acc = acc + ginv[l][r] * (dg(m, r, n) + dg(n, r, m) - dg(r, m, n));
                }
                acc * half
            })
        })
    }))
}

/// Full local geometry, differentiated exactly through the metric
/// expressions.
pub fn geometry_at(spec: &MetricSpec, point: &[f64; 4]) -> Result<GeometryAtPoint, GeometryError> {
    spec.check_in_domain(point)?;
    let g2: Mat4<Jet2> = spec.metric_at(point)?;
    let g: T2 = mat_from_fn(|i, j| g2[i][j].v);

    let (pos, neg) = signature(&g);
    if (pos, neg) != (1, 3) {
        return Err(GeometryError::SignatureViolation {
            positives: pos,
            negatives: neg,
        });
    }

    let ginv_j: Mat4<Jet1> = {
        let g1: Mat4<Jet1> = mat_from_fn(|i, j| g2[i][j].lower());
        invert(&g1, 1e-12).ok_or(GeometryError::SingularMetric)?
    };
    let ginv: T2 = mat_from_fn(|i, j| ginv_j[i][j].v);

    let dg: T3 =
        std::array::from_fn(|l| std::array::from_fn(|m| std::array::from_fn(|n| g2[m][n].d[l])));

    let gamma1 = christoffel_from_jets::<Jet2>(&g2)?;
    let gamma: T3 = std::array::from_fn(|l| {
        std::array::from_fn(|m| std::array::from_fn(|n| gamma1[l][m][n].v))
    });
    let dgamma: T4 = std::array::from_fn(|k| {
        std::array::from_fn(|l| {
            std::array::from_fn(|m| std::array::from_fn(|n| gamma1[l][m][n].d[k]))
        })
    });

    let riemann: T4 = std::array::from_fn(|r| {
        std::array::from_fn(|s| {
            std::array::from_fn(|m| {
                std::array::from_fn(|n| {
                    let mut acc = dgamma[m][r][n][s] - dgamma[n][r][m][s];
                    for l in 0..4 {
                        acc += gamma[r][m][l] * gamma[l][n][s] - gamma[r][n][l] * gamma[l][m][s];
                    }
                    acc
                })
            })
        })
    });

    let riemann_down: T4 = std::array::from_fn(|r| {
        std::array::from_fn(|s| {
            std::array::from_fn(|m| {
                std::array::from_fn(|n| {
                    let mut acc = 0.0;
                    for t in 0..4 {
                        acc += g[r][t] * riemann[t][s][m][n];
                    }
                    acc
                })
            })
        })
    });

    Ok(GeometryAtPoint {
        point: *point,
        g,
        ginv,
        dg,
        gamma,
        dgamma,
        riemann,
        riemann_down,
    })
}

/// The curvature bivector C_{mn} = ½ R_{abmn} dx^a ∧ dx^b (grade 2).
/// With the coefficient antisymmetry the ½ collapses the double count, so
/// this is a plain sum over a < b.
pub fn curvature_bivector(geo: &GeometryAtPoint, mu: usize, nu: usize) -> Multivector<f64> {
    let mut out = Multivector::zero();
    for a in 0..4 {
        for b in (a + 1)..4 {
            let coeff = geo.riemann_down[a][b][mu][nu];
            if coeff != 0.0 {
                out.insert_add(Blade::from_indices(&[a, b]), coeff);
            }
        }
    }
    out
}

/// Orthonormal co-frame: rows of `e` are the co-frame components e^a_mu with
/// e^a_mu e^b_nu eta_{ab} = g_{mu nu}, eta = diag(+1,−1,−1,−1);
/// `einv[mu][a]` = e^mu_a is the inverse. `smooth` is false only for the
/// float-mode eigendecomposition fallback, which cannot run on jets.
#[derive(Clone, Debug)]
pub struct Tetrad<S> {
    pub e: Mat4<S>,
    pub einv: Mat4<S>,
    pub smooth: bool,
}

/// Signature-aware triangular (congruence) decomposition with fixed pivot
/// order: coordinates are processed in declared order; the frame label 0 is
/// assigned to the positive pivot. For diagonal metrics this reduces to
/// e^a_mu = sqrt(|g_{mumu}|) δ^a_mu, which is smooth and jet-evaluable.
pub fn tetrad_from_metric<S: Real>(g: &Mat4<S>) -> Result<Tetrad<S>, GeometryError> {
    let scale = g
        .iter()
        .flatten()
        .map(|x| x.val().abs())
        .fold(0.0_f64, f64::max)
        .max(1.0);

    // G = L D L^T, unit lower-triangular L, no pivot search
    let mut l: Mat4<S> = mat_from_fn(|i, j| S::from_f64(if i == j { 1.0 } else { 0.0 }));
    let mut d = [S::from_f64(0.0); 4];
    for k in 0..4 {
        let mut acc = g[k][k];
        for j in 0..k {
            acc = acc - l[k][j] * l[k][j] * d[j];
        }
        if acc.val().abs() < 1e-10 * scale {
            return Err(GeometryError::PivotBreakdown { index: k });
        }
        d[k] = acc;
        for i in (k + 1)..4 {
            let mut v = g[i][k];
            for j in 0..k {
                v = v - l[i][j] * l[k][j] * d[j];
            }
            l[i][k] = v / d[k];
        }
    }

    let positives: Vec<usize> = (0..4).filter(|&k| d[k].val() > 0.0).collect();
    if positives.len() != 1 {
        return Err(GeometryError::SignatureViolation {
            positives: positives.len(),
            negatives: 4 - positives.len(),
        });
    }
    // timelike frame label first, spacelike labels in declared order
    let mut perm = [0usize; 4];
    perm[0] = positives[0];
    let mut slot = 1;
    for k in 0..4 {
        if k != positives[0] {
            perm[slot] = k;
            slot += 1;
        }
    }

    let e: Mat4<S> = mat_from_fn(|a, mu| {
        let k = perm[a];
        d[k].abs().sqrt() * l[mu][k]
    });
    let einv = invert(&e, 1e-12).ok_or(GeometryError::SingularTetrad)?;
    Ok(Tetrad {
        e,
        einv,
        smooth: true,
    })
}

/// Tetrad at a chart point over any seedable scalar (smooth path only).
pub fn tetrad_at<S: ChartScalar>(
    spec: &MetricSpec,
    point: &[f64; 4],
) -> Result<Tetrad<S>, GeometryError> {
    spec.check_in_domain(point)?;
    let g = spec.metric_at::<S>(point)?;
    tetrad_from_metric(&g)
}

/// Float-mode tetrad with eigendecomposition fallback on pivot breakdown.
/// The fallback is reported as non-smooth (`smooth == false`) and is never
/// used on the jet paths.
pub fn tetrad_at_float(spec: &MetricSpec, point: &[f64; 4]) -> Result<Tetrad<f64>, GeometryError> {
    match tetrad_at::<f64>(spec, point) {
        Err(GeometryError::PivotBreakdown { .. }) => {
            let g = spec.metric_at::<f64>(point)?;
            tetrad_from_eigen(&g)
        }
        other => other,
    }
}

fn tetrad_from_eigen(g: &Mat4<f64>) -> Result<Tetrad<f64>, GeometryError> {
    let (eig, q) = symmetric_eigen(g);
    let positives: Vec<usize> = (0..4).filter(|&k| eig[k] > 0.0).collect();
    if positives.len() != 1 {
        return Err(GeometryError::SignatureViolation {
            positives: positives.len(),
            negatives: eig.iter().filter(|&&x| x < 0.0).count(),
        });
    }
    let mut perm = [0usize; 4];
    perm[0] = positives[0];
    let mut slot = 1;
    for k in 0..4 {
        if k != positives[0] {
            perm[slot] = k;
            slot += 1;
        }
    }
    // G = Q Λ Q^T ⇒ E = |Λ|^{1/2} Q^T, rows permuted timelike-first
    let e: Mat4<f64> = mat_from_fn(|a, mu| eig[perm[a]].abs().sqrt() * q[mu][perm[a]]);
    let einv = invert(&e, 1e-12).ok_or(GeometryError::SingularTetrad)?;
    Ok(Tetrad {
        e,
        einv,
        smooth: false,
    })
}

/// Independent finite-difference Christoffels (step `h`); the oracle the
/// jet-computed symbols are checked against.
pub fn fd_christoffel(
    spec: &MetricSpec,
    point: &[f64; 4],
    h: f64,
) -> Result<T3, GeometryError> {
    let g = spec.metric_at::<f64>(point)?;
    let ginv = invert(&g, 1e-12).ok_or(GeometryError::SingularMetric)?;
    let mut dg = [[[0.0; 4]; 4]; 4];
    for l in 0..4 {
        let mut up = *point;
        up[l] += h;
        let mut dn = *point;
        dn[l] -= h;
        let gu = spec.metric_at::<f64>(&up)?;
        let gd = spec.metric_at::<f64>(&dn)?;
        for m in 0..4 {
            for n in 0..4 {
                dg[l][m][n] = (gu[m][n] - gd[m][n]) / (2.0 * h);
            }
        }
    }
    Ok(std::array::from_fn(|l| {
        std::array::from_fn(|m| {
            std::array::from_fn(|n| {
                let mut acc = 0.0;
                for r in 0..4 {
                    acc += ginv[l][r] * (dg[m][r][n] + dg[n][r][m] - dg[r][m][n]);
                }
                0.5 * acc
            })
        })
    }))
}

/// Independent finite-difference Riemann tensor: FD Christoffels plus a
/// five-point (fourth-order) stencil for ∂Γ. `h_gamma` is the inner step
/// (for ∂g inside Γ), `h_outer` the stencil step for ∂Γ. The higher-order
/// outer stencil matters: the Christoffels reach O(r) magnitudes while
/// curvature components can sit orders of magnitude below them.
pub fn fd_riemann(
    spec: &MetricSpec,
    point: &[f64; 4],
    h_gamma: f64,
    h_outer: f64,
) -> Result<T4, GeometryError> {
    let gamma0 = fd_christoffel(spec, point, h_gamma)?;
    let mut dgamma = [[[[0.0; 4]; 4]; 4]; 4];
    for k in 0..4 {
        let shifted = |steps: f64| -> Result<T3, GeometryError> {
            let mut q = *point;
            q[k] += steps * h_outer;
            fd_christoffel(spec, &q, h_gamma)
        };
        let g_p2 = shifted(2.0)?;
        let g_p1 = shifted(1.0)?;
        let g_m1 = shifted(-1.0)?;
        let g_m2 = shifted(-2.0)?;
        for l in 0..4 {
            for m in 0..4 {
                for n in 0..4 {
                    dgamma[k][l][m][n] = (-g_p2[l][m][n] + 8.0 * g_p1[l][m][n]
                        - 8.0 * g_m1[l][m][n]
                        + g_m2[l][m][n])
                        / (12.0 * h_outer);
                }
            }
        }
    }
    Ok(std::array::from_fn(|r| {
        std::array::from_fn(|s| {
            std::array::from_fn(|m| {
                std::array::from_fn(|n| {
                    let mut acc = dgamma[m][r][n][s] - dgamma[n][r][m][s];
                    for l in 0..4 {
                        acc +=
                            gamma0[r][m][l] * gamma0[l][n][s] - gamma0[r][n][l] * gamma0[l][m][s];
                    }
                    acc
                })
            })
        })
    }))
}

pub fn max_abs4(t: &T4) -> f64 {
    t.iter()
        .flatten()
        .flatten()
        .flatten()
        .fold(0.0_f64, |acc, &x| acc.max(x.abs()))
}

pub fn max_abs3(t: &T3) -> f64 {
    t.iter()
        .flatten()
        .flatten()
        .fold(0.0_f64, |acc, &x| acc.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn builtin_named(name: &str) -> MetricSpec {
        builtin(name, &BTreeMap::new()).unwrap()
    }

    fn curved_points(spec: &MetricSpec, n: usize, seed: u64) -> Vec<[f64; 4]> {
        let mut rng = SplitMix64::new(seed);
        (0..n)
            .map(|_| std::array::from_fn(|i| rng.in_range(spec.domain[i].lo, spec.domain[i].hi)))
            .collect()
    }

    #[test]
    fn minkowski_is_flat() {
        let spec = builtin_named("minkowski");
        let geo = geometry_at(&spec, &[0.3, -1.0, 2.0, 5.0]).unwrap();
        assert_eq!(max_abs3(&geo.gamma), 0.0);
        assert_eq!(max_abs4(&geo.riemann), 0.0);
        for mu in 0..4 {
            for nu in 0..4 {
                assert!(curvature_bivector(&geo, mu, nu).is_exactly_zero());
            }
        }
    }

    #[test]
    fn schwarzschild_christoffels_match_closed_form() {
        let spec = builtin_named("schwarzschild");
        let (m, r) = (1.0, 10.0);
        let geo = geometry_at(&spec, &[0.0, r, 1.2, 2.0]).unwrap();
        let f = 1.0 - 2.0 * m / r;
        // Γ^t_{tr} = M/(r² f), Γ^r_{tt} = M f / r², Γ^r_{rr} = −M/(r² f)
        assert!((geo.gamma[0][0][1] - m / (r * r * f)).abs() < 1e-13);
        assert!((geo.gamma[1][0][0] - m * f / (r * r)).abs() < 1e-13);
        assert!((geo.gamma[1][1][1] + m / (r * r * f)).abs() < 1e-13);
        // Γ symmetric in its lower indices
        for l in 0..4 {
            for mu in 0..4 {
                for nu in 0..4 {
                    assert_eq!(geo.gamma[l][mu][nu], geo.gamma[l][nu][mu]);
                }
            }
        }
    }

    #[test]
    fn schwarzschild_kretschmann_invariant() {
        let spec = builtin_named("schwarzschild");
        let r = 8.0;
        let geo = geometry_at(&spec, &[1.0, r, 0.9, 4.0]).unwrap();
        let mut k = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    for d in 0..4 {
                        // raise all four indices of R_{abcd}
                        let mut up = 0.0;
                        for (ar, br, cr, dr) in
                            itertools_lite(|aa, bb, cc, dd| (aa, bb, cc, dd))
                        {
                            up += geo.ginv[a][ar]
                                * geo.ginv[b][br]
                                * geo.ginv[c][cr]
                                * geo.ginv[d][dr]
                                * geo.riemann_down[ar][br][cr][dr];
                        }
                        k += geo.riemann_down[a][b][c][d] * up;
                    }
                }
            }
        }
        let expect = 48.0 / r.powi(6); // 48 M²/r⁶ with M = 1
        assert!(
            (k - expect).abs() / expect < 1e-10,
            "kretschmann {k} vs {expect}"
        );
    }

    // all index quadruples; keeps the contraction above readable
    fn itertools_lite<T>(f: impl Fn(usize, usize, usize, usize) -> T) -> Vec<T> {
        let mut out = Vec::with_capacity(256);
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    for d in 0..4 {
                        out.push(f(a, b, c, d));
                    }
                }
            }
        }
        out
    }

    #[test]
    fn flrw_christoffels_match_finite_differences() {
        let spec = builtin_named("flrw-exp");
        for point in [[0.0, 1.0, 2.0, -1.0], [0.4, -0.3, 0.1, 0.8]] {
            let geo = geometry_at(&spec, &point).unwrap();
            let fd = fd_christoffel(&spec, &point, 1e-5).unwrap();
            for l in 0..4 {
                for m in 0..4 {
                    for n in 0..4 {
                        assert!(
                            (geo.gamma[l][m][n] - fd[l][m][n]).abs() < 1e-7,
                            "Γ^{l}_{m}{n}: {} vs {}",
                            geo.gamma[l][m][n],
                            fd[l][m][n]
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn schwarzschild_riemann_matches_finite_differences() {
        let spec = builtin_named("schwarzschild");
        let point = [0.0, 10.0, 1.1, 3.0];
        let geo = geometry_at(&spec, &point).unwrap();
        let fd = fd_riemann(&spec, &point, 1e-4, 1e-3).unwrap();
        // the natural magnitude of the assembly inputs: ∂Γ reaches O(1)
        // while far-field curvature components are ~1e-3
        let scale = max_abs4(&geo.riemann)
            .max(max_abs4(&geo.dgamma))
            .max(1e-2);
        for r in 0..4 {
            for s in 0..4 {
                for m in 0..4 {
                    for n in 0..4 {
                        assert!(
                            (geo.riemann[r][s][m][n] - fd[r][s][m][n]).abs() / scale < 1e-5,
                            "R^{r}_{s}{m}{n}: {} vs {}",
                            geo.riemann[r][s][m][n],
                            fd[r][s][m][n]
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn metric_compatibility_and_riemann_symmetries() {
        for name in ["schwarzschild", "flrw-exp", "de-sitter"] {
            let spec = builtin_named(name);
            for point in curved_points(&spec, 8, 17) {
                let geo = geometry_at(&spec, &point).unwrap();
                // ∇_l g_{mn} = 0
                for l in 0..4 {
                    for m in 0..4 {
                        for n in 0..4 {
                            let mut cov = geo.dg[l][m][n];
                            for r in 0..4 {
                                cov -= geo.gamma[r][l][m] * geo.g[r][n]
                                    + geo.gamma[r][l][n] * geo.g[m][r];
                            }
                            assert!(cov.abs() < 1e-9, "{name}: ∇g = {cov} at {point:?}");
                        }
                    }
                }
                let rd = &geo.riemann_down;
                let scale = max_abs4(rd).max(1e-10);
                for a in 0..4 {
                    for b in 0..4 {
                        for c in 0..4 {
                            for d in 0..4 {
                                let asym1 = rd[a][b][c][d] + rd[b][a][c][d];
                                let asym2 = rd[a][b][c][d] + rd[a][b][d][c];
                                let pair = rd[a][b][c][d] - rd[c][d][a][b];
                                let bianchi =
                                    rd[a][b][c][d] + rd[a][c][d][b] + rd[a][d][b][c];
                                assert!(asym1.abs() / scale < 1e-8, "{name} antisym1");
                                assert!(asym2.abs() / scale < 1e-8, "{name} antisym2");
                                assert!(pair.abs() / scale < 1e-8, "{name} pair swap");
                                assert!(bianchi.abs() / scale < 1e-8, "{name} bianchi");
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn de_sitter_has_constant_curvature() {
        let mut params = BTreeMap::new();
        params.insert("lambda".to_string(), 1.0);
        let spec = builtin("de-sitter", &params).unwrap();
        for point in curved_points(&spec, 10, 23) {
            let geo = geometry_at(&spec, &point).unwrap();
            // estimate K from the (0,1,0,1) component, check all others
            let denom = geo.g[0][0] * geo.g[1][1] - geo.g[0][1] * geo.g[0][1];
            let k = geo.riemann_down[0][1][0][1] / denom;
            let scale = max_abs4(&geo.riemann_down).max(1e-10);
            for a in 0..4 {
                for b in 0..4 {
                    for c in 0..4 {
                        for d in 0..4 {
                            let model =
                                k * (geo.g[a][c] * geo.g[b][d] - geo.g[a][d] * geo.g[b][c]);
                            let res = (geo.riemann_down[a][b][c][d] - model).abs() / scale;
                            assert!(res < 1e-6, "component ({a}{b}{c}{d}) residual {res}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn curvature_bivector_is_antisymmetric() {
        let spec = builtin_named("schwarzschild");
        let geo = geometry_at(&spec, &[0.0, 6.0, 1.0, 0.5]).unwrap();
        for mu in 0..4 {
            for nu in 0..4 {
                let c_mn = curvature_bivector(&geo, mu, nu);
                let c_nm = curvature_bivector(&geo, nu, mu);
                assert!(c_mn.add(&c_nm).max_abs_coeff() == 0.0);
                assert!(c_mn.off_grade_norm(2) == 0.0);
            }
        }
    }

    #[test]
    fn tetrad_identities_on_builtins() {
        let eta = [1.0, -1.0, -1.0, -1.0];
        for name in ["minkowski", "schwarzschild", "flrw-exp", "de-sitter"] {
            let spec = builtin_named(name);
            for point in curved_points(&spec, 6, 5) {
                let tet = tetrad_at::<f64>(&spec, &point).unwrap();
                assert!(tet.smooth);
                let g = spec.metric_at::<f64>(&point).unwrap();
                for mu in 0..4 {
                    for nu in 0..4 {
                        let mut rec = 0.0;
                        for a in 0..4 {
                            rec += eta[a] * tet.e[a][mu] * tet.e[a][nu];
                        }
                        assert!(
                            (rec - g[mu][nu]).abs() < 1e-10,
                            "{name}: e^T η e != g at ({mu},{nu})"
                        );
                    }
                }
                for a in 0..4 {
                    for b in 0..4 {
                        let mut delta = 0.0;
                        for mu in 0..4 {
                            delta += tet.e[a][mu] * tet.einv[mu][b];
                        }
                        let want = if a == b { 1.0 } else { 0.0 };
                        assert!((delta - want).abs() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn minkowski_tetrad_is_identity() {
        let spec = builtin_named("minkowski");
        let tet = tetrad_at::<f64>(&spec, &[0.0; 4]).unwrap();
        for a in 0..4 {
            for mu in 0..4 {
                let want = if a == mu { 1.0 } else { 0.0 };
                assert_eq!(tet.e[a][mu], want);
            }
        }
    }

    #[test]
    fn flrw_tetrad_is_diagonal_square_root() {
        let spec = builtin_named("flrw-exp");
        let t = 0.35;
        let tet = tetrad_at::<f64>(&spec, &[t, 0.0, 0.0, 0.0]).unwrap();
        assert!((tet.e[0][0] - 1.0).abs() < 1e-15);
        for i in 1..4 {
            assert!((tet.e[i][i] - t.exp()).abs() < 1e-13);
        }
    }

    #[test]
    fn random_congruences_reproduce_the_metric() {
        // random symmetric (1,3) matrices built as E^T η E
        let eta = [1.0, -1.0, -1.0, -1.0];
        let mut rng = SplitMix64::new(71);
        for _ in 0..40 {
            let e0: Mat4<f64> = mat_from_fn(|i, j| {
                (if i == j { 1.0 } else { 0.0 }) + rng.in_range(-0.3, 0.3)
            });
            let g: Mat4<f64> = mat_from_fn(|m, n| {
                let mut acc = 0.0;
                for a in 0..4 {
                    acc += eta[a] * e0[a][m] * e0[a][n];
                }
                acc
            });
            let tet = tetrad_from_metric(&g).unwrap();
            for m in 0..4 {
                for n in 0..4 {
                    let mut rec = 0.0;
                    for a in 0..4 {
                        rec += eta[a] * tet.e[a][m] * tet.e[a][n];
                    }
                    assert!((rec - g[m][n]).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn dual_tetrad_derivatives_match_finite_differences() {
        // diagonal mode (schwarzschild) and triangular mode (off-diagonal
        // perturbation of minkowski, via the expression path)
        let offdiag = MetricSpec::from_entries(
            "warped",
            ["t", "x", "y", "z"],
            &[
                (0, 0, "1 + 0.1*sin(x)"),
                (1, 1, "-1 - 0.1*cos(t)"),
                (2, 2, "-1 + 0.05*sin(x)"),
                (3, 3, "-1"),
                (0, 1, "0.05*cos(y)"),
                (1, 2, "0.04*sin(t)"),
            ],
            [Interval::new(-2.0, 2.0); 4],
        )
        .unwrap();
        let cases = [
            (builtin_named("schwarzschild"), [0.0, 7.0, 1.0, 1.5]),
            (offdiag, [0.2, 0.4, -0.3, 0.9]),
        ];
        for (spec, point) in cases {
            let jet = tetrad_at::<Jet1>(&spec, &point).unwrap();
            let h = 1e-6;
            for l in 0..4 {
                let mut up = point;
                up[l] += h;
                let mut dn = point;
                dn[l] -= h;
                let eu = tetrad_at::<f64>(&spec, &up).unwrap();
                let ed = tetrad_at::<f64>(&spec, &dn).unwrap();
                for a in 0..4 {
                    for mu in 0..4 {
                        let fd = (eu.e[a][mu] - ed.e[a][mu]) / (2.0 * h);
                        assert!(
                            (jet.e[a][mu].d[l] - fd).abs() < 1e-6,
                            "{}: de^{a}_{mu}/dx{l} jet {} vs fd {}",
                            spec.name,
                            jet.e[a][mu].d[l],
                            fd
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn wrong_signature_is_rejected() {
        let spec = MetricSpec::from_entries(
            "twotwo",
            ["t", "x", "y", "z"],
            &[(0, 0, "1"), (1, 1, "1"), (2, 2, "-1"), (3, 3, "-1")],
            [Interval::new(-10.0, 10.0); 4],
        )
        .unwrap();
        match geometry_at(&spec, &[0.0; 4]) {
            Err(GeometryError::SignatureViolation {
                positives: 2,
                negatives: 2,
            }) => {}
            other => panic!("expected signature violation, got {other:?}"),
        }
        match tetrad_at::<f64>(&spec, &[0.0; 4]) {
            Err(GeometryError::SignatureViolation { .. }) => {}
            other => panic!("expected signature violation, got {other:?}"),
        }
    }

    #[test]
    fn out_of_domain_is_rejected() {
        let spec = builtin_named("schwarzschild");
        match geometry_at(&spec, &[0.0, 2.5, 1.0, 1.0]) {
            Err(GeometryError::OutOfDomain { coord, .. }) => assert_eq!(coord, "r"),
            other => panic!("expected domain error, got {other:?}"),
        }
    }

    #[test]
    fn eigen_fallback_handles_pivot_breakdown() {
        // g_00 = 0 kills the first pivot but the matrix still has
        // signature (1,3): off-diagonal time-space mixing
        let spec = MetricSpec::from_entries(
            "null-slice",
            ["t", "x", "y", "z"],
            &[
                (0, 1, "1"),
                (2, 2, "-1"),
                (3, 3, "-1"),
            ],
            [Interval::new(-2.0, 2.0); 4],
        )
        .unwrap();
        assert!(matches!(
            tetrad_at::<f64>(&spec, &[0.0; 4]),
            Err(GeometryError::PivotBreakdown { index: 0 })
        ));
        let tet = tetrad_at_float(&spec, &[0.0; 4]).unwrap();
        assert!(!tet.smooth);
        let eta = [1.0, -1.0, -1.0, -1.0];
        let g = spec.metric_at::<f64>(&[0.0; 4]).unwrap();
        for m in 0..4 {
            for n in 0..4 {
                let mut rec = 0.0;
                for a in 0..4 {
                    rec += eta[a] * tet.e[a][m] * tet.e[a][n];
                }
                assert!((rec - g[m][n]).abs() < 1e-10);
            }
        }
    }
}
