//! Verification engine for a gauge-connection construction on curved
//! 4-dimensional charts.
//!
//! Given a pseudo-Riemannian metric of signature (1,3), the library builds
//! an orthonormal tetrad, the structure fields H (grade 1) and I, K
//! (grade 2), the grade-2 connection B_mu, and the gauge-covariant
//! derivative D_mu = Y_mu − [B_mu, ·]. It then machine-checks, at sampled
//! chart points, that the system satisfies the field-strength identity
//! against the curvature bivector, covariant constancy of the structure
//! fields, their algebraic relations, and the auxiliary derivative
//! relations, each at a documented tolerance.
//!
//! Modules follow the pipeline:
//!
//! * [`scalar`] — floats, direction-pair duals, jets, exact rationals.
//! * [`blade`], [`multivector`] — sparse graded Clifford arithmetic.
//! * [`expr`] — the coordinate-expression grammar and evaluator.
//! * [`geometry`] — metrics, Christoffels, Riemann, tetrads, curvature
//!   bivectors.
//! * [`gauge`] — structure fields, the connection, covariant derivatives,
//!   field strength.
//! * [`verify`] — deterministic sampling, the identity suites, reports.

pub mod blade;
pub mod expr;
pub mod gauge;
pub mod geometry;
pub mod matrix;
pub mod multivector;
pub mod rng;
pub mod scalar;
pub mod verify;

pub use blade::Blade;
pub use gauge::{GaugeSystem, StructureTriple};
pub use geometry::{geometry_at, tetrad_at, GeometryAtPoint, MetricSpec, Tetrad};
pub use multivector::{clifford_mul, CliffordContext, Multivector};
pub use rng::SplitMix64;
pub use scalar::{Dual2, Jet1, Jet2, Rat};

