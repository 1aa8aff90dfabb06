//! Scalar realizations used throughout the engine.
//!
//! Every quantity in the pipeline (metric components, tetrads, multivector
//! coefficients) is generic over a scalar type:
//!
//! * [`f64`] — plain evaluation.
//! * [`Dual2`] — second-order dual number carrying the value, two directional
//!   first derivatives and the mixed second derivative. This is the
//!   direction-pair evaluation mode exposed by the expression evaluator.
//! * [`Jet1`] / [`Jet2`] — forward-mode jets carrying the full 4-gradient
//!   (and, for `Jet2`, the full Hessian) with respect to the chart
//!   coordinates. Running an algorithm on jets differentiates it exactly.
//! * [`Rat`] — arbitrary-precision rationals for exact constant-coefficient
//!   algebra checks.
//!
//! `Jet2` lowers to `Jet1` and `Jet1` lowers to `f64` (see
//! [`Differentiable`]): evaluating a field over `Jet2` yields the field and
//! its first derivatives as `Jet1` values, which is how the covariant
//! derivative of an already-derived quantity is obtained without finite
//! differences.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

/// Ring operations required of a multivector coefficient.
///
/// Implemented for all [`Real`] types and for [`Rat`]. Methods take
/// references so non-`Copy` coefficients (big rationals) work too.
pub trait Coeff: Clone + PartialEq + fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_f64(x: f64) -> Self;
    fn add_ref(&self, rhs: &Self) -> Self;
    fn sub_ref(&self, rhs: &Self) -> Self;
    fn mul_ref(&self, rhs: &Self) -> Self;
    fn neg_ref(&self) -> Self;
    fn is_zero(&self) -> bool;
    /// Magnitude of the value part; the residual norm used by the verifiers.
    fn mag(&self) -> f64;
}

/// A differentiable scalar: field arithmetic plus the elementary functions
/// needed by metric expressions.
pub trait Real:
    Copy
    + PartialEq
    + fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(x: f64) -> Self;
    /// Value part (derivative payload dropped).
    fn val(self) -> f64;
    fn recip(self) -> Self;
    fn sqrt(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;

    fn abs(self) -> Self {
        if self.val() < 0.0 {
            -self
        } else {
            self
        }
    }

    fn tan(self) -> Self {
        self.sin() / self.cos()
    }

    fn sinh(self) -> Self {
        let e = self.exp();
        (e - e.recip()) * Self::from_f64(0.5)
    }

    fn cosh(self) -> Self {
        let e = self.exp();
        (e + e.recip()) * Self::from_f64(0.5)
    }

    fn tanh(self) -> Self {
        self.sinh() / self.cosh()
    }

    /// Integer power by repeated squaring; valid for any base sign.
    fn powi(self, n: i64) -> Self {
        if n == 0 {
            return Self::from_f64(1.0);
        }
        let mut k = n.unsigned_abs();
        let mut base = self;
        let mut acc = Self::from_f64(1.0);
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            k >>= 1;
        }
        if n < 0 {
            acc.recip()
        } else {
            acc
        }
    }

    /// General power via exp/ln; callers must ensure a positive base.
    fn powf(self, e: Self) -> Self {
        (self.ln() * e).exp()
    }
}

/// A scalar that can be seeded from a chart point: coordinate `idx` becomes
/// the variable the derivative slots track.
pub trait ChartScalar: Real {
    fn at_coordinate(point: &[f64; 4], idx: usize) -> Self;
}

/// A jet that can shed one derivative order.
pub trait Differentiable: ChartScalar {
    type Lower: ChartScalar + Coeff;
    /// Truncate to the next-lower order.
    fn lower(self) -> Self::Lower;
    /// Partial derivative along coordinate `mu`, one order lower.
    fn partial(self, mu: usize) -> Self::Lower;
}

impl<T: Real> Coeff for T {
    fn zero() -> Self {
        T::from_f64(0.0)
    }
    fn one() -> Self {
        T::from_f64(1.0)
    }
    fn from_f64(x: f64) -> Self {
        <T as Real>::from_f64(x)
    }
    fn add_ref(&self, rhs: &Self) -> Self {
        *self + *rhs
    }
    fn sub_ref(&self, rhs: &Self) -> Self {
        *self - *rhs
    }
    fn mul_ref(&self, rhs: &Self) -> Self {
        *self * *rhs
    }
    fn neg_ref(&self) -> Self {
        -*self
    }
    fn is_zero(&self) -> bool {
        *self == T::from_f64(0.0)
    }
    fn mag(&self) -> f64 {
        self.val().abs()
    }
}

impl Real for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn val(self) -> f64 {
        self
    }
    fn recip(self) -> Self {
        1.0 / self
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn tan(self) -> Self {
        f64::tan(self)
    }
    fn sinh(self) -> Self {
        f64::sinh(self)
    }
    fn cosh(self) -> Self {
        f64::cosh(self)
    }
    fn tanh(self) -> Self {
        f64::tanh(self)
    }
}

impl ChartScalar for f64 {
    fn at_coordinate(point: &[f64; 4], idx: usize) -> Self {
        point[idx]
    }
}

/// Second-order dual number along a chosen pair of directions:
/// value, d/da, d/db and the mixed second derivative d²/dadb.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Dual2 {
    pub v: f64,
    pub da: f64,
    pub db: f64,
    pub dab: f64,
}

impl Dual2 {
    pub fn constant(v: f64) -> Self {
        Dual2 {
            v,
            da: 0.0,
            db: 0.0,
            dab: 0.0,
        }
    }

    /// A variable seeded as direction a, direction b, both, or neither.
    pub fn variable(v: f64, seed_a: bool, seed_b: bool) -> Self {
        Dual2 {
            v,
            da: if seed_a { 1.0 } else { 0.0 },
            db: if seed_b { 1.0 } else { 0.0 },
            dab: 0.0,
        }
    }

    /// Chain rule for a univariate function with value `f`, derivative `df`
    /// and second derivative `ddf` at `self.v`.
    fn chain(self, f: f64, df: f64, ddf: f64) -> Self {
        Dual2 {
            v: f,
            da: df * self.da,
            db: df * self.db,
            dab: df * self.dab + ddf * self.da * self.db,
        }
    }
}

impl Add for Dual2 {
    type Output = Self;
    fn add(self, r: Self) -> Self {
        Dual2 {
            v: self.v + r.v,
            da: self.da + r.da,
            db: self.db + r.db,
            dab: self.dab + r.dab,
        }
    }
}

impl Sub for Dual2 {
    type Output = Self;
    fn sub(self, r: Self) -> Self {
        Dual2 {
            v: self.v - r.v,
            da: self.da - r.da,
            db: self.db - r.db,
            dab: self.dab - r.dab,
        }
    }
}

impl Mul for Dual2 {
    type Output = Self;
    fn mul(self, r: Self) -> Self {
        Dual2 {
            v: self.v * r.v,
            da: self.da * r.v + self.v * r.da,
            db: self.db * r.v + self.v * r.db,
            dab: self.dab * r.v + self.da * r.db + self.db * r.da + self.v * r.dab,
        }
    }
}

impl Div for Dual2 {
    type Output = Self;
    fn div(self, r: Self) -> Self {
        self * Real::recip(r)
    }
}

impl Neg for Dual2 {
    type Output = Self;
    fn neg(self) -> Self {
        Dual2 {
            v: -self.v,
            da: -self.da,
            db: -self.db,
            dab: -self.dab,
        }
    }
}

impl Real for Dual2 {
    fn from_f64(x: f64) -> Self {
        Dual2::constant(x)
    }
    fn val(self) -> f64 {
        self.v
    }
    fn recip(self) -> Self {
        let i = 1.0 / self.v;
        self.chain(i, -i * i, 2.0 * i * i * i)
    }
    fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * s * s))
    }
    fn sin(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(s, c, -s)
    }
    fn cos(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(c, -s, -c)
    }
    fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e, e)
    }
    fn ln(self) -> Self {
        let i = 1.0 / self.v;
        self.chain(self.v.ln(), i, -i * i)
    }
}

/// First-order jet: value plus the gradient along the four chart coordinates.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Jet1 {
    pub v: f64,
    pub d: [f64; 4],
}

impl Jet1 {
    pub fn constant(v: f64) -> Self {
        Jet1 { v, d: [0.0; 4] }
    }

    fn chain(self, f: f64, df: f64) -> Self {
        let mut d = [0.0; 4];
        for i in 0..4 {
            d[i] = df * self.d[i];
        }
        Jet1 { v: f, d }
    }
}

impl Add for Jet1 {
    type Output = Self;
    fn add(self, r: Self) -> Self {
        let mut d = [0.0; 4];
        for i in 0..4 {
            d[i] = self.d[i] + r.d[i];
        }
        Jet1 {
            v: self.v + r.v,
            d,
        }
    }
}

impl Sub for Jet1 {
    type Output = Self;
    fn sub(self, r: Self) -> Self {
        let mut d = [0.0; 4];
        for i in 0..4 {
            d[i] = self.d[i] - r.d[i];
        }
        Jet1 {
            v: self.v - r.v,
            d,
        }
    }
}

impl Mul for Jet1 {
    type Output = Self;
    fn mul(self, r: Self) -> Self {
        let mut d = [0.0; 4];
        for i in 0..4 {
            d[i] = self.d[i] * r.v + self.v * r.d[i];
        }
        Jet1 {
            v: self.v * r.v,
            d,
        }
    }
}

impl Div for Jet1 {
    type Output = Self;
    fn div(self, r: Self) -> Self {
        self * Real::recip(r)
    }
}

impl Neg for Jet1 {
    type Output = Self;
    fn neg(self) -> Self {
        let mut d = [0.0; 4];
        for i in 0..4 {
            d[i] = -self.d[i];
        }
        Jet1 { v: -self.v, d }
    }
}

impl Real for Jet1 {
    fn from_f64(x: f64) -> Self {
        Jet1::constant(x)
    }
    fn val(self) -> f64 {
        self.v
    }
    fn recip(self) -> Self {
        let i = 1.0 / self.v;
        self.chain(i, -i * i)
    }
    fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        self.chain(s, 0.5 / s)
    }
    fn sin(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(s, c)
    }
    fn cos(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(c, -s)
    }
    fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e)
    }
    fn ln(self) -> Self {
        self.chain(self.v.ln(), 1.0 / self.v)
    }
}

impl ChartScalar for Jet1 {
    fn at_coordinate(point: &[f64; 4], idx: usize) -> Self {
        let mut d = [0.0; 4];
        d[idx] = 1.0;
        Jet1 { v: point[idx], d }
    }
}

impl Differentiable for Jet1 {
    type Lower = f64;
    fn lower(self) -> f64 {
        self.v
    }
    fn partial(self, mu: usize) -> f64 {
        self.d[mu]
    }
}

/// Second-order jet: value, gradient and full (symmetric) Hessian along the
/// four chart coordinates.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Jet2 {
    pub v: f64,
    pub d: [f64; 4],
    pub h: [[f64; 4]; 4],
}

impl Jet2 {
    pub fn constant(v: f64) -> Self {
        Jet2 {
            v,
            d: [0.0; 4],
            h: [[0.0; 4]; 4],
        }
    }

    fn chain(self, f: f64, df: f64, ddf: f64) -> Self {
        let mut d = [0.0; 4];
        let mut h = [[0.0; 4]; 4];
        for i in 0..4 {
            d[i] = df * self.d[i];
            for j in 0..4 {
                h[i][j] = df * self.h[i][j] + ddf * self.d[i] * self.d[j];
            }
        }
        Jet2 { v: f, d, h }
    }
}

impl Add for Jet2 {
    type Output = Self;
    fn add(self, r: Self) -> Self {
        let mut out = Jet2::constant(self.v + r.v);
        for i in 0..4 {
            out.d[i] = self.d[i] + r.d[i];
            for j in 0..4 {
                out.h[i][j] = self.h[i][j] + r.h[i][j];
            }
        }
        out
    }
}

impl Sub for Jet2 {
    type Output = Self;
    fn sub(self, r: Self) -> Self {
        let mut out = Jet2::constant(self.v - r.v);
        for i in 0..4 {
            out.d[i] = self.d[i] - r.d[i];
            for j in 0..4 {
                out.h[i][j] = self.h[i][j] - r.h[i][j];
            }
        }
        out
    }
}

impl Mul for Jet2 {
    type Output = Self;
    fn mul(self, r: Self) -> Self {
        let mut out = Jet2::constant(self.v * r.v);
        for i in 0..4 {
            out.d[i] = self.d[i] * r.v + self.v * r.d[i];
            for j in 0..4 {
                out.h[i][j] = self.h[i][j] * r.v
                    + self.d[i] * r.d[j]
                    + self.d[j] * r.d[i]
                    + self.v * r.h[i][j];
            }
        }
        out
    }
}

impl Div for Jet2 {
    type Output = Self;
    fn div(self, r: Self) -> Self {
        self * Real::recip(r)
    }
}

impl Neg for Jet2 {
    type Output = Self;
    fn neg(self) -> Self {
        let mut out = Jet2::constant(-self.v);
        for i in 0..4 {
            out.d[i] = -self.d[i];
            for j in 0..4 {
                out.h[i][j] = -self.h[i][j];
            }
        }
        out
    }
}

impl Real for Jet2 {
    fn from_f64(x: f64) -> Self {
        Jet2::constant(x)
    }
    fn val(self) -> f64 {
        self.v
    }
    fn recip(self) -> Self {
        let i = 1.0 / self.v;
        self.chain(i, -i * i, 2.0 * i * i * i)
    }
    fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * s * s))
    }
    fn sin(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(s, c, -s)
    }
    fn cos(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(c, -s, -c)
    }
    fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e, e)
    }
    fn ln(self) -> Self {
        let i = 1.0 / self.v;
        self.chain(self.v.ln(), i, -i * i)
    }
}

impl ChartScalar for Jet2 {
    fn at_coordinate(point: &[f64; 4], idx: usize) -> Self {
        let mut d = [0.0; 4];
        d[idx] = 1.0;
        Jet2 {
            v: point[idx],
            d,
            h: [[0.0; 4]; 4],
        }
    }
}

impl Differentiable for Jet2 {
    type Lower = Jet1;
    fn lower(self) -> Jet1 {
        Jet1 {
            v: self.v,
            d: self.d,
        }
    }
    fn partial(self, mu: usize) -> Jet1 {
        Jet1 {
            v: self.d[mu],
            d: self.h[mu],
        }
    }
}

/// Exact rational coefficient for constant-metric algebra checks.
#[derive(Clone, PartialEq, Debug)]
pub struct Rat(pub BigRational);

impl Rat {
    pub fn new(num: i64, den: i64) -> Self {
        Rat(BigRational::new(num.into(), den.into()))
    }

    pub fn int(n: i64) -> Self {
        Rat(BigRational::from_integer(n.into()))
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }
}

impl Coeff for Rat {
    fn zero() -> Self {
        Rat(BigRational::zero())
    }
    fn one() -> Self {
        Rat(BigRational::from_integer(1.into()))
    }
    fn from_f64(x: f64) -> Self {
        Rat(BigRational::from_float(x).expect("finite float"))
    }
    fn add_ref(&self, rhs: &Self) -> Self {
        Rat(&self.0 + &rhs.0)
    }
    fn sub_ref(&self, rhs: &Self) -> Self {
        Rat(&self.0 - &rhs.0)
    }
    fn mul_ref(&self, rhs: &Self) -> Self {
        Rat(&self.0 * &rhs.0)
    }
    fn neg_ref(&self) -> Self {
        Rat(-&self.0)
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
    fn mag(&self) -> f64 {
        self.0.abs().to_f64().unwrap_or(f64::NAN)
    }
}
