//! Unit-determinant 2×2 complex matrices, trace-free matrices and the
//! trace form.
//!
//! Entries are stored in double-double precision; constructors and accessors
//! speak `Complex64`. Everything lives in SL(2,ℂ), the two-fold lift of the
//! Möbius group, so trace signs are meaningful.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::precision::{c64, cabs, cdd, csqrt, Cdd, Dd};

/// Tolerance band used by [`classify`] around the boundary cases.
pub const CLASSIFY_BAND: f64 = 1e-10;

/// Drift of `det` beyond which products are renormalized.
const RENORM_THRESHOLD: f64 = 1e-13;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MoebiusError {
    #[error("element is {0:?}, not loxodromic")]
    NonLoxodromic(Classification),
    #[error("generator index {index} out of range for {len} generators")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("matrix is not trace-free (trace {trace})")]
    NotTraceFree { trace: Complex64 },
    #[error("matrix is singular")]
    Singular,
}

/// Conjugacy type of an element of SL(2,ℂ), read off from its trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Identity,
    Elliptic,
    Parabolic,
    Loxodromic,
}

/// One letter of a word in the generators: `g_i` or `g_i^{-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Letter {
    pub generator: usize,
    pub inverse: bool,
}

impl Letter {
    pub const fn new(generator: usize) -> Self {
        Letter {
            generator,
            inverse: false,
        }
    }

    pub const fn inv(generator: usize) -> Self {
        Letter {
            generator,
            inverse: true,
        }
    }

    pub fn inverted(self) -> Self {
        Letter {
            generator: self.generator,
            inverse: !self.inverse,
        }
    }
}

/// Element of SL(2,ℂ), stored row-major as `[a, b, c, d]`.
#[derive(Clone, Copy, PartialEq)]
pub struct UnitDetMatrix {
    m: [Cdd; 4],
}

fn det_dd(m: &[Cdd; 4]) -> Cdd {
    m[0] * m[3] - m[1] * m[2]
}

fn mul_dd(x: &[Cdd; 4], y: &[Cdd; 4]) -> [Cdd; 4] {
    [
        x[0] * y[0] + x[1] * y[2],
        x[0] * y[1] + x[1] * y[3],
        x[2] * y[0] + x[3] * y[2],
        x[2] * y[1] + x[3] * y[3],
    ]
}

impl UnitDetMatrix {
    pub fn identity() -> Self {
        UnitDetMatrix {
            m: [Cdd::one(), Cdd::zero(), Cdd::zero(), Cdd::one()],
        }
    }

    /// Builds a matrix from arbitrary nonsingular entries, scaling by the
    /// principal square root of the determinant.
    pub fn new(
        a: Complex64,
        b: Complex64,
        c: Complex64,
        d: Complex64,
    ) -> Result<Self, MoebiusError> {
        Self::from_dd([cdd(a), cdd(b), cdd(c), cdd(d)])
    }

    /// Double-double variant of [`UnitDetMatrix::new`].
    pub fn from_dd(m: [Cdd; 4]) -> Result<Self, MoebiusError> {
        let det = det_dd(&m);
        if cabs(det).to_f64() == 0.0 || !cabs(det).is_finite() {
            return Err(MoebiusError::Singular);
        }
        Ok(Self::renormalized(m, det))
    }

    /// Wraps entries already known to have determinant one up to rounding.
    pub(crate) fn from_dd_unchecked(m: [Cdd; 4]) -> Self {
        let det = det_dd(&m);
        Self::renormalized(m, det)
    }

    fn renormalized(m: [Cdd; 4], det: Cdd) -> Self {
        let drift = cabs(det - Cdd::one()).to_f64();
        if drift > RENORM_THRESHOLD {
            let s = csqrt(det);
            UnitDetMatrix {
                m: [m[0] / s, m[1] / s, m[2] / s, m[3] / s],
            }
        } else {
            UnitDetMatrix { m }
        }
    }

    /// `diag(mu, 1/mu)`.
    pub fn diagonal(mu: Complex64) -> Result<Self, MoebiusError> {
        Self::new(mu, Complex64::zero(), Complex64::zero(), mu.inv())
    }

    pub fn entries(&self) -> [Complex64; 4] {
        self.m.map(c64)
    }

    pub fn entries_dd(&self) -> [Cdd; 4] {
        self.m
    }

    pub fn det(&self) -> Complex64 {
        c64(det_dd(&self.m))
    }

    pub fn trace(&self) -> Complex64 {
        c64(self.trace_dd())
    }

    pub fn trace_dd(&self) -> Cdd {
        self.m[0] + self.m[3]
    }

    /// Adjugate, which is the exact inverse for unit determinant.
    pub fn inverse(&self) -> Self {
        let [a, b, c, d] = self.m;
        UnitDetMatrix { m: [d, -b, -c, a] }
    }

    /// Frobenius distance, evaluated in double-double before rounding.
    pub fn distance(&self, other: &Self) -> f64 {
        self.m
            .iter()
            .zip(other.m.iter())
            .map(|(x, y)| {
                let z = *x - *y;
                z.re.sqr() + z.im.sqr()
            })
            .fold(Dd::ZERO, |s, x| s + x)
            .sqrt()
            .to_f64()
    }

    /// `min(‖M − I‖_F, ‖M + I‖_F)`.
    pub fn distance_to_pm_identity(&self) -> f64 {
        let id = Self::identity();
        self.distance(&id).min(self.distance(&-id))
    }

    /// Largest entry modulus.
    pub fn max_entry(&self) -> f64 {
        self.m.iter().map(|z| cabs(*z).to_f64()).fold(0.0, f64::max)
    }
}

impl fmt::Debug for UnitDetMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e = self.entries();
        write!(f, "[[{}, {}], [{}, {}]]", e[0], e[1], e[2], e[3])
    }
}

impl Mul for UnitDetMatrix {
    type Output = UnitDetMatrix;
    fn mul(self, rhs: UnitDetMatrix) -> UnitDetMatrix {
        UnitDetMatrix::from_dd_unchecked(mul_dd(&self.m, &rhs.m))
    }
}

impl Mul<&UnitDetMatrix> for &UnitDetMatrix {
    type Output = UnitDetMatrix;
    fn mul(self, rhs: &UnitDetMatrix) -> UnitDetMatrix {
        *self * *rhs
    }
}

impl Neg for UnitDetMatrix {
    type Output = UnitDetMatrix;
    fn neg(self) -> UnitDetMatrix {
        UnitDetMatrix {
            m: self.m.map(|z| -z),
        }
    }
}

/// Classifies by the trace, with a band of [`CLASSIFY_BAND`] around the
/// boundary cases.
pub fn classify(m: &UnitDetMatrix) -> Classification {
    if m.distance_to_pm_identity() <= CLASSIFY_BAND {
        return Classification::Identity;
    }
    let t = m.trace();
    let two = Complex64::new(2.0, 0.0);
    if (t - two).norm() <= CLASSIFY_BAND || (t + two).norm() <= CLASSIFY_BAND {
        return Classification::Parabolic;
    }
    if t.im.abs() <= CLASSIFY_BAND && t.re.abs() < 2.0 {
        return Classification::Elliptic;
    }
    Classification::Loxodromic
}

/// Complex translation length of a loxodromic element.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexLength {
    pub value: Complex64,
}

impl ComplexLength {
    pub fn re(&self) -> f64 {
        self.value.re
    }

    pub fn im(&self) -> f64 {
        self.value.im
    }
}

/// λ with `2 cosh(λ/2) = ±tr M`, `Re λ > 0` and `Im λ ∈ (−π, π]`.
///
/// The imaginary part is reduced mod 2π, which is what makes the result
/// independent of the sign of the lift.
pub fn complex_length(m: &UnitDetMatrix) -> Result<ComplexLength, MoebiusError> {
    let class = classify(m);
    if class != Classification::Loxodromic {
        return Err(MoebiusError::NonLoxodromic(class));
    }
    let t = m.trace_dd();
    let disc = csqrt(t * t - Cdd::new(Dd::from_f64(4.0), Dd::ZERO));
    let half = Dd::from_f64(0.5);
    let mut mu = (t + disc) * half;
    let mut modulus = cabs(mu);
    if modulus < Dd::ONE {
        mu = (t - disc) * half;
        modulus = cabs(mu);
    }
    let re = (modulus.ln() * 2.0).to_f64();
    let mut im = 2.0 * mu.im.to_f64().atan2(mu.re.to_f64());
    let pi = std::f64::consts::PI;
    if im > pi {
        im -= 2.0 * pi;
    } else if im <= -pi {
        im += 2.0 * pi;
    }
    Ok(ComplexLength {
        value: Complex64::new(re, im),
    })
}

/// Left-to-right product of generators and their inverses.
pub fn evaluate_word(
    word: &[Letter],
    gens: &[UnitDetMatrix],
) -> Result<UnitDetMatrix, MoebiusError> {
    let mut acc = UnitDetMatrix::identity();
    for l in word {
        let g = gens.get(l.generator).ok_or(MoebiusError::IndexOutOfRange {
            index: l.generator,
            len: gens.len(),
        })?;
        acc = if l.inverse { acc * g.inverse() } else { acc * *g };
    }
    Ok(acc)
}

/// Trace-free 2×2 complex matrix `[[a, b], [c, −a]]`, an element of sl(2,ℂ).
#[derive(Clone, Copy, PartialEq, Default)]
pub struct TraceFreeMatrix {
    a: Cdd,
    b: Cdd,
    c: Cdd,
}

impl TraceFreeMatrix {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Rejects inputs whose trace exceeds 1e−12.
    pub fn new(
        a: Complex64,
        b: Complex64,
        c: Complex64,
        d: Complex64,
    ) -> Result<Self, MoebiusError> {
        let trace = a + d;
        if trace.norm() > 1e-12 {
            return Err(MoebiusError::NotTraceFree { trace });
        }
        Ok(Self::project([cdd(a), cdd(b), cdd(c), cdd(d)]))
    }

    /// `[[a, b], [c, −a]]`.
    pub fn from_parts(a: Complex64, b: Complex64, c: Complex64) -> Self {
        TraceFreeMatrix {
            a: cdd(a),
            b: cdd(b),
            c: cdd(c),
        }
    }

    /// Drops the trace component of an arbitrary matrix.
    pub fn project(m: [Cdd; 4]) -> Self {
        TraceFreeMatrix {
            a: (m[0] - m[3]) * Dd::from_f64(0.5),
            b: m[1],
            c: m[2],
        }
    }

    /// `diag(1, −1)`.
    pub fn h() -> Self {
        Self::from_parts(Complex64::one(), Complex64::zero(), Complex64::zero())
    }

    /// Elementary upper-triangular matrix.
    pub fn e() -> Self {
        Self::from_parts(Complex64::zero(), Complex64::one(), Complex64::zero())
    }

    /// Elementary lower-triangular matrix.
    pub fn f() -> Self {
        Self::from_parts(Complex64::zero(), Complex64::zero(), Complex64::one())
    }

    pub fn entries(&self) -> [Complex64; 4] {
        [c64(self.a), c64(self.b), c64(self.c), -c64(self.a)]
    }

    pub fn entries_dd(&self) -> [Cdd; 4] {
        [self.a, self.b, self.c, -self.a]
    }

    pub fn trace(&self) -> Complex64 {
        Complex64::zero()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        let s = |z: Cdd| z.re.sqr() + z.im.sqr();
        (s(self.a).ldexp(1) + s(self.b) + s(self.c)).sqrt().to_f64()
    }

    pub fn scale(&self, k: Complex64) -> Self {
        self.scale_dd(cdd(k))
    }

    pub fn scale_dd(&self, k: Cdd) -> Self {
        TraceFreeMatrix {
            a: self.a * k,
            b: self.b * k,
            c: self.c * k,
        }
    }
}

impl fmt::Debug for TraceFreeMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e = self.entries();
        write!(f, "[[{}, {}], [{}, {}]]", e[0], e[1], e[2], e[3])
    }
}

impl Add for TraceFreeMatrix {
    type Output = TraceFreeMatrix;
    fn add(self, o: TraceFreeMatrix) -> TraceFreeMatrix {
        TraceFreeMatrix {
            a: self.a + o.a,
            b: self.b + o.b,
            c: self.c + o.c,
        }
    }
}

impl Sub for TraceFreeMatrix {
    type Output = TraceFreeMatrix;
    fn sub(self, o: TraceFreeMatrix) -> TraceFreeMatrix {
        TraceFreeMatrix {
            a: self.a - o.a,
            b: self.b - o.b,
            c: self.c - o.c,
        }
    }
}

impl Neg for TraceFreeMatrix {
    type Output = TraceFreeMatrix;
    fn neg(self) -> TraceFreeMatrix {
        TraceFreeMatrix {
            a: -self.a,
            b: -self.b,
            c: -self.c,
        }
    }
}

pub(crate) fn trace_form_dd(x: &TraceFreeMatrix, y: &TraceFreeMatrix) -> Cdd {
    (x.a * y.a) * Dd::from_f64(2.0) + x.b * y.c + x.c * y.b
}

/// `tr(XY)`.
pub fn trace_form(x: &TraceFreeMatrix, y: &TraceFreeMatrix) -> Complex64 {
    c64(trace_form_dd(x, y))
}

/// `M X M⁻¹`.
pub fn adjoint(m: &UnitDetMatrix, x: &TraceFreeMatrix) -> TraceFreeMatrix {
    let mi = m.inverse();
    let p = mul_dd(&mul_dd(&m.m, &x.entries_dd()), &mi.m);
    TraceFreeMatrix::project(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn classify_examples() {
        let d = UnitDetMatrix::diagonal(c(2.0, 0.0)).unwrap();
        assert_eq!(classify(&d), Classification::Loxodromic);
        assert_eq!(classify(&UnitDetMatrix::identity()), Classification::Identity);
        assert_eq!(classify(&-UnitDetMatrix::identity()), Classification::Identity);
        let u = UnitDetMatrix::new(c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)).unwrap();
        assert_eq!(classify(&u), Classification::Parabolic);
        let r = UnitDetMatrix::new(
            c(0.6f64.cos(), 0.0),
            c(-0.6f64.sin(), 0.0),
            c(0.6f64.sin(), 0.0),
            c(0.6f64.cos(), 0.0),
        )
        .unwrap();
        assert_eq!(classify(&r), Classification::Elliptic);
    }

    #[test]
    fn complex_length_examples() {
        let d = UnitDetMatrix::diagonal(c(2.0, 0.0)).unwrap();
        let l = complex_length(&d).unwrap();
        assert!((l.value - c(2.0 * 2f64.ln(), 0.0)).norm() < 1e-15);
        let d = UnitDetMatrix::diagonal(c(1.0, 0.5).exp()).unwrap();
        let l = complex_length(&d).unwrap();
        assert!((l.value - c(2.0, 1.0)).norm() < 1e-14);
        assert_eq!(
            complex_length(&UnitDetMatrix::identity()),
            Err(MoebiusError::NonLoxodromic(Classification::Identity))
        );
    }

    #[test]
    fn negative_trace_has_same_length() {
        let d = UnitDetMatrix::diagonal(c(-3.0, 0.0)).unwrap();
        let l = complex_length(&d).unwrap();
        assert!((l.value - c(2.0 * 3f64.ln(), 0.0)).norm() < 1e-15);
        let l2 = complex_length(&-d).unwrap();
        assert_eq!(l, l2);
    }

    #[test]
    fn evaluate_word_examples() {
        let g = UnitDetMatrix::new(c(1.0, 0.2), c(0.5, 0.0), c(-0.3, 1.0), c(2.0, 0.0)).unwrap();
        assert_eq!(evaluate_word(&[], &[g]).unwrap(), UnitDetMatrix::identity());
        let w = [Letter::new(0), Letter::inv(0)];
        let r = evaluate_word(&w, &[g]).unwrap();
        assert!(r.distance(&UnitDetMatrix::identity()) < 1e-14);
        assert_eq!(
            evaluate_word(&[Letter::new(3)], &[g]),
            Err(MoebiusError::IndexOutOfRange { index: 3, len: 1 })
        );
    }

    #[test]
    fn constructor_normalizes_determinant() {
        let m = UnitDetMatrix::new(c(2.0, 0.0), c(1.0, 1.0), c(0.0, 3.0), c(4.0, 0.0)).unwrap();
        assert!((m.det() - c(1.0, 0.0)).norm() < 1e-15);
        assert_eq!(
            UnitDetMatrix::new(c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(4.0, 0.0)),
            Err(MoebiusError::Singular)
        );
    }

    #[test]
    fn trace_form_examples() {
        let h = TraceFreeMatrix::h();
        assert_eq!(trace_form(&h, &h), c(2.0, 0.0));
        assert_eq!(trace_form(&TraceFreeMatrix::e(), &TraceFreeMatrix::f()), c(1.0, 0.0));
    }

    #[test]
    fn gram_determinant_in_standard_basis() {
        let basis = [TraceFreeMatrix::h(), TraceFreeMatrix::e(), TraceFreeMatrix::f()];
        let g: Vec<Vec<f64>> = basis
            .iter()
            .map(|x| basis.iter().map(|y| trace_form(x, y).re).collect())
            .collect();
        let det = g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1])
            - g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0])
            + g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0]);
        assert_eq!(det, -2.0);
    }

    #[test]
    fn adjoint_examples() {
        let x = TraceFreeMatrix::from_parts(c(0.3, 1.0), c(-2.0, 0.5), c(0.0, 0.7));
        assert_eq!(adjoint(&UnitDetMatrix::identity(), &x), x);
        let m = UnitDetMatrix::diagonal(c(2.0, 0.0)).unwrap();
        assert_eq!(adjoint(&m, &TraceFreeMatrix::h()), TraceFreeMatrix::h());
    }

    #[test]
    fn not_trace_free_rejected() {
        let r = TraceFreeMatrix::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-0.5, 0.0));
        assert!(matches!(r, Err(MoebiusError::NotTraceFree { .. })));
    }
}
