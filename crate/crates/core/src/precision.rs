//! Double-double arithmetic.
//!
//! A [`Dd`] carries an unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`,
//! giving roughly 32 significant decimal digits. Holonomy generators at
//! genus 3 have entries near 1e4 and the relator product cancels them back
//! down to the identity, so plain `f64` loses too much to meet the
//! residual contracts. [`Cdd`] is `Complex<Dd>` and inherits the field
//! operations from `num_complex`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Rem, Sub, SubAssign};

use num_complex::{Complex, Complex64};
use num_traits::{Num, One, Zero};

/// Complex double-double number.
pub type Cdd = Complex<Dd>;

/// Double-double real number.
#[derive(Clone, Copy, Default, PartialEq)]
pub struct Dd {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn split(a: f64) -> (f64, f64) {
    const SPLITTER: f64 = 134_217_729.0; // 2^27 + 1
    let t = SPLITTER * a;
    let hi = t - (t - a);
    (hi, a - hi)
}

// Dekker's product; avoids relying on a hardware fused multiply-add.
#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    let err = ((ah * bh - p) + ah * bl + al * bh) + al * bl;
    (p, err)
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };
    pub const PI: Dd = Dd {
        hi: 3.141_592_653_589_793_116e0,
        lo: 1.224_646_799_147_353_207e-16,
    };
    pub const FRAC_PI_2: Dd = Dd {
        hi: 1.570_796_326_794_896_558e0,
        lo: 6.123_233_995_736_766_036e-17,
    };
    pub const LN_2: Dd = Dd {
        hi: 6.931_471_805_599_452_862e-1,
        lo: 2.319_046_813_846_299_558e-17,
    };

    /// Builds from two doubles, renormalizing.
    pub fn new(hi: f64, lo: f64) -> Self {
        let (hi, lo) = two_sum(hi, lo);
        Dd { hi, lo }
    }

    pub const fn from_f64(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    /// Leading component, which is also the nearest double.
    pub fn to_f64(self) -> f64 {
        self.hi
    }

    pub fn hi(self) -> f64 {
        self.hi
    }

    pub fn lo(self) -> f64 {
        self.lo
    }

    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    /// Multiplies by `2^k` exactly.
    pub fn ldexp(self, k: i32) -> Self {
        let s = 2f64.powi(k);
        Dd {
            hi: self.hi * s,
            lo: self.lo * s,
        }
    }

    pub fn sqr(self) -> Self {
        self * self
    }

    pub fn recip(self) -> Self {
        Dd::ONE / self
    }

    pub fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return if self.hi == 0.0 {
                Dd::ZERO
            } else {
                Dd::from_f64(f64::NAN)
            };
        }
        let q = self.hi.sqrt();
        let (p, e) = two_prod(q, q);
        let r = (self - Dd { hi: p, lo: e }).hi;
        Dd::new(q, r / (2.0 * q))
    }

    pub fn exp(self) -> Self {
        if self.hi > 709.0 {
            return Dd::from_f64(f64::INFINITY);
        }
        if self.hi < -745.0 {
            return Dd::ZERO;
        }
        if self.hi == 0.0 {
            return Dd::ONE;
        }
        let k = (self.hi / Dd::LN_2.hi).round();
        let r = (self - Dd::LN_2 * k).ldexp(-10);
        // expm1 by Taylor series on |r| < 4e-4
        let mut s = r;
        let mut term = r;
        for n in 2..=14 {
            term = term * r / (n as f64);
            s += term;
            if term.hi.abs() < 1e-34 * s.hi.abs() {
                break;
            }
        }
        // undo the scaling with expm1(2x) = 2 expm1(x) + expm1(x)^2
        for _ in 0..10 {
            s = s.ldexp(1) + s.sqr();
        }
        (s + 1.0).ldexp(k as i32)
    }

    /// Natural logarithm by one Newton step on `exp`.
    pub fn ln(self) -> Self {
        if self.hi <= 0.0 {
            return Dd::from_f64(if self.hi == 0.0 {
                f64::NEG_INFINITY
            } else {
                f64::NAN
            });
        }
        let mut y = Dd::from_f64(self.hi.ln());
        for _ in 0..2 {
            y = y + self * (-y).exp() - 1.0;
        }
        y
    }

    pub fn sin_cos(self) -> (Self, Self) {
        if self.hi == 0.0 {
            return (Dd::ZERO, Dd::ONE);
        }
        let k = (self.hi / Dd::FRAC_PI_2.hi).round();
        let r = self - Dd::FRAC_PI_2 * k;
        let r2 = r.sqr();
        let mut s = r;
        let mut term = r;
        let mut n = 1.0;
        loop {
            term = -(term * r2) / ((n + 1.0) * (n + 2.0));
            s += term;
            n += 2.0;
            if term.hi.abs() < 1e-34 || n > 60.0 {
                break;
            }
        }
        let mut c = Dd::ONE;
        let mut term = Dd::ONE;
        let mut n = 0.0;
        loop {
            term = -(term * r2) / ((n + 1.0) * (n + 2.0));
            c += term;
            n += 2.0;
            if term.hi.abs() < 1e-34 || n > 60.0 {
                break;
            }
        }
        match (k as i64).rem_euclid(4) {
            0 => (s, c),
            1 => (c, -s),
            2 => (-s, -c),
            _ => (-c, s),
        }
    }

    pub fn sinh(self) -> Self {
        if self.hi.abs() < 0.5 {
            let x2 = self.sqr();
            let mut s = self;
            let mut term = self;
            let mut n = 1.0;
            loop {
                term = term * x2 / ((n + 1.0) * (n + 2.0));
                s += term;
                n += 2.0;
                if term.hi.abs() < 1e-34 * s.hi.abs() || n > 60.0 {
                    break;
                }
            }
            s
        } else {
            let e = self.exp();
            (e - e.recip()).ldexp(-1)
        }
    }

    pub fn cosh(self) -> Self {
        let e = self.exp();
        (e + e.recip()).ldexp(-1)
    }
}

impl fmt::Debug for Dd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Dd({:e} + {:e})", self.hi, self.lo)
    }
}

impl fmt::Display for Dd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.hi, f)
    }
}

impl PartialOrd for Dd {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            o => o,
        }
    }
}

impl From<f64> for Dd {
    fn from(x: f64) -> Self {
        Dd::from_f64(x)
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, b: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        let (hi, lo) = quick_two_sum(s1, s2 + t2);
        Dd { hi, lo }
    }
}

impl Add<f64> for Dd {
    type Output = Dd;
    fn add(self, b: f64) -> Dd {
        let (s1, s2) = two_sum(self.hi, b);
        let (hi, lo) = quick_two_sum(s1, s2 + self.lo);
        Dd { hi, lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Sub<f64> for Dd {
    type Output = Dd;
    fn sub(self, b: f64) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, b: Dd) -> Dd {
        let (p1, p2) = two_prod(self.hi, b.hi);
        let p2 = p2 + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p1, p2);
        Dd { hi, lo }
    }
}

impl Mul<f64> for Dd {
    type Output = Dd;
    fn mul(self, b: f64) -> Dd {
        let (p1, p2) = two_prod(self.hi, b);
        let (hi, lo) = quick_two_sum(p1, p2 + self.lo * b);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let r = self - b * q1;
        let q2 = r.hi / b.hi;
        let r = r - b * q2;
        let q3 = r.hi / b.hi;
        let (q1, q2) = quick_two_sum(q1, q2);
        Dd { hi: q1, lo: q2 } + q3
    }
}

impl Div<f64> for Dd {
    type Output = Dd;
    fn div(self, b: f64) -> Dd {
        self / Dd::from_f64(b)
    }
}

impl Rem for Dd {
    type Output = Dd;
    fn rem(self, b: Dd) -> Dd {
        let q = (self / b).hi.trunc();
        self - b * q
    }
}

impl AddAssign for Dd {
    fn add_assign(&mut self, b: Dd) {
        *self = *self + b;
    }
}

impl SubAssign for Dd {
    fn sub_assign(&mut self, b: Dd) {
        *self = *self - b;
    }
}

impl MulAssign for Dd {
    fn mul_assign(&mut self, b: Dd) {
        *self = *self * b;
    }
}

impl Zero for Dd {
    fn zero() -> Self {
        Dd::ZERO
    }
    fn is_zero(&self) -> bool {
        self.hi == 0.0
    }
}

impl One for Dd {
    fn one() -> Self {
        Dd::ONE
    }
}

impl Num for Dd {
    type FromStrRadixErr = num_traits::ParseFloatError;
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        f64::from_str_radix(s, radix).map(Dd::from_f64)
    }
}

/// Widens a double-precision complex number.
pub fn cdd(z: Complex64) -> Cdd {
    Complex::new(Dd::from_f64(z.re), Dd::from_f64(z.im))
}

/// Nearest double-precision complex number.
pub fn c64(z: Cdd) -> Complex64 {
    Complex64::new(z.re.to_f64(), z.im.to_f64())
}

pub fn creal(x: Dd) -> Cdd {
    Complex::new(x, Dd::ZERO)
}

pub fn cexp(z: Cdd) -> Cdd {
    let r = z.re.exp();
    let (s, c) = z.im.sin_cos();
    Complex::new(r * c, r * s)
}

pub fn csinh(z: Cdd) -> Cdd {
    let (s, c) = z.im.sin_cos();
    Complex::new(z.re.sinh() * c, z.re.cosh() * s)
}

pub fn ccosh(z: Cdd) -> Cdd {
    let (s, c) = z.im.sin_cos();
    Complex::new(z.re.cosh() * c, z.re.sinh() * s)
}

pub fn cabs(z: Cdd) -> Dd {
    (z.re.sqr() + z.im.sqr()).sqrt()
}

/// Principal square root, branch cut on the negative real axis.
pub fn csqrt(z: Cdd) -> Cdd {
    if z.re.is_zero() && z.im.is_zero() {
        return Cdd::zero();
    }
    let r = cabs(z);
    if z.re.hi >= 0.0 {
        let t = ((r + z.re).ldexp(-1)).sqrt();
        Complex::new(t, z.im / t.ldexp(1))
    } else {
        let t = ((r - z.re).ldexp(-1)).sqrt();
        let re = z.im.abs() / t.ldexp(1);
        let im = if z.im.hi < 0.0 { -t } else { t };
        Complex::new(re, im)
    }
}

/// Squared modulus rounded to a double.
pub fn norm_sqr64(z: Cdd) -> f64 {
    (z.re.sqr() + z.im.sqr()).to_f64()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: Dd, b: Dd) -> f64 {
        ((a - b) / b).to_f64().abs()
    }

    #[test]
    fn arithmetic_round_trips() {
        let a = Dd::from_f64(1.0) / 3.0;
        let back = a * 3.0 - 1.0;
        assert!(back.to_f64().abs() < 1e-31);
        let s = Dd::from_f64(2.0).sqrt();
        assert!((s * s - 2.0).to_f64().abs() < 1e-31);
    }

    #[test]
    fn exp_log_inverse() {
        for &x in &[-20.0, -1.5, -1e-3, 1e-7, 0.3, 1.0, 2.5, 40.0] {
            let d = Dd::from_f64(x) + Dd::from_f64(x * 1e-17);
            let back = d.exp().ln();
            assert!((back - d).to_f64().abs() < 1e-30 * x.abs().max(1.0), "{x}");
        }
    }

    #[test]
    fn exp_one_matches_e() {
        let e = Dd::new(2.718_281_828_459_045_09, 1.445_646_891_729_250_16e-16);
        assert!(rel(Dd::ONE.exp(), e) < 1e-31);
    }

    #[test]
    fn trig_identities() {
        for &x in &[-7.0, -0.9, 0.1, 0.785, 1.3, 3.0, 12.0] {
            let (s, c) = Dd::from_f64(x).sin_cos();
            assert!((s.sqr() + c.sqr() - 1.0).to_f64().abs() < 1e-30);
            assert!((s.to_f64() - x.sin()).abs() < 1e-15);
        }
        let (s, c) = Dd::PI.ldexp(-2).sin_cos();
        assert!((s - c).to_f64().abs() < 1e-31);
        let (s, _) = Dd::PI.sin_cos();
        assert!(s.to_f64().abs() < 1e-31);
    }

    #[test]
    fn hyperbolic_identity() {
        for &x in &[-3.0, -0.2, 1e-9, 0.49, 0.51, 2.0] {
            let d = Dd::from_f64(x);
            let v = d.cosh().sqr() - d.sinh().sqr() - 1.0;
            assert!(v.to_f64().abs() < 1e-29, "{x}");
        }
        let tiny = Dd::from_f64(1e-12);
        assert!(rel(tiny.sinh(), tiny + tiny * tiny * tiny / 6.0) < 1e-30);
    }

    #[test]
    fn complex_sqrt_principal() {
        for &(re, im) in &[(3.0, 4.0), (-3.0, 4.0), (-3.0, -4.0), (0.0, -2.0), (-1.0, 0.0)] {
            let z = cdd(Complex64::new(re, im));
            let w = csqrt(z);
            let back = w * w - z;
            assert!(norm_sqr64(back).sqrt() < 1e-30);
            assert!(w.re.to_f64() >= 0.0);
            let reference = Complex64::new(re, im).sqrt();
            assert!((c64(w) - reference).norm() < 1e-15);
        }
    }

    #[test]
    fn complex_exp_and_hyperbolics() {
        let z = cdd(Complex64::new(0.7, -0.4));
        let lhs = ccosh(z) * ccosh(z) - csinh(z) * csinh(z);
        assert!((c64(lhs) - Complex64::new(1.0, 0.0)).norm() < 1e-30);
        let e = cexp(z);
        assert!((c64(e) - Complex64::new(0.7, -0.4).exp()).norm() < 1e-15);
    }
}
