//! Dilogarithm, Clausen and Lobachevsky functions.

use num_complex::Complex64;
use std::f64::consts::PI;

/// `B_{2k}` for `k = 1..15`.
const BERNOULLI: [(f64, f64); 15] = [
    (1.0, 6.0),
    (-1.0, 30.0),
    (1.0, 42.0),
    (-1.0, 30.0),
    (5.0, 66.0),
    (-691.0, 2730.0),
    (7.0, 6.0),
    (-3617.0, 510.0),
    (43867.0, 798.0),
    (-174611.0, 330.0),
    (854513.0, 138.0),
    (-236364091.0, 2730.0),
    (8553103.0, 6.0),
    (-23749461029.0, 870.0),
    (8615841276005.0, 14322.0),
];

/// `Li₂(z) = Σ B_n uⁿ⁺¹/(n+1)!` with `u = −ln(1−z)`, for `|u| < 2π`.
fn li2_series(z: Complex64) -> Complex64 {
    let u = -(Complex64::new(1.0, 0.0) - z).ln();
    let u2 = u * u;
    let mut sum = u - u2 / 4.0;
    let mut pow = u;
    let mut fact = 1.0;
    for (k, (num, den)) in BERNOULLI.iter().enumerate() {
        let n = 2 * k + 2;
        pow *= u2;
        fact *= (n * (n + 1)) as f64;
        sum += pow * (num / den / fact);
    }
    sum
}

/// Principal branch of the dilogarithm, cut along `[1, ∞)`.
pub fn li2(z: Complex64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    if z == one {
        return Complex64::new(PI * PI / 6.0, 0.0);
    }
    if z.norm_sqr() > 1.0 {
        let l = (-z).ln();
        return -li2(one / z) - Complex64::new(PI * PI / 6.0, 0.0) - l * l / 2.0;
    }
    if z.re > 0.5 {
        return Complex64::new(PI * PI / 6.0, 0.0) - z.ln() * (one - z).ln() - li2_series(one - z);
    }
    li2_series(z)
}

/// `Cl₂(θ) = Im Li₂(e^{iθ}) = −∫₀^θ log|2 sin(t/2)| dt`.
pub fn clausen(theta: f64) -> f64 {
    let t = theta.rem_euclid(2.0 * PI);
    if t == 0.0 || t == PI {
        return 0.0;
    }
    li2(Complex64::from_polar(1.0, t)).im
}

/// `Л(x) = −∫₀ˣ log|2 sin t| dt = ½ Cl₂(2x)`.
pub fn lobachevsky(x: f64) -> f64 {
    0.5 * clausen(2.0 * x)
}
