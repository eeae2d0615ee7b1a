//! Compact hyperbolic tetrahedra: realization from dihedral angles, volume,
//! and the Schläfli formula with its dual.
//!
//! Faces are numbered 0..4 and an edge is the pair of faces meeting along it,
//! in the order of [`EDGES`]. Angles are stored as interior dihedral angles;
//! the Schläfli formulas are stated for exterior angles `π − θ`.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

use crate::diffgeo::{derivative_1d, FdScheme};
use crate::special::li2;

/// Face pairs of the six edges. Edge `e` is opposite edge `5 − e`.
pub const EDGES: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// `|det G|` at or below this is the Euclidean limit.
pub const FLAT_DET: f64 = 1e-10;

/// Dihedral angle of the regular Euclidean tetrahedron.
pub fn regular_flat_angle() -> f64 {
    (1.0f64 / 3.0).acos()
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SchlafliError {
    #[error("angle {value} at edge {edge} is outside (0, pi)")]
    AngleOutOfRange { edge: usize, value: f64 },
    #[error("angles are not those of a compact hyperbolic tetrahedron (det {det:.3e})")]
    NotRealizable { det: f64 },
    #[error("tetrahedron is at the Euclidean limit (det {det:.3e})")]
    Degenerate { det: f64 },
    #[error("integration path leaves the hyperbolic cone at parameter {at}")]
    PathLeavesCone { at: f64 },
    #[error("need an even, positive number of steps, got {0}")]
    InvalidSteps(usize),
    #[error("finite differences failed: {0}")]
    Derivative(String),
}

pub fn edge_index(i: usize, j: usize) -> usize {
    let (i, j) = if i < j { (i, j) } else { (j, i) };
    EDGES.iter().position(|&e| e == (i, j)).expect("distinct faces 0..4")
}

/// Interior dihedral angles, one per edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TetrahedronAngles {
    pub theta: [f64; 6],
}

impl TetrahedronAngles {
    pub fn new(theta: [f64; 6]) -> Result<Self, SchlafliError> {
        for (edge, &value) in theta.iter().enumerate() {
            if !(value > 0.0 && value < PI) {
                return Err(SchlafliError::AngleOutOfRange { edge, value });
            }
        }
        Ok(TetrahedronAngles { theta })
    }

    pub fn regular(theta: f64) -> Result<Self, SchlafliError> {
        Self::new([theta; 6])
    }

    pub fn exterior(&self) -> [f64; 6] {
        self.theta.map(|t| PI - t)
    }

    /// `G_ii = 1`, `G_ij = −cos θ_ij`.
    pub fn gram(&self) -> [[f64; 4]; 4] {
        let mut g = [[1.0; 4]; 4];
        for (e, &(i, j)) in EDGES.iter().enumerate() {
            g[i][j] = -self.theta[e].cos();
            g[j][i] = g[i][j];
        }
        g
    }

    /// Renumbers faces, face `i` becoming face `perm[i]`.
    pub fn relabel(&self, perm: [usize; 4]) -> Self {
        let mut theta = [0.0; 6];
        for (e, &(i, j)) in EDGES.iter().enumerate() {
            theta[edge_index(perm[i], perm[j])] = self.theta[e];
        }
        TetrahedronAngles { theta }
    }

    pub fn displaced(&self, dir: &[f64; 6], s: f64) -> Self {
        let mut theta = self.theta;
        for (t, d) in theta.iter_mut().zip(dir) {
            *t += s * d;
        }
        TetrahedronAngles { theta }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TetraGeometry {
    pub gram: [[f64; 4]; 4],
    pub lengths: [f64; 6],
    pub volume: f64,
}

fn det3(m: [[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn cofactor(g: &[[f64; 4]; 4], i: usize, j: usize) -> f64 {
    let mut m = [[0.0; 3]; 3];
    for (r, gr) in (0..4).filter(|&r| r != i).enumerate() {
        for (c, gc) in (0..4).filter(|&c| c != j).enumerate() {
            m[r][c] = g[gr][gc];
        }
    }
    let s = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
    s * det3(m)
}

fn det4(g: &[[f64; 4]; 4]) -> f64 {
    (0..4).map(|j| g[0][j] * cofactor(g, 0, j)).sum()
}

/// Lengths for a Gram matrix of signature (1,3), or its Euclidean limit.
///
/// The edge on faces `i, j` joins the vertices opposite faces `k, l`, and
/// `sinh L = √(−det G) sin θ_ij / √(c_kk c_ll)`.
fn lengths_checked(a: &TetrahedronAngles, allow_flat: bool) -> Result<(f64, [f64; 6]), SchlafliError> {
    let g = a.gram();
    let det = det4(&g);
    let mut c = [[0.0; 4]; 4];
    for (i, row) in c.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x = cofactor(&g, i, j);
        }
    }
    let cofactors_ok = c.iter().flatten().all(|&x| x > 0.0);
    if det > FLAT_DET || !cofactors_ok {
        return Err(SchlafliError::NotRealizable { det });
    }
    if det >= -FLAT_DET && !allow_flat {
        return Err(SchlafliError::Degenerate { det });
    }
    let root = (-det).max(0.0).sqrt();
    let mut lengths = [0.0; 6];
    for (e, &(i, j)) in EDGES.iter().enumerate() {
        let (k, l) = EDGES[5 - e];
        lengths[e] = (root * a.theta[edge_index(i, j)].sin() / (c[k][k] * c[l][l]).sqrt()).asinh();
    }
    Ok((det, lengths))
}

/// `−½ Σ L_e dθ_e` over interior angles, i.e. `½ Σ L_e dθ_e^ext`.
fn schlafli_form(lengths: &[f64; 6], d_interior: &[f64; 6]) -> f64 {
    -0.5 * lengths.iter().zip(d_interior).map(|(l, d)| l * d).sum::<f64>()
}

/// Volume from the dilogarithm formula of Murakami and Yano.
fn closed_form_volume(a: &TetrahedronAngles, det: f64) -> f64 {
    let e = |k: usize| Complex64::from_polar(1.0, a.theta[k]);
    // A, B, C meet at the vertex opposite face 3; D, E, F are their opposites.
    let (ta, tb, tc, td, te, tf) = (0, 1, 3, 5, 4, 2);
    let (ca, cb, cc, cd, ce, cf) = (e(ta), e(tb), e(tc), e(td), e(te), e(tf));
    let s = |k: usize| a.theta[k].sin();
    let sines = s(ta) * s(td) + s(tb) * s(te) + s(tc) * s(tf);
    let den = ca * cd + cb * ce + cc * cf + ca * cb * cf + ca * cc * ce + cb * cc * cd + cd * ce * cf
        + ca * cb * cc * cd * ce * cf;
    let root = Complex64::new(0.0, (-det).max(0.0).sqrt());
    let u = |z: Complex64| {
        0.5 * (li2(z) + li2(ca * cb * cd * ce * z) + li2(ca * cc * cd * cf * z) + li2(cb * cc * ce * cf * z)
            - li2(-ca * cb * cc * z)
            - li2(-ca * ce * cf * z)
            - li2(-cb * cd * cf * z)
            - li2(-cc * cd * ce * z))
    };
    let z_plus = -2.0 * (sines + root) / den;
    let z_minus = -2.0 * (sines - root) / den;
    0.5 * (u(z_minus) - u(z_plus)).im
}

fn all_permutations() -> Vec<[usize; 4]> {
    let mut out = Vec::with_capacity(24);
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let p = [a, b, c, d];
                    if (0..4).all(|i| (0..i).all(|j| p[i] != p[j])) {
                        out.push(p);
                    }
                }
            }
        }
    }
    out
}

/// Relabeling that makes the angle vector lexicographically smallest, so
/// relabeled inputs share one computation.
fn canonical_labeling(a: &TetrahedronAngles) -> ([usize; 4], TetrahedronAngles) {
    all_permutations()
        .into_iter()
        .map(|p| (p, a.relabel(p)))
        .min_by(|x, y| x.1.theta.partial_cmp(&y.1.theta).expect("finite angles"))
        .expect("24 permutations")
}

/// Gram matrix, edge lengths and volume.
pub fn realize(a: &TetrahedronAngles) -> Result<TetraGeometry, SchlafliError> {
    TetrahedronAngles::new(a.theta)?;
    let (perm, canon) = canonical_labeling(a);
    let (det, canon_lengths) = lengths_checked(&canon, false)?;
    let mut lengths = [0.0; 6];
    for (e, &(i, j)) in EDGES.iter().enumerate() {
        lengths[e] = canon_lengths[edge_index(perm[i], perm[j])];
    }
    Ok(TetraGeometry {
        gram: a.gram(),
        lengths,
        volume: closed_form_volume(&canon, det),
    })
}

/// `V* = V − ½ Σ L_e θ_e^ext`.
pub fn dual_volume(g: &TetraGeometry, a: &TetrahedronAngles) -> f64 {
    g.volume - 0.5 * g.lengths.iter().zip(a.exterior()).map(|(l, t)| l * t).sum::<f64>()
}

/// `p(s) = 1 − (1 − s²)³`: flat at both ends, which absorbs the square-root
/// onset of the lengths at the Euclidean limit.
fn reparam(s: f64) -> (f64, f64) {
    let w = 1.0 - s * s;
    (1.0 - w * w * w, 6.0 * s * w * w)
}

/// `∫ ½ Σ L_e dθ_e^ext` along the segment `from → to`, composite Simpson in
/// the smoothed parameter.
fn segment_integral(from: &TetrahedronAngles, to: &TetrahedronAngles, steps: usize) -> Result<f64, SchlafliError> {
    let mut d = [0.0; 6];
    for (k, x) in d.iter_mut().enumerate() {
        *x = to.theta[k] - from.theta[k];
    }
    let h = 1.0 / steps as f64;
    let mut sum = 0.0;
    for n in 0..=steps {
        let s = n as f64 * h;
        let (p, dp) = reparam(s);
        if dp == 0.0 {
            continue;
        }
        let (_, lengths) =
            lengths_checked(&from.displaced(&d, p), true).map_err(|_| SchlafliError::PathLeavesCone { at: p })?;
        let w = if n == 0 || n == steps {
            1.0
        } else if n % 2 == 1 {
            4.0
        } else {
            2.0
        };
        sum += w * schlafli_form(&lengths, &d) * dp;
    }
    Ok(sum * h / 3.0)
}

/// Integral of the Schläfli form along the polygon through `points`.
pub fn volume_along_path(points: &[TetrahedronAngles], steps: usize) -> Result<f64, SchlafliError> {
    if steps == 0 || steps % 2 == 1 {
        return Err(SchlafliError::InvalidSteps(steps));
    }
    points.windows(2).map(|w| segment_integral(&w[0], &w[1], steps)).sum()
}

/// Volume as the integral of the Schläfli form along the straight path from
/// the regular Euclidean tetrahedron, where `V = 0`.
pub fn volume_by_integration(target: &TetrahedronAngles, steps: usize) -> Result<f64, SchlafliError> {
    let flat = TetrahedronAngles {
        theta: [regular_flat_angle(); 6],
    };
    volume_along_path(&[flat, *target], steps)
}

/// How the angles in a report are read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AngleConvention {
    /// `π − θ`; the formulas hold as `dV = ½ Σ L dθ`.
    Exterior,
    /// `θ`; both sides change sign.
    Interior,
}

impl AngleConvention {
    fn sign(self) -> f64 {
        match self {
            AngleConvention::Exterior => 1.0,
            AngleConvention::Interior => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchlafliReport {
    pub convention: AngleConvention,
    /// Finite-difference derivative of `V`.
    pub lhs: f64,
    /// `½ Σ L_e dθ_e`.
    pub rhs: f64,
    pub relative_defect: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualReport {
    pub convention: AngleConvention,
    /// Finite-difference derivative of `V*`.
    pub lhs: f64,
    /// `−½ Σ θ_e dL_e`.
    pub rhs: f64,
    pub relative_defect: f64,
    /// `|dV − dV* − ½ d(Σ L_e θ_e)|`.
    pub leibniz_defect: f64,
    pub pass: bool,
}

fn relative(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

fn fd<F: Fn(f64) -> Result<f64, SchlafliError>>(f: F, h: f64) -> Result<f64, SchlafliError> {
    derivative_1d(f, 0.0, FdScheme::with_step(h)).map_err(|e| SchlafliError::Derivative(e.to_string()))
}

/// Compares `dV` along `dir` with `½ Σ L_e dθ_e^ext`.
pub fn verify_schlafli(
    a: &TetrahedronAngles,
    dir: &[f64; 6],
    h: f64,
    tol: f64,
    convention: AngleConvention,
) -> Result<SchlafliReport, SchlafliError> {
    let g = realize(a)?;
    let dv = fd(|s| Ok(realize(&a.displaced(dir, s))?.volume), h)?;
    let sign = convention.sign();
    let lhs = sign * dv;
    let rhs = sign * schlafli_form(&g.lengths, dir);
    let relative_defect = relative(lhs, rhs);
    Ok(SchlafliReport {
        convention,
        lhs,
        rhs,
        relative_defect,
        pass: relative_defect <= tol,
    })
}

/// Compares `dV*` along `dir` with `−½ Σ θ_e^ext dL_e`.
pub fn verify_dual(
    a: &TetrahedronAngles,
    dir: &[f64; 6],
    h: f64,
    tol: f64,
    convention: AngleConvention,
) -> Result<DualReport, SchlafliError> {
    realize(a)?;
    let at = |s: f64| {
        let b = a.displaced(dir, s);
        realize(&b).map(|g| (g, b))
    };
    let d_dual = fd(|s| at(s).map(|(g, b)| dual_volume(&g, &b)), h)?;
    let dv = fd(|s| at(s).map(|(g, _)| g.volume), h)?;
    let d_pairing = fd(
        |s| at(s).map(|(g, b)| 0.5 * g.lengths.iter().zip(b.exterior()).map(|(l, t)| l * t).sum::<f64>()),
        h,
    )?;
    let mut rhs = 0.0;
    for (e, t) in a.exterior().iter().enumerate() {
        let dl = fd(|s| at(s).map(|(g, _)| g.lengths[e]), h)?;
        rhs -= 0.5 * t * dl;
    }
    let sign = convention.sign();
    let (lhs, rhs) = (sign * d_dual, sign * rhs);
    let relative_defect = relative(lhs, rhs);
    Ok(DualReport {
        convention,
        lhs,
        rhs,
        relative_defect,
        leibniz_defect: (dv - d_dual - d_pairing).abs(),
        pass: relative_defect <= tol,
    })
}

/// Random compact tetrahedron with `det G ≤ −margin`.
pub fn random_tetrahedron<R: Rng>(rng: &mut R, margin: f64) -> TetrahedronAngles {
    loop {
        let mut theta = [0.0; 6];
        for t in &mut theta {
            *t = rng.gen_range(0.6..1.6);
        }
        let a = TetrahedronAngles { theta };
        if let Ok((det, _)) = lengths_checked(&a, false) {
            if det <= -margin {
                return a;
            }
        }
    }
}

/// Random direction in angle space with components in `[−1, 1]`.
pub fn random_direction<R: Rng>(rng: &mut R) -> [f64; 6] {
    let mut d = [0.0; 6];
    for x in &mut d {
        *x = rng.gen_range(-1.0..1.0);
    }
    d
}
