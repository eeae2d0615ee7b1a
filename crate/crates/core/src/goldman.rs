//! Goldman's pairing of cocycles through the cup product.
//!
//! For a relator `R = y_1 ⋯ y_n` with prefixes `P_m = y_1 ⋯ y_m`, the chain
//!
//! ```text
//! Z = Σ_m [P_{m−1} | y_m] − Σ_x [x | x⁻¹]
//! ```
//!
//! is a 2-cycle of the bar complex whenever every generator occurs once with
//! each sign, as it does in `∏[a_i, b_i]`. Pairing `u ⌣ v` with the trace
//! form and evaluating on `Z` gives
//!
//! ```text
//! ω(u, v) = Σ_m tr(u(P_{m−1}) · Ad_{P_{m−1}} v(y_m)) + Σ_x tr(u(x) v(x)).
//! ```
//!
//! The normalization is whatever this expansion gives; it is measured
//! against Wolpert's formula by [`calibrate_kappa`].

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diffgeo::{coboundary, coordinate_cocycles, DiffGeoError, FdScheme, GroupCocycle};
use crate::holonomy::ComplexFNPoint;
use crate::moebius::{adjoint, trace_form_dd, TraceFreeMatrix, UnitDetMatrix};
use crate::precision::{c64, Cdd};
use crate::surface::PantsDecomposition;

#[derive(Debug, Error)]
pub enum GoldmanError {
    #[error("cocycles are over different base representations")]
    MismatchedBase,
    #[error("pairing entry ({row}, {col}) = {value} breaks the block pattern (kappa {kappa})")]
    BlockStructureViolation {
        row: usize,
        col: usize,
        value: Complex64,
        kappa: Complex64,
    },
    #[error("calibration point must be real")]
    NotReal,
    #[error(transparent)]
    DiffGeo(#[from] DiffGeoError),
}

/// Goldman pairing of two cocycles over the same representation.
pub fn goldman_pair(u: &GroupCocycle, v: &GroupCocycle) -> Result<Complex64, GoldmanError> {
    if !u.same_base(v) {
        return Err(GoldmanError::MismatchedBase);
    }
    let base = &u.base;
    let mut prefix = UnitDetMatrix::identity();
    let mut u_prefix = TraceFreeMatrix::zero();
    let mut sum = Cdd::default();
    for &y in &base.presentation.relator {
        sum = sum + trace_form_dd(&u_prefix, &adjoint(&prefix, &v.letter_value(y)));
        u_prefix = u_prefix + adjoint(&prefix, &u.letter_value(y));
        let g = base.generators[y.generator];
        prefix = prefix * if y.inverse { g.inverse() } else { g };
    }
    for (a, b) in u.values.iter().zip(&v.values) {
        sum = sum + trace_form_dd(a, b);
    }
    Ok(c64(sum))
}

/// Pairing value with its self-checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairingReport {
    pub value: Complex64,
    pub h_used: f64,
    /// `|ω(u,v) + ω(v,u)|`.
    pub antisymmetry_defect: f64,
    /// Largest `|ω(w, δξ)|` over `w ∈ {u, v}` and `ξ ∈ {H, E, F}`, divided by
    /// `max(1, ‖w‖·‖δξ‖)`.
    pub coboundary_defect: f64,
}

/// Pairing scale `max(1, ‖u‖·‖v‖)` with `‖·‖` the largest generator value.
pub fn pairing_scale(u: &GroupCocycle, v: &GroupCocycle) -> f64 {
    (u.scale_norm() * v.scale_norm()).max(1.0)
}

pub fn pairing_report(
    u: &GroupCocycle,
    v: &GroupCocycle,
    h_used: f64,
) -> Result<PairingReport, GoldmanError> {
    let value = goldman_pair(u, v)?;
    let antisymmetry_defect = (value + goldman_pair(v, u)?).norm();
    let mut coboundary_defect: f64 = 0.0;
    for xi in [TraceFreeMatrix::h(), TraceFreeMatrix::e(), TraceFreeMatrix::f()] {
        let d = coboundary(u.base.clone(), &xi);
        for w in [u, v] {
            let x = goldman_pair(w, &d)?.norm() / pairing_scale(w, &d);
            coboundary_defect = coboundary_defect.max(x);
        }
    }
    Ok(PairingReport {
        value,
        h_used,
        antisymmetry_defect,
        coboundary_defect,
    })
}

/// All pairings `ω(u_i, u_j)`.
pub fn pairing_matrix(cocycles: &[GroupCocycle]) -> Result<Vec<Vec<Complex64>>, GoldmanError> {
    cocycles
        .par_iter()
        .map(|u| cocycles.iter().map(|v| goldman_pair(u, v)).collect())
        .collect()
}

/// Result of comparing the pairing matrix with Wolpert's formula.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    /// Real part of the mean of `ω(dλ_j, dτ_j)`.
    pub kappa: f64,
    /// Imaginary part of the same mean.
    pub kappa_imag: f64,
    /// Rows and columns ordered `dλ_1..dλ_n, dτ_1..dτ_n`.
    pub matrix: Vec<Vec<Complex64>>,
    /// Largest off-pattern entry divided by `|κ|`.
    pub max_off_pattern: f64,
    /// Largest `|ω(dλ_j, dτ_j) − κ| / |κ|`.
    pub diagonal_spread: f64,
    pub rank: usize,
}

/// Pairing matrix of the coordinate cocycles at a real point and its
/// normalization constant κ.
pub fn calibrate_kappa(
    d: &PantsDecomposition,
    p: &ComplexFNPoint,
    scheme: FdScheme,
) -> Result<Calibration, GoldmanError> {
    if !p.is_real() {
        return Err(GoldmanError::NotReal);
    }
    let cocycles = coordinate_cocycles(d, p, scheme)?;
    let matrix = pairing_matrix(&cocycles)?;
    let n = p.dim();
    let diag: Vec<Complex64> = (0..n).map(|j| matrix[j][n + j]).collect();
    let kappa_c = diag.iter().sum::<Complex64>() / n as f64;
    let scale = kappa_c.norm();
    let diagonal_spread = diag.iter().map(|z| (z - kappa_c).norm() / scale).fold(0.0, f64::max);

    let mut worst = (0.0, 0, 0);
    for (i, row) in matrix.iter().enumerate() {
        for (j, z) in row.iter().enumerate() {
            let on_pattern = (i < n && j == i + n) || (i >= n && i == j + n);
            if !on_pattern && z.norm() > worst.0 {
                worst = (z.norm(), i, j);
            }
        }
    }
    let max_off_pattern = worst.0 / scale;
    if max_off_pattern > 1e-3 {
        return Err(GoldmanError::BlockStructureViolation {
            row: worst.1,
            col: worst.2,
            value: matrix[worst.1][worst.2],
            kappa: kappa_c,
        });
    }
    let rank = numerical_rank(&matrix, 1e-8);
    Ok(Calibration {
        kappa: kappa_c.re,
        kappa_imag: kappa_c.im,
        matrix,
        max_off_pattern,
        diagonal_spread,
        rank,
    })
}

/// Rank by Gaussian elimination with full pivoting; pivots below
/// `rel_tol · max|entry|` count as zero.
pub fn numerical_rank(m: &[Vec<Complex64>], rel_tol: f64) -> usize {
    let mut a: Vec<Vec<Complex64>> = m.to_vec();
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let top = a.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
    if top == 0.0 {
        return 0;
    }
    let mut rank = 0;
    let mut col_order: Vec<usize> = (0..cols).collect();
    while rank < rows.min(cols) {
        let mut best = (0.0, rank, rank);
        for (i, row) in a.iter().enumerate().skip(rank) {
            for (jj, &j) in col_order.iter().enumerate().skip(rank) {
                if row[j].norm() > best.0 {
                    best = (row[j].norm(), i, jj);
                }
            }
        }
        if best.0 <= rel_tol * top {
            break;
        }
        a.swap(rank, best.1);
        col_order.swap(rank, best.2);
        let pc = col_order[rank];
        let pivot = a[rank][pc];
        for i in rank + 1..rows {
            let f = a[i][pc] / pivot;
            for &j in &col_order[rank..] {
                let sub = a[rank][j] * f;
                a[i][j] -= sub;
            }
        }
        rank += 1;
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffgeo::{derivative_cocycle, Coordinate, TangentSpec};
    use crate::surface::canonical_genus2;

    #[test]
    fn reference_calibration() {
        let (d, _) = canonical_genus2();
        let c = calibrate_kappa(&d, &ComplexFNPoint::reference(2), FdScheme::default()).unwrap();
        assert!(c.kappa_imag.abs() <= 1e-6 * c.kappa.abs());
        assert!(c.max_off_pattern < 1e-6);
        assert_eq!(c.rank, 6);
    }

    #[test]
    fn kappa_is_point_independent() {
        let (d, _) = canonical_genus2();
        let a = calibrate_kappa(&d, &ComplexFNPoint::reference(2), FdScheme::default()).unwrap();
        let p = ComplexFNPoint::real(&[1.5, 0.8, 2.1], &[0.3, -0.7, 1.2]);
        let b = calibrate_kappa(&d, &p, FdScheme::default()).unwrap();
        assert!((a.kappa - b.kappa).abs() <= 1e-4 * a.kappa.abs());
    }

    #[test]
    fn report_checks() {
        let (d, _) = canonical_genus2();
        let p = ComplexFNPoint::new(
            vec![Complex64::new(1.1, 0.2), Complex64::new(0.9, -0.1), Complex64::new(1.6, 0.3)],
            vec![Complex64::new(0.2, 0.4), Complex64::new(-0.5, 0.1), Complex64::new(0.7, -0.3)],
        );
        let s = FdScheme::default();
        let u = derivative_cocycle(&d, &p, &TangentSpec::coordinate(3, Coordinate::Length(1)), s).unwrap();
        let v = derivative_cocycle(&d, &p, &TangentSpec::coordinate(3, Coordinate::Twist(2)), s).unwrap();
        let r = pairing_report(&u, &v, s.step).unwrap();
        assert!(r.antisymmetry_defect <= 1e-10 * r.value.norm().max(1.0));
        assert!(r.coboundary_defect <= 1e-7);
    }

    #[test]
    fn mismatched_base_rejected() {
        let (d, _) = canonical_genus2();
        let s = FdScheme::default();
        let dir = TangentSpec::coordinate(3, Coordinate::Length(0));
        let u = derivative_cocycle(&d, &ComplexFNPoint::reference(2), &dir, s).unwrap();
        let q = ComplexFNPoint::real(&[1.0, 1.0, 1.5], &[0.0; 3]);
        let v = derivative_cocycle(&d, &q, &dir, s).unwrap();
        assert!(matches!(goldman_pair(&u, &v), Err(GoldmanError::MismatchedBase)));
    }

    #[test]
    fn rank_of_small_matrices() {
        let z = Complex64::new(0.0, 0.0);
        let o = Complex64::new(1.0, 0.0);
        assert_eq!(numerical_rank(&[vec![o, o], vec![o, o]], 1e-12), 1);
        assert_eq!(numerical_rank(&[vec![o, z], vec![z, o]], 1e-12), 2);
        assert_eq!(numerical_rank(&[vec![z, z]], 1e-12), 0);
    }
}
