//! Finite differences on the Fenchel–Nielsen chart and derivative cocycles.
//!
//! A tangent vector at ρ is recorded as the crossed homomorphism
//! `u(x) = ρ̇(x) ρ(x)⁻¹`, which obeys `u(xy) = u(x) + Ad_{ρ(x)} u(y)`.
//! Derivative cocycles are central differences of the holonomy builder,
//! taken with the displaced points formed in double-double so that the
//! default step of 1e−5 does not amplify rounding of the coordinates.

use std::sync::Arc;

use num_complex::Complex64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::holonomy::{build_rep, chain_generators, ComplexFNPoint, HolonomyError, HolonomyRep};
use crate::moebius::{adjoint, Letter, MoebiusError, TraceFreeMatrix, UnitDetMatrix};
use crate::precision::{cdd, Cdd, Dd};
use crate::surface::PantsDecomposition;

pub type BoxError = Box<dyn std::error::Error + Send + Sync>;

#[derive(Debug, Error)]
pub enum DiffGeoError {
    #[error("function evaluation failed: {0}")]
    EvaluationFailure(#[source] BoxError),
    #[error("lift of generator {generator} flips sign across the difference stencil")]
    LiftInconsistency { generator: usize },
    #[error("finite-difference step must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("direction has {got} coordinates, point has {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("cocycles are over different base representations")]
    MismatchedBase,
    #[error(transparent)]
    Holonomy(#[from] HolonomyError),
    #[error(transparent)]
    Moebius(#[from] MoebiusError),
}

/// Direction in the complex-FN chart.
///
/// For tangent vectors to `T × ML` the encoding is `dλ = ℓ̇` (real) and
/// `dτ = τ̇ + i ṫ`, with `ṫ` the weight velocity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangentSpec {
    pub d_lengths: Vec<Complex64>,
    pub d_twists: Vec<Complex64>,
}

/// A coordinate of the chart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Coordinate {
    Length(usize),
    Twist(usize),
}

impl Coordinate {
    /// Lengths first, then twists.
    pub fn all(n: usize) -> Vec<Coordinate> {
        (0..n)
            .map(Coordinate::Length)
            .chain((0..n).map(Coordinate::Twist))
            .collect()
    }
}

impl TangentSpec {
    pub fn zero(n: usize) -> Self {
        TangentSpec {
            d_lengths: vec![Complex64::zero(); n],
            d_twists: vec![Complex64::zero(); n],
        }
    }

    pub fn coordinate(n: usize, c: Coordinate) -> Self {
        let mut t = Self::zero(n);
        match c {
            Coordinate::Length(j) => t.d_lengths[j] = Complex64::new(1.0, 0.0),
            Coordinate::Twist(j) => t.d_twists[j] = Complex64::new(1.0, 0.0),
        }
        t
    }

    /// `(ℓ̇, τ̇, ṫ)` encoded as `dλ = ℓ̇`, `dτ = τ̇ + i ṫ`.
    pub fn from_metric_and_weights(ell_dot: &[f64], tau_dot: &[f64], t_dot: &[f64]) -> Self {
        TangentSpec {
            d_lengths: ell_dot.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
            d_twists: tau_dot
                .iter()
                .zip(t_dot)
                .map(|(&a, &b)| Complex64::new(a, b))
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.d_lengths.len()
    }

    pub fn ell_dot(&self) -> Vec<f64> {
        self.d_lengths.iter().map(|z| z.re).collect()
    }

    pub fn tau_dot(&self) -> Vec<f64> {
        self.d_twists.iter().map(|z| z.re).collect()
    }

    pub fn t_dot(&self) -> Vec<f64> {
        self.d_twists.iter().map(|z| z.im).collect()
    }

    /// The metric part `(ℓ̇, τ̇, 0)`.
    pub fn metric_part(&self) -> Self {
        TangentSpec {
            d_lengths: self.d_lengths.iter().map(|z| Complex64::new(z.re, 0.0)).collect(),
            d_twists: self.d_twists.iter().map(|z| Complex64::new(z.re, 0.0)).collect(),
        }
    }

    pub fn scale(&self, k: Complex64) -> Self {
        TangentSpec {
            d_lengths: self.d_lengths.iter().map(|z| z * k).collect(),
            d_twists: self.d_twists.iter().map(|z| z * k).collect(),
        }
    }

    pub fn times_i(&self) -> Self {
        self.scale(Complex64::i())
    }

    pub fn plus(&self, o: &TangentSpec) -> Self {
        TangentSpec {
            d_lengths: self.d_lengths.iter().zip(&o.d_lengths).map(|(a, b)| a + b).collect(),
            d_twists: self.d_twists.iter().zip(&o.d_twists).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.d_lengths.iter().chain(&self.d_twists).all(|z| z.is_zero())
    }

    pub fn is_finite(&self) -> bool {
        self.d_lengths.iter().chain(&self.d_twists).all(|z| z.is_finite())
    }
}

impl ComplexFNPoint {
    /// `p + s·dir`.
    pub fn displaced(&self, dir: &TangentSpec, s: f64) -> ComplexFNPoint {
        ComplexFNPoint {
            lengths: self.lengths.iter().zip(&dir.d_lengths).map(|(p, d)| p + d * s).collect(),
            twists: self.twists.iter().zip(&dir.d_twists).map(|(p, d)| p + d * s).collect(),
        }
    }

    pub(crate) fn displaced_dd(&self, dir: &TangentSpec, s: f64) -> (Vec<Cdd>, Vec<Cdd>) {
        let step = |p: &Complex64, d: &Complex64| {
            let d = cdd(*d);
            cdd(*p) + Cdd::new(d.re * s, d.im * s)
        };
        (
            self.lengths.iter().zip(&dir.d_lengths).map(|(p, d)| step(p, d)).collect(),
            self.twists.iter().zip(&dir.d_twists).map(|(p, d)| step(p, d)).collect(),
        )
    }
}

/// Central-difference scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdScheme {
    pub step: f64,
    /// Combine steps `h` and `h/2` as `(4 D(h/2) − D(h)) / 3`.
    pub richardson: bool,
}

impl Default for FdScheme {
    fn default() -> Self {
        FdScheme {
            step: 1e-5,
            richardson: true,
        }
    }
}

impl FdScheme {
    pub fn with_step(step: f64) -> Self {
        FdScheme {
            step,
            ..Self::default()
        }
    }

    pub(crate) fn check(&self) -> Result<(), DiffGeoError> {
        if self.step > 0.0 && self.step.is_finite() {
            Ok(())
        } else {
            Err(DiffGeoError::InvalidStep(self.step))
        }
    }
}

fn check_dims(p: &ComplexFNPoint, dir: &TangentSpec) -> Result<(), DiffGeoError> {
    let expected = p.dim();
    if dir.d_lengths.len() != expected || dir.d_twists.len() != expected {
        return Err(DiffGeoError::DimensionMismatch {
            expected,
            got: dir.d_lengths.len().max(dir.d_twists.len()),
        });
    }
    Ok(())
}

/// Derivative of `f` at `p` along `dir`.
pub fn directional_derivative<F, E>(
    f: F,
    p: &ComplexFNPoint,
    dir: &TangentSpec,
    scheme: FdScheme,
) -> Result<Complex64, DiffGeoError>
where
    F: Fn(&ComplexFNPoint) -> Result<Complex64, E>,
    E: Into<BoxError>,
{
    scheme.check()?;
    check_dims(p, dir)?;
    let eval = |s: f64| f(&p.displaced(dir, s)).map_err(|e| DiffGeoError::EvaluationFailure(e.into()));
    let central = |h: f64| -> Result<Complex64, DiffGeoError> { Ok((eval(h)? - eval(-h)?) / (2.0 * h)) };
    let h = scheme.step;
    if scheme.richardson {
        Ok((central(h / 2.0)? * 4.0 - central(h)?) / 3.0)
    } else {
        central(h)
    }
}

/// Derivative of a scalar function of one real variable at `x0`.
pub fn derivative_1d<F, E>(f: F, x0: f64, scheme: FdScheme) -> Result<f64, DiffGeoError>
where
    F: Fn(f64) -> Result<f64, E>,
    E: Into<BoxError>,
{
    scheme.check()?;
    let eval = |x: f64| f(x).map_err(|e| DiffGeoError::EvaluationFailure(e.into()));
    let central = |h: f64| -> Result<f64, DiffGeoError> { Ok((eval(x0 + h)? - eval(x0 - h)?) / (2.0 * h)) };
    let h = scheme.step;
    if scheme.richardson {
        Ok((4.0 * central(h / 2.0)? - central(h)?) / 3.0)
    } else {
        central(h)
    }
}

/// Crossed homomorphism `π₁(S) → sl(2,ℂ)` given by its generator values.
#[derive(Debug, Clone)]
pub struct GroupCocycle {
    pub base: Arc<HolonomyRep>,
    pub values: Vec<TraceFreeMatrix>,
}

impl GroupCocycle {
    pub fn new(base: Arc<HolonomyRep>, values: Vec<TraceFreeMatrix>) -> Result<Self, HolonomyError> {
        let expected = base.generators.len();
        if values.len() != expected {
            return Err(HolonomyError::GeneratorCount {
                expected,
                got: values.len(),
            });
        }
        Ok(GroupCocycle { base, values })
    }

    pub fn zero(base: Arc<HolonomyRep>) -> Self {
        let n = base.generators.len();
        GroupCocycle {
            base,
            values: vec![TraceFreeMatrix::zero(); n],
        }
    }

    /// Same generator matrices, compared exactly.
    pub fn same_base(&self, other: &GroupCocycle) -> bool {
        Arc::ptr_eq(&self.base, &other.base) || self.base.generators == other.base.generators
    }

    /// Value on a letter, using `u(x⁻¹) = −Ad_{ρ(x)⁻¹} u(x)`.
    pub(crate) fn letter_value(&self, l: Letter) -> TraceFreeMatrix {
        let u = self.values[l.generator];
        if l.inverse {
            -adjoint(&self.base.generators[l.generator].inverse(), &u)
        } else {
            u
        }
    }

    /// `u(w)`.
    pub fn extend(&self, word: &[Letter]) -> Result<TraceFreeMatrix, MoebiusError> {
        let n = self.values.len();
        let mut prefix = UnitDetMatrix::identity();
        let mut acc = TraceFreeMatrix::zero();
        for &l in word {
            if l.generator >= n {
                return Err(MoebiusError::IndexOutOfRange {
                    index: l.generator,
                    len: n,
                });
            }
            acc = acc + adjoint(&prefix, &self.letter_value(l));
            let g = self.base.generators[l.generator];
            prefix = prefix * if l.inverse { g.inverse() } else { g };
        }
        Ok(acc)
    }

    /// `‖u(R)‖_F`.
    pub fn relator_residual(&self) -> f64 {
        self.extend(&self.base.presentation.relator)
            .map(|m| m.norm())
            .unwrap_or(f64::INFINITY)
    }

    /// Largest generator value norm.
    pub fn scale_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `Σ c_k u_k` over cocycles sharing one base.
    pub fn linear_combination(terms: &[(Complex64, &GroupCocycle)]) -> Result<Self, DiffGeoError> {
        let first = terms.first().ok_or(DiffGeoError::MismatchedBase)?.1;
        let mut out = GroupCocycle::zero(first.base.clone());
        for (c, u) in terms {
            if !first.same_base(u) {
                return Err(DiffGeoError::MismatchedBase);
            }
            for (o, v) in out.values.iter_mut().zip(&u.values) {
                *o = *o + v.scale(*c);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        GroupCocycle {
            base: self.base.clone(),
            values: self.values.iter().map(|v| v.scale(c)).collect(),
        }
    }

    /// Largest generator-wise distance.
    pub fn distance(&self, other: &GroupCocycle) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (*a - *b).norm())
            .fold(0.0, f64::max)
    }
}

/// `u(w)` by the crossed-homomorphism rule.
pub fn extend_cocycle(u: &GroupCocycle, word: &[Letter]) -> Result<TraceFreeMatrix, MoebiusError> {
    u.extend(word)
}

/// `δξ(x) = ξ − Ad_{ρ(x)} ξ`.
pub fn coboundary(base: Arc<HolonomyRep>, xi: &TraceFreeMatrix) -> GroupCocycle {
    let values = base.generators.iter().map(|g| *xi - adjoint(g, xi)).collect();
    GroupCocycle { base, values }
}

type RawMatrix = [Cdd; 4];

fn difference_quotient(
    plus: &[UnitDetMatrix],
    minus: &[UnitDetMatrix],
    base: &[UnitDetMatrix],
    h: f64,
) -> Result<Vec<RawMatrix>, DiffGeoError> {
    let inv2h = Dd::ONE / Dd::from_f64(2.0 * h);
    plus.iter()
        .zip(minus)
        .zip(base)
        .enumerate()
        .map(|(i, ((p, m), b))| {
            if p.distance(m) >= p.distance(&-*m) {
                return Err(DiffGeoError::LiftInconsistency { generator: i });
            }
            let (p, m, bi) = (p.entries_dd(), m.entries_dd(), b.inverse().entries_dd());
            let d: Vec<Cdd> = (0..4).map(|k| (p[k] - m[k]) * inv2h).collect();
            Ok([
                d[0] * bi[0] + d[1] * bi[2],
                d[0] * bi[1] + d[1] * bi[3],
                d[2] * bi[0] + d[3] * bi[2],
                d[2] * bi[1] + d[3] * bi[3],
            ])
        })
        .collect()
}

/// Cocycle of the tangent vector `dir` at `p`, over the given base.
pub fn derivative_cocycle_over(
    base: Arc<HolonomyRep>,
    p: &ComplexFNPoint,
    dir: &TangentSpec,
    scheme: FdScheme,
) -> Result<GroupCocycle, DiffGeoError> {
    scheme.check()?;
    check_dims(p, dir)?;
    let genus = base.genus();
    let gens = |s: f64| -> Result<Vec<UnitDetMatrix>, DiffGeoError> {
        let (l, t) = p.displaced_dd(dir, s);
        Ok(chain_generators(genus, &l, &t)?)
    };
    let quotient = |h: f64| -> Result<Vec<RawMatrix>, DiffGeoError> {
        difference_quotient(&gens(h)?, &gens(-h)?, &base.generators, h)
    };
    let h = scheme.step;
    let raw = if scheme.richardson {
        let coarse = quotient(h)?;
        let fine = quotient(h / 2.0)?;
        let third = Dd::ONE / Dd::from_f64(3.0);
        fine.iter()
            .zip(&coarse)
            .map(|(f, c)| {
                let mut out = *f;
                for k in 0..4 {
                    let v = f[k] * Dd::from_f64(4.0) - c[k];
                    out[k] = Cdd::new(v.re * third, v.im * third);
                }
                out
            })
            .collect()
    } else {
        quotient(h)?
    };
    let values = raw.into_iter().map(TraceFreeMatrix::project).collect();
    Ok(GroupCocycle { base, values })
}

/// Cocycle of the tangent vector `dir` at `p`.
pub fn derivative_cocycle(
    d: &PantsDecomposition,
    p: &ComplexFNPoint,
    dir: &TangentSpec,
    scheme: FdScheme,
) -> Result<GroupCocycle, DiffGeoError> {
    let base = Arc::new(build_rep(d, p)?);
    derivative_cocycle_over(base, p, dir, scheme)
}

/// Cocycles for all coordinate directions (lengths first, then twists),
/// sharing one base.
pub fn coordinate_cocycles(
    d: &PantsDecomposition,
    p: &ComplexFNPoint,
    scheme: FdScheme,
) -> Result<Vec<GroupCocycle>, DiffGeoError> {
    let base = Arc::new(build_rep(d, p)?);
    let n = p.dim();
    Coordinate::all(n)
        .into_iter()
        .map(|c| derivative_cocycle_over(base.clone(), p, &TangentSpec::coordinate(n, c), scheme))
        .collect()
}
