//! The length/weight form on `T × ML`, grafting, and the pullback
//! comparison with the Goldman pairing.
//!
//! Measured laminations are weighted multicurves on the pants curves. A
//! point `(m, t)` grafts to the complex-FN point `(ℓ, τ + i t)`; a tangent
//! vector `(ℓ̇, τ̇, ṫ)` pushes forward to `(ℓ̇, τ̇ + i ṫ)`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diffgeo::{derivative_1d, derivative_cocycle_over, Coordinate, DiffGeoError, FdScheme, TangentSpec};
use crate::goldman::{calibrate_kappa, goldman_pair, Calibration, GoldmanError};
use crate::holonomy::{
    build_rep, chain_generators, curve_complex_length, ComplexFNPoint, HolonomyError, HolonomyRep,
};
use crate::moebius::evaluate_word;
use crate::precision::{csqrt, Cdd, Dd};
use crate::surface::{canonical_chain, PantsDecomposition};

/// Bending weights must stay below this.
pub const MAX_BENDING: f64 = std::f64::consts::PI;

#[derive(Debug, Error)]
pub enum SymplecticError {
    #[error("weight {index} is {weight}; lamination weights must be nonnegative")]
    NegativeWeight { index: usize, weight: f64 },
    #[error("weight {index} is {weight}; bending weights must be below pi")]
    BendingOutOfRange { index: usize, weight: f64 },
    #[error("base point must be real")]
    NotReal,
    #[error("expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("A + iB = {value} is too small for a ratio")]
    DegenerateDenominator { value: Complex64 },
    #[error("{} sample(s) failed: {}", .0.len(), .0.iter().map(|(i, m)| format!("#{i}: {m}")).collect::<Vec<_>>().join("; "))]
    SampleFailure(Vec<(usize, String)>),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Holonomy(#[from] HolonomyError),
    #[error(transparent)]
    DiffGeo(#[from] DiffGeoError),
    #[error(transparent)]
    Goldman(#[from] GoldmanError),
}

/// Weights on the pants curves: a lamination when nonnegative, a tangent
/// vector to `ML` otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiCurveWeights {
    pub weights: Vec<f64>,
}

impl MultiCurveWeights {
    pub fn new(weights: Vec<f64>) -> Self {
        MultiCurveWeights { weights }
    }

    pub fn zero(n: usize) -> Self {
        Self::new(vec![0.0; n])
    }

    pub fn unit(n: usize, j: usize) -> Self {
        let mut w = Self::zero(n);
        w.weights[j] = 1.0;
        w
    }

    pub fn check_lamination(&self) -> Result<(), SymplecticError> {
        match self.weights.iter().enumerate().find(|(_, &w)| !(w >= 0.0)) {
            Some((index, &weight)) => Err(SymplecticError::NegativeWeight { index, weight }),
            None => Ok(()),
        }
    }

    fn displaced(&self, dir: &[f64], s: f64) -> Self {
        Self::new(self.weights.iter().zip(dir).map(|(w, d)| w + s * d).collect())
    }
}

/// Covector in the `(dλ_1..dλ_n, dτ_1..dτ_n)` basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CotangentVector {
    pub components: Vec<f64>,
}

/// A point `(m, t)` of `T × ML`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasePoint {
    pub metric: ComplexFNPoint,
    pub weights: MultiCurveWeights,
}

fn check_real(m: &ComplexFNPoint) -> Result<(), SymplecticError> {
    if m.is_real() {
        Ok(())
    } else {
        Err(SymplecticError::NotReal)
    }
}

fn check_dim(expected: usize, got: usize) -> Result<(), SymplecticError> {
    if expected == got {
        Ok(())
    } else {
        Err(SymplecticError::DimensionMismatch { expected, got })
    }
}

/// `L_m(t) = Σ_j t_j · Re λ(γ_j)`, lengths read off the holonomy.
pub fn multicurve_length(
    d: &PantsDecomposition,
    m: &ComplexFNPoint,
    t: &MultiCurveWeights,
) -> Result<f64, SymplecticError> {
    check_dim(m.dim(), t.weights.len())?;
    let rep = build_rep(d, m)?;
    let mut total = 0.0;
    for (w, word) in t.weights.iter().zip(&rep.presentation.pants_curve_words) {
        if *w != 0.0 {
            total += w * curve_complex_length(&rep, word)?.re();
        }
    }
    Ok(total)
}

/// `L_ṁ(l)`: derivative of `m ↦ L_m(l)` along the metric part of `dir`.
pub fn length_derivative(
    d: &PantsDecomposition,
    m: &ComplexFNPoint,
    dir: &TangentSpec,
    l: &MultiCurveWeights,
    scheme: FdScheme,
) -> Result<f64, SymplecticError> {
    check_real(m)?;
    check_dim(m.dim(), l.weights.len())?;
    check_dim(m.dim(), dir.dim())?;
    scheme.check()?;
    let rep = build_rep(d, m)?;
    let words = &rep.presentation.pants_curve_words;
    let dir = dir.metric_part();
    // differences are taken in double-double so that the quotient keeps
    // full f64 accuracy
    let f = |s: f64| -> Result<Dd, SymplecticError> {
        let (lengths, twists) = m.displaced_dd(&dir, s);
        let gens = chain_generators(d.genus, &lengths, &twists)?;
        let mut total = Dd::ZERO;
        for (w, word) in l.weights.iter().zip(words) {
            if *w != 0.0 {
                let g = evaluate_word(word, &gens).map_err(HolonomyError::from)?;
                total = total + real_length_dd(g.trace_dd()) * *w;
            }
        }
        Ok(total)
    };
    let central = |h: f64| -> Result<Dd, SymplecticError> { Ok((f(h)? - f(-h)?) / (2.0 * h)) };
    let h = scheme.step;
    let value = if scheme.richardson {
        (central(h / 2.0)? * 4.0 - central(h)?) / 3.0
    } else {
        central(h)?
    };
    Ok(value.to_f64())
}

/// `Re λ = 2 log|μ|`, μ the larger root of `μ² − tr μ + 1`.
fn real_length_dd(tr: Cdd) -> Dd {
    let disc = csqrt(tr * tr - Cdd::new(Dd::from_f64(4.0), Dd::ZERO));
    let half = Dd::from_f64(0.5);
    let norm2 = |z: Cdd| z.re * z.re + z.im * z.im;
    let (p, q) = (tr + disc, tr - disc);
    let mu = if norm2(p) >= norm2(q) { p } else { q };
    (norm2(mu) * half * half).ln()
}

/// `δ(m, t)`, the differential of `m ↦ L_m(t)`.
pub fn delta_covector(
    d: &PantsDecomposition,
    m: &ComplexFNPoint,
    t: &MultiCurveWeights,
    scheme: FdScheme,
) -> Result<CotangentVector, SymplecticError> {
    let n = m.dim();
    let components = Coordinate::all(n)
        .into_iter()
        .map(|c| length_derivative(d, m, &TangentSpec::coordinate(n, c), t, scheme))
        .collect::<Result<_, _>>()?;
    Ok(CotangentVector { components })
}

/// `ω_H(ζ₁, ζ₂) = L_{ṁ₁}(l̇₂) − L_{ṁ₂}(l̇₁)`.
///
/// The form is constant in the FN chart, so only the metric enters.
pub fn omega_h(
    d: &PantsDecomposition,
    m: &ComplexFNPoint,
    z1: &TangentSpec,
    z2: &TangentSpec,
    scheme: FdScheme,
) -> Result<f64, SymplecticError> {
    let l1 = MultiCurveWeights::new(z1.t_dot());
    let l2 = MultiCurveWeights::new(z2.t_dot());
    Ok(length_derivative(d, m, z1, &l2, scheme)? - length_derivative(d, m, z2, &l1, scheme)?)
}

/// Grafted point `(ℓ, τ + i t)` and its holonomy.
pub fn graft(
    d: &PantsDecomposition,
    m: &ComplexFNPoint,
    t: &MultiCurveWeights,
) -> Result<(ComplexFNPoint, HolonomyRep), SymplecticError> {
    check_real(m)?;
    check_dim(m.dim(), t.weights.len())?;
    t.check_lamination()?;
    if let Some((index, &weight)) = t.weights.iter().enumerate().find(|(_, &w)| w >= MAX_BENDING) {
        return Err(SymplecticError::BendingOutOfRange { index, weight });
    }
    let bent = ComplexFNPoint::new(
        m.lengths.clone(),
        m.twists
            .iter()
            .zip(&t.weights)
            .map(|(tau, w)| tau + Complex64::new(0.0, *w))
            .collect(),
    );
    let rep = build_rep(d, &bent)?;
    Ok((bent, rep))
}

/// `Σ_j (ℓ̇₁ τ̇₂ − ℓ̇₂ τ̇₁)`, i.e. `Σ dℓ_j ∧ dτ_j`.
pub fn wolpert_form(z1: &TangentSpec, z2: &TangentSpec) -> f64 {
    let (l1, t1, l2, t2) = (z1.ell_dot(), z1.tau_dot(), z2.ell_dot(), z2.tau_dot());
    (0..l1.len()).map(|j| l1[j] * t2[j] - l2[j] * t1[j]).sum()
}

/// One comparison of `Gr^* ω_G` with `A + iB`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PullbackSample {
    pub base: BasePoint,
    pub zeta1: TangentSpec,
    pub zeta2: TangentSpec,
    pub a: f64,
    pub b: f64,
    pub g: Complex64,
    pub ratio: Complex64,
}

pub fn pullback_sample(
    d: &PantsDecomposition,
    base: &BasePoint,
    z1: &TangentSpec,
    z2: &TangentSpec,
    scheme: FdScheme,
) -> Result<PullbackSample, SymplecticError> {
    let (bent, rep) = graft(d, &base.metric, &base.weights)?;
    let a = wolpert_form(z1, z2);
    let b = omega_h(d, &base.metric, z1, z2, scheme)?;
    let denom = Complex64::new(a, b);
    if denom.norm() < 1e-6 {
        return Err(SymplecticError::DegenerateDenominator { value: denom });
    }
    let rep = std::sync::Arc::new(rep);
    let u = derivative_cocycle_over(rep.clone(), &bent, z1, scheme)?;
    let v = derivative_cocycle_over(rep, &bent, z2, scheme)?;
    let g = goldman_pair(&u, &v)?;
    Ok(PullbackSample {
        base: base.clone(),
        zeta1: z1.clone(),
        zeta2: z2.clone(),
        a,
        b,
        g,
        ratio: g / denom,
    })
}

/// Parameters of [`verify_main_theorem`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MainTheoremConfig {
    pub genus: usize,
    pub samples: usize,
    pub seed: u64,
    pub scheme: FdScheme,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MainTheoremReport {
    pub genus: usize,
    pub kappa: f64,
    pub samples: Vec<PullbackSample>,
    /// Ungrafted samples with `ṫ = 0`, which must reproduce κ.
    pub control: Vec<PullbackSample>,
    pub mean_ratio: Complex64,
    /// `mean_ratio / κ`.
    pub ratio_over_kappa: Complex64,
    /// Largest `|ratio − mean| / |mean|`.
    pub max_relative_deviation: f64,
    /// Largest `|ratio − κ| / |κ|` over the control batch.
    pub control_deviation: f64,
    /// `|mean − κ| / |κ|`.
    pub kappa_mismatch: f64,
    pub pass: bool,
}

/// Number of ungrafted control samples drawn alongside `n` samples.
pub fn control_count(n: usize) -> usize {
    (n / 4).max(2)
}

fn uniform_vec(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(lo..hi)).collect()
}

fn random_direction(rng: &mut ChaCha8Rng, n: usize, with_weights: bool) -> TangentSpec {
    let l = uniform_vec(rng, n, -1.0, 1.0);
    let t = uniform_vec(rng, n, -1.0, 1.0);
    let w = if with_weights {
        uniform_vec(rng, n, -1.0, 1.0)
    } else {
        vec![0.0; n]
    };
    TangentSpec::from_metric_and_weights(&l, &t, &w)
}

/// Random real FN point with `λ ∈ [lo, hi]`, `τ ∈ [−τ_max, τ_max]`.
pub fn random_metric(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64, tau_max: f64) -> ComplexFNPoint {
    let l = uniform_vec(rng, n, lo, hi);
    let t = uniform_vec(rng, n, -tau_max, tau_max);
    ComplexFNPoint::real(&l, &t)
}

/// Sample `index` of a run, retried on a degenerate denominator. Each index
/// owns a ChaCha stream, so samples do not depend on evaluation order.
fn draw_sample(
    d: &PantsDecomposition,
    seed: u64,
    stream: u64,
    grafted: bool,
    scheme: FdScheme,
) -> Result<PullbackSample, SymplecticError> {
    let n = 3 * d.genus - 3;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut last = None;
    for _ in 0..16 {
        let metric = random_metric(&mut rng, n, 0.5, 2.5, 1.0);
        let weights = if grafted {
            uniform_vec(&mut rng, n, 0.05, 0.8)
        } else {
            vec![0.0; n]
        };
        let base = BasePoint {
            metric,
            weights: MultiCurveWeights::new(weights),
        };
        let z1 = random_direction(&mut rng, n, grafted);
        let z2 = random_direction(&mut rng, n, grafted);
        match pullback_sample(d, &base, &z1, &z2, scheme) {
            Err(e @ SymplecticError::DegenerateDenominator { .. }) => last = Some(e),
            r => return r,
        }
    }
    Err(last.expect("loop ran"))
}

/// Draws grafted samples and an ungrafted control batch, and checks that
/// `G / (A + iB)` is one constant equal to the Fuchsian κ.
pub fn verify_main_theorem(cfg: MainTheoremConfig) -> Result<MainTheoremReport, SymplecticError> {
    if cfg.samples == 0 {
        return Err(SymplecticError::Usage("at least one sample is required".into()));
    }
    let (d, _) = canonical_chain(cfg.genus).map_err(HolonomyError::from)?;
    let calibration = calibrate_kappa(&d, &ComplexFNPoint::reference(cfg.genus), cfg.scheme)?;
    let kappa = calibration.kappa;

    let nc = control_count(cfg.samples);
    let jobs: Vec<(u64, bool)> = (0..cfg.samples as u64)
        .map(|i| (i, true))
        .chain((0..nc as u64).map(|i| (cfg.samples as u64 + i, false)))
        .collect();
    let results: Vec<Result<PullbackSample, SymplecticError>> = jobs
        .par_iter()
        .map(|&(stream, grafted)| draw_sample(&d, cfg.seed, stream, grafted, cfg.scheme))
        .collect();
    let mut failures = Vec::new();
    let mut all = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(s) => all.push(s),
            Err(e) => failures.push((i, e.to_string())),
        }
    }
    if !failures.is_empty() {
        return Err(SymplecticError::SampleFailure(failures));
    }
    let control = all.split_off(cfg.samples);
    let samples = all;

    let mean_ratio = samples.iter().map(|s| s.ratio).sum::<Complex64>() / samples.len() as f64;
    let max_relative_deviation = samples
        .iter()
        .map(|s| (s.ratio - mean_ratio).norm() / mean_ratio.norm())
        .fold(0.0, f64::max);
    let k = Complex64::new(kappa, 0.0);
    let control_deviation = control
        .iter()
        .map(|s| (s.ratio - k).norm() / kappa.abs())
        .fold(0.0, f64::max);
    let kappa_mismatch = (mean_ratio - k).norm() / kappa.abs();
    let pass = max_relative_deviation <= cfg.tol && control_deviation <= cfg.tol && kappa_mismatch <= cfg.tol;
    Ok(MainTheoremReport {
        genus: cfg.genus,
        kappa,
        samples,
        control,
        mean_ratio,
        ratio_over_kappa: mean_ratio / k,
        max_relative_deviation,
        control_deviation,
        kappa_mismatch,
        pass,
    })
}

/// A path `s ↦ (m_s, l_s)` in `T × ML`.
pub trait MetricWeightPath {
    fn at(&self, s: f64) -> (ComplexFNPoint, MultiCurveWeights);
}

/// `s ↦ base + s·v + s²·a` in both the metric and the weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticPath {
    pub metric: ComplexFNPoint,
    pub weights: MultiCurveWeights,
    /// Real metric velocity `(ℓ̇, τ̇)`; imaginary parts are ignored.
    pub metric_velocity: TangentSpec,
    pub metric_acceleration: TangentSpec,
    pub weight_velocity: Vec<f64>,
    pub weight_acceleration: Vec<f64>,
}

impl MetricWeightPath for QuadraticPath {
    fn at(&self, s: f64) -> (ComplexFNPoint, MultiCurveWeights) {
        let m = self
            .metric
            .displaced(&self.metric_velocity.metric_part(), s)
            .displaced(&self.metric_acceleration.metric_part(), s * s);
        let w = self
            .weights
            .displaced(&self.weight_velocity, s)
            .displaced(&self.weight_acceleration, s * s);
        (m, w)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProductRuleReport {
    /// `d/ds L_{m_s}(l_s)` at `s = 0`.
    pub total: f64,
    /// `L_{ṁ}(l)`.
    pub metric_term: f64,
    /// `L_m(l̇)`.
    pub weight_term: f64,
    pub relative_defect: f64,
    pub pass: bool,
}

/// Checks `L_μ(λ)' = L_μ'(λ) + L_μ(λ')` at `s = 0`.
pub fn product_rule_check<P: MetricWeightPath>(
    d: &PantsDecomposition,
    path: &P,
    scheme: FdScheme,
    tol: f64,
) -> Result<ProductRuleReport, SymplecticError> {
    let (m0, l0) = path.at(0.0);
    let total = derivative_1d(
        |s| {
            let (m, l) = path.at(s);
            multicurve_length(d, &m, &l)
        },
        0.0,
        scheme,
    )?;
    let metric_term = derivative_1d(|s| multicurve_length(d, &path.at(s).0, &l0), 0.0, scheme)?;
    let weight_term = derivative_1d(|s| multicurve_length(d, &m0, &path.at(s).1), 0.0, scheme)?;
    let defect = (total - metric_term - weight_term).abs();
    let scale = total.abs().max(metric_term.abs() + weight_term.abs());
    let relative_defect = if scale == 0.0 { defect } else { defect / scale };
    Ok(ProductRuleReport {
        total,
        metric_term,
        weight_term,
        relative_defect,
        pass: relative_defect <= tol,
    })
}

/// One entry `ω(u_{τ_j}, u_v)` against `ε κ dλ_j(v)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualityEntry {
    pub curve: usize,
    pub direction: Coordinate,
    pub value: Complex64,
    pub expected: f64,
    pub relative_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwistDualityReport {
    /// κ at the reference point, used as the yardstick.
    pub kappa: f64,
    /// Global sign ε with `ω(u_{τ_j}, u_v) = ε κ dλ_j(v)`.
    pub epsilon: i32,
    pub entries: Vec<DualityEntry>,
    pub max_relative_error: f64,
    pub pass: bool,
}

/// Pairs each twist cocycle with every coordinate cocycle at `m`.
pub fn twist_duality_check(
    d: &PantsDecomposition,
    m: &ComplexFNPoint,
    scheme: FdScheme,
    tol: f64,
) -> Result<TwistDualityReport, SymplecticError> {
    check_real(m)?;
    let kappa = calibrate_kappa(d, &ComplexFNPoint::reference(d.genus), scheme)?.kappa;
    let cal: Calibration = match calibrate_kappa(d, m, scheme) {
        Ok(c) => c,
        Err(GoldmanError::BlockStructureViolation { .. }) => {
            // report the raw matrix entries instead of aborting
            let cocycles = crate::diffgeo::coordinate_cocycles(d, m, scheme)?;
            let matrix = crate::goldman::pairing_matrix(&cocycles)?;
            Calibration {
                kappa,
                kappa_imag: 0.0,
                matrix,
                max_off_pattern: f64::INFINITY,
                diagonal_spread: f64::INFINITY,
                rank: 0,
            }
        }
        Err(e) => return Err(e.into()),
    };
    let n = m.dim();
    let epsilon = if cal.matrix[n][0].re / kappa < 0.0 { -1 } else { 1 };
    let mut entries = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for (k, c) in Coordinate::all(n).into_iter().enumerate() {
            let value = cal.matrix[n + j][k];
            let expected = if c == Coordinate::Length(j) {
                epsilon as f64 * kappa
            } else {
                0.0
            };
            let relative_error = (value - expected).norm() / kappa.abs();
            entries.push(DualityEntry {
                curve: j,
                direction: c,
                value,
                expected,
                relative_error,
            });
        }
    }
    let max_relative_error = entries.iter().map(|e| e.relative_error).fold(0.0, f64::max);
    Ok(TwistDualityReport {
        kappa,
        epsilon,
        entries,
        max_relative_error,
        pass: max_relative_error <= tol,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LiouvilleReport {
    /// `dβ(ζ₁, ζ₂)` from the loop sum around the plaquette.
    pub d_beta: f64,
    pub omega_h: f64,
    /// `|dβ + ω_H|`.
    pub defect: f64,
}

/// Exterior derivative of `β(ṁ, l̇) = L_ṁ(l)` on the plaquette spanned by
/// `ε ζ₁, ε ζ₂`, compared with `ω_H`.
///
/// With `β = Σ t_j dλ_j` one gets `dβ = Σ dt_j ∧ dλ_j = −ω_H`; the sign is
/// the usual one for the tautological form, `ω = −dβ`.
pub fn liouville_check(
    d: &PantsDecomposition,
    base: &BasePoint,
    z1: &TangentSpec,
    z2: &TangentSpec,
    eps: f64,
    scheme: FdScheme,
) -> Result<LiouvilleReport, SymplecticError> {
    check_real(&base.metric)?;
    let corner = |a: f64, b: f64| {
        let m = base
            .metric
            .displaced(&z1.metric_part(), a)
            .displaced(&z2.metric_part(), b);
        let t = base.weights.displaced(&z1.t_dot(), a).displaced(&z2.t_dot(), b);
        (m, t)
    };
    let beta = |a: f64, b: f64, z: &TangentSpec| -> Result<f64, SymplecticError> {
        let (m, t) = corner(a, b);
        length_derivative(d, &m, z, &t, scheme)
    };
    let h = eps / 2.0;
    let circulation = eps
        * (beta(h, 0.0, z1)? + beta(eps, h, z2)? - beta(h, eps, z1)? - beta(0.0, h, z2)?);
    let d_beta = circulation / (eps * eps);
    let omega = omega_h(d, &base.metric, z1, z2, scheme)?;
    Ok(LiouvilleReport {
        d_beta,
        omega_h: omega,
        defect: (d_beta + omega).abs(),
    })
}
