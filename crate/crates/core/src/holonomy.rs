//! Holonomy representations from complex Fenchel–Nielsen coordinates.
//!
//! Each pair of pants is assembled from two right-angled hexagons. Walking
//! around one hexagon alternates half a boundary geodesic with a seam, and
//! the frames met along the way give the three boundary "ports" of the
//! pants. Neighbouring pants are glued port to port by a half-turn followed
//! by a translation of length τ along the shared curve. A spanning tree of
//! the pants graph fixes every pants' position relative to a root; each
//! non-tree curve then contributes the pair of generators `a_k, b_k`.
//!
//! Every formula is an analytic function of (λ, τ), so the same code
//! evaluates both the Fuchsian chart and its complexification.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_complex::Complex64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::moebius::{
    complex_length, evaluate_word, ComplexLength, Letter, MoebiusError, UnitDetMatrix,
};
use crate::precision::{c64, ccosh, cdd, cexp, creal, csinh, csqrt, Cdd, Dd};
use crate::surface::{
    self, canonical_chain, format_word, PantsDecomposition, SurfaceError, SurfacePresentation,
};

/// Smallest admissible `Re λ`.
pub const MIN_LENGTH: f64 = 1e-8;

/// Convention string embedded in reports.
pub const TWIST_SIGN: &str =
    "positive twist = left earthquake (surface oriented so each pants lies right of its boundary frames)";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HolonomyError {
    #[error("length coordinate {index} has real part {value}, below {MIN_LENGTH}")]
    DegenerateLength { index: usize, value: f64 },
    #[error("expected {expected} lengths and twists, got {lengths} and {twists}")]
    DimensionMismatch {
        expected: usize,
        lengths: usize,
        twists: usize,
    },
    #[error("expected {expected} generators, got {got}")]
    GeneratorCount { expected: usize, got: usize },
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error(transparent)]
    Moebius(#[from] MoebiusError),
}

/// Complex Fenchel–Nielsen coordinates, one (λ_j, τ_j) per pants curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexFNPoint {
    pub lengths: Vec<Complex64>,
    pub twists: Vec<Complex64>,
}

impl ComplexFNPoint {
    pub fn new(lengths: Vec<Complex64>, twists: Vec<Complex64>) -> Self {
        ComplexFNPoint { lengths, twists }
    }

    pub fn real(lengths: &[f64], twists: &[f64]) -> Self {
        ComplexFNPoint {
            lengths: lengths.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
            twists: twists.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        }
    }

    /// λ = (1, …, 1), τ = 0.
    pub fn reference(genus: usize) -> Self {
        let n = 3 * genus - 3;
        Self::real(&vec![1.0; n], &vec![0.0; n])
    }

    pub fn dim(&self) -> usize {
        self.lengths.len()
    }

    pub fn is_real(&self) -> bool {
        self.lengths
            .iter()
            .chain(self.twists.iter())
            .all(|z| z.im == 0.0)
    }

    pub(crate) fn to_dd(&self) -> (Vec<Cdd>, Vec<Cdd>) {
        (
            self.lengths.iter().map(|&z| cdd(z)).collect(),
            self.twists.iter().map(|&z| cdd(z)).collect(),
        )
    }
}

/// Generator matrices of ρ: π₁(S) → SL(2,ℂ) together with the presentation.
#[derive(Debug, Clone, PartialEq)]
pub struct HolonomyRep {
    pub generators: Vec<UnitDetMatrix>,
    pub presentation: SurfacePresentation,
    /// `None` for hand-built representations.
    pub source: Option<ComplexFNPoint>,
}

impl HolonomyRep {
    pub fn from_generators(
        presentation: SurfacePresentation,
        generators: Vec<UnitDetMatrix>,
    ) -> Result<Self, HolonomyError> {
        let expected = presentation.generator_count();
        if generators.len() != expected {
            return Err(HolonomyError::GeneratorCount {
                expected,
                got: generators.len(),
            });
        }
        Ok(HolonomyRep {
            generators,
            presentation,
            source: None,
        })
    }

    pub fn genus(&self) -> usize {
        self.presentation.genus
    }

    pub fn eval(&self, word: &[Letter]) -> Result<UnitDetMatrix, MoebiusError> {
        evaluate_word(word, &self.generators)
    }

    /// `min_± ‖ρ(R) ∓ I‖_F`.
    pub fn relator_residual(&self) -> f64 {
        self.eval(&self.presentation.relator)
            .map(|m| m.distance_to_pm_identity())
            .unwrap_or(f64::INFINITY)
    }

    /// Largest `|Im tr|` over generators and products of generator pairs.
    pub fn reality_defect(&self) -> f64 {
        let g = &self.generators;
        let mut worst: f64 = 0.0;
        for (i, x) in g.iter().enumerate() {
            worst = worst.max(x.trace().im.abs());
            for y in &g[i + 1..] {
                worst = worst.max((*x * *y).trace().im.abs());
                worst = worst.max((*x * y.inverse()).trace().im.abs());
            }
        }
        worst
    }

    /// Serializable view with each matrix as eight reals.
    pub fn document(&self) -> RepDocument {
        RepDocument {
            genus: self.genus(),
            generator_names: self.presentation.generator_names(),
            generators: self
                .generators
                .iter()
                .map(|m| {
                    let e = m.entries();
                    [
                        e[0].re, e[0].im, e[1].re, e[1].im, e[2].re, e[2].im, e[3].re, e[3].im,
                    ]
                })
                .collect(),
            relator: format_word(&self.presentation.relator),
            pants_curve_words: self
                .presentation
                .pants_curve_words
                .iter()
                .map(|w| format_word(w))
                .collect(),
            source: self.source.clone(),
            relator_residual: self.relator_residual(),
            twist_sign: TWIST_SIGN.to_string(),
        }
    }
}

/// JSON form of a [`HolonomyRep`]: matrices row-major, real and imaginary
/// parts interleaved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepDocument {
    pub genus: usize,
    pub generator_names: Vec<String>,
    pub generators: Vec<[f64; 8]>,
    pub relator: String,
    pub pants_curve_words: Vec<String>,
    pub source: Option<ComplexFNPoint>,
    pub relator_residual: f64,
    pub twist_sign: String,
}

impl RepDocument {
    /// Rebuilds a representation; the presentation comes from the chain
    /// model of the stored genus.
    pub fn to_rep(&self) -> Result<HolonomyRep, HolonomyError> {
        let (_, presentation) = canonical_chain(self.genus)?;
        let gens = self
            .generators
            .iter()
            .map(|v| {
                UnitDetMatrix::new(
                    Complex64::new(v[0], v[1]),
                    Complex64::new(v[2], v[3]),
                    Complex64::new(v[4], v[5]),
                    Complex64::new(v[6], v[7]),
                )
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut rep = HolonomyRep::from_generators(presentation, gens)?;
        rep.source = self.source.clone();
        Ok(rep)
    }
}

type Raw = [Cdd; 4];

fn mat(m: Raw) -> UnitDetMatrix {
    UnitDetMatrix::from_dd_unchecked(m)
}

/// `diag(e^{x/2}, e^{−x/2})`.
fn translation(x: Cdd) -> UnitDetMatrix {
    let e = cexp(x * Dd::from_f64(0.5));
    mat([e, Cdd::zero(), Cdd::zero(), e.inv()])
}

fn diag(e: Cdd) -> UnitDetMatrix {
    mat([e, Cdd::zero(), Cdd::zero(), e.inv()])
}

/// Quarter turn about the frame origin.
fn quarter_turn() -> UnitDetMatrix {
    let c = creal(Dd::from_f64(0.5).sqrt());
    mat([c, -c, c, c])
}

/// Half turn exchanging the two sides of a curve.
fn half_turn() -> UnitDetMatrix {
    mat([Cdd::zero(), Cdd::one(), -Cdd::one(), Cdd::zero()])
}

/// `e^{s/2}` for the seam opposite boundary `li`, joining `lj` and `lk`.
fn seam(li: Cdd, lj: Cdd, lk: Cdd) -> Cdd {
    let quarter = Dd::from_f64(0.25);
    let half = Dd::from_f64(0.5);
    let s = (li + lj + lk) * quarter;
    let den = csinh(lj * half) * csinh(lk * half);
    let ch2 = ccosh(s) * ccosh(s - li * half) / den;
    let sh2 = ccosh(s - lj * half) * ccosh(s - lk * half) / den;
    csqrt(ch2) + csqrt(sh2)
}

/// Port frames of a pants with boundary lengths `l`, ordered so that the
/// boundary holonomies satisfy `C_0 C_1 C_2 = −I`.
fn pants_frames(l: [Cdd; 3]) -> [UnitDetMatrix; 3] {
    // hexagon walk with boundaries taken in reverse order
    let (g1, g2, g3) = (l[2], l[1], l[0]);
    let half = Dd::from_f64(0.5);
    let q = quarter_turn();
    let f1 = UnitDetMatrix::identity();
    let f2 = translation(g1 * half) * q * diag(seam(g3, g1, g2)) * q;
    let f3 = f2 * translation(g2 * half) * q * diag(seam(g1, g2, g3)) * q;
    [f3, f2, f1]
}

fn port_holonomy(frame: &UnitDetMatrix, l: Cdd) -> UnitDetMatrix {
    *frame * translation(l) * frame.inverse()
}

/// Generator matrices for the chain layout of `genus`, in double-double.
///
/// The raw layout is conjugated by a fixed matrix per genus that minimises
/// the generators' total Frobenius norm at the reference point. The
/// conjugator does not depend on (λ, τ), so entries stay holomorphic, and
/// f64 exports of the matrices keep a small relator residual.
pub(crate) fn chain_generators(
    genus: usize,
    lengths: &[Cdd],
    twists: &[Cdd],
) -> Result<Vec<UnitDetMatrix>, HolonomyError> {
    let raw = raw_chain_generators(genus, lengths, twists)?;
    let m = balancer(genus)?;
    let mi = m.inverse();
    Ok(raw.into_iter().map(|g| m * g * mi).collect())
}

fn balancer(genus: usize) -> Result<UnitDetMatrix, HolonomyError> {
    static CACHE: OnceLock<Mutex<HashMap<usize, UnitDetMatrix>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(m) = cache.lock().expect("balancer cache").get(&genus) {
        return Ok(*m);
    }
    let (l, t) = ComplexFNPoint::reference(genus).to_dd();
    let gens: Vec<[Complex64; 4]> =
        raw_chain_generators(genus, &l, &t)?.iter().map(|g| g.entries()).collect();
    let (s, b) = balance(&gens);
    let a = Dd::from(s).exp();
    let m = UnitDetMatrix::from_dd_unchecked([
        creal(a),
        creal(a * b),
        Cdd::zero(),
        creal(a.recip()),
    ]);
    cache.lock().expect("balancer cache").insert(genus, m);
    Ok(m)
}

/// Minimises `Σ ‖M g M⁻¹‖²` over `M = diag(e^s, e^{−s}) · [[1, b], [0, 1]]`.
/// Every SL(2,ℝ) class modulo rotations has such a representative.
fn balance(gens: &[[Complex64; 4]]) -> (f64, f64) {
    let cost = |s: f64, b: f64| -> f64 {
        let (a, ai) = (s.exp(), (-s).exp());
        gens.iter()
            .map(|g| {
                // M g M⁻¹ with M = [[a, ab], [0, 1/a]], M⁻¹ = [[1/a, −ab], [0, a]]
                let x = [g[0] + g[2] * b, g[1] + g[3] * b, g[2], g[3]];
                let y = [x[0] * a, x[1] * a, x[2] * ai, x[3] * ai];
                let z = [y[0] * ai, -y[0] * (a * b) + y[1] * a, y[2] * ai, -y[2] * (a * b) + y[3] * a];
                z.iter().map(|w| w.norm_sqr()).sum::<f64>()
            })
            .sum::<f64>()
            .ln()
    };
    let (mut s, mut b) = (0.0, 0.0);
    let mut f = cost(s, b);
    let mut step = 1.0;
    for _ in 0..4000 {
        let h = 1e-6;
        let gs = (cost(s + h, b) - cost(s - h, b)) / (2.0 * h);
        let gb = (cost(s, b + h) - cost(s, b - h)) / (2.0 * h);
        loop {
            let (s1, b1) = (s - step * gs, b - step * gb);
            let f1 = cost(s1, b1);
            if f1 < f {
                (s, b, f) = (s1, b1, f1);
                step *= 1.5;
                break;
            }
            step *= 0.5;
            if step < 1e-14 {
                return (s, b);
            }
        }
    }
    (s, b)
}

fn raw_chain_generators(
    genus: usize,
    lengths: &[Cdd],
    twists: &[Cdd],
) -> Result<Vec<UnitDetMatrix>, HolonomyError> {
    let (d, _) = canonical_chain(genus)?;
    let n = 3 * genus - 3;
    if lengths.len() != n || twists.len() != n {
        return Err(HolonomyError::DimensionMismatch {
            expected: n,
            lengths: lengths.len(),
            twists: twists.len(),
        });
    }
    for (index, l) in lengths.iter().enumerate() {
        let value = l.re.to_f64();
        if !(value > MIN_LENGTH) || !l.im.is_finite() {
            return Err(HolonomyError::DegenerateLength { index, value });
        }
    }

    let slots = d.slot_curves();
    let frames: Vec<[UnitDetMatrix; 3]> = slots
        .iter()
        .map(|s| pants_frames([lengths[s[0]], lengths[s[1]], lengths[s[2]]]))
        .collect();
    let j = half_turn();
    let gluing = |e: usize| {
        let g = d.edges[e];
        frames[g.from.vertex][g.from.slot]
            * j
            * translation(twists[e])
            * frames[g.to.vertex][g.to.slot].inverse()
    };

    // the a-curves are edges 0..g, the rest form a spanning tree
    let nv = d.vertices.len();
    let mut position: Vec<Option<UnitDetMatrix>> = vec![None; nv];
    position[nv / 2] = Some(UnitDetMatrix::identity());
    let mut pending: Vec<usize> = (genus..n).collect();
    while !pending.is_empty() {
        let before = pending.len();
        pending.retain(|&e| {
            let g = d.edges[e];
            match (position[g.from.vertex], position[g.to.vertex]) {
                (Some(m), None) => {
                    position[g.to.vertex] = Some(m * gluing(e));
                    false
                }
                (None, Some(m)) => {
                    position[g.from.vertex] = Some(m * gluing(e).inverse());
                    false
                }
                (Some(_), Some(_)) => false,
                (None, None) => true,
            }
        });
        debug_assert!(pending.len() < before, "chain tree is connected");
    }
    let position: Vec<UnitDetMatrix> = position.into_iter().map(|m| m.expect("placed")).collect();

    let mut gens = Vec::with_capacity(2 * genus);
    for e in 0..genus {
        let g = d.edges[e];
        let (v, w) = (g.from.vertex, g.to.vertex);
        let mv = position[v];
        let a = mv * port_holonomy(&frames[v][g.from.slot], lengths[slots[v][g.from.slot]]) * mv.inverse();
        let h = mv * gluing(e) * position[w].inverse();
        gens.push(a);
        gens.push(h.inverse());
    }
    Ok(gens)
}

/// Builds ρ at `p`.
pub fn build_rep(d: &PantsDecomposition, p: &ComplexFNPoint) -> Result<HolonomyRep, HolonomyError> {
    let presentation = surface::presentation(d)?;
    let (l, t) = p.to_dd();
    let generators = chain_generators(d.genus, &l, &t)?;
    Ok(HolonomyRep {
        generators,
        presentation,
        source: Some(p.clone()),
    })
}

/// Complex length of `ρ(word)`.
pub fn curve_complex_length(r: &HolonomyRep, word: &[Letter]) -> Result<ComplexLength, HolonomyError> {
    Ok(complex_length(&r.eval(word)?)?)
}

/// `min_± ‖ρ(R) ∓ I‖_F`.
pub fn relator_residual(r: &HolonomyRep) -> f64 {
    r.relator_residual()
}

/// `±2 cosh(λ/2)` residual of pants curve `j`, taking the better sign.
pub fn trace_length_defect(r: &HolonomyRep, j: usize) -> Result<f64, HolonomyError> {
    let Some(src) = &r.source else {
        return Ok(0.0);
    };
    let tr = c64(r.eval(&r.presentation.pants_curve_words[j])?.trace_dd());
    let expected = (src.lengths[j] * 0.5).cosh() * 2.0;
    Ok((tr - expected).norm().min((tr + expected).norm()))
}
