//! Verification suites behind `graftlab verify`.

use std::f64::consts::PI;
use std::sync::Arc;

use clap::ValueEnum;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use graftlab_core::diffgeo::{derivative_cocycle_over, Coordinate, FdScheme, TangentSpec};
use graftlab_core::goldman::{calibrate_kappa, pairing_report};
use graftlab_core::holonomy::{build_rep, ComplexFNPoint};
use graftlab_core::schlafli::{
    random_direction, random_tetrahedron, realize, verify_dual, verify_schlafli, volume_along_path,
    volume_by_integration, AngleConvention, TetrahedronAngles,
};
use graftlab_core::special::lobachevsky;
use graftlab_core::surface::{canonical_chain, PantsDecomposition};
use graftlab_core::symplectic::{
    product_rule_check, random_metric, twist_duality_check, verify_main_theorem, MainTheoremConfig,
    MultiCurveWeights, PullbackSample, QuadraticPath,
};

use crate::report::{ConstantEstimates, SampleRecord, VerificationReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    All,
    Wolpert,
    MainTheorem,
    Duality,
    ProductRule,
    Schlafli,
}

impl Suite {
    pub const INDIVIDUAL: [Suite; 5] = [
        Suite::Wolpert,
        Suite::MainTheorem,
        Suite::Duality,
        Suite::ProductRule,
        Suite::Schlafli,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::All => "all",
            Suite::Wolpert => "wolpert",
            Suite::MainTheorem => "main-theorem",
            Suite::Duality => "duality",
            Suite::ProductRule => "product-rule",
            Suite::Schlafli => "schlafli",
        }
    }

    /// Default tolerance; `all` compares each suite against its own, so its
    /// defects are ratios to 1.
    pub fn default_tol(self) -> f64 {
        match self {
            Suite::All => 1.0,
            Suite::Wolpert => 1e-4,
            Suite::MainTheorem => 1e-3,
            Suite::Duality => 1e-4,
            Suite::ProductRule => 1e-6,
            Suite::Schlafli => 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteParams {
    pub genus: usize,
    pub samples: usize,
    pub seed: u64,
    pub h: f64,
    pub tol: f64,
    pub angles: Option<TetrahedronAngles>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SuiteError {
    Usage(String),
    Failed(String),
}

/// Coboundary pairings are checked against this regardless of `--tol`.
const COBOUNDARY_TOL: f64 = 1e-7;
const ODE_TOL: f64 = 1e-8;
const IDEAL_TOL: f64 = 1e-4;
const ODE_STEPS: usize = 2000;

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn reals(v: &[Complex64]) -> Vec<f64> {
    v.iter().map(|z| z.re).collect()
}

fn point_json(p: &ComplexFNPoint) -> Value {
    if p.is_real() {
        json!({ "lengths": reals(&p.lengths), "twists": reals(&p.twists) })
    } else {
        let parts = |v: &[Complex64]| v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>();
        json!({ "lengths": parts(&p.lengths), "twists": parts(&p.twists) })
    }
}

fn complex_json(z: Complex64) -> Value {
    json!({ "re": z.re, "im": z.im })
}

fn chain(genus: usize) -> Result<PantsDecomposition, SuiteError> {
    canonical_chain(genus)
        .map(|(d, _)| d)
        .map_err(|e| SuiteError::Usage(e.to_string()))
}

pub fn run_suite(suite: Suite, p: &SuiteParams) -> Result<VerificationReport, SuiteError> {
    if p.genus < 2 {
        return Err(SuiteError::Usage(format!("genus must be at least 2, got {}", p.genus)));
    }
    if p.samples == 0 {
        return Err(SuiteError::Usage("--samples must be positive".into()));
    }
    if !(p.h > 0.0 && p.h.is_finite()) {
        return Err(SuiteError::Usage(format!("--fd-step must be positive, got {}", p.h)));
    }
    if !(p.tol >= 0.0) {
        return Err(SuiteError::Usage(format!("--tol must be nonnegative, got {}", p.tol)));
    }
    match suite {
        Suite::All => all(p),
        Suite::Wolpert => wolpert(p),
        Suite::MainTheorem => main_theorem(p),
        Suite::Duality => duality(p),
        Suite::ProductRule => product_rule(p),
        Suite::Schlafli => schlafli(p),
    }
}

fn all(p: &SuiteParams) -> Result<VerificationReport, SuiteError> {
    let mut records = Vec::new();
    let mut estimates = ConstantEstimates::default();
    for suite in Suite::INDIVIDUAL {
        let sub = SuiteParams {
            tol: suite.default_tol(),
            ..p.clone()
        };
        let r = run_suite(suite, &sub)?;
        estimates.kappa = estimates.kappa.or(r.summary.constant_estimates.kappa);
        estimates.pullback_ratio = estimates.pullback_ratio.or(r.summary.constant_estimates.pullback_ratio);
        for s in r.samples {
            let scale = s.tolerance;
            records.push(SampleRecord {
                label: format!("{}/{}", suite.name(), s.label),
                defect: if scale > 0.0 { s.defect / scale } else { s.defect },
                tolerance: if s.tolerance == sub.tol { p.tol } else { 1.0 },
                ..s
            });
        }
    }
    Ok(VerificationReport::assemble("all", p.genus, p.seed, p.h, p.tol, records, estimates))
}

fn wolpert(p: &SuiteParams) -> Result<VerificationReport, SuiteError> {
    let d = chain(p.genus)?;
    let n = 3 * p.genus - 3;
    let scheme = FdScheme::with_step(p.h);
    let reference = ComplexFNPoint::reference(p.genus);
    let base = calibrate_kappa(&d, &reference, scheme).map_err(|e| SuiteError::Failed(e.to_string()))?;
    let kappa = base.kappa;

    let mut records = vec![SampleRecord {
        ok: base.rank == 2 * n,
        ..SampleRecord::new(
            "reference",
            point_json(&reference),
            json!({
                "kappa": kappa,
                "kappa_imag": base.kappa_imag,
                "max_off_pattern": base.max_off_pattern,
                "diagonal_spread": base.diagonal_spread,
                "rank": base.rank,
            }),
            base.max_off_pattern
                .max(base.diagonal_spread)
                .max(base.kappa_imag.abs() / kappa.abs()),
            p.tol,
        )
    }];

    let coarse = FdScheme::with_step(10.0 * p.h);
    records.push(match calibrate_kappa(&d, &reference, coarse) {
        Ok(c) => SampleRecord::new(
            "step-stability",
            json!({ "h": [p.h, coarse.step] }),
            json!({ "kappa": [kappa, c.kappa] }),
            (c.kappa - kappa).abs() / kappa.abs(),
            p.tol,
        ),
        Err(e) => SampleRecord::failed("step-stability", Value::Null, e.to_string(), p.tol),
    });

    let points: Vec<SampleRecord> = (0..p.samples as u64)
        .into_par_iter()
        .map(|i| {
            let m = random_metric(&mut rng(p.seed, i), n, 0.5, 2.5, 1.0);
            match calibrate_kappa(&d, &m, scheme) {
                Ok(c) => SampleRecord {
                    ok: c.rank == 2 * n,
                    ..SampleRecord::new(
                        "point",
                        point_json(&m),
                        json!({
                            "kappa": c.kappa,
                            "kappa_imag": c.kappa_imag,
                            "max_off_pattern": c.max_off_pattern,
                            "diagonal_spread": c.diagonal_spread,
                            "rank": c.rank,
                        }),
                        ((c.kappa - kappa).abs() / kappa.abs())
                            .max(c.max_off_pattern)
                            .max(c.diagonal_spread),
                        p.tol,
                    )
                },
                Err(e) => SampleRecord::failed("point", point_json(&m), e.to_string(), p.tol),
            }
        })
        .collect();
    records.extend(points);

    let pairs: Vec<SampleRecord> = (0..p.samples as u64)
        .into_par_iter()
        .map(|i| coboundary_record(&d, p, i))
        .collect();
    records.extend(pairs);

    Ok(VerificationReport::assemble(
        "wolpert",
        p.genus,
        p.seed,
        p.h,
        p.tol,
        records,
        ConstantEstimates {
            kappa: Some(Complex64::new(kappa, base.kappa_imag).into()),
            pullback_ratio: None,
        },
    ))
}

/// Pairing of two random cocycles at a random bent point against the
/// coboundaries of `H, E, F`.
fn coboundary_record(d: &PantsDecomposition, p: &SuiteParams, i: u64) -> SampleRecord {
    let n = 3 * p.genus - 3;
    let mut r = rng(p.seed, 1 << 32 | i);
    let m = random_metric(&mut r, n, 0.5, 2.5, 1.0);
    let bend: Vec<f64> = (0..n).map(|_| r.gen_range(0.05..0.8)).collect();
    let point = ComplexFNPoint::new(
        m.lengths.clone(),
        m.twists.iter().zip(&bend).map(|(t, b)| t + Complex64::new(0.0, *b)).collect(),
    );
    let mut dir = || {
        let v: Vec<f64> = (0..3 * n).map(|_| r.gen_range(-1.0..1.0)).collect();
        TangentSpec::from_metric_and_weights(&v[..n], &v[n..2 * n], &v[2 * n..])
    };
    let (d1, d2) = (dir(), dir());
    let scheme = FdScheme::with_step(p.h);
    let result = build_rep(d, &point).map_err(|e| e.to_string()).and_then(|rep| {
        let rep = Arc::new(rep);
        let u = derivative_cocycle_over(rep.clone(), &point, &d1, scheme).map_err(|e| e.to_string())?;
        let v = derivative_cocycle_over(rep, &point, &d2, scheme).map_err(|e| e.to_string())?;
        pairing_report(&u, &v, p.h).map_err(|e| e.to_string())
    });
    match result {
        Ok(rep) => {
            let antisym = rep.antisymmetry_defect / rep.value.norm().max(1.0);
            SampleRecord {
                ok: rep.coboundary_defect <= COBOUNDARY_TOL && antisym <= 1e-10,
                ..SampleRecord::new(
                    "coboundary",
                    json!({ "point": point_json(&point) }),
                    json!({
                        "pairing": complex_json(rep.value),
                        "antisymmetry_defect": rep.antisymmetry_defect,
                    }),
                    rep.coboundary_defect,
                    COBOUNDARY_TOL,
                )
            }
        }
        Err(e) => SampleRecord::failed("coboundary", point_json(&point), e, COBOUNDARY_TOL),
    }
}

fn pullback_json(s: &PullbackSample) -> (Value, Value) {
    let inputs = json!({
        "lengths": reals(&s.base.metric.lengths),
        "twists": reals(&s.base.metric.twists),
        "weights": s.base.weights.weights,
        "zeta1": { "ell_dot": s.zeta1.ell_dot(), "tau_dot": s.zeta1.tau_dot(), "t_dot": s.zeta1.t_dot() },
        "zeta2": { "ell_dot": s.zeta2.ell_dot(), "tau_dot": s.zeta2.tau_dot(), "t_dot": s.zeta2.t_dot() },
    });
    let measured = json!({ "A": s.a, "B": s.b, "G": complex_json(s.g), "ratio": complex_json(s.ratio) });
    (inputs, measured)
}

fn main_theorem(p: &SuiteParams) -> Result<VerificationReport, SuiteError> {
    let r = verify_main_theorem(MainTheoremConfig {
        genus: p.genus,
        samples: p.samples,
        seed: p.seed,
        scheme: FdScheme::with_step(p.h),
        tol: p.tol,
    })
    .map_err(|e| SuiteError::Failed(e.to_string()))?;
    let k = Complex64::new(r.kappa, 0.0);
    let mut records = Vec::new();
    for s in &r.samples {
        let (inputs, measured) = pullback_json(s);
        let defect = (s.ratio - r.mean_ratio).norm() / r.mean_ratio.norm();
        records.push(SampleRecord::new("sample", inputs, measured, defect, p.tol));
    }
    for s in &r.control {
        let (inputs, measured) = pullback_json(s);
        let defect = (s.ratio - k).norm() / r.kappa.abs();
        records.push(SampleRecord::new("control", inputs, measured, defect, p.tol));
    }
    records.push(SampleRecord::new(
        "constant",
        json!({ "kappa": r.kappa }),
        json!({
            "mean_ratio": complex_json(r.mean_ratio),
            "ratio_over_kappa": complex_json(r.ratio_over_kappa),
            "max_relative_deviation": r.max_relative_deviation,
        }),
        r.kappa_mismatch,
        p.tol,
    ));
    Ok(VerificationReport::assemble(
        "main-theorem",
        p.genus,
        p.seed,
        p.h,
        p.tol,
        records,
        ConstantEstimates {
            kappa: Some(k.into()),
            pullback_ratio: Some(r.mean_ratio.into()),
        },
    ))
}

fn duality(p: &SuiteParams) -> Result<VerificationReport, SuiteError> {
    let d = chain(p.genus)?;
    let n = 3 * p.genus - 3;
    let scheme = FdScheme::with_step(p.h);
    let points: Vec<ComplexFNPoint> = std::iter::once(ComplexFNPoint::reference(p.genus))
        .chain((0..p.samples as u64).map(|i| random_metric(&mut rng(p.seed, i), n, 0.5, 2.5, 1.0)))
        .collect();
    let reports: Vec<_> = points
        .par_iter()
        .map(|m| twist_duality_check(&d, m, scheme, p.tol))
        .collect();
    let mut records = Vec::new();
    let mut signs = Vec::new();
    let mut kappa = None;
    for (m, r) in points.iter().zip(reports) {
        match r {
            Ok(r) => {
                signs.push(r.epsilon);
                kappa.get_or_insert(r.kappa);
                let worst = r
                    .entries
                    .iter()
                    .max_by(|a, b| a.relative_error.total_cmp(&b.relative_error))
                    .expect("nonempty");
                let label = |c: Coordinate| match c {
                    Coordinate::Length(j) => format!("length {j}"),
                    Coordinate::Twist(j) => format!("twist {j}"),
                };
                records.push(SampleRecord::new(
                    "point",
                    point_json(m),
                    json!({
                        "epsilon": r.epsilon,
                        "kappa": r.kappa,
                        "diagonal": (0..n)
                            .map(|j| complex_json(r.entries[j * 2 * n + j].value))
                            .collect::<Vec<_>>(),
                        "worst_entry": { "curve": worst.curve, "direction": label(worst.direction) },
                    }),
                    r.max_relative_error,
                    p.tol,
                ));
            }
            Err(e) => records.push(SampleRecord::failed("point", point_json(m), e.to_string(), p.tol)),
        }
    }
    let consistent = signs.windows(2).all(|w| w[0] == w[1]);
    records.push(SampleRecord {
        ok: consistent && !signs.is_empty(),
        ..SampleRecord::new(
            "sign",
            Value::Null,
            json!({ "epsilon": signs.first(), "consistent": consistent }),
            0.0,
            p.tol,
        )
    });
    Ok(VerificationReport::assemble(
        "duality",
        p.genus,
        p.seed,
        p.h,
        p.tol,
        records,
        ConstantEstimates {
            kappa: kappa.map(|k| Complex64::new(k, 0.0).into()),
            pullback_ratio: None,
        },
    ))
}

/// Path `i`: 0 keeps the weights fixed, 1 keeps the metric fixed, later
/// ones move both.
fn random_path(genus: usize, seed: u64, i: u64) -> QuadraticPath {
    let n = 3 * genus - 3;
    let mut r = rng(seed, i);
    let metric = random_metric(&mut r, n, 0.5, 2.5, 1.0);
    let mut v = |lo: f64, hi: f64| -> Vec<f64> { (0..n).map(|_| r.gen_range(lo..hi)).collect() };
    let weights = MultiCurveWeights::new(v(0.0, 1.0));
    let (lv, tv, la, ta) = (v(-1.0, 1.0), v(-1.0, 1.0), v(-0.5, 0.5), v(-0.5, 0.5));
    let (wv, wa) = (v(-1.0, 1.0), v(-0.5, 0.5));
    let zero = vec![0.0; n];
    let mut path = QuadraticPath {
        metric,
        weights,
        metric_velocity: TangentSpec::from_metric_and_weights(&lv, &tv, &zero),
        metric_acceleration: TangentSpec::from_metric_and_weights(&la, &ta, &zero),
        weight_velocity: wv,
        weight_acceleration: wa,
    };
    match i {
        0 => {
            path.weight_velocity = zero.clone();
            path.weight_acceleration = zero;
        }
        1 => {
            path.metric_velocity = TangentSpec::zero(n);
            path.metric_acceleration = TangentSpec::zero(n);
        }
        _ => {}
    }
    path
}

fn product_rule(p: &SuiteParams) -> Result<VerificationReport, SuiteError> {
    let d = chain(p.genus)?;
    let scheme = FdScheme::with_step(p.h);
    let count = p.samples.max(2) as u64;
    let records: Vec<SampleRecord> = (0..count)
        .into_par_iter()
        .map(|i| {
            let path = random_path(p.genus, p.seed, i);
            let label = match i {
                0 => "constant-weights",
                1 => "constant-metric",
                _ => "path",
            };
            let inputs = json!({
                "lengths": reals(&path.metric.lengths),
                "twists": reals(&path.metric.twists),
                "weights": path.weights.weights,
                "weight_velocity": path.weight_velocity,
                "metric_velocity": {
                    "ell_dot": path.metric_velocity.ell_dot(),
                    "tau_dot": path.metric_velocity.tau_dot(),
                },
            });
            match product_rule_check(&d, &path, scheme, p.tol) {
                Ok(r) => SampleRecord::new(
                    label,
                    inputs,
                    json!({ "total": r.total, "metric_term": r.metric_term, "weight_term": r.weight_term }),
                    r.relative_defect,
                    p.tol,
                ),
                Err(e) => SampleRecord::failed(label, inputs, e.to_string(), p.tol),
            }
        })
        .collect();
    Ok(VerificationReport::assemble(
        "product-rule",
        p.genus,
        p.seed,
        p.h,
        p.tol,
        records,
        ConstantEstimates::default(),
    ))
}

fn schlafli(p: &SuiteParams) -> Result<VerificationReport, SuiteError> {
    if let Some(a) = &p.angles {
        realize(a).map_err(|e| SuiteError::Usage(e.to_string()))?;
    }
    let mut records: Vec<SampleRecord> = (0..p.samples as u64)
        .into_par_iter()
        .flat_map_iter(|i| {
            let mut r = rng(p.seed, i);
            let a = p.angles.unwrap_or_else(|| random_tetrahedron(&mut r, 1e-3));
            let dir = random_direction(&mut r);
            let inputs = json!({ "angles": a.theta, "direction": dir });
            let s = match verify_schlafli(&a, &dir, p.h, p.tol, AngleConvention::Exterior) {
                Ok(s) => SampleRecord::new(
                    "schlafli",
                    inputs.clone(),
                    json!({ "dV": s.lhs, "half_sum_L_dtheta": s.rhs }),
                    s.relative_defect,
                    p.tol,
                ),
                Err(e) => SampleRecord::failed("schlafli", inputs.clone(), e.to_string(), p.tol),
            };
            let dual = verify_dual(&a, &dir, p.h, p.tol, AngleConvention::Exterior);
            let (d, l) = match dual {
                Ok(d) => (
                    SampleRecord::new(
                        "dual",
                        inputs.clone(),
                        json!({ "dV_dual": d.lhs, "minus_half_sum_theta_dL": d.rhs }),
                        d.relative_defect,
                        p.tol,
                    ),
                    SampleRecord::new("leibniz", inputs, Value::Null, d.leibniz_defect, ODE_TOL),
                ),
                Err(e) => (
                    SampleRecord::failed("dual", inputs.clone(), e.to_string(), p.tol),
                    SampleRecord::failed("leibniz", inputs, e.to_string(), ODE_TOL),
                ),
            };
            [s, d, l]
        })
        .collect();

    let regular = TetrahedronAngles::regular(1.1).expect("in range");
    records.push(
        match (realize(&regular), volume_by_integration(&regular, ODE_STEPS)) {
            (Ok(g), Ok(v)) => SampleRecord::new(
                "regular-oracle",
                json!({ "angle": 1.1, "steps": ODE_STEPS }),
                json!({ "closed_form": g.volume, "integrated": v }),
                (g.volume - v).abs(),
                ODE_TOL,
            ),
            (Err(e), _) | (_, Err(e)) => SampleRecord::failed("regular-oracle", Value::Null, e.to_string(), ODE_TOL),
        },
    );

    let ideal = TetrahedronAngles::regular(PI / 3.0 + 1e-6).expect("in range");
    let exact = 3.0 * lobachevsky(PI / 3.0);
    records.push(match volume_by_integration(&ideal, 2 * ODE_STEPS) {
        Ok(v) => SampleRecord::new(
            "ideal-limit",
            json!({ "angle": ideal.theta[0], "steps": 2 * ODE_STEPS }),
            json!({ "integrated": v, "three_lobachevsky_pi_3": exact }),
            (v - exact).abs(),
            IDEAL_TOL,
        ),
        Err(e) => SampleRecord::failed("ideal-limit", Value::Null, e.to_string(), IDEAL_TOL),
    });

    let (e0, e3) = ([0.05, 0.0, 0.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 0.05, 0.0, 0.0]);
    let corners = [
        regular,
        regular.displaced(&e0, 1.0),
        regular.displaced(&e0, 1.0).displaced(&e3, 1.0),
        regular.displaced(&e3, 1.0),
        regular,
    ];
    records.push(match volume_along_path(&corners, 200) {
        Ok(v) => SampleRecord::new(
            "closed-loop",
            json!({ "corners": corners.iter().map(|c| c.theta).collect::<Vec<_>>() }),
            json!({ "loop_integral": v }),
            v.abs(),
            ODE_TOL,
        ),
        Err(e) => SampleRecord::failed("closed-loop", Value::Null, e.to_string(), ODE_TOL),
    });

    Ok(VerificationReport::assemble(
        "schlafli",
        p.genus,
        p.seed,
        p.h,
        p.tol,
        records,
        ConstantEstimates::default(),
    ))
}
