//! Acceptance run: one line per criterion, nonzero exit if any fails.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use graftlab_core::diffgeo::{coboundary, derivative_cocycle_over, Coordinate, FdScheme, TangentSpec};
use graftlab_core::goldman::{calibrate_kappa, goldman_pair, pairing_scale};
use graftlab_core::holonomy::{build_rep, ComplexFNPoint};
use graftlab_core::moebius::TraceFreeMatrix;
use graftlab_core::schlafli::{
    random_direction, random_tetrahedron, realize, verify_dual, verify_schlafli, volume_by_integration,
    AngleConvention, TetrahedronAngles,
};
use graftlab_core::surface::{canonical_chain, PantsDecomposition};
use graftlab_core::symplectic::{
    product_rule_check, twist_duality_check, verify_main_theorem, MainTheoremConfig, MultiCurveWeights,
    QuadraticPath,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn rng(stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(20260);
    r.set_stream(stream);
    r
}

fn chain(genus: usize) -> PantsDecomposition {
    canonical_chain(genus).expect("genus ≥ 2").0
}

fn uniform(r: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| r.gen_range(lo..hi)).collect()
}

fn real_point(r: &mut ChaCha8Rng, n: usize) -> ComplexFNPoint {
    ComplexFNPoint::real(&uniform(r, n, 0.3, 3.0), &uniform(r, n, -2.0, 2.0))
}

fn bent_point(r: &mut ChaCha8Rng, n: usize) -> ComplexFNPoint {
    let m = real_point(r, n);
    let t = uniform(r, n, 0.05, 1.0);
    ComplexFNPoint::new(
        m.lengths,
        m.twists.iter().zip(t).map(|(x, s)| x + Complex64::new(0.0, s)).collect(),
    )
}

fn random_direction_fn(r: &mut ChaCha8Rng, n: usize) -> TangentSpec {
    let v = uniform(r, 3 * n, -1.0, 1.0);
    TangentSpec::from_metric_and_weights(&v[..n], &v[n..2 * n], &v[2 * n..])
}

fn holonomy_contracts() -> Outcome {
    let mut worst = [0.0f64; 3];
    let mut count = 0;
    for (genus, real, bent) in [(2, 100, 100), (3, 10, 10)] {
        let d = chain(genus);
        let n = 3 * genus - 3;
        let mut r = rng(genus as u64);
        for k in 0..real + bent {
            let p = if k < real { real_point(&mut r, n) } else { bent_point(&mut r, n) };
            let rep = build_rep(&d, &p).expect("valid point");
            worst[0] = worst[0].max(rep.relator_residual());
            for (j, word) in rep.presentation.pants_curve_words.iter().enumerate() {
                let tr = rep.eval(word).expect("word").trace();
                let expected = 2.0 * (p.lengths[j] / 2.0).cosh();
                worst[1] = worst[1].max((tr - expected).norm().min((tr + expected).norm()));
            }
            if p.is_real() {
                worst[2] = worst[2].max(rep.reality_defect());
            }
            count += 1;
        }
    }
    Outcome {
        pass: worst.iter().all(|&w| w <= 1e-9),
        detail: format!(
            "{count} points: relator {:.1e}, trace-length {:.1e}, reality {:.1e} (≤ 1e-9)",
            worst[0], worst[1], worst[2]
        ),
    }
}

fn wolpert_calibration() -> Outcome {
    let d = chain(2);
    let scheme = FdScheme::default();
    let mut r = rng(10);
    let mut kappas = Vec::new();
    let mut off: f64 = 0.0;
    for k in 0..10 {
        let p = if k == 0 {
            ComplexFNPoint::reference(2)
        } else {
            ComplexFNPoint::real(&uniform(&mut r, 3, 0.5, 2.5), &uniform(&mut r, 3, -1.0, 1.0))
        };
        match calibrate_kappa(&d, &p, scheme) {
            Ok(c) => {
                off = off.max(c.max_off_pattern);
                kappas.push(c.kappa);
            }
            Err(e) => {
                return Outcome {
                    pass: false,
                    detail: format!("point {k}: {e}"),
                }
            }
        }
    }
    let k0 = kappas[0];
    let spread = kappas.iter().map(|k| (k - k0).abs() / k0.abs()).fold(0.0, f64::max);
    Outcome {
        pass: off <= 1e-3 && spread <= 1e-4,
        detail: format!("kappa {k0:.12}, off-pattern {off:.1e}·|kappa| (≤ 1e-3), spread {spread:.1e} (≤ 1e-4)"),
    }
}

fn coboundary_degeneracy() -> Outcome {
    let d = chain(2);
    let scheme = FdScheme::default();
    let mut r = rng(20);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let p = bent_point(&mut r, 3);
        let base = Arc::new(build_rep(&d, &p).expect("valid point"));
        let u = derivative_cocycle_over(base.clone(), &p, &random_direction_fn(&mut r, 3), scheme).expect("cocycle");
        let c = |r: &mut ChaCha8Rng| Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0));
        let xi = TraceFreeMatrix::from_parts(c(&mut r), c(&mut r), c(&mut r));
        let dx = coboundary(base, &xi);
        let value = goldman_pair(&u, &dx).expect("same base");
        worst = worst.max(value.norm() / pairing_scale(&u, &dx));
    }
    Outcome {
        pass: worst <= 1e-7,
        detail: format!("20 pairs: max |w(u, dxi)|/scale {worst:.1e} (≤ 1e-7)"),
    }
}

fn main_theorem() -> Outcome {
    let mut lines = Vec::new();
    let mut pass = true;
    for (genus, samples) in [(2, 20), (3, 10)] {
        let cfg = MainTheoremConfig {
            genus,
            samples,
            seed: 0,
            scheme: FdScheme::default(),
            tol: 1e-3,
        };
        match verify_main_theorem(cfg) {
            Ok(rep) => {
                pass &= rep.pass;
                lines.push(format!(
                    "genus {genus} ({samples}): G/(A+iB) = {:.10}{:+.1e}i, /kappa = {:.10}, spread {:.1e}, control {:.1e}",
                    rep.mean_ratio.re,
                    rep.mean_ratio.im,
                    rep.ratio_over_kappa.re,
                    rep.max_relative_deviation,
                    rep.control_deviation
                ));
            }
            Err(e) => {
                pass = false;
                lines.push(format!("genus {genus}: {e}"));
            }
        }
    }
    Outcome {
        pass,
        detail: lines.join("; "),
    }
}

fn complex_linearity() -> Outcome {
    let d = chain(2);
    let scheme = FdScheme::default();
    let mut r = rng(50);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let p = bent_point(&mut r, 3);
        let base = Arc::new(build_rep(&d, &p).expect("valid point"));
        for c in Coordinate::all(3) {
            let dir = TangentSpec::coordinate(3, c);
            let u = derivative_cocycle_over(base.clone(), &p, &dir, scheme).expect("cocycle");
            let ui = derivative_cocycle_over(base.clone(), &p, &dir.times_i(), scheme).expect("cocycle");
            let defect = ui.distance(&u.scale(Complex64::i())) / u.scale_norm().max(1.0);
            worst = worst.max(defect);
        }
    }
    Outcome {
        pass: worst <= 1e-6,
        detail: format!("10 bent points x 6 directions: max |u(i v) - i u(v)| {worst:.1e} (≤ 1e-6)"),
    }
}

fn product_rule() -> Outcome {
    let d = chain(2);
    let mut r = rng(60);
    let mut worst: f64 = 0.0;
    for k in 0..10 {
        let zero = vec![0.0; 3];
        let metric = ComplexFNPoint::real(&uniform(&mut r, 3, 0.5, 2.5), &uniform(&mut r, 3, -1.0, 1.0));
        let mv = TangentSpec::from_metric_and_weights(&uniform(&mut r, 3, -1.0, 1.0), &uniform(&mut r, 3, -1.0, 1.0), &zero);
        let ma = TangentSpec::from_metric_and_weights(&uniform(&mut r, 3, -0.5, 0.5), &uniform(&mut r, 3, -0.5, 0.5), &zero);
        let mut path = QuadraticPath {
            metric,
            weights: MultiCurveWeights::new(uniform(&mut r, 3, 0.0, 1.0)),
            metric_velocity: mv,
            metric_acceleration: ma,
            weight_velocity: uniform(&mut r, 3, -1.0, 1.0),
            weight_acceleration: uniform(&mut r, 3, -0.5, 0.5),
        };
        if k == 0 {
            path.weight_velocity = zero.clone();
            path.weight_acceleration = zero.clone();
        }
        if k == 1 {
            path.metric_velocity = TangentSpec::zero(3);
            path.metric_acceleration = TangentSpec::zero(3);
        }
        let rep = product_rule_check(&d, &path, FdScheme::default(), 1e-6).expect("path");
        worst = worst.max(rep.relative_defect);
    }
    Outcome {
        pass: worst <= 1e-6,
        detail: format!("10 paths (2 degenerate): max relative defect {worst:.1e} (≤ 1e-6)"),
    }
}

fn schlafli_suite() -> Outcome {
    let mut r = rng(70);
    let mut fd: f64 = 0.0;
    for _ in 0..10 {
        let a = random_tetrahedron(&mut r, 1e-3);
        let dir = random_direction(&mut r);
        let s = verify_schlafli(&a, &dir, 1e-5, 1e-6, AngleConvention::Exterior).expect("realizable");
        let du = verify_dual(&a, &dir, 1e-5, 1e-6, AngleConvention::Exterior).expect("realizable");
        fd = fd.max(s.relative_defect).max(du.relative_defect);
    }
    let mut oracle: f64 = 0.0;
    for theta in [1.06, 1.1, 1.15, 1.2, 1.22] {
        let a = TetrahedronAngles::regular(theta).expect("in range");
        let closed = realize(&a).expect("compact").volume;
        let integrated = volume_by_integration(&a, 2000).expect("path in cone");
        oracle = oracle.max((closed - integrated).abs());
    }
    // Л(π/3) = ½ Σ sin(2nπ/3)/n², summed independently of the library
    let lob: f64 = 0.5
        * (1..2_000_000)
            .map(|n| {
                let n = n as f64;
                (2.0 * n * PI / 3.0).sin() / (n * n)
            })
            .sum::<f64>();
    let ideal = TetrahedronAngles::regular(PI / 3.0 + 1e-6).expect("in range");
    let v = volume_by_integration(&ideal, 4000).expect("path in cone");
    let ideal_gap = (v - 3.0 * lob).abs();
    Outcome {
        pass: fd <= 1e-6 && oracle <= 1e-8 && ideal_gap <= 1e-4,
        detail: format!(
            "FD {fd:.1e} (≤ 1e-6), closed vs ODE {oracle:.1e} (≤ 1e-8), ideal {v:.7} vs 3L(pi/3) {:.7}: {ideal_gap:.1e} (≤ 1e-4)",
            3.0 * lob
        ),
    }
}

fn twist_duality() -> Outcome {
    let scheme = FdScheme::default();
    let mut worst: f64 = 0.0;
    let mut signs = Vec::new();
    for genus in [2, 3] {
        let d = chain(genus);
        let n = 3 * genus - 3;
        let mut r = rng(80 + genus as u64);
        for k in 0..6 {
            let p = if k == 0 {
                ComplexFNPoint::reference(genus)
            } else {
                ComplexFNPoint::real(&uniform(&mut r, n, 0.5, 2.5), &uniform(&mut r, n, -1.0, 1.0))
            };
            let rep = twist_duality_check(&d, &p, scheme, 1e-4).expect("real point");
            worst = worst.max(rep.max_relative_error);
            signs.push(rep.epsilon);
        }
    }
    let one_sign = signs.windows(2).all(|w| w[0] == w[1]);
    Outcome {
        pass: worst <= 1e-4 && one_sign,
        detail: format!(
            "12 points (genus 2, 3): epsilon {} on all: {one_sign}, max relative error {worst:.1e} (≤ 1e-4)",
            signs[0]
        ),
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Duration); 8] = [
        ("holonomy contracts", holonomy_contracts, Duration::from_secs(10)),
        ("Wolpert/Goldman calibration", wolpert_calibration, Duration::from_secs(30)),
        ("coboundary degeneracy", coboundary_degeneracy, Duration::MAX),
        ("main theorem", main_theorem, Duration::from_secs(120)),
        ("complex linearity", complex_linearity, Duration::MAX),
        ("product rule", product_rule, Duration::MAX),
        ("Schläfli suite", schlafli_suite, Duration::from_secs(30)),
        ("twist-length duality", twist_duality, Duration::MAX),
    ];
    let mut failures = 0;
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= *limit;
        let pass = out.pass && in_time;
        if !pass {
            failures += 1;
        }
        let budget = if *limit == Duration::MAX {
            String::new()
        } else {
            format!(" / {} s", limit.as_secs())
        };
        println!(
            "[{}] {}. {name}: {} [{:.2} s{budget}]",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            out.detail,
            elapsed.as_secs_f64()
        );
    }
    println!("acceptance: {} of 8 criteria passed", 8 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
