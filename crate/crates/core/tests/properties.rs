//! Property tests over random points, directions and tetrahedra.

use std::sync::Arc;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use graftlab_core::diffgeo::{coboundary, derivative_cocycle_over, FdScheme, GroupCocycle, TangentSpec};
use graftlab_core::goldman::{goldman_pair, pairing_scale};
use graftlab_core::holonomy::{build_rep, ComplexFNPoint, HolonomyRep};
use graftlab_core::moebius::{adjoint, trace_form, TraceFreeMatrix, UnitDetMatrix};
use graftlab_core::schlafli::{
    edge_index, random_tetrahedron, realize, verify_dual, verify_schlafli, AngleConvention, TetrahedronAngles,
    EDGES,
};
use graftlab_core::special::li2;
use graftlab_core::surface::{canonical_chain, canonical_genus2, validate, PantsDecomposition};
use graftlab_core::symplectic::{
    delta_covector, graft, liouville_check, multicurve_length, omega_h, pullback_sample, BasePoint,
    MultiCurveWeights,
};

fn c() -> impl Strategy<Value = Complex64> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b)| Complex64::new(a, b))
}

fn sl2() -> impl Strategy<Value = UnitDetMatrix> {
    (c(), c(), c(), c())
        .prop_filter("nonsingular", |(a, b, c, d)| (a * d - b * c).norm() > 0.1)
        .prop_map(|(a, b, c, d)| UnitDetMatrix::new(a, b, c, d).unwrap())
}

fn sl2_algebra() -> impl Strategy<Value = TraceFreeMatrix> {
    (c(), c(), c()).prop_map(|(a, b, c)| TraceFreeMatrix::from_parts(a, b, c))
}

fn real_point() -> impl Strategy<Value = ComplexFNPoint> {
    (prop::collection::vec(0.3..3.0f64, 3), prop::collection::vec(-2.0..2.0f64, 3))
        .prop_map(|(l, t)| ComplexFNPoint::real(&l, &t))
}

fn complex_point() -> impl Strategy<Value = ComplexFNPoint> {
    (
        real_point(),
        prop::collection::vec(-0.5..0.5f64, 3),
        prop::collection::vec(-0.5..0.5f64, 3),
    )
        .prop_map(|(p, a, b)| {
            ComplexFNPoint::new(
                p.lengths.iter().zip(a).map(|(x, y)| x + Complex64::new(0.0, y)).collect(),
                p.twists.iter().zip(b).map(|(x, y)| x + Complex64::new(0.0, y)).collect(),
            )
        })
}

fn direction() -> impl Strategy<Value = TangentSpec> {
    prop::collection::vec(-1.0..1.0f64, 9)
        .prop_map(|v| TangentSpec::from_metric_and_weights(&v[..3], &v[3..6], &v[6..]))
}

fn weights() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05..0.8f64, 3)
}

fn d2() -> PantsDecomposition {
    canonical_genus2().0
}

fn cocycles(p: &ComplexFNPoint, dirs: &[&TangentSpec]) -> (Arc<HolonomyRep>, Vec<GroupCocycle>) {
    let base = Arc::new(build_rep(&d2(), p).unwrap());
    let us = dirs
        .iter()
        .map(|d| derivative_cocycle_over(base.clone(), p, d, FdScheme::default()).unwrap())
        .collect();
    (base, us)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn products_stay_unimodular(x in sl2(), y in sl2()) {
        prop_assert!((x.det() - 1.0).norm() <= 1e-12);
        prop_assert!(((x * y).det() - 1.0).norm() <= 1e-12);
        prop_assert!((x * x.inverse()).distance(&UnitDetMatrix::identity()) <= 1e-12 * x.max_entry().powi(2));
    }

    #[test]
    fn trace_form_is_ad_invariant(g in sl2(), x in sl2_algebra(), y in sl2_algebra()) {
        let before = trace_form(&x, &y);
        let after = trace_form(&adjoint(&g, &x), &adjoint(&g, &y));
        prop_assert!((before - after).norm() <= 1e-11 * g.max_entry().powi(4).max(1.0));
    }

    #[test]
    fn relator_and_reality_on_real_points(p in real_point()) {
        let r = build_rep(&d2(), &p).unwrap();
        prop_assert!(r.relator_residual() <= 1e-9);
        prop_assert!(r.reality_defect() <= 1e-9);
    }

    #[test]
    fn relator_and_trace_length_on_complex_points(p in complex_point()) {
        let r = build_rep(&d2(), &p).unwrap();
        prop_assert!(r.relator_residual() <= 1e-9);
        for (j, w) in r.presentation.pants_curve_words.iter().enumerate() {
            let tr = r.eval(w).unwrap().trace();
            let expected = 2.0 * (p.lengths[j] / 2.0).cosh();
            prop_assert!((tr - expected).norm().min((tr + expected).norm()) <= 1e-9);
        }
    }

    #[test]
    fn pants_traces_ignore_other_coordinates(p in real_point(), k in 0usize..3, j in 0usize..3, twist in any::<bool>()) {
        let d = d2();
        let mut q = p.clone();
        if twist {
            q.twists[k] += 0.37;
        } else if k != j {
            q.lengths[k] += 0.37;
        }
        let tr = |x: &ComplexFNPoint| {
            let r = build_rep(&d, x).unwrap();
            r.eval(&r.presentation.pants_curve_words[j]).unwrap().trace()
        };
        prop_assert!((tr(&p).norm() - tr(&q).norm()).abs() <= 1e-9);
    }

    #[test]
    fn derivative_cocycles_satisfy_the_relator(p in complex_point(), dir in direction()) {
        let (_, us) = cocycles(&p, &[&dir]);
        prop_assert!(us[0].relator_residual() <= 1e-7 * us[0].scale_norm().max(1.0));
    }

    #[test]
    fn pairing_is_antisymmetric_and_kills_coboundaries(
        p in complex_point(), d1 in direction(), d2 in direction(), xi in sl2_algebra()
    ) {
        let (base, us) = cocycles(&p, &[&d1, &d2]);
        let (u, v) = (&us[0], &us[1]);
        let w = goldman_pair(u, v).unwrap();
        prop_assert!((w + goldman_pair(v, u).unwrap()).norm() <= 1e-10 * w.norm().max(1.0));
        let dx = coboundary(base, &xi);
        prop_assert!(goldman_pair(u, &dx).unwrap().norm() <= 1e-7 * pairing_scale(u, &dx));
    }

    #[test]
    fn pairing_is_complex_bilinear(p in complex_point(), d1 in direction(), d2 in direction(), d3 in direction(), a in c(), b in c()) {
        let (_, us) = cocycles(&p, &[&d1, &d2, &d3]);
        let combo = GroupCocycle::linear_combination(&[(a, &us[0]), (b, &us[1])]).unwrap();
        let lhs = goldman_pair(&combo, &us[2]).unwrap();
        let rhs = a * goldman_pair(&us[0], &us[2]).unwrap() + b * goldman_pair(&us[1], &us[2]).unwrap();
        let scale = pairing_scale(&combo, &us[2]);
        prop_assert!((lhs - rhs).norm() <= 1e-10 * scale);
    }

    #[test]
    fn lengths_and_delta_are_linear_in_weights(p in real_point(), t in weights(), s in weights(), k in -2.0..2.0f64) {
        let d = d2();
        let sum: Vec<f64> = t.iter().zip(&s).map(|(x, y)| x + y).collect();
        let l = |w: &[f64]| multicurve_length(&d, &p, &MultiCurveWeights::new(w.to_vec())).unwrap();
        prop_assert!((l(&sum) - l(&t) - l(&s)).abs() <= 1e-12 * l(&sum).abs().max(1.0));
        let scaled: Vec<f64> = t.iter().map(|x| k * x).collect();
        let a = delta_covector(&d, &p, &MultiCurveWeights::new(t.clone()), FdScheme::default()).unwrap();
        let b = delta_covector(&d, &p, &MultiCurveWeights::new(scaled), FdScheme::default()).unwrap();
        for (x, y) in a.components.iter().zip(&b.components) {
            prop_assert!((k * x - y).abs() <= 1e-10);
        }
    }

    #[test]
    fn omega_h_is_antisymmetric_and_bilinear(p in real_point(), z1 in direction(), z2 in direction(), z3 in direction(), k in -2.0..2.0f64) {
        let d = d2();
        let s = FdScheme::default();
        let w = |a: &TangentSpec, b: &TangentSpec| omega_h(&d, &p, a, b, s).unwrap();
        prop_assert_eq!(w(&z1, &z2), -w(&z2, &z1));
        let combo = z1.scale(Complex64::new(k, 0.0)).plus(&z3);
        prop_assert!((w(&combo, &z2) - k * w(&z1, &z2) - w(&z3, &z2)).abs() <= 1e-8);
    }

    #[test]
    fn pullback_ratio_is_kappa_and_swap_invariant(p in real_point(), t in weights(), z1 in direction(), z2 in direction()) {
        let d = d2();
        let base = BasePoint { metric: p, weights: MultiCurveWeights::new(t) };
        let s = FdScheme::default();
        if let (Ok(a), Ok(b)) = (pullback_sample(&d, &base, &z1, &z2, s), pullback_sample(&d, &base, &z2, &z1, s)) {
            prop_assert!((a.ratio - 0.5).norm() <= 1e-4 * 0.5);
            prop_assert!((a.g + b.g).norm() <= 1e-10 * a.g.norm().max(1.0));
            prop_assert_eq!(a.a, -b.a);
            prop_assert_eq!(a.b, -b.b);
        }
    }

    #[test]
    fn grafting_fixes_the_bent_curve(p in real_point(), j in 0usize..3, t in 0.05..3.0f64) {
        let d = d2();
        let mut w = vec![0.0; 3];
        w[j] = t;
        let (_, fuchsian) = graft(&d, &p, &MultiCurveWeights::zero(3)).unwrap();
        let (_, bent) = graft(&d, &p, &MultiCurveWeights::new(w)).unwrap();
        let word = &fuchsian.presentation.pants_curve_words[j];
        let (x, y) = (fuchsian.eval(word).unwrap().trace(), bent.eval(word).unwrap().trace());
        prop_assert!((x - y).norm() <= 1e-9);
    }

    #[test]
    fn liouville_form_differentiates_to_minus_omega_h(p in real_point(), t in weights(), z1 in direction(), z2 in direction()) {
        let base = BasePoint { metric: p, weights: MultiCurveWeights::new(t) };
        let r = liouville_check(&d2(), &base, &z1, &z2, 0.05, FdScheme::default()).unwrap();
        prop_assert!(r.defect <= 1e-5);
    }

    #[test]
    fn dilogarithm_reflection(re in -3.0..3.0f64, im in -3.0..3.0f64) {
        let z = Complex64::new(re, im);
        prop_assume!(im.abs() > 1e-3);
        let one = Complex64::new(1.0, 0.0);
        let lhs = li2(z) + li2(one - z);
        let rhs = std::f64::consts::PI.powi(2) / 6.0 - z.ln() * (one - z).ln();
        prop_assert!((lhs - rhs).norm() <= 1e-12);
    }
}

fn tetrahedron() -> impl Strategy<Value = TetrahedronAngles> {
    any::<u64>().prop_map(|seed| random_tetrahedron(&mut ChaCha8Rng::seed_from_u64(seed), 1e-3))
}

fn permutation() -> impl Strategy<Value = [usize; 4]> {
    Just([0usize, 1, 2, 3]).prop_shuffle().prop_map(|v| [v[0], v[1], v[2], v[3]])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn relabeling_preserves_geometry_exactly(a in tetrahedron(), perm in permutation()) {
        let g = realize(&a).unwrap();
        let h = realize(&a.relabel(perm)).unwrap();
        prop_assert_eq!(g.volume, h.volume);
        let sorted = |x: [f64; 6]| { let mut v = x.to_vec(); v.sort_by(f64::total_cmp); v };
        prop_assert_eq!(sorted(g.lengths), sorted(h.lengths));
        for (e, &(i, j)) in EDGES.iter().enumerate() {
            let f = edge_index(perm[i], perm[j]);
            prop_assert_eq!(g.lengths[e], h.lengths[f]);
        }
    }

    #[test]
    fn schlafli_and_dual_hold(a in tetrahedron(), dir in prop::array::uniform6(-1.0..1.0f64)) {
        let s = verify_schlafli(&a, &dir, 1e-5, 1e-6, AngleConvention::Exterior).unwrap();
        prop_assert!(s.pass, "{:?}", s);
        let d = verify_dual(&a, &dir, 1e-5, 1e-6, AngleConvention::Exterior).unwrap();
        prop_assert!(d.pass, "{:?}", d);
        prop_assert!(d.leibniz_defect <= 1e-8);
    }

    #[test]
    fn convention_flip_negates_both_sides(a in tetrahedron(), dir in prop::array::uniform6(-1.0..1.0f64)) {
        let x = verify_schlafli(&a, &dir, 1e-5, 1e-6, AngleConvention::Exterior).unwrap();
        let y = verify_schlafli(&a, &dir, 1e-5, 1e-6, AngleConvention::Interior).unwrap();
        prop_assert_eq!(x.lhs, -y.lhs);
        prop_assert_eq!(x.rhs, -y.rhs);
        prop_assert_eq!(x.relative_defect, y.relative_defect);
    }
}

#[test]
fn chain_decompositions_validate() {
    for genus in 2..7 {
        let (d, pres) = canonical_chain(genus).unwrap();
        assert!(validate(&d).is_ok());
        assert_eq!(pres.pants_curve_words.len(), 3 * genus - 3);
        assert_eq!(PantsDecomposition::from_json(&d.to_json()).unwrap(), d);
    }
}
