use std::f64::consts::FRAC_1_SQRT_2;

use feasibility::driver::iterate;
use feasibility::linalg::{inner, norm, orthonormalize, project_onto_span, AffineFrame, Point};
use feasibility::operators::{dr_two_forms_agree, s_firm_excess, OperatorSpec};
use feasibility::regularity::{
    estimate_c, estimate_c_sampled, estimate_kappa, estimate_subregularity, exact_subspace_c, friedrichs_cosine,
    sampling::{set_points, SampleRole},
};
use feasibility::{SetSpec, SolutionSet};
use proptest::prelude::*;

fn p(c: &[f64]) -> Point {
    Point::from_slice(c).unwrap()
}

fn coords(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0..3.0f64, dim)
}

fn point(dim: usize) -> impl Strategy<Value = Point> {
    coords(dim).prop_map(|c| Point::new(c).unwrap())
}

fn frame(dim: usize, k: usize) -> impl Strategy<Value = AffineFrame> {
    (point(dim), prop::collection::vec(point(dim), k)).prop_filter_map("full rank", move |(o, s)| {
        AffineFrame::new(o, &s).ok().filter(|f| f.dim_subspace() == k)
    })
}

fn line2(offset: &[f64], dir: &[f64]) -> SetSpec {
    SetSpec::affine(AffineFrame::new(p(offset), &[p(dir)]).unwrap())
}

/// Every set variant that supports projection, in R².
fn planar_sets() -> Vec<SetSpec> {
    vec![
        line2(&[0.0, 0.0], &[1.0, 1.0]),
        line2(&[0.0, FRAC_1_SQRT_2], &[1.0, 0.0]),
        SetSpec::ball(p(&[0.0, 1.0]), 1.0).unwrap(),
        SetSpec::sphere(p(&[0.0, 0.0]), 1.0).unwrap(),
        SetSpec::axes(2),
        SetSpec::kinked(),
    ]
}

fn span_residual(a: &[Point], b: &[Point]) -> f64 {
    a.iter()
        .map(|v| (v - &project_onto_span(b, v)).norm())
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn cauchy_schwarz(a in point(4), b in point(4)) {
        prop_assert!(inner(&a, &b).unwrap().abs() <= norm(&a) * norm(&b) * (1.0 + 1e-15));
    }

    #[test]
    fn orthonormalize_is_idempotent_up_to_sign(vs in prop::collection::vec(point(5), 1..5)) {
        let q = orthonormalize(&vs).unwrap();
        let q2 = orthonormalize(&q).unwrap();
        prop_assert_eq!(q.len(), q2.len());
        for (u, v) in q.iter().zip(&q2) {
            prop_assert!(u.approx_eq(v, 1e-10) || u.approx_eq(&v.scale(-1.0), 1e-10));
        }
    }

    #[test]
    fn double_complement_recovers_the_span(f in frame(5, 2)) {
        let back = f.orthogonal_complement().orthogonal_complement();
        prop_assert_eq!(back.dim_subspace(), f.dim_subspace());
        prop_assert!(span_residual(f.basis(), back.basis()) <= 1e-10);
        prop_assert!(span_residual(back.basis(), f.basis()) <= 1e-10);
    }

    #[test]
    fn projections_are_nearest(x in point(2), seed in 0u32..1000) {
        for s in planar_sets() {
            let proj = s.project(&x).unwrap();
            let ys = set_points(&s, &proj.selected, 4.0, 64, SampleRole::Members, seed);
            for branch in &proj.all_branches {
                for y in &ys {
                    prop_assert!(x.distance(branch) <= x.distance(y) + 1e-9, "{:?}", s);
                }
            }
        }
    }

    #[test]
    fn projection_is_idempotent(x in point(2)) {
        for s in planar_sets() {
            let once = s.project(&x).unwrap().selected;
            let twice = s.project(&once).unwrap();
            prop_assert!(twice.selected.approx_eq(&once, 1e-12));
            prop_assert!(twice.distance <= 1e-12);
        }
    }

    #[test]
    fn affine_reflection_is_an_isometry(f in frame(4, 2), x in point(4), coeffs in coords(2)) {
        let s = SetSpec::affine(f.clone());
        let c = f.offset().add_scaled(coeffs[0], &f.basis()[0]).add_scaled(coeffs[1], &f.basis()[1]);
        let r = s.reflect(&x).unwrap().selected;
        prop_assert!((r.distance(&c) - x.distance(&c)).abs() <= 1e-10);
    }

    #[test]
    fn affine_projection_is_firm_with_equality(f in frame(4, 2), x in point(4), y in point(4)) {
        let s = SetSpec::affine(f);
        let (px, py) = (s.project(&x).unwrap().selected, s.project(&y).unwrap().selected);
        let lhs = px.distance(&py).powi(2) + (&(&x - &px) - &(&y - &py)).norm_sq();
        prop_assert!((lhs - x.distance(&y).powi(2)).abs() <= 1e-9);
    }

    #[test]
    fn convex_projectors_are_firmly_nonexpansive(x in point(3), y in point(3), f in frame(3, 1)) {
        for s in [SetSpec::affine(f.clone()), SetSpec::ball(p(&[0.5, -1.0, 0.0]), 1.3).unwrap()] {
            let (px, py) = (s.project(&x).unwrap().selected, s.project(&y).unwrap().selected);
            let d = &px - &py;
            prop_assert!(d.norm_sq() <= d.dot(&(&x - &y)) + 1e-9);
        }
    }

    #[test]
    fn convex_proximal_normals_separate(x in point(2), seed in 0u32..100) {
        for s in planar_sets().into_iter().filter(SetSpec::is_convex) {
            let on = s.project(&x).unwrap().selected;
            let ys = set_points(&s, &on, 3.0, 64, SampleRole::Members, seed);
            for v in s.proximal_normals(&on, 16).unwrap() {
                for y in &ys {
                    prop_assert!(v.dot(&(y - &on)) <= 1e-9);
                }
            }
        }
    }

    #[test]
    fn companion_round_trip(x in point(2)) {
        let sets = planar_sets();
        let ops = [
            OperatorSpec::projector(sets[3].clone()),
            OperatorSpec::map(sets[4].clone(), sets[0].clone()).unwrap(),
            OperatorSpec::douglas_rachford(sets[3].clone(), sets[1].clone()).unwrap(),
        ];
        for t in ops {
            let half = OperatorSpec::combination(vec![
                (0.5, OperatorSpec::identity(2)),
                (0.5, OperatorSpec::companion(t.clone())),
            ])
            .unwrap();
            prop_assert!(half.apply(&x).unwrap().selected.approx_eq(&t.apply(&x).unwrap().selected, 1e-10));
        }
    }

    #[test]
    fn dr_forms_agree_in_r3(x in point(3), f in frame(3, 2)) {
        let a = SetSpec::sphere(p(&[0.0, 0.0, 0.0]), 1.5).unwrap();
        let b = SetSpec::affine(f);
        prop_assert!(dr_two_forms_agree(&a, &b, &x).unwrap());
        prop_assert!(dr_two_forms_agree(&b, &SetSpec::ball(p(&[1.0, 0.0, 0.0]), 0.5).unwrap(), &x).unwrap());
    }

    #[test]
    fn convex_combination_keeps_the_larger_constant(x in point(2), lambda in 0.0..1.0f64) {
        // Both projectors are (S, 0)-firm at the origin, the point of S.
        let origin = Point::zeros(2);
        let t1 = OperatorSpec::projector(SetSpec::axes(2));
        let t2 = OperatorSpec::projector(line2(&[0.0, 0.0], &[1.0, 1.0]));
        let e1 = s_firm_excess(&t1, &x, &origin, 0.0).unwrap();
        let e2 = s_firm_excess(&t2, &x, &origin, 0.0).unwrap();
        prop_assume!(e1 <= 1e-12 && e2 <= 1e-12);
        let t = OperatorSpec::combination(vec![(lambda, t1), (1.0 - lambda, t2)]).unwrap();
        prop_assert!(s_firm_excess(&t, &x, &origin, 0.0).unwrap() <= 1e-9);
    }

    #[test]
    fn map_is_fejer_on_convex_pairs(x0 in point(3), f in frame(3, 2)) {
        let a = SetSpec::affine(AffineFrame::new(f.offset().clone(), &[f.basis()[0].clone()]).unwrap());
        let b = SetSpec::ball(f.offset().add_scaled(1.0, &f.basis()[1]), 1.0).unwrap();
        let sol = SolutionSet::singleton(&a, &b, f.offset().clone()).unwrap();
        let op = OperatorSpec::map(a, b).unwrap();
        let trace = iterate(&op, &x0, &sol, 200, 1e-12).unwrap();
        for w in trace.dist_to_s.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12);
        }
    }

    #[test]
    fn traces_are_deterministic(x0 in point(2)) {
        let (a, b) = (SetSpec::sphere(p(&[0.0, 0.0]), 1.0).unwrap(), line2(&[0.0, FRAC_1_SQRT_2], &[1.0, 0.0]));
        let sol = SolutionSet::points(&a, &b, vec![p(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2]), p(&[-FRAC_1_SQRT_2, FRAC_1_SQRT_2])]).unwrap();
        let op = OperatorSpec::douglas_rachford(a, b).unwrap();
        prop_assert_eq!(iterate(&op, &x0, &sol, 100, 1e-10).unwrap(), iterate(&op, &x0, &sol, 100, 1e-10).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn estimators_grow_with_samples(n in 16usize..256, seed in 0u32..50, delta in 0.05..1.0f64) {
        let s = FRAC_1_SQRT_2;
        let circle = SetSpec::sphere(p(&[0.0, 0.0]), 1.0).unwrap();
        let line = line2(&[0.0, s], &[1.0, 0.0]);
        let sol = SolutionSet::points(&circle, &line, vec![p(&[s, s]), p(&[-s, s])]).unwrap();
        let w = sol.witness().clone();
        let sub = |n| estimate_subregularity(&circle, &sol, delta, n, seed).unwrap();
        let kap = |n| estimate_kappa(&circle, &line, &sol, delta, n, seed).unwrap();
        let c = |n| estimate_c(&circle, &line, &w, delta, n, seed).unwrap();
        prop_assert!(sub(2 * n) >= sub(n));
        prop_assert!(kap(2 * n) >= kap(n));
        prop_assert!(c(2 * n) >= c(n));
    }

    #[test]
    fn sampled_c_matches_exact_for_subspaces(fa in frame(4, 2), dir in point(4), n in 16usize..512) {
        let fb = AffineFrame::new(fa.offset().clone(), &[dir, fa.basis()[0].clone()]);
        prop_assume!(fb.as_ref().is_ok_and(|f| f.dim_subspace() == 2));
        let fb = fb.unwrap();
        let exact = exact_subspace_c(&fa, &fb);
        let (a, b) = (SetSpec::affine(fa.clone()), SetSpec::affine(fb));
        let sampled = estimate_c_sampled(&a, &b, fa.offset(), 1.0, n, 0).unwrap();
        prop_assert!(sampled <= exact + 1e-9);
        prop_assert!((sampled - exact).abs() <= 1e-9);
    }

    #[test]
    fn friedrichs_matches_complement_c(fa in frame(5, 3), fb in frame(5, 3)) {
        let fb = fb.translated(fa.offset().clone());
        let shared = feasibility::linalg::subspace_intersection(&fa.complement_basis(), &fb.complement_basis(), 5);
        prop_assume!(shared.is_empty());
        let cf = friedrichs_cosine(&fa, &fb).unwrap();
        prop_assert!((cf - exact_subspace_c(&fa, &fb)).abs() <= 1e-10);
    }
}
