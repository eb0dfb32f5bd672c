//! Reference geometries run end to end through the public API.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use approx::assert_abs_diff_eq;
use feasibility::driver::{fit_rate, iterate, probe_fixed_points, StopReason, DEFAULT_TAIL_FRACTION};
use feasibility::operators::OperatorSpec;
use feasibility::regularity::{
    check_strong_regularity, contraction_transfer, estimate_c, estimate_kappa, estimate_subregularity, predicted_rates,
    sampling::ball_points, RateInputs, SAFETY_FACTOR,
};
use feasibility::{AffineFrame, Point, SetSpec, SolutionSet};

fn p(c: &[f64]) -> Point {
    Point::from_slice(c).unwrap()
}

fn line(offset: &[f64], dir: &[f64]) -> SetSpec {
    SetSpec::affine(AffineFrame::new(p(offset), &[p(dir)]).unwrap())
}

fn circle_and_line() -> (SetSpec, SetSpec, SolutionSet) {
    let s = FRAC_1_SQRT_2;
    let circle = SetSpec::sphere(p(&[0.0, 0.0]), 1.0).unwrap();
    let l = line(&[0.0, s], &[1.0, 0.0]);
    let sol = SolutionSet::points(&circle, &l, vec![p(&[s, s]), p(&[-s, s])]).unwrap();
    (circle, l, sol)
}

#[test]
fn map_cascade_on_two_lines() {
    let (a, b) = (line(&[0.0, 0.0], &[1.0, 0.0]), line(&[0.0, 0.0], &[1.0, 1.0]));
    let sol = SolutionSet::singleton(&a, &b, Point::zeros(2)).unwrap();
    let trace = iterate(&OperatorSpec::map(a, b).unwrap(), &p(&[1.0, 0.0]), &sol, 100, 1e-10).unwrap();
    assert_eq!(trace.stop_reason, StopReason::Tolerance);
    // x_n = (2⁻ⁿ, 0).
    for (n, x) in trace.iterates.iter().enumerate() {
        assert_abs_diff_eq!(x.coords()[0], 0.5f64.powi(n as i32), epsilon = 1e-15);
        assert_abs_diff_eq!(x.coords()[1], 0.0, epsilon = 1e-15);
    }
    assert_eq!(trace.len(), 35);
}

#[test]
fn dr_on_lines_in_r3_stagnates_off_s() {
    let a = line(&[0.0, 0.0, 0.0], &[1.0, 0.0, 0.0]);
    let b = line(&[0.0, 0.0, 0.0], &[1.0, 1.0, 0.0]);
    let sol = SolutionSet::singleton(&a, &b, Point::zeros(3)).unwrap();
    let op = OperatorSpec::douglas_rachford(a.clone(), b.clone()).unwrap();
    let trace = iterate(&op, &p(&[0.0, 0.0, 1.0]), &sol, 100, 1e-10).unwrap();
    assert_eq!(trace.stop_reason, StopReason::Stagnation);
    assert_eq!(trace.final_dist_to_s(), 1.0);
    assert!(!check_strong_regularity(&a, &b, sol.witness(), 1.0, 64).unwrap());

    let probe = probe_fixed_points(&op, sol.witness(), 1.0, 32, 0, &sol, 2000, 1e-10).unwrap();
    let axis = probe.exact_fixed_set.clone().unwrap();
    assert_eq!(axis.dim_subspace(), 1);
    let off: Vec<_> = probe.off_solution(1e-6).collect();
    assert!(!off.is_empty());
    for l in off {
        assert!(axis.distance(&l.point) < 1e-8, "{} is not on the x₃-axis", l.point);
    }
}

#[test]
fn dr_on_two_lines_converges_to_s_from_everywhere() {
    let (a, b) = (line(&[0.0, 0.0], &[1.0, 0.0]), line(&[0.0, 0.0], &[1.0, 1.0]));
    let sol = SolutionSet::singleton(&a, &b, Point::zeros(2)).unwrap();
    let op = OperatorSpec::douglas_rachford(a, b).unwrap();
    let probe = probe_fixed_points(&op, sol.witness(), 1.0, 32, 3, &sol, 1000, 1e-10).unwrap();
    assert!(probe.limits.iter().all(|l| l.dist_to_s < 1e-10));
    assert_eq!(probe.exact_fixed_set.unwrap().dim_subspace(), 0);
}

#[test]
fn dr_on_tangent_line_and_ball_has_fixed_points_off_s() {
    let a = line(&[0.0, 0.0], &[1.0, 0.0]);
    let b = SetSpec::ball(p(&[0.0, 1.0]), 1.0).unwrap();
    let sol = SolutionSet::singleton(&a, &b, Point::zeros(2)).unwrap();
    let op = OperatorSpec::douglas_rachford(a, b).unwrap();
    // Below the line, (0, −t) projects onto the tangent point and reflects into A's normal.
    for t in [0.25, 1.0, 2.0] {
        let x = p(&[0.0, -t]);
        assert!(op.apply(&x).unwrap().selected.approx_eq(&x, 1e-15));
    }
    let probe = probe_fixed_points(&op, sol.witness(), 1.0, 16, 0, &sol, 10_000, 1e-10).unwrap();
    assert!(probe.off_solution(0.01).count() > 0);
}

#[test]
fn map_on_tangent_line_and_ball_is_sublinear() {
    let a = line(&[0.0, 0.0], &[1.0, 0.0]);
    let b = SetSpec::ball(p(&[0.0, 1.0]), 1.0).unwrap();
    let sol = SolutionSet::singleton(&a, &b, Point::zeros(2)).unwrap();
    let trace = iterate(&OperatorSpec::map(a, b).unwrap(), &p(&[1.0, 0.0]), &sol, 10_000, 1e-12).unwrap();
    // 1/t² grows by one per cycle.
    for (n, d) in trace.dist_to_s.iter().enumerate().step_by(997) {
        assert_abs_diff_eq!(*d, 1.0 / ((n + 1) as f64).sqrt(), epsilon = 1e-12);
    }
    assert!(!fit_rate(&trace, DEFAULT_TAIL_FRACTION).unwrap().linear);
}

#[test]
fn circle_subregularity_is_half_the_radius() {
    // At x on the unit circle the ratio is ‖x − x̂‖/2, largest at the rim of the ball.
    let (circle, _, sol) = circle_and_line();
    for delta in [0.2, 0.05] {
        let eps = estimate_subregularity(&circle, &sol, delta, 4096, 0).unwrap();
        assert!(eps <= delta / 2.0 + 1e-12 && eps >= 0.99 * delta / 2.0, "{eps}");
    }
}

#[test]
fn circle_and_line_dr_contracts_at_predicted_rate() {
    let (circle, l, sol) = circle_and_line();
    let delta = 0.0125;
    let inputs = RateInputs {
        eps_a: estimate_subregularity(&circle, &sol, delta, 4096, 0).unwrap(),
        eps_b: 0.0,
        delta,
        kappa: estimate_kappa(&circle, &l, &sol, delta, 4096, 0).unwrap(),
        c: estimate_c(&circle, &l, sol.witness(), delta, 4096, 0).unwrap(),
        friedrichs_cos: None,
        strongly_regular: true,
        a_convex: false,
        b_convex: true,
        b_affine: true,
    };
    let report = predicted_rates(&inputs.inflated(SAFETY_FACTOR)).unwrap();
    assert!(report.dr_guarantee);
    // The normals at x̂ meet at 45 degrees.
    assert_abs_diff_eq!(inputs.c, FRAC_1_SQRT_2, epsilon = 0.02);
    let op = OperatorSpec::douglas_rachford(circle, l).unwrap();
    let x0 = sol
        .witness()
        .add_scaled(delta / 2.0, &p(&[(PI / 5.0).cos(), -(PI / 5.0).sin()]));
    let trace = iterate(&op, &x0, &sol, 1000, 1e-12).unwrap();
    for w in trace.dist_to_s.windows(2).filter(|w| w[0] > 1e-11) {
        assert!(w[1] <= report.predicted_rate_dr * w[0] + 1e-12);
    }
}

#[test]
fn map_two_step_ratio_respects_the_subregular_bound() {
    // Both sets treated as merely subregular; ε̃ comes from the larger constant.
    let (circle, l, sol) = circle_and_line();
    let delta = 0.05;
    let inputs = RateInputs {
        eps_a: estimate_subregularity(&circle, &sol, delta, 4096, 0).unwrap(),
        eps_b: estimate_subregularity(&l, &sol, delta, 4096, 0).unwrap(),
        delta,
        kappa: estimate_kappa(&circle, &l, &sol, delta, 4096, 0).unwrap(),
        c: 0.0,
        friedrichs_cos: None,
        strongly_regular: true,
        a_convex: false,
        b_convex: false,
        b_affine: true,
    };
    let report = predicted_rates(&inputs.inflated(SAFETY_FACTOR)).unwrap();
    assert!(report.eps_tilde_map <= report.gamma * report.gamma);
    let op = OperatorSpec::map(circle, l).unwrap();
    for x0 in ball_points(sol.witness(), delta / 2.0, 32, 5) {
        let trace = iterate(&op, &x0, &sol, 500, 1e-13).unwrap();
        for w in trace.dist_to_s.windows(2).skip(1).filter(|w| w[0] > 1e-12) {
            assert!(w[1] <= report.predicted_rate_map * w[0] + 1e-12, "{} -> {}", w[0], w[1]);
        }
    }
}

#[test]
fn contraction_transfer_on_examples() {
    let (circle, l, sol) = circle_and_line();
    let op = OperatorSpec::douglas_rachford(circle, l).unwrap();
    let points = ball_points(sol.witness(), 0.02, 500, 11);
    let check = contraction_transfer(&op, &sol, 0.05, 0.2, &points).unwrap();
    assert!(check.checked > 100);
    assert!(check.worst_margin <= 1e-9);
}
