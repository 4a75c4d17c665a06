use std::f64::consts::{PI, TAU};

use iamcf::{MinkowskiNorm, Vec2};
use proptest::prelude::*;

fn families() -> Vec<MinkowskiNorm> {
    vec![
        MinkowskiNorm::euclidean(),
        MinkowskiNorm::ellipse(iamcf::Mat2::new(3.0, 0.7, 0.7, 1.5)).unwrap(),
        MinkowskiNorm::blend_lq(4.0, 0.5).unwrap(),
        MinkowskiNorm::blend_lq(6.0, 0.9).unwrap(),
    ]
}

fn vec_strategy() -> impl Strategy<Value = Vec2> {
    (0.0..TAU, 0.05f64..20.0).prop_map(|(t, r)| Vec2::new(r * t.cos(), r * t.sin()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn homogeneous_and_even(xi in vec_strategy(), s in prop::sample::select(vec![0.5, 2.0, 10.0])) {
        for n in families() {
            let f = n.eval(xi);
            prop_assert!(f > 0.0);
            prop_assert!((n.eval(s * xi) - s * f).abs() <= 1e-12 * s * f);
            prop_assert!((n.eval(-xi) - f).abs() <= 1e-14 * f);
        }
    }

    #[test]
    fn jet_euler_identities(xi in vec_strategy()) {
        for n in families() {
            let j = n.jet(xi).unwrap();
            // ⟨DF, ξ⟩ = F and D²G ξ = F DF by 2-homogeneity of G.
            prop_assert!((j.gradient.dot(&xi) - j.value).abs() <= 1e-9 * j.value);
            prop_assert!((j.hessian_g * xi - j.value * j.gradient).norm() <= 1e-9 * j.value * j.gradient.norm());
        }
    }

    #[test]
    fn cauchy_schwarz_with_equality_at_dual_gradient(x in vec_strategy(), xi in vec_strategy()) {
        for n in families() {
            let fx = n.dual(x).unwrap();
            prop_assert!(x.dot(&xi) <= fx * n.eval(xi) * (1.0 + 1e-12));
            let d = n.dual_gradient(x).unwrap();
            prop_assert!((n.eval(d) - 1.0).abs() <= 1e-8);
            prop_assert!((x.dot(&d) - fx).abs() <= 1e-6 * fx);
        }
    }

    #[test]
    fn dual_gradient_ignores_scale(x in vec_strategy(), s in 0.1f64..50.0) {
        for n in families() {
            let a = n.dual_gradient(x).unwrap();
            let b = n.dual_gradient(s * x).unwrap();
            prop_assert!((a - b).norm() <= 1e-8);
        }
    }
}

#[test]
fn hessian_eigenvalue_lower_bounds() {
    let a = iamcf::Mat2::new(3.0, 0.7, 0.7, 1.5);
    let cases = [
        (MinkowskiNorm::ellipse(a).unwrap(), a.symmetric_eigenvalues().min()),
        (MinkowskiNorm::blend_lq(4.0, 0.5).unwrap(), 0.5),
        (MinkowskiNorm::blend_lq(6.0, 0.9).unwrap(), 0.1),
    ];
    for (n, bound) in cases {
        for k in 0..360 {
            let t = TAU * k as f64 / 360.0;
            let h = n.jet(Vec2::new(t.cos(), t.sin())).unwrap().hessian_g;
            assert!(h.symmetric_eigenvalues().min() >= bound * (1.0 - 1e-12), "{} at {k} deg", n.label());
        }
    }
}

#[test]
fn blend_dual_matches_brute_force_grid() {
    let n = MinkowskiNorm::blend_lq(4.0, 0.9).unwrap();
    let x = Vec2::new(1.0, 1.0);
    // sup over the unit F-circle, parametrized by angle, on a 10⁶-point grid.
    let m = 1_000_000;
    let brute = (0..m)
        .map(|k| {
            let t = TAU * k as f64 / m as f64;
            let d = Vec2::new(t.cos(), t.sin());
            x.dot(&d) / n.eval(d)
        })
        .fold(f64::NEG_INFINITY, f64::max);
    assert!((n.dual(x).unwrap() - brute).abs() <= 1e-8);
}

#[test]
fn dual_gradient_examples() {
    let e = MinkowskiNorm::euclidean();
    assert!((e.dual_gradient(Vec2::new(0.0, 5.0)).unwrap() - Vec2::new(0.0, 1.0)).norm() < 1e-15);
    let a = MinkowskiNorm::ellipse_diag(4.0, 1.0).unwrap();
    let d = a.dual_gradient(Vec2::new(1.0, 0.0)).unwrap();
    assert!((d - Vec2::new(0.5, 0.0)).norm() < 1e-12);
    assert!((a.eval(d) - 1.0).abs() < 1e-12);
    assert!((d.x - a.dual(Vec2::new(1.0, 0.0)).unwrap()).abs() < 1e-12);
}

#[test]
fn identity_report_tolerances() {
    let cases = [
        (MinkowskiNorm::euclidean(), 1e-12),
        (MinkowskiNorm::ellipse_diag(4.0, 1.0).unwrap(), 1e-9),
        (MinkowskiNorm::blend_lq(4.0, 0.5).unwrap(), 1e-6),
    ];
    for (n, tol) in cases {
        let r = n.verify_identities(1000, 42).unwrap();
        assert_eq!(r.trials, 1000);
        assert!(r.max_violation <= tol, "{}: {}", n.label(), r.max_violation);
    }
}

#[test]
fn c1_is_scale_free_and_refinement_stable() {
    let n = MinkowskiNorm::blend_lq(4.0, 0.5).unwrap();
    let c = n.estimate_c1(64, 64);
    assert!(c > 0.0 && c.is_finite());
    assert!((n.estimate_c1_at_radius(64, 64, 3.0) - c).abs() <= 1e-3 * c);
    // With an odd count the coarse grid misses the axis directions, so doubling refines.
    let a = n.estimate_c1(67, 67);
    let b = n.estimate_c1(134, 134);
    assert!((a - b).abs() <= 2e-2 * b, "{a} vs {b}");
    for q in [MinkowskiNorm::euclidean(), MinkowskiNorm::ellipse_diag(4.0, 1.0).unwrap()] {
        assert!(q.estimate_c1(64, 64) <= 1e-8);
    }
}

#[test]
fn numeric_dual_reproduces_ellipse_wulff_points() {
    let n = MinkowskiNorm::ellipse_diag(4.0, 1.0).unwrap().with_dual_mode(iamcf::DualMode::Numeric).unwrap();
    for k in 0..32 {
        let t = PI * k as f64 / 16.0;
        // Points on xᵀA⁻¹x = 1.
        let x = Vec2::new(2.0 * t.cos(), t.sin());
        assert!((n.dual(x).unwrap() - 1.0).abs() < 1e-10);
    }
}
