use std::f64::consts::TAU;

use iamcf::flow::unit_wulff_perimeter;
use iamcf::wulff::{anisotropic_perimeter, bounding_radii, ellipse_domain, perturbed_wulff, rounded_rectangle, wulff_boundary, FourierMode};
use iamcf::{Mat2, MinkowskiNorm, Vec2, WulffShapeSpec};
use proptest::prelude::*;

fn norms() -> Vec<MinkowskiNorm> {
    vec![
        MinkowskiNorm::euclidean(),
        MinkowskiNorm::ellipse(Mat2::new(3.0, 0.7, 0.7, 1.5)).unwrap(),
        MinkowskiNorm::blend_lq(4.0, 0.5).unwrap(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn perimeter_ignores_labeling_and_refinement(a in 0.5f64..3.0, b in 0.5f64..3.0, shift in 0usize..64, n in 32usize..200) {
        let c = ellipse_domain(a, b, n).unwrap();
        for norm in norms() {
            let p = anisotropic_perimeter(&norm, &c);
            prop_assert!((anisotropic_perimeter(&norm, &c.rotated_list(shift % n)) - p).abs() <= 1e-12 * p);
            prop_assert!((anisotropic_perimeter(&norm, &c.refined()) - p).abs() <= 1e-12 * p);
            prop_assert!((anisotropic_perimeter(&norm, &c.translated(Vec2::new(a, -b))) - p).abs() <= 1e-12 * p);
        }
    }

    #[test]
    fn wulff_shapes_are_convex_and_scale(r in 0.1f64..10.0, s in 0.2f64..5.0) {
        for norm in norms() {
            let w = wulff_boundary(&norm, WulffShapeSpec::centered(r).unwrap(), 128).unwrap();
            prop_assert!(w.is_convex() && w.is_simple() && w.signed_area() > 0.0);
            let radii = bounding_radii(&norm, &w).unwrap();
            prop_assert!(radii.r1 <= radii.r2 && radii.certified);
            prop_assert!((radii.r2 - r).abs() <= 1e-9 * r);
            let ws = wulff_boundary(&norm, WulffShapeSpec::centered(r * s).unwrap(), 128).unwrap();
            prop_assert!((anisotropic_perimeter(&norm, &ws) - s * anisotropic_perimeter(&norm, &w)).abs() <= 1e-9 * s * r);
        }
    }

    #[test]
    fn bounding_radii_sandwich_the_domain(a in 0.5f64..3.0, b in 0.5f64..3.0) {
        for norm in norms() {
            let d = ellipse_domain(a, b, 256).unwrap();
            let radii = bounding_radii(&norm, &d).unwrap();
            prop_assert!(radii.r1 <= radii.r2);
            for v in d.vertices() {
                let r = norm.dual(*v).unwrap();
                prop_assert!(r >= radii.r1 * (1.0 - 1e-12) && r <= radii.r2 * (1.0 + 1e-12));
            }
            // The inner Wulff shape really sits inside.
            let inner = wulff_boundary(&norm, WulffShapeSpec::centered(radii.r1 * (1.0 - 1e-9)).unwrap(), 64).unwrap();
            prop_assert!(inner.vertices().iter().all(|v| d.contains(*v)));
        }
    }
}

#[test]
fn ellipse_norm_wulff_perimeter_is_twice_its_area() {
    // For F(ξ)² = ξᵀAξ the Wulff shape is {xᵀA⁻¹x ≤ 1} with area π√det A, and
    // |∂𝒲|_F = 2|𝒲|.
    let a = Mat2::new(3.0, 0.7, 0.7, 1.5);
    let n = MinkowskiNorm::ellipse(a).unwrap();
    let exact = TAU * a.determinant().sqrt();
    assert!((unit_wulff_perimeter(&n).unwrap() / exact - 1.0).abs() <= 1e-6);
    let fine = wulff_boundary(&n, WulffShapeSpec::centered(1.0).unwrap(), 1_000_000).unwrap();
    assert!((anisotropic_perimeter(&n, &fine) / exact - 1.0).abs() <= 1e-10);
}

#[test]
fn blend_wulff_perimeter_is_twice_its_area() {
    let n = MinkowskiNorm::blend_lq(6.0, 0.5).unwrap();
    let w = wulff_boundary(&n, WulffShapeSpec::centered(1.0).unwrap(), 20_000).unwrap();
    assert!((anisotropic_perimeter(&n, &w) / (2.0 * w.signed_area()) - 1.0).abs() <= 1e-6);
}

#[test]
fn euclidean_perimeters_of_generators() {
    let e = MinkowskiNorm::euclidean();
    // Half-widths 4 and 2: straight sides plus one full circle of the corner radius.
    let rr = rounded_rectangle(4.0, 2.0, 0.5, 4096).unwrap();
    let expect = 2.0 * (7.0 + 3.0) + TAU * 0.5;
    assert!((anisotropic_perimeter(&e, &rr) / expect - 1.0).abs() <= 1e-5);
    let circle = ellipse_domain(1.0, 1.0, 4096).unwrap();
    assert!((anisotropic_perimeter(&e, &circle) / TAU - 1.0).abs() <= 1e-6);
}

#[test]
fn perturbed_wulff_radii_follow_modes() {
    let n = MinkowskiNorm::ellipse_diag(4.0, 1.0).unwrap();
    let d = perturbed_wulff(&n, 1.0, &[FourierMode { k: 3, cos: 0.3, sin: 0.0 }], 1024).unwrap();
    let radii = bounding_radii(&n, &d).unwrap();
    assert!((radii.r1 - 0.7).abs() <= 1e-6 && (radii.r2 - 1.3).abs() <= 1e-6);
    assert!(!d.is_convex() && d.is_star_shaped());
}
