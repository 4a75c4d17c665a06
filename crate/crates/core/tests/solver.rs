use std::sync::Arc;

use iamcf::pharmonic::{
    discrete_energy, log_interpolant, p_continuation, radial_reference, solve_capacitary, to_flow_variable, truncated_exterior_mesh,
    ContinuationOptions, SolverConfig,
};
use iamcf::wulff::{ellipse_domain, wulff_boundary};
use iamcf::{AnnulusMesh, Error, MinkowskiNorm, NodeTag, ScalarField, Vec2, WulffShapeSpec};

fn wulff_mesh(norm: &MinkowskiNorm, r0: f64, l: f64, layers: usize, rays: usize) -> Arc<AnnulusMesh> {
    let inner = wulff_boundary(norm, WulffShapeSpec::centered(r0).unwrap(), rays).unwrap();
    Arc::new(truncated_exterior_mesh(norm, inner, l, layers, rays).unwrap())
}

fn radial_error(norm: &MinkowskiNorm, mesh: &AnnulusMesh, values: &[f64], p: f64, r0: f64, l: f64) -> f64 {
    mesh.nodes()
        .iter()
        .zip(values)
        .map(|(x, v)| (v - radial_reference(norm, p, r0, l, *x).unwrap()).abs())
        .fold(0.0, f64::max)
}

#[test]
fn euclidean_annulus_matches_closed_form() {
    let n = MinkowskiNorm::euclidean();
    let mesh = wulff_mesh(&n, 1.0, 10.0, 64, 256);
    let sol = solve_capacitary(&n, mesh.clone(), &SolverConfig::new(1.5, 10.0)).unwrap();
    let err = radial_error(&n, &mesh, sol.field.values(), 1.5, 1.0, 10.0);
    assert!(err <= 1e-3, "{err}");
    assert!(sol.field.values().iter().all(|v| (0.0..=1.0).contains(v)));
}

#[test]
fn wulff_annuli_are_nodally_exact() {
    // Geometric layers make every ring a scaled copy of the first. For quadratic norms the
    // mesh is also a linear image of a rotation-invariant one, so layer-constant values
    // balance at every node and the discrete minimizer is the radial profile itself.
    for n in [MinkowskiNorm::euclidean(), MinkowskiNorm::ellipse(iamcf::Mat2::new(3.0, 0.7, 0.7, 1.5)).unwrap()] {
        for p in [2.0, 1.5, 1.2] {
            let mesh = wulff_mesh(&n, 1.0, 10.0, 16, 64);
            let sol = solve_capacitary(&n, mesh.clone(), &SolverConfig::new(p, 10.0)).unwrap();
            let err = radial_error(&n, &mesh, sol.field.values(), p, 1.0, 10.0);
            assert!(err <= 1e-10, "{} p={p}: {err}", n.label());
        }
    }
}

#[test]
fn blend_wulff_annulus_is_accurate() {
    let n = MinkowskiNorm::blend_lq(4.0, 0.5).unwrap();
    for p in [2.0, 1.5, 1.2] {
        let mesh = wulff_mesh(&n, 1.0, 10.0, 32, 128);
        let sol = solve_capacitary(&n, mesh.clone(), &SolverConfig::new(p, 10.0)).unwrap();
        let err = radial_error(&n, &mesh, sol.field.values(), p, 1.0, 10.0);
        assert!(err <= 1e-3, "p={p}: {err}");
    }
}

#[test]
fn ellipse_obstacle_self_convergence_is_second_order() {
    let n = MinkowskiNorm::euclidean();
    let solve = |layers: usize, rays: usize| {
        let inner = ellipse_domain(2.0, 1.0, rays).unwrap();
        let mesh = Arc::new(truncated_exterior_mesh(&n, inner, 16.0, layers, rays).unwrap());
        solve_capacitary(&n, mesh, &SolverConfig::new(1.5, 16.0)).unwrap().field
    };
    let fields = [solve(16, 64), solve(32, 128), solve(64, 256)];
    let probes: Vec<Vec2> = (0..24)
        .flat_map(|k| {
            let t = std::f64::consts::TAU * (k as f64 + 0.5) / 24.0;
            [3.0, 5.0, 8.0].map(|r| Vec2::new(r * t.cos(), r * t.sin()))
        })
        .collect();
    let diff = |a: &ScalarField, b: &ScalarField| probes.iter().map(|x| (a.interpolate(*x).unwrap() - b.interpolate(*x).unwrap()).abs()).fold(0.0, f64::max);
    let (coarse, fine) = (diff(&fields[0], &fields[1]), diff(&fields[1], &fields[2]));
    assert!(coarse / fine >= 1.7 * 1.7, "{coarse:.3e} / {fine:.3e}");
}

#[test]
fn energy_decreases_and_beats_initial_guess() {
    let n = MinkowskiNorm::blend_lq(4.0, 0.5).unwrap();
    let outer = ellipse_domain(1.5, 1.0, 256).unwrap();
    let mesh = Arc::new(truncated_exterior_mesh(&n, outer, 12.0, 48, 256).unwrap());
    let cfg = SolverConfig::new(1.3, 12.0);
    let sol = solve_capacitary(&n, mesh.clone(), &cfg).unwrap();
    let start = log_interpolant(&n, mesh, 1.3).unwrap();
    assert!(discrete_energy(&n, &sol.field, &cfg) <= discrete_energy(&n, &start, &cfg));
    for w in sol.log.windows(2) {
        assert!(w[1].energy <= w[0].energy * (1.0 + 1e-12), "{} -> {}", w[0].energy, w[1].energy);
    }
}

#[test]
fn flow_variable_is_monotone_along_rays() {
    let n = MinkowskiNorm::ellipse_diag(4.0, 1.0).unwrap();
    let outer = ellipse_domain(2.0, 1.0, 256).unwrap();
    let mesh = Arc::new(truncated_exterior_mesh(&n, outer, 30.0, 64, 256).unwrap());
    let sol = solve_capacitary(&n, mesh.clone(), &SolverConfig::new(1.2, 30.0)).unwrap();
    let u = to_flow_variable(&sol.field).unwrap();
    for (k, (&v, &uk)) in sol.field.values().iter().zip(u.values()).enumerate() {
        if mesh.tag(k) != NodeTag::Outer {
            assert!((uk - (1.0 - 1.2) * v.ln()).abs() <= 1e-12 * uk.abs().max(1.0));
        }
    }
    for i in 0..mesh.rays() {
        for j in 0..mesh.layers() - 1 {
            let (a, b) = (u.values()[mesh.ray_node(j, i)], u.values()[mesh.ray_node(j + 1, i)]);
            assert!(b >= a - 1e-12, "ray {i} layer {j}: {a} > {b}");
        }
    }
}

#[test]
fn comparison_principle_for_nested_sets() {
    // The capacitary potential of the larger set dominates on the common region.
    let n = MinkowskiNorm::euclidean();
    let (rays, l) = (256, 20.0);
    let small = wulff_mesh(&n, 1.0, l, 64, rays);
    let big = Arc::new(truncated_exterior_mesh(&n, ellipse_domain(2.0, 1.0, rays).unwrap(), l, 64, rays).unwrap());
    let cfg = SolverConfig::new(1.5, l);
    let vs = solve_capacitary(&n, small.clone(), &cfg).unwrap();
    let vb = solve_capacitary(&n, big.clone(), &cfg).unwrap();
    let mut checked = 0;
    for (x, v) in big.nodes().iter().zip(vb.field.values()) {
        if let Some(w) = vs.field.interpolate(*x) {
            assert!(*v >= w - 2e-3, "at {x:?}: {v} < {w}");
            checked += 1;
        }
    }
    assert!(checked > 1000);
}

#[test]
fn continuation_extrapolates_to_log_profile() {
    let n = MinkowskiNorm::euclidean();
    let (r0, l) = (1.0, 40.0);
    let mesh = wulff_mesh(&n, r0, l, 96, 128);
    let run = p_continuation(&n, mesh.clone(), &[2.0, 1.5, 1.2, 1.05, 1.01], &SolverConfig::new(2.0, l), ContinuationOptions::default()).unwrap();
    assert_eq!(run.converged().count(), 5);
    let mut worst: f64 = 0.0;
    for (k, x) in mesh.nodes().iter().enumerate() {
        let r = x.norm();
        if (1.5 * r0..=l / 4.0).contains(&r) {
            worst = worst.max((run.extrapolated.values()[k] - (r / r0).ln()).abs());
        }
    }
    assert!(worst <= 1e-2, "{worst}");
}

#[test]
fn warm_start_saves_iterations() {
    let n = MinkowskiNorm::ellipse_diag(4.0, 1.0).unwrap();
    let mesh = wulff_mesh(&n, 1.0, 20.0, 48, 192);
    let ps = [2.0, 1.5, 1.2, 1.1, 1.05];
    let base = SolverConfig::new(2.0, 20.0);
    let total = |warm| -> usize {
        let run = p_continuation(&n, mesh.clone(), &ps, &base, ContinuationOptions { warm_start: warm }).unwrap();
        run.stages.iter().map(|s| s.iterations()).sum()
    };
    let (warm, cold) = (total(true), total(false));
    assert!(warm < cold, "warm {warm} vs cold {cold}");
}

#[test]
fn single_stage_list_returns_that_stage() {
    let n = MinkowskiNorm::euclidean();
    let mesh = wulff_mesh(&n, 1.0, 10.0, 24, 64);
    let run = p_continuation(&n, mesh, &[1.5], &SolverConfig::new(1.5, 10.0), ContinuationOptions::default()).unwrap();
    assert_eq!(run.stages.len(), 1);
    assert_eq!(run.extrapolated.values(), run.stages[0].flow.as_ref().unwrap().values());
}

#[test]
fn continuation_rejects_bad_lists() {
    let n = MinkowskiNorm::euclidean();
    let mesh = wulff_mesh(&n, 1.0, 10.0, 8, 32);
    let base = SolverConfig::new(2.0, 10.0);
    for ps in [&[][..], &[1.5, 1.8][..], &[2.0, 1.005][..]] {
        assert!(matches!(p_continuation(&n, mesh.clone(), ps, &base, ContinuationOptions::default()), Err(Error::Config(_))));
    }
}

#[test]
fn iteration_cap_reports_best_iterate() {
    let n = MinkowskiNorm::ellipse_diag(4.0, 1.0).unwrap();
    let mesh = wulff_mesh(&n, 1.0, 20.0, 32, 128);
    let cfg = SolverConfig { max_iter: 1, ..SolverConfig::new(1.1, 20.0) };
    match solve_capacitary(&n, mesh.clone(), &cfg) {
        Err(Error::NoConvergence { iterations, best: Some(field), .. }) => {
            assert_eq!(iterations, 1);
            assert_eq!(field.values().len(), mesh.node_count());
            let start = log_interpolant(&n, mesh, 1.1).unwrap();
            assert!(discrete_energy(&n, &field, &cfg) <= discrete_energy(&n, &start, &cfg));
        }
        other => panic!("expected NoConvergence, got {other:?}"),
    }
}

#[test]
fn invalid_solver_settings_are_config_errors() {
    let n = MinkowskiNorm::euclidean();
    let mesh = wulff_mesh(&n, 1.0, 10.0, 8, 32);
    for cfg in [
        SolverConfig::new(1.0, 10.0),
        SolverConfig::new(2.5, 10.0),
        SolverConfig { epsilon: 0.0, ..SolverConfig::new(1.5, 10.0) },
        SolverConfig { max_iter: 0, ..SolverConfig::new(1.5, 10.0) },
    ] {
        assert!(matches!(solve_capacitary(&n, mesh.clone(), &cfg), Err(Error::Config(_))));
    }
}
