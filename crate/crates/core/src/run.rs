//! Experiment pipelines driven by an [`ExperimentConfig`]. Each returns an in-memory
//! outcome; [`crate::report`] turns outcomes into files.

use std::sync::Arc;

use serde::Serialize;

use crate::config::{ExperimentConfig, TGridSpec};
use crate::error::{Error, Result};
use crate::estimates::{p_uniformity_sweep, LocalEstimateCase, SweepTable};
use crate::flow::{
    auto_t_grid, barrier_check, estimate_gamma, gradient_bound_table, minimality_check, unit_wulff_perimeter, AsymptoticsReport, BarrierReport,
    DualAnnulus, GradientBound, MinimalityReport,
};
use crate::norm::{IdentityReport, MinkowskiNorm};
use crate::pharmonic::{
    discrete_energy, log_interpolant, p_continuation, radial_reference, solve_capacitary, to_flow_variable, truncated_exterior_mesh, AnnulusMesh,
    ContinuationOptions, ContinuationResult, IterRecord, ScalarField, Solution,
};
use crate::wulff::{anisotropic_perimeter, bounding_radii, BoundaryPolyline, BoundingRadii};
use crate::Vec2;

/// Norm, domain, truncation and mesh shared by the solve and flow pipelines.
#[derive(Clone, Debug)]
pub struct Setup {
    pub norm: MinkowskiNorm,
    pub domain: BoundaryPolyline,
    pub radii: BoundingRadii,
    pub outer_radius: f64,
    pub window: DualAnnulus,
    pub mesh: Arc<AnnulusMesh>,
}

/// Builds the setup. Every failure here is a configuration problem.
pub fn setup(cfg: &ExperimentConfig) -> Result<Setup> {
    let as_config = |e: Error| match e {
        Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    };
    let norm = cfg.norm.build().map_err(as_config)?;
    let domain = cfg.domain.build(&norm, cfg.mesh.segments, cfg.base_dir.as_deref()).map_err(as_config)?;
    let radii = bounding_radii(&norm, &domain).map_err(as_config)?;
    let outer_radius = cfg.solver.outer_radius(radii.r2);
    if outer_radius <= 4.0 * 1.5 * radii.r2 {
        return Err(Error::Config(format!("outer radius {outer_radius} leaves no trusted window beyond 1.5 r2 = {}", 1.5 * radii.r2)));
    }
    let mesh = truncated_exterior_mesh(&norm, domain.clone(), outer_radius, cfg.mesh.layers, cfg.mesh.rays).map_err(as_config)?;
    Ok(Setup { window: DualAnnulus::trusted(radii.r2, outer_radius), norm, domain, radii, outer_radius, mesh: Arc::new(mesh) })
}

#[derive(Clone, Debug, Serialize)]
pub struct NormInfo {
    pub norm: String,
    pub identities: IdentityReport,
    /// `max |F(sξ) - sF(ξ)| / (sF(ξ))` over sampled `ξ` and `s ∈ {0.5, 2, 10}`.
    pub homogeneity: f64,
    /// Smallest eigenvalue of `D²G` over 360 unit directions.
    pub min_hessian_eigenvalue: f64,
    pub c1: f64,
    /// `C₁` with doubled sample counts.
    pub c1_refined: f64,
    pub wulff_perimeter: f64,
    #[serde(skip)]
    pub wulff: BoundaryPolyline,
}

pub fn norm_info(cfg: &ExperimentConfig) -> Result<NormInfo> {
    let norm = cfg.norm.build()?;
    let identities = norm.verify_identities(cfg.norm_info.trials, cfg.rng_seed)?;
    let mut homogeneity: f64 = 0.0;
    let mut min_eig = f64::INFINITY;
    for k in 0..360 {
        let t = std::f64::consts::TAU * k as f64 / 360.0;
        let xi = Vec2::new(t.cos(), t.sin());
        let f = norm.eval(xi);
        for s in [0.5, 2.0, 10.0] {
            homogeneity = homogeneity.max((norm.eval(s * xi) - s * f).abs() / (s * f));
        }
        let h = norm.jet(xi)?.hessian_g;
        min_eig = min_eig.min(h.symmetric_eigenvalues().min());
    }
    let n = cfg.norm_info.c1_samples;
    let wulff = crate::wulff::wulff_boundary(&norm, crate::wulff::WulffShapeSpec::centered(1.0)?, 512)?;
    Ok(NormInfo {
        norm: norm.label(),
        identities,
        homogeneity,
        min_hessian_eigenvalue: min_eig,
        c1: norm.estimate_c1(n, n),
        c1_refined: norm.estimate_c1(2 * n, 2 * n),
        wulff_perimeter: unit_wulff_perimeter(&norm)?,
        wulff,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveSummary {
    pub norm: String,
    pub p: f64,
    pub epsilon: f64,
    pub outer_radius: f64,
    pub radii: BoundingRadii,
    pub nodes: usize,
    pub triangles: usize,
    pub iterations: usize,
    pub energy: f64,
    /// Energy of the log interpolant the solve starts from.
    pub initial_energy: f64,
    pub min_v: f64,
    pub max_v: f64,
    /// `max |v - v_radial|` on the trusted window, reported for Wulff domains.
    pub radial_error: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub setup: Setup,
    pub solution: Solution,
    pub flow: ScalarField,
    pub summary: SolveSummary,
}

pub fn solve(cfg: &ExperimentConfig) -> Result<SolveOutcome> {
    let setup = setup(cfg)?;
    let p = cfg.solve_p();
    let config = cfg.solver.build(p, setup.radii.r2);
    let solution = solve_capacitary(&setup.norm, setup.mesh.clone(), &config)?;
    let flow = to_flow_variable(&solution.field)?;
    let v = solution.field.values();
    let radial_error = if matches!(cfg.domain, crate::config::DomainSpec::Wulff { .. }) && p < 2.0 {
        let r0 = setup.radii.r1;
        let mut err: f64 = 0.0;
        for (x, vx) in setup.mesh.nodes().iter().zip(v) {
            if setup.window.contains(setup.norm.dual(*x)?) {
                err = err.max((vx - radial_reference(&setup.norm, p, r0, setup.outer_radius, *x)?).abs());
            }
        }
        Some(err)
    } else {
        None
    };
    let initial = log_interpolant(&setup.norm, setup.mesh.clone(), p)?;
    let summary = SolveSummary {
        norm: setup.norm.label(),
        p,
        epsilon: config.epsilon,
        outer_radius: setup.outer_radius,
        radii: setup.radii,
        nodes: setup.mesh.node_count(),
        triangles: setup.mesh.triangle_count(),
        iterations: solution.iterations(),
        energy: discrete_energy(&setup.norm, &solution.field, &config),
        initial_energy: discrete_energy(&setup.norm, &initial, &config),
        min_v: v.iter().copied().fold(f64::INFINITY, f64::min),
        max_v: v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        radial_error,
    };
    Ok(SolveOutcome { setup, solution, flow, summary })
}

#[derive(Clone, Debug, Serialize)]
pub struct StageSummary {
    pub p: f64,
    pub epsilon: f64,
    pub iterations: usize,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GradientRow {
    pub p: f64,
    #[serde(flatten)]
    pub bound: GradientBound,
}

#[derive(Clone, Debug, Serialize)]
pub struct FlowSummary {
    pub norm: String,
    pub radii: BoundingRadii,
    pub domain_perimeter: f64,
    pub outer_radius: f64,
    pub window: DualAnnulus,
    pub nodes: usize,
    pub stages: Vec<StageSummary>,
    pub barrier: BarrierReport,
    pub gradient_bounds: Vec<GradientRow>,
    /// Max over min of the gradient sups across the solved exponents (extrapolation excluded).
    pub gradient_ratio: f64,
    pub asymptotics: AsymptoticsReport,
    pub minimality: Vec<MinimalityReport>,
}

#[derive(Clone, Debug)]
pub struct FlowOutcome {
    pub setup: Setup,
    pub run: ContinuationResult,
    pub summary: FlowSummary,
}

impl FlowOutcome {
    /// Iteration logs per converged stage.
    pub fn logs(&self) -> Vec<(f64, &[IterRecord])> {
        self.run.stages.iter().map(|s| (s.p, s.log.as_slice())).collect()
    }
}

/// Continuation, extrapolation and the full set of level-set diagnostics.
pub fn flow(cfg: &ExperimentConfig) -> Result<FlowOutcome> {
    let setup = setup(cfg)?;
    let base = cfg.solver.build(cfg.p_list[0], setup.radii.r2);
    let run = p_continuation(&setup.norm, setup.mesh.clone(), &cfg.p_list, &base, ContinuationOptions { warm_start: cfg.solver.warm_start })?;
    let summary = analyze(&setup, &run, cfg)?;
    Ok(FlowOutcome { setup, run, summary })
}

/// Diagnostics of a finished continuation run.
pub fn analyze(setup: &Setup, run: &ContinuationResult, cfg: &ExperimentConfig) -> Result<FlowSummary> {
    let norm = &setup.norm;
    let u = &run.extrapolated;
    let t_grid = match &cfg.t_grid {
        TGridSpec::Auto { count, lo_fraction } => auto_t_grid(norm, u, setup.window, *count, *lo_fraction)?,
        TGridSpec::Explicit { values } => values.clone(),
    };
    let asymptotics = estimate_gamma(norm, u, &t_grid, setup.window)?;
    let barrier = barrier_check(norm, u, setup.radii.r1, setup.radii.r2, setup.window)?;
    let gradient_bounds: Vec<GradientRow> = gradient_bound_table(norm, run, setup.window)?.into_iter().map(|(p, bound)| GradientRow { p, bound }).collect();
    let solved: Vec<f64> = gradient_bounds.iter().filter(|g| g.p > 1.0).map(|g| g.bound.sup).collect();
    let gradient_ratio = solved.iter().copied().fold(0.0, f64::max) / solved.iter().copied().fold(f64::INFINITY, f64::min);
    let mut minimality = Vec::new();
    if let Some(spec) = cfg.minimality {
        let trusted: Vec<f64> = asymptotics.levels.iter().filter(|s| s.trusted && s.components == 1).map(|s| s.t).collect();
        for (i, t) in spread(&trusted, spec.levels).into_iter().enumerate() {
            minimality.push(minimality_check(norm, u, t, spec.competitors, cfg.rng_seed.wrapping_add(i as u64))?);
        }
    }
    Ok(FlowSummary {
        norm: norm.label(),
        radii: setup.radii,
        domain_perimeter: anisotropic_perimeter(norm, &setup.domain),
        outer_radius: setup.outer_radius,
        window: setup.window,
        nodes: setup.mesh.node_count(),
        stages: run.stages.iter().map(|s| StageSummary { p: s.p, epsilon: s.epsilon, iterations: s.iterations(), error: s.error.clone() }).collect(),
        barrier,
        gradient_bounds,
        gradient_ratio,
        asymptotics,
        minimality,
    })
}

/// Up to `k` entries of `xs`, evenly spread and including both ends.
pub fn spread(xs: &[f64], k: usize) -> Vec<f64> {
    match (xs.len(), k) {
        (0, _) | (_, 0) => Vec::new(),
        (n, k) if k >= n => xs.to_vec(),
        (_, 1) => vec![xs[xs.len() / 2]],
        (n, k) => (0..k).map(|i| xs[i * (n - 1) / (k - 1)]).collect(),
    }
}

/// One sweep per configured boundary profile.
pub fn estimates(cfg: &ExperimentConfig) -> Result<Vec<SweepTable>> {
    let norm = cfg.norm.build()?;
    let e = &cfg.estimates;
    e.profiles
        .iter()
        .map(|profile| {
            let template = LocalEstimateCase { norm: norm.clone(), radius: e.radius, p: e.p_list[0], profile: profile.clone() };
            p_uniformity_sweep(&template, &e.p_list, e.resolution)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spread_keeps_ends() {
        let xs: Vec<f64> = (0..10).map(f64::from).collect();
        assert_eq!(spread(&xs, 3), vec![0.0, 4.0, 9.0]);
        assert_eq!(spread(&xs, 20).len(), 10);
        assert!(spread(&[], 3).is_empty());
    }
}
