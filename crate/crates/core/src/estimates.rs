//! Interior gradient estimate for positive p-harmonic functions on Wulff balls: the
//! constant `max_{𝒲_{R/2}} F(Du)·R` with `u = (1 - p) log v`, measured across `p`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::norm::MinkowskiNorm;
use crate::pharmonic::{generate_disk_mesh, reference_scale, settings, solver, AnnulusMesh, NodeTag, SolverConfig};
use crate::wulff::{wulff_boundary, WulffShapeSpec};
use crate::Vec2;

/// Largest admissible ratio between boundary values of `v^{p-1}`.
pub const MAX_CONTRAST: f64 = 10.0;

/// Dirichlet data on `∂𝒲_R`, described through `u = (1 - p) log v`, so that the
/// contrast of `v^{p-1}` stays fixed as `p` varies.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundaryProfile {
    Constant,
    /// `u` affine in `⟨direction, x⟩`, ranging over `[0, log contrast]`.
    Tilted { direction: [f64; 2], contrast: f64 },
    /// Radial p-harmonic profile about a pole in the given direction with
    /// `F°(pole) = distance·R`; the pole must lie outside the closed ball.
    TranslatedRadial { direction: [f64; 2], distance: f64 },
}

#[derive(Clone, Debug)]
pub struct LocalEstimateCase {
    pub norm: MinkowskiNorm,
    pub radius: f64,
    pub p: f64,
    pub profile: BoundaryProfile,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Resolution {
    pub layers: usize,
    pub rays: usize,
}

impl Default for Resolution {
    fn default() -> Self {
        Self { layers: 48, rays: 192 }
    }
}

/// Closed-form translated radial solution.
struct TranslatedRadial {
    pole: Vec2,
    rho_min: f64,
    rho_max: f64,
    p: f64,
}

impl TranslatedRadial {
    fn new(norm: &MinkowskiNorm, radius: f64, direction: [f64; 2], distance: f64, p: f64) -> Result<Self> {
        let dir = Vec2::from(direction);
        if dir.norm() == 0.0 {
            return Err(Error::Config("pole direction must be nonzero".into()));
        }
        if !(distance > 1.0 + 1e-9) {
            return Err(Error::Config(format!("translated radial pole must lie outside the ball, got distance {distance}")));
        }
        let d = distance * radius;
        let pole = dir * (d / norm.dual(dir)?);
        Ok(Self { pole, rho_min: d - radius, rho_max: d + radius, p })
    }

    fn v(&self, norm: &MinkowskiNorm, x: Vec2) -> Result<f64> {
        let rho = norm.dual(x - self.pole)?;
        Ok(if self.p < 2.0 {
            (rho / self.rho_min).powf(-(2.0 - self.p) / (self.p - 1.0))
        } else {
            1.0 + (self.rho_max / rho).ln()
        })
    }

    /// `F(Du)` as a function of `ρ = F°(x - pole)`.
    fn gradient_norm(&self, rho: f64) -> f64 {
        if self.p < 2.0 {
            (2.0 - self.p) / rho
        } else {
            1.0 / (rho * (1.0 + (self.rho_max / rho).ln()))
        }
    }
}

impl LocalEstimateCase {
    pub fn validate(&self) -> Result<()> {
        if !(self.p > 1.0 && self.p <= 2.0) {
            return Err(Error::Config(format!("p must lie in (1, 2], got {}", self.p)));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::Config(format!("radius must be positive, got {}", self.radius)));
        }
        match &self.profile {
            BoundaryProfile::Constant => Ok(()),
            BoundaryProfile::Tilted { direction, contrast } => {
                if Vec2::from(*direction).norm() == 0.0 {
                    return Err(Error::Config("tilt direction must be nonzero".into()));
                }
                if !(*contrast >= 1.0 && *contrast <= MAX_CONTRAST) {
                    return Err(Error::Config(format!("contrast must lie in [1, {MAX_CONTRAST}], got {contrast}")));
                }
                Ok(())
            }
            BoundaryProfile::TranslatedRadial { direction, distance } => {
                let tr = TranslatedRadial::new(&self.norm, self.radius, *direction, *distance, self.p)?;
                let contrast = (tr.rho_max / tr.rho_min).powf(2.0 - self.p);
                if contrast > MAX_CONTRAST && self.p < 2.0 {
                    return Err(Error::Config(format!("translated radial data has contrast {contrast:.3} > {MAX_CONTRAST}")));
                }
                Ok(())
            }
        }
    }

    /// Boundary values of `u` at the given boundary points.
    fn boundary_u(&self, points: &[Vec2]) -> Result<Vec<f64>> {
        match &self.profile {
            BoundaryProfile::Constant => Ok(vec![0.0; points.len()]),
            BoundaryProfile::Tilted { direction, contrast } => {
                let e = Vec2::from(*direction).normalize();
                let m = points.iter().map(|x| e.dot(x).abs()).fold(0.0, f64::max);
                Ok(points.iter().map(|x| contrast.ln() * (e.dot(x) + m) / (2.0 * m)).collect())
            }
            BoundaryProfile::TranslatedRadial { direction, distance } => {
                let tr = TranslatedRadial::new(&self.norm, self.radius, *direction, *distance, self.p)?;
                points.iter().map(|x| Ok((1.0 - self.p) * tr.v(&self.norm, *x)?.ln())).collect()
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LocalEstimate {
    pub p: f64,
    /// `max F(Du)·R` over triangles with barycenter in `𝒲_{R/2}`.
    pub result: f64,
    /// Closed-form value of the same quantity, when one exists.
    pub analytic: Option<f64>,
    /// `max |v - v_exact|` over all nodes, when a closed form exists.
    pub max_error: Option<f64>,
    pub min_v: f64,
    pub iterations: usize,
}

pub fn disk_mesh(norm: &MinkowskiNorm, radius: f64, resolution: Resolution) -> Result<AnnulusMesh> {
    let boundary = wulff_boundary(norm, WulffShapeSpec::centered(radius)?, resolution.rays)?;
    generate_disk_mesh(boundary, resolution.layers, resolution.rays)
}

/// Solves `Δ_{p,F} v = 0` on `𝒲_R` with the case's boundary data and measures the
/// interior gradient constant.
pub fn run_local_estimate(case: &LocalEstimateCase, resolution: Resolution) -> Result<LocalEstimate> {
    case.validate()?;
    let norm = &case.norm;
    let mesh = Arc::new(disk_mesh(norm, case.radius, resolution)?);
    let nl = mesh.layers();
    let boundary: Vec<Vec2> = (0..mesh.rays()).map(|i| mesh.nodes()[mesh.ray_node(nl, i)]).collect();
    let ub = case.boundary_u(&boundary)?;
    let center_u = ub.iter().sum::<f64>() / ub.len() as f64;
    // Start from the ray-wise blend of the center average and the boundary data.
    let mut u0 = vec![center_u; mesh.node_count()];
    for (i, &b) in ub.iter().enumerate() {
        for j in 1..=nl {
            u0[mesh.ray_node(j, i)] = center_u + (b - center_u) * j as f64 / nl as f64;
        }
    }
    let pm1 = case.p - 1.0;
    let v0: Vec<f64> = u0.iter().map(|u| (-u / pm1).exp()).collect();
    let free: Vec<bool> = mesh.tags().iter().map(|t| *t == NodeTag::Interior).collect();
    let boundary_v: Vec<f64> = ub.iter().map(|u| (-u / pm1).exp()).collect();
    let range = boundary_v.iter().copied().fold(f64::NEG_INFINITY, f64::max) - boundary_v.iter().copied().fold(f64::INFINITY, f64::min);
    let config = SolverConfig::new(case.p, case.radius);
    let out = solver::minimize(norm, &mesh, v0, &free, &settings(&config, reference_scale(&mesh, range)))?;
    if let Some(e) = out.failure {
        return Err(e);
    }
    let v = out.values;
    let (node, min_v) = v.iter().copied().enumerate().fold((0, f64::INFINITY), |a, (k, x)| if x < a.1 { (k, x) } else { a });
    if !(min_v > 0.0) {
        return Err(Error::PositivityLost { node, value: min_v });
    }
    let u: Vec<f64> = v.iter().map(|x| -pm1 * x.ln()).collect();
    let mut result: f64 = 0.0;
    for (t, (tri, e)) in mesh.triangles().iter().zip(mesh.elements()).enumerate() {
        if norm.dual(mesh.barycenter(t))? <= 0.5 * case.radius {
            let g = solver::element_gradient(&e.grads, tri, &u);
            result = result.max(norm.eval(g) * case.radius);
        }
    }
    let (analytic, max_error) = match &case.profile {
        BoundaryProfile::TranslatedRadial { direction, distance } => {
            let tr = TranslatedRadial::new(norm, case.radius, *direction, *distance, case.p)?;
            let rho = norm.dual(tr.pole)? - 0.5 * case.radius;
            let mut err: f64 = 0.0;
            for (x, vx) in mesh.nodes().iter().zip(&v) {
                err = err.max((vx - tr.v(norm, *x)?).abs());
            }
            (Some(tr.gradient_norm(rho) * case.radius), Some(err))
        }
        _ => (None, None),
    };
    Ok(LocalEstimate { p: case.p, result, analytic, max_error, min_v, iterations: out.log.len().saturating_sub(1) })
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepTable {
    pub norm: String,
    pub profile: BoundaryProfile,
    pub resolution: Resolution,
    pub rows: Vec<LocalEstimate>,
    /// `max/min` of the results; 1 when every result vanishes.
    pub ratio: f64,
}

pub fn p_uniformity_sweep(template: &LocalEstimateCase, p_list: &[f64], resolution: Resolution) -> Result<SweepTable> {
    if p_list.is_empty() {
        return Err(Error::Config("p_list is empty".into()));
    }
    let rows = p_list
        .iter()
        .map(|&p| run_local_estimate(&LocalEstimateCase { p, ..template.clone() }, resolution))
        .collect::<Result<Vec<_>>>()?;
    let max = rows.iter().map(|r| r.result).fold(0.0, f64::max);
    let min = rows.iter().map(|r| r.result).fold(f64::INFINITY, f64::min);
    let ratio = if max == 0.0 { 1.0 } else { max / min };
    Ok(SweepTable { norm: template.norm.label(), profile: template.profile.clone(), resolution, rows, ratio })
}
