//! Anisotropic p-capacitary potentials on truncated exterior domains and the flow
//! variable `u_p = (1 - p) log v_p`.

mod continuation;
mod field;
mod linear;
pub mod mesh;
mod radial;
pub(crate) mod solver;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use continuation::{p_continuation, extrapolate, ContinuationOptions, ContinuationResult, Stage};
pub use field::{Quantity, ScalarField};
pub use mesh::{generate_annulus_mesh, generate_disk_mesh, truncated_exterior_mesh, AnnulusMesh, Element, NodeTag, Topology};
pub use radial::{radial_profile, radial_profile_inverse, radial_reference};
pub use solver::{IterRecord, IterationKind, V_FLOOR};

use crate::error::{Error, Result};
use crate::norm::MinkowskiNorm;

/// Default for `ε₀`. The regularization enters as `hypot(F, ε·scale)`, so it only has to
/// stay below the smallest gradients of interest, which reach far below `1e-100` for `p`
/// near 1.
pub const DEFAULT_EPSILON: f64 = 1e-200;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub p: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_tol_energy")]
    pub tol_energy: f64,
    #[serde(default = "default_tol_residual")]
    pub tol_residual: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    pub outer_radius_l: f64,
    #[serde(default)]
    pub iteration: IterationKind,
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}
fn default_tol_energy() -> f64 {
    1e-12
}
fn default_tol_residual() -> f64 {
    1e-9
}
fn default_max_iter() -> usize {
    200
}

impl SolverConfig {
    pub fn new(p: f64, outer_radius_l: f64) -> Self {
        Self {
            p,
            epsilon: DEFAULT_EPSILON,
            tol_energy: default_tol_energy(),
            tol_residual: default_tol_residual(),
            max_iter: default_max_iter(),
            outer_radius_l,
            iteration: IterationKind::Newton,
        }
    }

    pub fn with_p(&self, p: f64) -> Self {
        Self { p, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 1.0 && self.p <= 2.0) {
            return Err(Error::Config(format!("p must lie in (1, 2], got {}", self.p)));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Config(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if !(self.tol_energy > 0.0 && self.tol_residual > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be at least 1".into()));
        }
        if !(self.outer_radius_l > 0.0 && self.outer_radius_l.is_finite()) {
            return Err(Error::Config(format!("outer radius must be positive, got {}", self.outer_radius_l)));
        }
        Ok(())
    }
}

/// Starting field for a capacitary solve.
#[derive(Clone, Debug)]
pub enum InitialGuess {
    /// Per ray, `v` linear in `log F°` between the inner (1) and outer (0) crossings.
    LogInterpolant,
    /// Per ray, the exact radial profile for the current `p` between the two crossings.
    RayProfile,
    /// A converged potential for another exponent, mapped ray by ray through the radial
    /// profiles of both exponents.
    Transfer { from: ScalarField },
    Values(Vec<f64>),
}

/// Converged capacitary potential and its iteration log.
#[derive(Clone, Debug)]
pub struct Solution {
    pub field: ScalarField,
    pub log: Vec<IterRecord>,
}

impl Solution {
    pub fn iterations(&self) -> usize {
        self.log.len().saturating_sub(1)
    }
}

/// Inner and outer `F°` along every ray of an annulus mesh.
pub(crate) fn ray_bounds(norm: &MinkowskiNorm, mesh: &AnnulusMesh) -> Result<Vec<(f64, f64)>> {
    (0..mesh.rays())
        .map(|i| {
            let c = mesh.center();
            let a = norm.dual(mesh.nodes()[mesh.ray_node(0, i)] - c)?;
            let b = norm.dual(mesh.nodes()[mesh.ray_node(mesh.layers(), i)] - c)?;
            Ok((a, b))
        })
        .collect()
}

fn initial_values(norm: &MinkowskiNorm, mesh: &AnnulusMesh, p: f64, guess: InitialGuess) -> Result<Vec<f64>> {
    let n = mesh.node_count();
    if let InitialGuess::Values(v) = guess {
        if v.len() != n {
            return Err(Error::Config(format!("initial guess has {} values for {n} nodes", v.len())));
        }
        return Ok(v);
    }
    if mesh.topology() != Topology::Annulus {
        return Err(Error::Config("ray-based initial guesses need an annulus mesh".into()));
    }
    let bounds = ray_bounds(norm, mesh)?;
    let c = mesh.center();
    let mut v = vec![0.0; n];
    for (i, &(a, b)) in bounds.iter().enumerate() {
        for j in 0..=mesh.layers() {
            let k = mesh.ray_node(j, i);
            let r = norm.dual(mesh.nodes()[k] - c)?.clamp(a, b);
            v[k] = match &guess {
                InitialGuess::LogInterpolant => (b / r).ln() / (b / a).ln(),
                InitialGuess::RayProfile => radial_profile(p, a, b, r),
                InitialGuess::Transfer { from } => {
                    let rho = radial_profile_inverse(from.p(), a, b, from.values()[k]);
                    radial_profile(p, a, b, rho)
                }
                InitialGuess::Values(_) => unreachable!(),
            };
        }
    }
    Ok(v)
}

/// Reference gradient scale `(data range)/(reference diameter)` that makes `ε`
/// dimensionless.
pub fn reference_scale(mesh: &AnnulusMesh, data_range: f64) -> f64 {
    let d = mesh.reference_diameter();
    if data_range > 0.0 && d > 0.0 {
        data_range / d
    } else {
        1.0
    }
}

pub(crate) fn settings(config: &SolverConfig, scale: f64) -> solver::Settings {
    solver::Settings {
        p: config.p,
        eps: config.epsilon * scale,
        tol_energy: config.tol_energy,
        tol_residual: config.tol_residual,
        max_iter: config.max_iter,
        kind: config.iteration,
    }
}

/// Minimizes the p-energy with `v = 1` on inner and `v = 0` on outer nodes, starting from
/// the log interpolant.
pub fn solve_capacitary(norm: &MinkowskiNorm, mesh: Arc<AnnulusMesh>, config: &SolverConfig) -> Result<Solution> {
    solve_capacitary_from(norm, mesh, config, InitialGuess::LogInterpolant)
}

pub fn solve_capacitary_from(norm: &MinkowskiNorm, mesh: Arc<AnnulusMesh>, config: &SolverConfig, guess: InitialGuess) -> Result<Solution> {
    config.validate()?;
    if mesh.topology() != Topology::Annulus {
        return Err(Error::MeshInvalid("capacitary problems need an annulus mesh".into()));
    }
    let mut v = initial_values(norm, &mesh, config.p, guess)?;
    let free: Vec<bool> = mesh.tags().iter().map(|t| *t == NodeTag::Interior).collect();
    for (x, t) in v.iter_mut().zip(mesh.tags()) {
        match t {
            NodeTag::Inner => *x = 1.0,
            NodeTag::Outer => *x = 0.0,
            NodeTag::Interior => {}
        }
    }
    let s = settings(config, reference_scale(&mesh, 1.0));
    let out = solver::minimize(norm, &mesh, v, &free, &s)?;
    let field = ScalarField::new(mesh.clone(), out.values, Quantity::CapacitaryV, config.p)?;
    if let Some(err) = out.failure {
        return Err(match err {
            Error::NoConvergence { iterations, context, .. } => Error::NoConvergence { iterations, context, best: Some(Box::new(field)) },
            other => other,
        });
    }
    if let Some((node, &value)) = field.values().iter().enumerate().find(|(_, x)| !(-1e-12..=1.0 + 1e-9).contains(*x)) {
        return Err(Error::OutOfRange(format!("capacitary potential {value} at node {node} violates the maximum principle")));
    }
    Ok(Solution { field, log: out.log })
}

/// Discrete p-energy of a nodal field with the solver's regularization.
pub fn discrete_energy(norm: &MinkowskiNorm, field: &ScalarField, config: &SolverConfig) -> f64 {
    let scale = reference_scale(field.mesh(), 1.0);
    solver::energy(norm, field.mesh(), field.values(), config.p, config.epsilon * scale)
}

/// `u_p = (1 - p) log max(v, 1e-300)`. Outer nodes carry the cap and are untrusted.
pub fn to_flow_variable(field: &ScalarField) -> Result<ScalarField> {
    if field.quantity() != Quantity::CapacitaryV {
        return Err(Error::Config("to_flow_variable expects a capacitary potential".into()));
    }
    let p = field.p();
    let u = field.values().iter().map(|v| (1.0 - p) * v.max(V_FLOOR).ln()).collect();
    ScalarField::new(field.mesh_arc(), u, Quantity::FlowU, p)
}

/// Initial guess for `p` obtained from the log interpolant, exposed for energy
/// comparisons.
pub fn log_interpolant(norm: &MinkowskiNorm, mesh: Arc<AnnulusMesh>, p: f64) -> Result<ScalarField> {
    let mut v = initial_values(norm, &mesh, p, InitialGuess::LogInterpolant)?;
    for (x, t) in v.iter_mut().zip(mesh.tags()) {
        match t {
            NodeTag::Inner => *x = 1.0,
            NodeTag::Outer => *x = 0.0,
            NodeTag::Interior => {}
        }
    }
    ScalarField::new(mesh, v, Quantity::CapacitaryV, p)
}
