//! Minimization of the discrete p-energy `Σ area·F_ε(Dv)^p / p` over P1 fields with
//! Dirichlet data.

use serde::{Deserialize, Serialize};

use super::linear::FreeSystem;
use super::mesh::AnnulusMesh;
use crate::error::{Error, Result};
use crate::norm::MinkowskiNorm;
use crate::Vec2;

/// Smallest value a positive nodal unknown may take.
pub const V_FLOOR: f64 = 1e-300;
const ARMIJO: f64 = 1e-4;
const ENERGY_NOISE: f64 = 1e-13;
const MAX_LOG_STEP: f64 = 30.0;
const MAX_BACKTRACKS: usize = 60;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IterationKind {
    /// Newton steps on `v` applied multiplicatively, `v ← v·exp(α d / v)`; keeps `v > 0`
    /// across the many decades the capacitary potential spans as `p → 1`.
    #[default]
    Newton,
    /// Lagged diffusivity: frozen coefficient `F_ε^{p-2} D²G`, additive update.
    Picard,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IterRecord {
    pub iter: usize,
    pub energy: f64,
    /// Largest scaled residual over free nodes.
    pub residual: f64,
    pub step: f64,
    pub backtracks: usize,
}

pub(crate) struct Minimized {
    pub values: Vec<f64>,
    pub log: Vec<IterRecord>,
    /// Set when the iteration stopped without meeting the tolerances; `values` is then
    /// the last accepted iterate.
    pub failure: Option<Error>,
}

pub(crate) struct Settings {
    pub p: f64,
    /// Absolute regularization `ε·reference_scale`.
    pub eps: f64,
    pub tol_energy: f64,
    pub tol_residual: f64,
    pub max_iter: usize,
    pub kind: IterationKind,
}

struct Eval {
    energy: f64,
    grad: Vec<f64>,
    scale: Vec<f64>,
}

impl Eval {
    fn residuals<'a>(&'a self, free: &'a [bool]) -> impl Iterator<Item = f64> + 'a {
        self.grad.iter().zip(&self.scale).zip(free).filter(|(_, f)| **f).map(|((g, s), _)| {
            if *s > 0.0 {
                g.abs() / s
            } else if *g == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        })
    }

    fn max_residual(&self, free: &[bool]) -> f64 {
        self.residuals(free).fold(0.0, f64::max)
    }

    fn merit(&self, free: &[bool]) -> f64 {
        self.residuals(free).map(|r| r * r).sum::<f64>().sqrt()
    }
}

/// Gradient of a P1 field on one element.
#[inline]
pub(crate) fn element_gradient(grads: &[Vec2; 3], tri: &[usize; 3], v: &[f64]) -> Vec2 {
    // Differences make constants exact.
    let v0 = v[tri[0]];
    grads[1] * (v[tri[1]] - v0) + grads[2] * (v[tri[2]] - v0)
}

pub(crate) fn energy(norm: &MinkowskiNorm, mesh: &AnnulusMesh, v: &[f64], p: f64, eps: f64) -> f64 {
    mesh.triangles()
        .iter()
        .zip(mesh.elements())
        .map(|(t, e)| e.area * norm.eval(element_gradient(&e.grads, t, v)).hypot(eps).powf(p) / p)
        .sum()
}

fn evaluate(norm: &MinkowskiNorm, mesh: &AnnulusMesh, v: &[f64], s: &Settings, hessian: Option<&mut Vec<[[f64; 3]; 3]>>) -> Eval {
    let n = mesh.node_count();
    let mut out = Eval { energy: 0.0, grad: vec![0.0; n], scale: vec![0.0; n] };
    let mut local = hessian;
    if let Some(h) = local.as_deref_mut() {
        h.clear();
    }
    for (t, e) in mesh.triangles().iter().zip(mesh.elements()) {
        let xi = element_gradient(&e.grads, t, v);
        let (f, dg, d2g) = norm.g_parts(xi);
        let fe = f.hypot(s.eps);
        let w = fe.powf(s.p - 2.0);
        out.energy += e.area * fe.powf(s.p) / s.p;
        let flux = dg * w;
        let flux_norm = flux.norm();
        for k in 0..3 {
            out.grad[t[k]] += e.area * flux.dot(&e.grads[k]);
            out.scale[t[k]] += e.area * flux_norm * e.grads[k].norm();
        }
        if let Some(h) = local.as_deref_mut() {
            let mut m = d2g * w;
            if s.kind == IterationKind::Newton {
                let n = dg / fe;
                m += n * n.transpose() * ((s.p - 2.0) * w);
            }
            let mut k = [[0.0; 3]; 3];
            for a in 0..3 {
                let mb = m * e.grads[a];
                for b in 0..3 {
                    k[a][b] = e.area * e.grads[b].dot(&mb);
                }
            }
            h.push(k);
        }
    }
    out
}

fn apply(v: &[f64], d: &[f64], free: &[bool], alpha: f64, kind: IterationKind) -> Vec<f64> {
    v.iter()
        .zip(d)
        .zip(free)
        .map(|((&x, &dx), &f)| match (f, kind) {
            (false, _) => x,
            (true, IterationKind::Newton) => (x * (alpha * dx / x).exp()).max(V_FLOOR),
            (true, IterationKind::Picard) => x + alpha * dx,
        })
        .collect()
}

/// Minimizes the regularized p-energy from `v0`, holding non-free nodes fixed.
///
/// A step is accepted when the energy satisfies the Armijo condition (up to rounding
/// noise) and the scaled residual decreases; the latter guards regions where the
/// potential is too small to register in the energy.
pub(crate) fn minimize(norm: &MinkowskiNorm, mesh: &AnnulusMesh, v0: Vec<f64>, free: &[bool], s: &Settings) -> Result<Minimized> {
    let system = FreeSystem::new(mesh, free)?;
    let mut v = v0;
    if s.kind == IterationKind::Newton {
        for (x, f) in v.iter_mut().zip(free) {
            if *f {
                *x = x.max(V_FLOOR);
            }
        }
    }
    let mut local = Vec::with_capacity(mesh.triangle_count());
    let mut log = Vec::new();
    let mut last_decrease = f64::INFINITY;
    for iter in 0..=s.max_iter {
        let cur = evaluate(norm, mesh, &v, s, Some(&mut local));
        let res = cur.max_residual(free);
        let done = res <= s.tol_residual && (iter == 0 || last_decrease <= s.tol_energy);
        if done || iter == s.max_iter {
            log.push(IterRecord { iter, energy: cur.energy, residual: res, step: 0.0, backtracks: 0 });
            if done {
                return Ok(Minimized { values: v, log, failure: None });
            }
            break;
        }
        let rhs: Vec<f64> = cur.grad.iter().map(|g| -g).collect();
        let d = system.solve(&local, &rhs)?;
        let slope: f64 = cur.grad.iter().zip(&d).zip(free).filter(|(_, f)| **f).map(|((g, x), _)| g * x).sum();
        let mut alpha: f64 = 1.0;
        if s.kind == IterationKind::Newton {
            let big = v.iter().zip(&d).zip(free).filter(|(_, f)| **f).map(|((x, dx), _)| (dx / x).abs()).fold(0.0, f64::max);
            if big > 0.0 {
                alpha = alpha.min(MAX_LOG_STEP / big);
            }
        }
        let merit0 = cur.merit(free);
        let noise = ENERGY_NOISE * cur.energy.abs();
        let mut accepted = None;
        let mut lowest_energy = f64::INFINITY;
        let mut backtracks = 0;
        while backtracks < MAX_BACKTRACKS {
            let trial = apply(&v, &d, free, alpha, s.kind);
            let ev = evaluate(norm, mesh, &trial, s, None);
            lowest_energy = lowest_energy.min(ev.energy);
            let energy_ok = ev.energy <= cur.energy + ARMIJO * alpha * slope + noise;
            let merit_ok = s.kind == IterationKind::Picard || ev.merit(free) <= (1.0 - ARMIJO * alpha) * merit0;
            if energy_ok && merit_ok {
                accepted = Some((trial, ev.energy));
                break;
            }
            alpha *= 0.5;
            backtracks += 1;
        }
        log.push(IterRecord { iter, energy: cur.energy, residual: res, step: if accepted.is_some() { alpha } else { 0.0 }, backtracks });
        match accepted {
            Some((trial, e)) => {
                last_decrease = (cur.energy - e) / cur.energy.abs().max(f64::MIN_POSITIVE);
                v = trial;
            }
            // Stalled at rounding level: the iterate is as good as this precision allows.
            None if res <= 1e3 * s.tol_residual => return Ok(Minimized { values: v, log, failure: None }),
            None if lowest_energy > cur.energy + noise => {
                return Ok(Minimized { values: v, log, failure: Some(Error::NotMonotone { iteration: iter }) })
            }
            None => break,
        }
    }
    let res = log.last().map_or(f64::NAN, |r| r.residual);
    let error = Error::NoConvergence {
        iterations: log.len().saturating_sub(1),
        context: format!("p = {}, scaled residual {res:e}", s.p),
        best: None,
    };
    Ok(Minimized { values: v, log, failure: Some(error) })
}
