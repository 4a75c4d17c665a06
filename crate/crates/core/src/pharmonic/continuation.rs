use std::sync::Arc;

use serde::Serialize;

use super::{solve_capacitary_from, to_flow_variable, AnnulusMesh, InitialGuess, IterRecord, Quantity, ScalarField, SolverConfig};
use crate::error::{Error, Result};
use crate::norm::MinkowskiNorm;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ContinuationOptions {
    /// Start each stage from the previous converged potential; otherwise every stage
    /// starts from the log interpolant.
    pub warm_start: bool,
}

impl Default for ContinuationOptions {
    fn default() -> Self {
        Self { warm_start: true }
    }
}

/// One exponent of a continuation run. Failed stages keep their error and no field.
#[derive(Clone, Debug)]
pub struct Stage {
    pub p: f64,
    pub epsilon: f64,
    pub potential: Option<ScalarField>,
    pub flow: Option<ScalarField>,
    pub log: Vec<IterRecord>,
    pub error: Option<String>,
}

impl Stage {
    pub fn iterations(&self) -> usize {
        self.log.len().saturating_sub(1)
    }
}

#[derive(Clone, Debug)]
pub struct ContinuationResult {
    pub stages: Vec<Stage>,
    /// Linear extrapolation in `p - 1` to `p = 1` from the last two converged stages.
    pub extrapolated: ScalarField,
}

impl ContinuationResult {
    pub fn converged(&self) -> impl Iterator<Item = &Stage> {
        self.stages.iter().filter(|s| s.flow.is_some())
    }
}

/// Value at `p = 1` of the line through `(p_a - 1, u_a)` and `(p_b - 1, u_b)` at each
/// trusted node.
pub fn extrapolate(a: &ScalarField, b: &ScalarField) -> Result<ScalarField> {
    if a.values().len() != b.values().len() || (a.p() - b.p()).abs() < 1e-12 {
        return Err(Error::Config("extrapolation needs two distinct exponents on one mesh".into()));
    }
    let w = (b.p() - 1.0) / (a.p() - b.p());
    // Untrusted nodes keep the cap of the later stage.
    let values = (0..b.values().len())
        .map(|k| {
            let (ua, ub) = (a.values()[k], b.values()[k]);
            if b.is_trusted(k) {
                ub + (ub - ua) * w
            } else {
                ub
            }
        })
        .collect();
    b.with_values(values, Quantity::FlowU, 1.0)
}

/// Solves for each `p` in the descending list with `ε(p) = ε₀(p - 1)`, warm-starting
/// every stage from the last converged one.
pub fn p_continuation(
    norm: &MinkowskiNorm,
    mesh: Arc<AnnulusMesh>,
    p_list: &[f64],
    base: &SolverConfig,
    options: ContinuationOptions,
) -> Result<ContinuationResult> {
    if p_list.is_empty() {
        return Err(Error::Config("p_list is empty".into()));
    }
    if p_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Config("p_list must be strictly descending".into()));
    }
    if let Some(p) = p_list.iter().find(|p| !(**p >= 1.01 - 1e-12 && **p <= 2.0)) {
        return Err(Error::Config(format!("continuation exponents must lie in [1.01, 2], got {p}")));
    }
    let mut stages: Vec<Stage> = Vec::with_capacity(p_list.len());
    for &p in p_list {
        let config = SolverConfig { p, epsilon: base.epsilon * (p - 1.0), ..base.clone() };
        let previous = stages.iter().rev().find_map(|s| s.potential.clone());
        let guess = match previous {
            Some(from) if options.warm_start => InitialGuess::Transfer { from },
            _ => InitialGuess::LogInterpolant,
        };
        let stage = match solve_capacitary_from(norm, mesh.clone(), &config, guess) {
            Ok(sol) => {
                let flow = to_flow_variable(&sol.field)?;
                Stage { p, epsilon: config.epsilon, potential: Some(sol.field), flow: Some(flow), log: sol.log, error: None }
            }
            Err(e) => Stage { p, epsilon: config.epsilon, potential: None, flow: None, log: Vec::new(), error: Some(e.to_string()) },
        };
        stages.push(stage);
    }
    let done: Vec<&ScalarField> = stages.iter().filter_map(|s| s.flow.as_ref()).collect();
    let extrapolated = match done.as_slice() {
        [] => {
            let why = stages.iter().filter_map(|s| s.error.clone()).collect::<Vec<_>>().join("; ");
            return Err(Error::NoConvergence { iterations: 0, context: format!("every continuation stage failed: {why}"), best: None });
        }
        [only] => (*only).clone(),
        [.., a, b] => extrapolate(a, b)?,
    };
    Ok(ContinuationResult { stages, extrapolated })
}
