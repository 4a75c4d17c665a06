use std::path::Path;
use std::sync::Arc;

use serde::Serialize;

use super::mesh::{AnnulusMesh, NodeTag};
use super::solver::element_gradient;
use crate::error::{Error, Result};
use crate::Vec2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Quantity {
    CapacitaryV,
    FlowU,
}

/// Nodal P1 field on a shared mesh, tagged with the exponent it was computed for.
#[derive(Clone, Debug)]
pub struct ScalarField {
    mesh: Arc<AnnulusMesh>,
    values: Vec<f64>,
    quantity: Quantity,
    p: f64,
}

impl ScalarField {
    pub fn new(mesh: Arc<AnnulusMesh>, values: Vec<f64>, quantity: Quantity, p: f64) -> Result<Self> {
        if values.len() != mesh.node_count() {
            return Err(Error::Config(format!("{} values for {} nodes", values.len(), mesh.node_count())));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::DegenerateInput(format!("non-finite value at node {k}")));
        }
        Ok(Self { mesh, values, quantity, p })
    }

    pub fn mesh(&self) -> &AnnulusMesh {
        &self.mesh
    }

    pub fn mesh_arc(&self) -> Arc<AnnulusMesh> {
        self.mesh.clone()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn quantity(&self) -> Quantity {
        self.quantity
    }

    /// Exponent of the solve; extrapolated flow fields report `1`.
    pub fn p(&self) -> f64 {
        self.p
    }

    /// Constant gradient on triangle `t`.
    pub fn gradient(&self, t: usize) -> Vec2 {
        element_gradient(&self.mesh.elements()[t].grads, &self.mesh.triangles()[t], &self.values)
    }

    /// Outer nodes of a flow field sit in the truncation zone.
    pub fn is_trusted(&self, node: usize) -> bool {
        !(self.quantity == Quantity::FlowU && self.mesh.tag(node) == NodeTag::Outer)
    }

    pub fn with_values(&self, values: Vec<f64>, quantity: Quantity, p: f64) -> Result<Self> {
        Self::new(self.mesh.clone(), values, quantity, p)
    }

    /// Value at `x` by linear interpolation on the containing triangle, `None` outside.
    pub fn interpolate(&self, x: Vec2) -> Option<f64> {
        let nodes = self.mesh.nodes();
        for (t, e) in self.mesh.triangles().iter().zip(self.mesh.elements()) {
            let x0 = nodes[t[0]];
            let l1 = e.grads[1].dot(&(x - x0));
            let l2 = e.grads[2].dot(&(x - x0));
            let l0 = 1.0 - l1 - l2;
            let tol = -1e-12;
            if l0 >= tol && l1 >= tol && l2 >= tol {
                return Some(l0 * self.values[t[0]] + l1 * self.values[t[1]] + l2 * self.values[t[2]]);
            }
        }
        None
    }

    /// Checkpoint as `node,x,y,value,tag`.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["node", "x", "y", "value", "tag"])?;
        for (k, (x, v)) in self.mesh.nodes().iter().zip(&self.values).enumerate() {
            let tag = match self.mesh.tag(k) {
                NodeTag::Inner => "inner",
                NodeTag::Outer => "outer",
                NodeTag::Interior => "interior",
            };
            w.write_record([k.to_string(), x.x.to_string(), x.y.to_string(), v.to_string(), tag.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}
