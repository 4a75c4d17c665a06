//! Weak inverse anisotropic mean curvature flow in the plane, computed through the
//! p-capacitary approximation `u_p = (1 - p) log v_p` and checked against barrier,
//! gradient and asymptotic estimates.

pub mod acceptance;
pub mod config;
pub mod error;
pub mod estimates;
pub mod flow;
pub mod norm;
pub mod pharmonic;
pub mod report;
pub mod run;
pub mod svg;
pub mod wulff;

pub type Vec2 = nalgebra::Vector2<f64>;
pub type Mat2 = nalgebra::Matrix2<f64>;

pub use error::{Error, Result};
pub use norm::{DualMode, MinkowskiNorm, NormFamily, NormJet};
pub use pharmonic::{AnnulusMesh, NodeTag, Quantity, ScalarField, SolverConfig};
pub use wulff::{BoundaryPolyline, WulffShapeSpec};
