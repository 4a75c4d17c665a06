//! Experiment configuration: a JSON document with a versioned `schema` field.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimates::{BoundaryProfile, LocalEstimateCase, Resolution};
use crate::norm::{DualMode, MinkowskiNorm};
use crate::pharmonic::{IterationKind, SolverConfig, DEFAULT_EPSILON};
use crate::wulff::{ellipse_domain, load_polyline_csv, perturbed_wulff, rounded_rectangle, wulff_boundary, BoundaryPolyline, FourierMode, WulffShapeSpec};
use crate::Mat2;

pub const SCHEMA: &str = "iamcf.experiment/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum NormSpec {
    Euclidean {},
    /// `F(ξ) = sqrt(ξᵀAξ)` with `A` given row by row.
    Ellipse {
        matrix: [[f64; 2]; 2],
        #[serde(default)]
        numeric_dual: bool,
    },
    BlendLq { q: f64, lambda: f64 },
}

impl NormSpec {
    pub fn build(&self) -> Result<MinkowskiNorm> {
        match self {
            NormSpec::Euclidean {} => Ok(MinkowskiNorm::euclidean()),
            NormSpec::Ellipse { matrix, numeric_dual } => {
                let a = Mat2::new(matrix[0][0], matrix[0][1], matrix[1][0], matrix[1][1]);
                let n = MinkowskiNorm::ellipse(a)?;
                if *numeric_dual {
                    n.with_dual_mode(DualMode::Numeric)
                } else {
                    Ok(n)
                }
            }
            NormSpec::BlendLq { q, lambda } => MinkowskiNorm::blend_lq(*q, *lambda),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainSpec {
    /// `𝒲_r` of the configured norm.
    Wulff { radius: f64 },
    /// Axis-aligned ellipse with semi-axes `a`, `b`.
    Ellipse { a: f64, b: f64 },
    /// `[-width, width] × [-height, height]` with rounded corners.
    RoundedRectangle { width: f64, height: f64, corner_radius: f64 },
    PerturbedWulff { radius: f64, modes: Vec<FourierMode> },
    /// Two-column `x,y` vertex list; relative paths resolve against the config file.
    Csv { path: PathBuf },
}

impl DomainSpec {
    pub fn build(&self, norm: &MinkowskiNorm, segments: usize, base: Option<&Path>) -> Result<BoundaryPolyline> {
        match self {
            DomainSpec::Wulff { radius } => wulff_boundary(norm, WulffShapeSpec::centered(*radius)?, segments),
            DomainSpec::Ellipse { a, b } => ellipse_domain(*a, *b, segments),
            DomainSpec::RoundedRectangle { width, height, corner_radius } => rounded_rectangle(*width, *height, *corner_radius, segments),
            DomainSpec::PerturbedWulff { radius, modes } => perturbed_wulff(norm, *radius, modes, segments),
            DomainSpec::Csv { path } => {
                let full = match base {
                    Some(dir) if path.is_relative() => dir.join(path),
                    _ => path.clone(),
                };
                load_polyline_csv(full)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSpec {
    #[serde(default = "default_layers")]
    pub layers: usize,
    #[serde(default = "default_rays")]
    pub rays: usize,
    /// Vertices of the domain polyline; rays align with them when `rays` is a multiple.
    #[serde(default = "default_segments")]
    pub segments: usize,
}

fn default_layers() -> usize {
    128
}
fn default_rays() -> usize {
    512
}
fn default_segments() -> usize {
    256
}

impl Default for MeshSpec {
    fn default() -> Self {
        Self { layers: default_layers(), rays: default_rays(), segments: default_segments() }
    }
}

/// Solver options; `outer_radius_l` defaults to `20·r₂` of the domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    /// Exponent for the single-`p` solve; defaults to the last entry of `p_list`.
    #[serde(default)]
    pub p: Option<f64>,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_tol_energy")]
    pub tol_energy: f64,
    #[serde(default = "default_tol_residual")]
    pub tol_residual: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default)]
    pub outer_radius_l: Option<f64>,
    #[serde(default)]
    pub iteration: IterationKind,
    #[serde(default = "default_true")]
    pub warm_start: bool,
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
fn default_true() -> bool {
    true
}

impl Default for SolverSpec {
    fn default() -> Self {
        Self {
            p: None,
            epsilon: default_epsilon(),
            tol_energy: default_tol_energy(),
            tol_residual: default_tol_residual(),
            max_iter: default_max_iter(),
            outer_radius_l: None,
            iteration: IterationKind::Newton,
            warm_start: true,
        }
    }
}

impl SolverSpec {
    pub fn outer_radius(&self, r2: f64) -> f64 {
        self.outer_radius_l.unwrap_or(20.0 * r2)
    }

    pub fn build(&self, p: f64, r2: f64) -> SolverConfig {
        SolverConfig {
            p,
            epsilon: self.epsilon,
            tol_energy: self.tol_energy,
            tol_residual: self.tol_residual,
            max_iter: self.max_iter,
            outer_radius_l: self.outer_radius(r2),
            iteration: self.iteration,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum TGridSpec {
    /// `count` levels evenly spaced between `lo_fraction` of the top admissible level
    /// and that level.
    Auto {
        #[serde(default = "default_level_count")]
        count: usize,
        #[serde(default = "default_lo_fraction")]
        lo_fraction: f64,
    },
    Explicit { values: Vec<f64> },
}

fn default_level_count() -> usize {
    25
}
fn default_lo_fraction() -> f64 {
    0.05
}

impl Default for TGridSpec {
    fn default() -> Self {
        TGridSpec::Auto { count: default_level_count(), lo_fraction: default_lo_fraction() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatesSpec {
    #[serde(default = "default_radius")]
    pub radius: f64,
    #[serde(default = "default_estimate_profiles")]
    pub profiles: Vec<BoundaryProfile>,
    #[serde(default = "default_estimate_p_list")]
    pub p_list: Vec<f64>,
    #[serde(default)]
    pub resolution: Resolution,
}

fn default_radius() -> f64 {
    1.0
}
fn default_estimate_profiles() -> Vec<BoundaryProfile> {
    vec![
        BoundaryProfile::Constant,
        BoundaryProfile::Tilted { direction: [1.0, 0.3], contrast: 10.0 },
        BoundaryProfile::TranslatedRadial { direction: [1.0, 0.5], distance: 1.5 },
    ]
}
fn default_estimate_p_list() -> Vec<f64> {
    vec![2.0, 1.5, 1.2, 1.05]
}

impl Default for EstimatesSpec {
    fn default() -> Self {
        Self { radius: default_radius(), profiles: default_estimate_profiles(), p_list: default_estimate_p_list(), resolution: Resolution::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinimalitySpec {
    /// Trusted levels checked, spread over the t grid.
    #[serde(default = "default_minimality_levels")]
    pub levels: usize,
    #[serde(default = "default_competitors")]
    pub competitors: usize,
}

fn default_minimality_levels() -> usize {
    3
}
fn default_competitors() -> usize {
    20
}

impl Default for MinimalitySpec {
    fn default() -> Self {
        Self { levels: default_minimality_levels(), competitors: default_competitors() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormInfoSpec {
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Angular sample count for the C1 estimate; the refined value uses twice as many.
    /// An odd count keeps the axis directions off the coarse grid.
    #[serde(default = "default_c1_samples")]
    pub c1_samples: usize,
}

fn default_trials() -> usize {
    1000
}
fn default_c1_samples() -> usize {
    97
}

impl Default for NormInfoSpec {
    fn default() -> Self {
        Self { trials: default_trials(), c1_samples: default_c1_samples() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: String,
    #[serde(default)]
    pub name: Option<String>,
    pub norm: NormSpec,
    pub domain: DomainSpec,
    #[serde(default)]
    pub mesh: MeshSpec,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default = "default_p_list")]
    pub p_list: Vec<f64>,
    #[serde(default)]
    pub t_grid: TGridSpec,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub rng_seed: u64,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
    #[serde(default)]
    pub estimates: EstimatesSpec,
    #[serde(default)]
    pub minimality: Option<MinimalitySpec>,
    #[serde(default)]
    pub norm_info: NormInfoSpec,
    /// Directory of the file the config was read from.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

fn default_p_list() -> Vec<f64> {
    vec![2.0, 1.5, 1.2, 1.1, 1.05]
}
fn default_formats() -> Vec<Format> {
    vec![Format::Json, Format::Csv, Format::Svg]
}

impl ExperimentConfig {
    /// Minimal config with every optional section at its default.
    pub fn new(norm: NormSpec, domain: DomainSpec) -> Self {
        Self {
            schema: SCHEMA.to_string(),
            name: None,
            norm,
            domain,
            mesh: MeshSpec::default(),
            solver: SolverSpec::default(),
            p_list: default_p_list(),
            t_grid: TGridSpec::default(),
            output_dir: None,
            rng_seed: 0,
            formats: default_formats(),
            estimates: EstimatesSpec::default(),
            minimality: None,
            norm_info: NormInfoSpec::default(),
            base_dir: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(format!("config parse error: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }

    /// Exponent for the single solve.
    pub fn solve_p(&self) -> f64 {
        self.solver.p.unwrap_or_else(|| *self.p_list.last().expect("validated p_list"))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.schema != SCHEMA {
            return bad(format!("unsupported schema '{}', expected '{SCHEMA}'", self.schema));
        }
        self.norm.build()?;
        if self.mesh.layers < 2 || self.mesh.rays < 16 || self.mesh.segments < 16 {
            return bad("mesh needs at least 2 layers, 16 rays and 16 boundary segments".into());
        }
        if self.p_list.is_empty() {
            return bad("p_list is empty".into());
        }
        if self.p_list.windows(2).any(|w| w[1] >= w[0]) {
            return bad("p_list must be strictly descending".into());
        }
        if let Some(p) = self.p_list.iter().find(|p| !(**p >= 1.01 - 1e-12 && **p <= 2.0)) {
            return bad(format!("p_list entries must lie in [1.01, 2], got {p}"));
        }
        if let Some(p) = self.solver.p {
            if !(p > 1.0 && p <= 2.0) {
                return bad(format!("solver.p must lie in (1, 2], got {p}"));
            }
        }
        if let Some(l) = self.solver.outer_radius_l {
            if !(l > 0.0 && l.is_finite()) {
                return bad(format!("outer_radius_l must be positive, got {l}"));
            }
        }
        self.solver.build(self.solve_p(), 1.0).validate()?;
        match &self.t_grid {
            TGridSpec::Auto { count, lo_fraction } => {
                if *count < 2 || !(0.0..1.0).contains(lo_fraction) {
                    return bad("auto t grid needs count >= 2 and lo_fraction in [0, 1)".into());
                }
            }
            TGridSpec::Explicit { values } => {
                if values.len() < 2 || values.windows(2).any(|w| w[1] <= w[0]) || values[0] <= 0.0 {
                    return bad("explicit t grid needs at least two increasing positive levels".into());
                }
            }
        }
        let e = &self.estimates;
        if e.p_list.is_empty() || e.resolution.layers < 2 || e.resolution.rays < 16 {
            return bad("estimates need a p_list and a resolution of at least 2 x 16".into());
        }
        let norm = self.norm.build()?;
        for profile in &e.profiles {
            for &p in &e.p_list {
                LocalEstimateCase { norm: norm.clone(), radius: e.radius, p, profile: profile.clone() }.validate()?;
            }
        }
        if let Some(m) = &self.minimality {
            if m.levels == 0 || m.competitors == 0 {
                return bad("minimality needs at least one level and one competitor".into());
            }
        }
        if self.norm_info.trials == 0 || self.norm_info.c1_samples < 64 {
            return bad("norm_info needs trials >= 1 and c1_samples >= 64".into());
        }
        Ok(())
    }
}
