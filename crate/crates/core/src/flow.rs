//! Level sets of the flow variable: eccentricity, perimeter growth, the asymptotic
//! constant, gradient bounds and minimality spot checks.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::norm::MinkowskiNorm;
use crate::pharmonic::{ContinuationResult, NodeTag, Quantity, ScalarField};
use crate::wulff::{anisotropic_perimeter, dual_extremes, outward_normal, point_segment_distance, wulff_boundary, BoundaryPolyline, WulffShapeSpec};
use crate::Vec2;

/// Segments used for the unit Wulff boundary when its perimeter is needed.
const WULFF_SEGMENTS: usize = 8192;

/// Annulus `{inner ≤ F° ≤ outer}` about the origin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DualAnnulus {
    pub inner: f64,
    pub outer: f64,
}

impl DualAnnulus {
    /// `[1.5 r2, L/4]`: away from the inner boundary layer and the truncation.
    pub fn trusted(r2: f64, l: f64) -> Self {
        Self { inner: 1.5 * r2, outer: l / 4.0 }
    }

    pub fn contains(&self, r: f64) -> bool {
        (self.inner..=self.outer).contains(&r)
    }
}

fn require_flow(field: &ScalarField) -> Result<()> {
    if field.quantity() != Quantity::FlowU {
        return Err(Error::Config("expected a flow field u".into()));
    }
    Ok(())
}

/// Upper end of the admissible level range: the smallest value at interior nodes that
/// neighbor the truncation boundary.
pub fn level_ceiling(field: &ScalarField) -> f64 {
    let mesh = field.mesh();
    let mut touches_outer = vec![false; mesh.node_count()];
    for t in mesh.triangles() {
        if t.iter().any(|&k| mesh.tag(k) == NodeTag::Outer) {
            for &k in t {
                touches_outer[k] = mesh.tag(k) == NodeTag::Interior;
            }
        }
    }
    (0..mesh.node_count()).filter(|&k| touches_outer[k]).map(|k| field.values()[k]).fold(f64::INFINITY, f64::min)
}

/// Closed isocontours `{u = t}` by linear interpolation on each triangle.
pub fn extract_level_set(field: &ScalarField, t: f64) -> Result<Vec<BoundaryPolyline>> {
    require_flow(field)?;
    let hi = level_ceiling(field);
    if !(t > 0.0 && t < hi) {
        return Err(Error::LevelOutOfRange { level: t, lo: 0.0, hi });
    }
    let mesh = field.mesh();
    let (u, x) = (field.values(), mesh.nodes());
    let key = |a: usize, b: usize| (a.min(b), a.max(b));
    let mut points: BTreeMap<(usize, usize), Vec2> = BTreeMap::new();
    let mut links: BTreeMap<(usize, usize), Vec<(usize, usize)>> = BTreeMap::new();
    for tri in mesh.triangles() {
        let mut crossing = Vec::with_capacity(2);
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            if (u[a] >= t) != (u[b] >= t) {
                let s = (t - u[a]) / (u[b] - u[a]);
                let e = key(a, b);
                points.entry(e).or_insert_with(|| x[a] + (x[b] - x[a]) * s);
                crossing.push(e);
            }
        }
        if let [e1, e2] = crossing[..] {
            links.entry(e1).or_default().push(e2);
            links.entry(e2).or_default().push(e1);
        }
    }
    if links.values().any(|l| l.len() != 2) {
        return Err(Error::OpenContour(t));
    }
    let mut visited: BTreeMap<(usize, usize), bool> = links.keys().map(|k| (*k, false)).collect();
    let mut curves = Vec::new();
    for &start in links.keys() {
        if visited[&start] {
            continue;
        }
        let mut loop_pts = vec![points[&start]];
        visited.insert(start, true);
        let (mut prev, mut cur) = (start, links[&start][0]);
        while cur != start {
            visited.insert(cur, true);
            loop_pts.push(points[&cur]);
            let next = links[&cur].iter().copied().find(|n| *n != prev).unwrap_or(links[&cur][0]);
            prev = cur;
            cur = next;
        }
        loop_pts.dedup_by(|a, b| (*a - *b).norm() == 0.0);
        if loop_pts.len() >= 3 {
            curves.push(BoundaryPolyline::new(loop_pts, Vec2::zeros())?);
        }
    }
    Ok(curves)
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelSetStats {
    pub t: f64,
    #[serde(skip)]
    pub curves: Vec<BoundaryPolyline>,
    pub components: usize,
    /// Largest `F°` on the level set.
    pub r_max: f64,
    /// Smallest `F°` on the level set.
    pub r_min: f64,
    pub theta: f64,
    pub perimeter_f: f64,
    /// The whole level set lies in the trusted annulus.
    pub trusted: bool,
}

fn level_stats(norm: &MinkowskiNorm, field: &ScalarField, t: f64, window: Option<DualAnnulus>) -> Result<LevelSetStats> {
    let curves = extract_level_set(field, t)?;
    let (mut r_min, mut r_max, mut perimeter_f) = (f64::INFINITY, 0.0f64, 0.0);
    for c in &curves {
        let (lo, hi) = dual_extremes(norm, c.vertices())?;
        r_min = r_min.min(lo);
        r_max = r_max.max(hi);
        perimeter_f += anisotropic_perimeter(norm, c);
    }
    let trusted = window.is_some_and(|w| w.contains(r_min) && w.contains(r_max));
    Ok(LevelSetStats { t, components: curves.len(), curves, r_max, r_min, theta: r_max / r_min, perimeter_f, trusted })
}

/// `R`, `r`, `θ = R/r` and `|∂E_t|_F` for every level.
pub fn eccentricity_series(norm: &MinkowskiNorm, field: &ScalarField, t_grid: &[f64], window: Option<DualAnnulus>) -> Result<Vec<LevelSetStats>> {
    t_grid.iter().map(|&t| level_stats(norm, field, t, window)).collect()
}

/// Levels evenly spaced in `[lo_fraction·t_top, t_top]`, where `t_top` keeps every
/// level set inside `F° ≤ window.outer` and below the truncation ceiling.
pub fn auto_t_grid(norm: &MinkowskiNorm, field: &ScalarField, window: DualAnnulus, count: usize, lo_fraction: f64) -> Result<Vec<f64>> {
    require_flow(field)?;
    let mut top = level_ceiling(field);
    for (k, (x, u)) in field.mesh().nodes().iter().zip(field.values()).enumerate() {
        if field.is_trusted(k) && norm.dual(*x)? >= window.outer {
            top = top.min(*u);
        }
    }
    let top = 0.995 * top;
    if !(top > 0.0) || count < 2 {
        return Err(Error::Config("no admissible level range for the t grid".into()));
    }
    let lo = lo_fraction * top;
    Ok((0..count).map(|k| lo + (top - lo) * k as f64 / (count - 1) as f64).collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct PerimeterFit {
    /// Least-squares slope of `log |∂E_t|_F` against `t`.
    pub slope: f64,
    /// `exp(c)` for the unit-slope fit `log |∂E_t|_F = t + c`.
    pub hull_perimeter: f64,
    pub levels_used: usize,
}

/// Fit over the trusted levels of `stats`.
pub fn perimeter_fit(stats: &[LevelSetStats]) -> Result<PerimeterFit> {
    let pts: Vec<(f64, f64)> = stats.iter().filter(|s| s.trusted).map(|s| (s.t, s.perimeter_f.ln())).collect();
    if pts.len() < 2 {
        return Err(Error::Config(format!("perimeter fit needs two trusted levels, found {}", pts.len())));
    }
    let n = pts.len() as f64;
    let (mt, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let c = pts.iter().map(|p| p.1 - p.0).sum::<f64>() / n;
    Ok(PerimeterFit { slope: sxy / sxx, hull_perimeter: c.exp(), levels_used: pts.len() })
}

pub fn perimeter_series(norm: &MinkowskiNorm, field: &ScalarField, t_grid: &[f64], window: DualAnnulus) -> Result<(Vec<LevelSetStats>, PerimeterFit)> {
    let stats = eccentricity_series(norm, field, t_grid, Some(window))?;
    let fit = perimeter_fit(&stats)?;
    Ok((stats, fit))
}

/// Arc-length average of `t - log F°` over a level set.
fn level_gamma(norm: &MinkowskiNorm, stats: &LevelSetStats) -> Result<f64> {
    let (mut acc, mut len) = (0.0, 0.0);
    for c in &stats.curves {
        let v = c.vertices();
        let n = v.len();
        for i in 0..n {
            let w = 0.5 * ((v[(i + 1) % n] - v[i]).norm() + (v[i] - v[(i + n - 1) % n]).norm());
            acc += w * (stats.t - norm.dual(v[i])?.ln());
            len += w;
        }
    }
    Ok(acc / len)
}

#[derive(Clone, Debug, Serialize)]
pub struct AsymptoticsReport {
    pub t_grid: Vec<f64>,
    pub theta_series: Vec<f64>,
    pub perimeter_series: Vec<f64>,
    pub levels: Vec<LevelSetStats>,
    pub perimeter_fit: PerimeterFit,
    /// `γ` on each trusted level, outermost last.
    pub gamma_per_level: Vec<(f64, f64)>,
    pub gamma_estimate: f64,
    /// Spread of `γ` over the last three trusted levels.
    pub gamma_drift: f64,
    pub wulff_perimeter: f64,
    pub hull_perimeter_estimate: f64,
    pub gamma_theory: f64,
    pub gamma_error: f64,
}

/// `|∂𝒲|_F` for the unit Wulff shape.
pub fn unit_wulff_perimeter(norm: &MinkowskiNorm) -> Result<f64> {
    Ok(anisotropic_perimeter(norm, &wulff_boundary(norm, WulffShapeSpec::centered(1.0)?, WULFF_SEGMENTS)?))
}

pub fn estimate_gamma(norm: &MinkowskiNorm, field: &ScalarField, t_grid: &[f64], window: DualAnnulus) -> Result<AsymptoticsReport> {
    let (levels, fit) = perimeter_series(norm, field, t_grid, window)?;
    let gamma_per_level = levels
        .iter()
        .filter(|s| s.trusted)
        .map(|s| Ok((s.t, level_gamma(norm, s)?)))
        .collect::<Result<Vec<_>>>()?;
    let gamma_estimate = gamma_per_level.last().map(|g| g.1).unwrap_or(f64::NAN);
    let tail = &gamma_per_level[gamma_per_level.len().saturating_sub(3)..];
    let gamma_drift = tail.iter().map(|g| g.1).fold(f64::NEG_INFINITY, f64::max) - tail.iter().map(|g| g.1).fold(f64::INFINITY, f64::min);
    let wulff_perimeter = unit_wulff_perimeter(norm)?;
    let gamma_theory = (wulff_perimeter / fit.hull_perimeter).ln();
    Ok(AsymptoticsReport {
        t_grid: t_grid.to_vec(),
        theta_series: levels.iter().map(|s| s.theta).collect(),
        perimeter_series: levels.iter().map(|s| s.perimeter_f).collect(),
        hull_perimeter_estimate: fit.hull_perimeter,
        perimeter_fit: fit,
        gamma_error: (gamma_estimate - gamma_theory).abs(),
        levels,
        gamma_per_level,
        gamma_estimate,
        gamma_drift,
        wulff_perimeter,
        gamma_theory,
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct GradientBound {
    /// `sup F(Du)·F°(x)` over triangles with barycenter in the window.
    pub sup: f64,
    /// `F°` of the barycenter where the sup is attained.
    pub argmax_dual: f64,
    pub triangles: usize,
}

pub fn gradient_bound_check(norm: &MinkowskiNorm, field: &ScalarField, window: DualAnnulus) -> Result<GradientBound> {
    let mut out = GradientBound { sup: 0.0, argmax_dual: f64::NAN, triangles: 0 };
    for t in 0..field.mesh().triangle_count() {
        let r = norm.dual(field.mesh().barycenter(t))?;
        if !window.contains(r) {
            continue;
        }
        out.triangles += 1;
        let val = norm.eval(field.gradient(t)) * r;
        if val > out.sup {
            out.sup = val;
            out.argmax_dual = r;
        }
    }
    Ok(out)
}

/// Gradient bound for every converged stage of a continuation, plus the extrapolated
/// field under `p = 1`.
pub fn gradient_bound_table(norm: &MinkowskiNorm, run: &ContinuationResult, window: DualAnnulus) -> Result<Vec<(f64, GradientBound)>> {
    let mut rows = run
        .converged()
        .map(|s| Ok((s.p, gradient_bound_check(norm, s.flow.as_ref().expect("converged stage"), window)?)))
        .collect::<Result<Vec<_>>>()?;
    rows.push((1.0, gradient_bound_check(norm, &run.extrapolated, window)?));
    Ok(rows)
}

/// Signed margins of the sandwich `log(F°/r₂) ≤ u ≤ log(F°/r₁)` over trusted nodes in
/// the window. Negative margins are violations.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BarrierReport {
    pub r1: f64,
    pub r2: f64,
    pub nodes: usize,
    /// `min (u - log(F°/r₂))`
    pub lower_margin: f64,
    /// `min (log(F°/r₁) - u)`
    pub upper_margin: f64,
    /// `max(0, -lower_margin, -upper_margin)`
    pub violation: f64,
}

pub fn barrier_check(norm: &MinkowskiNorm, field: &ScalarField, r1: f64, r2: f64, window: DualAnnulus) -> Result<BarrierReport> {
    require_flow(field)?;
    let (mut lower, mut upper, mut nodes) = (f64::INFINITY, f64::INFINITY, 0);
    for (k, (x, u)) in field.mesh().nodes().iter().zip(field.values()).enumerate() {
        let r = norm.dual(*x)?;
        if !field.is_trusted(k) || !window.contains(r) {
            continue;
        }
        nodes += 1;
        lower = lower.min(u - (r / r2).ln());
        upper = upper.min((r / r1).ln() - u);
    }
    if nodes == 0 {
        return Err(Error::Config("no trusted nodes inside the barrier window".into()));
    }
    Ok(BarrierReport { r1, r2, nodes, lower_margin: lower, upper_margin: upper, violation: 0.0f64.max(-lower).max(-upper) })
}

/// `{t ∈ [0, 1] : f(t) ≤ c}` for `f` convex on the unit interval.
fn sublevel_interval(f: impl Fn(f64) -> f64, c: f64) -> Option<(f64, f64)> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let a = hi - inv_phi * (hi - lo);
        let b = lo + inv_phi * (hi - lo);
        if f(a) < f(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    let m = 0.5 * (lo + hi);
    if f(m) > c {
        return None;
    }
    let root = |mut inside: f64, mut outside: f64| {
        if f(outside) <= c {
            return outside;
        }
        for _ in 0..60 {
            let mid = 0.5 * (inside + outside);
            if f(mid) <= c {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        0.5 * (inside + outside)
    };
    Some((root(m, 0.0), root(m, 1.0)))
}

/// Fraction of segment `[a, b]` inside the window.
fn fraction_inside(norm: &MinkowskiNorm, a: Vec2, b: Vec2, w: DualAnnulus) -> f64 {
    let f = |t: f64| norm.dual(a + (b - a) * t).unwrap_or(f64::INFINITY);
    let Some((t0, t1)) = sublevel_interval(f, w.outer) else { return 0.0 };
    let hole = sublevel_interval(f, w.inner).map_or(0.0, |(s0, s1)| (s1.min(t1) - s0.max(t0)).max(0.0));
    (t1 - t0) - hole
}

/// Area of `polygon ∩ triangle` by clipping against the (counterclockwise) triangle.
fn clipped_area(polygon: &[Vec2], tri: [Vec2; 3]) -> f64 {
    let mut poly = polygon.to_vec();
    for k in 0..3 {
        let (a, b) = (tri[k], tri[(k + 1) % 3]);
        let side = |p: Vec2| (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
        let mut out = Vec::with_capacity(poly.len() + 4);
        for i in 0..poly.len() {
            let (p, q) = (poly[i], poly[(i + 1) % poly.len()]);
            let (sp, sq) = (side(p), side(q));
            if sp >= 0.0 {
                out.push(p);
            }
            if (sp >= 0.0) != (sq >= 0.0) {
                out.push(p + (q - p) * (sp / (sp - sq)));
            }
        }
        poly = out;
        if poly.is_empty() {
            return 0.0;
        }
    }
    let n = poly.len();
    0.5 * (0..n).map(|i| poly[i].x * poly[(i + 1) % n].y - poly[(i + 1) % n].x * poly[i].y).sum::<f64>()
}

fn distance_to_curve(p: Vec2, c: &BoundaryPolyline) -> f64 {
    c.edges().map(|(a, b)| point_segment_distance(p, a, b)).fold(f64::INFINITY, f64::min)
}

/// `J(G) = ∫_{∂G∩K} F(ν) - ∫_{G∩K} F(Du)` for the region `G` bounded by `candidate`,
/// with `K` the window. `reference` is the level curve the candidate perturbs; the two
/// must agree outside `K`.
pub fn j_functional(norm: &MinkowskiNorm, field: &ScalarField, candidate: &BoundaryPolyline, window: DualAnnulus, reference: &BoundaryPolyline) -> Result<f64> {
    require_flow(field)?;
    let scale = candidate.vertices().iter().map(|v| v.norm()).fold(0.0, f64::max);
    let tol = 1e-9 * scale;
    for (a, b) in [(candidate, reference), (reference, candidate)] {
        for v in a.vertices() {
            if !window.contains(norm.dual(*v)?) && distance_to_curve(*v, b) > tol {
                return Err(Error::WindowViolation);
            }
        }
    }
    let boundary: f64 = candidate.edges().map(|(a, b)| norm.eval(outward_normal(b - a)) * fraction_inside(norm, a, b, window)).sum();
    let mesh = field.mesh();
    let (lo, hi) = bounding_box(candidate.vertices());
    let mut bulk = 0.0;
    for (t, tri) in mesh.triangles().iter().enumerate() {
        if !window.contains(norm.dual(mesh.barycenter(t))?) {
            continue;
        }
        let pts = tri.map(|k| mesh.nodes()[k]);
        let (tlo, thi) = bounding_box(&pts);
        if thi.x < lo.x || thi.y < lo.y || tlo.x > hi.x || tlo.y > hi.y {
            continue;
        }
        let area = clipped_area(candidate.vertices(), pts);
        if area > 0.0 {
            bulk += norm.eval(field.gradient(t)) * area;
        }
    }
    Ok(boundary - bulk)
}

fn bounding_box(v: &[Vec2]) -> (Vec2, Vec2) {
    v.iter().fold((Vec2::repeat(f64::INFINITY), Vec2::repeat(f64::NEG_INFINITY)), |(lo, hi), p| (lo.inf(p), hi.sup(p)))
}

/// Smooth compactly supported normal displacement of a closed curve.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct NormalBump {
    /// Arc-length position of the bump center as a fraction of the total length.
    pub center: f64,
    /// Half-width as a fraction of the total length.
    pub half_width: f64,
    /// Signed outward displacement at the center.
    pub amplitude: f64,
}

/// Moves each vertex along its averaged outward normal by
/// `amplitude·cos²(π d / (2 half_width))` within the bump support.
pub fn perturb_normal(curve: &BoundaryPolyline, bump: NormalBump) -> Result<BoundaryPolyline> {
    let v = curve.vertices();
    let n = v.len();
    let mut s = vec![0.0; n];
    for i in 1..n {
        s[i] = s[i - 1] + (v[i] - v[i - 1]).norm();
    }
    let total = s[n - 1] + (v[0] - v[n - 1]).norm();
    let moved = (0..n)
        .map(|i| {
            let mut d = (s[i] / total - bump.center).rem_euclid(1.0);
            if d > 0.5 {
                d = 1.0 - d;
            }
            if d >= bump.half_width {
                return v[i];
            }
            let normal = outward_normal(v[(i + 1) % n] - v[i]).normalize() + outward_normal(v[i] - v[(i + n - 1) % n]).normalize();
            let w = (0.5 * PI * d / bump.half_width).cos().powi(2);
            v[i] + normal.normalize() * (bump.amplitude * w)
        })
        .collect();
    BoundaryPolyline::new(moved, curve.star_center())
}

#[derive(Clone, Debug, Serialize)]
pub struct MinimalityReport {
    pub t: f64,
    pub window: DualAnnulus,
    pub mesh_spacing: f64,
    pub j_level: f64,
    pub j_competitors: Vec<f64>,
    pub slack: f64,
    /// `J(level) - min J(candidate)`: how much the best competitor undercuts the level.
    pub best_improvement: f64,
    /// `min J(candidate) - J(level) + slack`; non-negative when the check passes.
    pub margin: f64,
    pub passed: bool,
}

/// Compares the level curve at `t` against `competitors` random normal-bump
/// perturbations with amplitude up to three local mesh spacings. The allowed deficit is
/// `5·h·|∂K|_F` with `K` the window around the level curve.
pub fn minimality_check(norm: &MinkowskiNorm, field: &ScalarField, t: f64, competitors: usize, seed: u64) -> Result<MinimalityReport> {
    let curves = extract_level_set(field, t)?;
    let [level] = curves.as_slice() else {
        return Err(Error::DegenerateInput(format!("level {t} has {} components", curves.len())));
    };
    let (r_lo, r_hi) = dual_extremes(norm, level.vertices())?;
    let mesh = field.mesh();
    let mut h: f64 = 0.0;
    for tri in 0..mesh.triangle_count() {
        let r = norm.dual(mesh.barycenter(tri))?;
        if (0.8 * r_lo..=1.25 * r_hi).contains(&r) {
            h = h.max(mesh.longest_edge(tri));
        }
    }
    let margin_h = 4.0 * h * norm.dual(Vec2::new(1.0, 0.0))?.max(norm.dual(Vec2::new(0.0, 1.0))?);
    let window = DualAnnulus { inner: (r_lo - margin_h).max(0.5 * r_lo), outer: r_hi + margin_h };
    let slack = 5.0 * h * window.outer * unit_wulff_perimeter(norm)?;
    let j_level = j_functional(norm, field, level, window, level)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut j_competitors = Vec::with_capacity(competitors);
    for _ in 0..competitors {
        let bump = NormalBump {
            center: rng.random_range(0.0..1.0),
            half_width: rng.random_range(0.05..0.25),
            amplitude: rng.random_range(-3.0 * h..3.0 * h),
        };
        let candidate = perturb_normal(level, bump)?;
        j_competitors.push(j_functional(norm, field, &candidate, window, level)?);
    }
    let worst = j_competitors.iter().copied().fold(f64::INFINITY, f64::min);
    let margin = worst - j_level + slack;
    Ok(MinimalityReport { t, window, mesh_spacing: h, j_level, j_competitors, slack, best_improvement: j_level - worst, margin, passed: margin >= 0.0 })
}
