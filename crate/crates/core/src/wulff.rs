//! Closed polylines, Wulff shapes and anisotropic perimeters.

use std::f64::consts::TAU;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::norm::MinkowskiNorm;
use crate::Vec2;

/// Closed counterclockwise polyline. The closing edge from the last vertex back to the
/// first is implicit.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryPolyline {
    vertices: Vec<Vec2>,
    star_center: Vec2,
}

impl BoundaryPolyline {
    /// Builds a polyline, reversing the vertex order if it was given clockwise.
    pub fn new(mut vertices: Vec<Vec2>, star_center: Vec2) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::DegenerateInput(format!("polyline needs at least 3 vertices, got {}", vertices.len())));
        }
        if !vertices.iter().all(|v| v.x.is_finite() && v.y.is_finite()) {
            return Err(Error::DegenerateInput("polyline has non-finite vertices".into()));
        }
        if vertices.first() == vertices.last() {
            vertices.pop();
        }
        let area = signed_area(&vertices);
        let scale = vertices.iter().map(|v| (v - star_center).norm_squared()).fold(0.0, f64::max);
        if area.abs() <= 1e-14 * scale {
            return Err(Error::DegenerateInput("polyline encloses no area".into()));
        }
        if area < 0.0 {
            vertices.reverse();
        }
        Ok(Self { vertices, star_center })
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn star_center(&self) -> Vec2 {
        self.star_center
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Edges `(vᵢ, vᵢ₊₁)` including the closing edge.
    pub fn edges(&self) -> impl Iterator<Item = (Vec2, Vec2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn signed_area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn euclidean_length(&self) -> f64 {
        self.edges().map(|(a, b)| (b - a).norm()).sum()
    }

    pub fn max_edge_length(&self) -> f64 {
        self.edges().map(|(a, b)| (b - a).norm()).fold(0.0, f64::max)
    }

    /// Even-odd point containment; points on the boundary may go either way.
    pub fn contains(&self, p: Vec2) -> bool {
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
                if p.x < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Star-shaped about `star_center`: polar angles strictly increase around the loop
    /// and wind exactly once.
    pub fn is_star_shaped(&self) -> bool {
        let c = self.star_center;
        let mut total = 0.0;
        for (a, b) in self.edges() {
            let (u, v) = (a - c, b - c);
            let cross = u.x * v.y - u.y * v.x;
            if cross <= 0.0 {
                return false;
            }
            total += cross.atan2(u.dot(&v));
        }
        (total - TAU).abs() < 1e-6
    }

    /// No two non-adjacent edges intersect.
    pub fn is_simple(&self) -> bool {
        let n = self.vertices.len();
        let edges: Vec<_> = self.edges().collect();
        for i in 0..n {
            for j in i + 2..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                if segments_intersect(edges[i].0, edges[i].1, edges[j].0, edges[j].1) {
                    return false;
                }
            }
        }
        true
    }

    /// Signs of consecutive edge cross products all agree.
    pub fn is_convex(&self) -> bool {
        let n = self.vertices.len();
        (0..n).all(|i| {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let c = self.vertices[(i + 2) % n];
            let (u, v) = (b - a, c - b);
            u.x * v.y - u.y * v.x >= -1e-14 * u.norm() * v.norm()
        })
    }

    /// Intersection of the ray `star_center + s·dir, s > 0` with the polyline (the
    /// farthest one if the polyline is not star-shaped).
    pub fn ray_crossing(&self, dir: Vec2) -> Option<Vec2> {
        let c = self.star_center;
        let mut best: Option<f64> = None;
        for (a, b) in self.edges() {
            let e = b - a;
            let denom = dir.x * e.y - dir.y * e.x;
            if denom.abs() < 1e-300 {
                continue;
            }
            let w = a - c;
            let s = (w.x * e.y - w.y * e.x) / denom;
            let t = (w.x * dir.y - w.y * dir.x) / denom;
            if s > 0.0 && (-1e-12..=1.0 + 1e-12).contains(&t) {
                best = Some(best.map_or(s, |b: f64| b.max(s)));
            }
        }
        best.map(|s| c + s * dir)
    }

    /// Dilation about the origin.
    pub fn scaled(&self, s: f64) -> Self {
        Self { vertices: self.vertices.iter().map(|v| v * s).collect(), star_center: self.star_center * s }
    }

    pub fn translated(&self, offset: Vec2) -> Self {
        Self { vertices: self.vertices.iter().map(|v| v + offset).collect(), star_center: self.star_center + offset }
    }

    /// Cyclic shift of the vertex list.
    pub fn rotated_list(&self, k: usize) -> Self {
        let mut vertices = self.vertices.clone();
        let n = vertices.len();
        vertices.rotate_left(k % n);
        Self { vertices, star_center: self.star_center }
    }

    /// Inserts the midpoint of every edge.
    pub fn refined(&self) -> Self {
        let vertices = self.edges().flat_map(|(a, b)| [a, 0.5 * (a + b)]).collect();
        Self { vertices, star_center: self.star_center }
    }

    /// Symmetric Hausdorff distance between the vertex sets, each measured against the
    /// other polyline's edges.
    pub fn hausdorff(&self, other: &Self) -> f64 {
        let one_way = |a: &Self, b: &Self| {
            a.vertices
                .iter()
                .map(|p| b.edges().map(|(u, v)| point_segment_distance(*p, u, v)).fold(f64::INFINITY, f64::min))
                .fold(0.0, f64::max)
        };
        one_way(self, other).max(one_way(other, self))
    }
}

fn signed_area(v: &[Vec2]) -> f64 {
    let n = v.len();
    0.5 * (0..n).map(|i| v[i].x * v[(i + 1) % n].y - v[(i + 1) % n].x * v[i].y).sum::<f64>()
}

fn orient(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

fn segments_intersect(p1: Vec2, p2: Vec2, q1: Vec2, q2: Vec2) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    (d1 * d2 < 0.0) && (d3 * d4 < 0.0)
}

pub(crate) fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let e = b - a;
    let len2 = e.norm_squared();
    let t = if len2 > 0.0 { ((p - a).dot(&e) / len2).clamp(0.0, 1.0) } else { 0.0 };
    (p - (a + t * e)).norm()
}

/// Wulff shape `𝒲_r(x₀) = {F°(x - x₀) < r}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WulffShapeSpec {
    pub radius: f64,
    pub center: Vec2,
}

impl WulffShapeSpec {
    pub fn new(radius: f64, center: Vec2) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Config(format!("Wulff radius must be positive, got {radius}")));
        }
        Ok(Self { radius, center })
    }

    pub fn centered(radius: f64) -> Result<Self> {
        Self::new(radius, Vec2::zeros())
    }
}

/// Boundary of `𝒲_r(x₀)` sampled at equispaced polar directions.
pub fn wulff_boundary(norm: &MinkowskiNorm, spec: WulffShapeSpec, segments: usize) -> Result<BoundaryPolyline> {
    if segments < 16 {
        return Err(Error::Config(format!("Wulff boundary needs at least 16 segments, got {segments}")));
    }
    let vertices = (0..segments)
        .map(|k| {
            let t = TAU * k as f64 / segments as f64;
            let d = Vec2::new(t.cos(), t.sin());
            Ok(spec.center + spec.radius * d / norm.dual(d)?)
        })
        .collect::<Result<Vec<_>>>()?;
    BoundaryPolyline::new(vertices, spec.center)
}

/// `|∂Ω|_F = Σₑ F(νₑ)|e|`, evaluated as `Σ F(rot(vᵢ₊₁ - vᵢ))` with `rot` the clockwise
/// quarter turn (tangent to outward normal for counterclockwise loops).
pub fn anisotropic_perimeter(norm: &MinkowskiNorm, curve: &BoundaryPolyline) -> f64 {
    curve.edges().map(|(a, b)| norm.eval(outward_normal(b - a))).sum()
}

/// Clockwise quarter turn.
#[inline]
pub fn outward_normal(tangent: Vec2) -> Vec2 {
    Vec2::new(tangent.y, -tangent.x)
}

/// Smallest and largest `F°` over a polyline, together with whether the Wulff
/// sandwich `𝒲_{r1} ⊂ Ω ⊂ 𝒲_{r2}` is certified.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundingRadii {
    pub r1: f64,
    pub r2: f64,
    /// False for domains that are not star-shaped about the origin; the radii are then
    /// only boundary extremes.
    pub certified: bool,
}

pub fn bounding_radii(norm: &MinkowskiNorm, domain: &BoundaryPolyline) -> Result<BoundingRadii> {
    if !domain.contains(Vec2::zeros()) {
        return Err(Error::OriginOutside);
    }
    let (r1, r2) = dual_extremes(norm, domain.vertices())?;
    let about_origin = BoundaryPolyline { vertices: domain.vertices.clone(), star_center: Vec2::zeros() };
    Ok(BoundingRadii { r1, r2, certified: about_origin.is_star_shaped() })
}

/// Minimum and maximum of `F°` over a closed polyline given by its vertices. The maximum
/// of a convex function on a segment sits at an endpoint; the minimum is located per edge
/// by golden-section search.
pub(crate) fn dual_extremes(norm: &MinkowskiNorm, vertices: &[Vec2]) -> Result<(f64, f64)> {
    let n = vertices.len();
    let values = vertices.iter().map(|v| norm.dual(*v)).collect::<Result<Vec<_>>>()?;
    let r2 = values.iter().copied().fold(0.0, f64::max);
    let mut r1 = f64::INFINITY;
    for i in 0..n {
        let j = (i + 1) % n;
        r1 = r1.min(segment_dual_min(norm, vertices[i], vertices[j], values[i], values[j])?);
    }
    Ok((r1, r2))
}

/// Minimum of `F°` on the segment `[a, b]` (`F°` is convex along lines).
pub(crate) fn segment_dual_min(norm: &MinkowskiNorm, a: Vec2, b: Vec2, fa: f64, fb: f64) -> Result<f64> {
    let e = b - a;
    let at = |t: f64| norm.dual(a + t * e);
    // Endpoint minimum when the one-sided slopes point outward.
    let h = 1e-7;
    if at(h)? >= fa && at(1.0 - h)? >= fb {
        // Convex with both ends rising inward would need an interior max; impossible, so
        // the interior minimum exists only if the function dips.
        let mid = at(0.5)?;
        if mid >= fa.min(fb) {
            return Ok(fa.min(fb));
        }
    }
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (at(c)?, at(d)?);
    while hi - lo > 1e-12 {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = at(c)?;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = at(d)?;
        }
    }
    Ok(fc.min(fd).min(fa).min(fb))
}

/// Axis-aligned ellipse `x = a cos t, y = b sin t` with equispaced parameter `t`.
pub fn ellipse_domain(a: f64, b: f64, segments: usize) -> Result<BoundaryPolyline> {
    if !(a > 0.0 && b > 0.0) || segments < 3 {
        return Err(Error::Config("ellipse needs positive semi-axes and at least 3 segments".into()));
    }
    let vertices = (0..segments)
        .map(|k| {
            let t = TAU * k as f64 / segments as f64;
            Vec2::new(a * t.cos(), b * t.sin())
        })
        .collect();
    BoundaryPolyline::new(vertices, Vec2::zeros())
}

/// Rectangle `[-w, w] × [-h, h]` with corners rounded at radius `rho`, sampled uniformly
/// in arc length.
pub fn rounded_rectangle(w: f64, h: f64, rho: f64, segments: usize) -> Result<BoundaryPolyline> {
    if !(w > 0.0 && h > 0.0) || !(0.0..=w.min(h)).contains(&rho) || segments < 8 {
        return Err(Error::Config("rounded rectangle needs 0 <= rho <= min(w, h) and at least 8 segments".into()));
    }
    let (sx, sy) = (2.0 * (w - rho), 2.0 * (h - rho));
    let arc = 0.5 * std::f64::consts::PI * rho;
    let total = 2.0 * (sx + sy) + 4.0 * arc;
    // Pieces in counterclockwise order starting at (w, -(h - rho)).
    let point = |s: f64| -> Vec2 {
        let mut s = s.rem_euclid(total);
        let corners = [
            (Vec2::new(w - rho, h - rho), 0.0),
            (Vec2::new(-(w - rho), h - rho), 0.5),
            (Vec2::new(-(w - rho), -(h - rho)), 1.0),
            (Vec2::new(w - rho, -(h - rho)), 1.5),
        ];
        let straights = [
            (Vec2::new(w, -(h - rho)), Vec2::new(0.0, 1.0), sy),
            (Vec2::new(w - rho, h), Vec2::new(-1.0, 0.0), sx),
            (Vec2::new(-w, h - rho), Vec2::new(0.0, -1.0), sy),
            (Vec2::new(-(w - rho), -h), Vec2::new(1.0, 0.0), sx),
        ];
        for k in 0..4 {
            let (start, dir, len) = straights[k];
            if s <= len {
                return start + s * dir;
            }
            s -= len;
            let (center, quarter) = corners[k];
            if s <= arc {
                let t = std::f64::consts::PI * quarter + if rho > 0.0 { s / rho } else { 0.0 };
                return center + rho * Vec2::new(t.cos(), t.sin());
            }
            s -= arc;
        }
        straights[0].0
    };
    let vertices = (0..segments).map(|k| point(total * k as f64 / segments as f64)).collect();
    BoundaryPolyline::new(vertices, Vec2::zeros())
}

/// One Fourier mode `a cos(kθ) + b sin(kθ)` of a radial perturbation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierMode {
    pub k: u32,
    pub cos: f64,
    pub sin: f64,
}

/// `x(θ) = r (1 + Σ aₖ cos kθ + bₖ sin kθ) · d(θ) / F°(d(θ))`.
pub fn perturbed_wulff(norm: &MinkowskiNorm, radius: f64, modes: &[FourierMode], segments: usize) -> Result<BoundaryPolyline> {
    if segments < 16 || radius <= 0.0 {
        return Err(Error::Config("perturbed Wulff domain needs radius > 0 and at least 16 segments".into()));
    }
    let vertices = (0..segments)
        .map(|j| {
            let t = TAU * j as f64 / segments as f64;
            let bump: f64 = modes.iter().map(|m| m.cos * (m.k as f64 * t).cos() + m.sin * (m.k as f64 * t).sin()).sum();
            if bump <= -1.0 {
                return Err(Error::Config("perturbation amplitude makes the radius non-positive".into()));
            }
            let d = Vec2::new(t.cos(), t.sin());
            Ok(radius * (1.0 + bump) * d / norm.dual(d)?)
        })
        .collect::<Result<Vec<_>>>()?;
    BoundaryPolyline::new(vertices, Vec2::zeros())
}

/// Reads `x,y` rows; a non-numeric first row is treated as a header. The loop is closed
/// implicitly and centered at the origin.
pub fn load_polyline_csv(path: impl AsRef<Path>) -> Result<BoundaryPolyline> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_path(path)?;
    let mut vertices = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() < 2 {
            return Err(Error::Config(format!("row {row}: expected two columns")));
        }
        match (record[0].parse::<f64>(), record[1].parse::<f64>()) {
            (Ok(x), Ok(y)) => vertices.push(Vec2::new(x, y)),
            _ if row == 0 => continue,
            _ => return Err(Error::Config(format!("row {row}: could not parse '{}', '{}'", &record[0], &record[1]))),
        }
    }
    BoundaryPolyline::new(vertices, Vec2::zeros())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Mat2;
    use approx::assert_relative_eq;

    #[test]
    fn euclidean_wulff_is_a_regular_polygon() {
        let c = wulff_boundary(&MinkowskiNorm::euclidean(), WulffShapeSpec::centered(1.0).unwrap(), 360).unwrap();
        assert_eq!(c.len(), 360);
        for (k, v) in c.vertices().iter().enumerate() {
            let t = TAU * k as f64 / 360.0;
            assert_relative_eq!(*v, Vec2::new(t.cos(), t.sin()), epsilon = 1e-14);
        }
    }

    #[test]
    fn ellipse_wulff_vertices_on_dual_level() {
        let n = MinkowskiNorm::ellipse_diag(4.0, 1.0).unwrap();
        let c = wulff_boundary(&n, WulffShapeSpec::centered(1.0).unwrap(), 200).unwrap();
        for v in c.vertices() {
            assert!((v.x * v.x / 4.0 + v.y * v.y - 1.0).abs() < 1e-8);
        }
        assert!(c.is_convex());
    }

    #[test]
    fn wulff_boundary_scales_with_radius() {
        let n = MinkowskiNorm::blend_lq(4.0, 0.5).unwrap();
        let spec = |r| WulffShapeSpec::new(r, Vec2::new(0.3, -0.2)).unwrap();
        let a = wulff_boundary(&n, spec(1.0), 64).unwrap();
        let b = wulff_boundary(&n, spec(2.0), 64).unwrap();
        for (p, q) in a.vertices().iter().zip(b.vertices()) {
            let c = Vec2::new(0.3, -0.2);
            assert!(((q - c) - 2.0 * (p - c)).amax() < 1e-12);
        }
        assert!(wulff_boundary(&n, spec(1.0), 8).is_err());
    }

    #[test]
    fn unit_circle_perimeter() {
        let c = wulff_boundary(&MinkowskiNorm::euclidean(), WulffShapeSpec::centered(1.0).unwrap(), 4096).unwrap();
        let p = anisotropic_perimeter(&MinkowskiNorm::euclidean(), &c);
        assert!((p / TAU - 1.0).abs() < 1e-5);
    }

    #[test]
    fn wulff_perimeter_scales_linearly() {
        let n = MinkowskiNorm::ellipse(Mat2::new(2.0, 0.4, 0.4, 1.0)).unwrap();
        let p1 = anisotropic_perimeter(&n, &wulff_boundary(&n, WulffShapeSpec::centered(1.0).unwrap(), 256).unwrap());
        let p3 = anisotropic_perimeter(&n, &wulff_boundary(&n, WulffShapeSpec::centered(3.0).unwrap(), 256).unwrap());
        assert_relative_eq!(p3, 3.0 * p1, max_relative = 1e-13);
    }

    #[test]
    fn orientation_is_normalized() {
        let cw = vec![Vec2::new(0.0, 1.0), Vec2::new(1.0, 0.0), Vec2::new(0.0, -1.0), Vec2::new(-1.0, 0.0)];
        let p = BoundaryPolyline::new(cw, Vec2::zeros()).unwrap();
        assert!(p.signed_area() > 0.0);
        assert!(BoundaryPolyline::new(vec![Vec2::zeros(); 3], Vec2::zeros()).is_err());
    }

    #[test]
    fn bounding_radii_reference_cases() {
        let e = MinkowskiNorm::euclidean();
        let w = wulff_boundary(&e, WulffShapeSpec::centered(1.5).unwrap(), 64).unwrap();
        let r = bounding_radii(&e, &w).unwrap();
        // Polygon inscribed in the circle: edges dip below r0 between vertices.
        assert_relative_eq!(r.r2, 1.5, epsilon = 1e-12);
        assert_relative_eq!(r.r1, 1.5 * (std::f64::consts::PI / 64.0).cos(), epsilon = 1e-9);

        let ell = ellipse_domain(2.0, 1.0, 2048).unwrap();
        let r = bounding_radii(&e, &ell).unwrap();
        assert!((r.r1 - 1.0).abs() < 1e-5 && (r.r2 - 2.0).abs() < 1e-12);
        assert!(r.certified);

        let sq = BoundaryPolyline::new(
            vec![Vec2::new(-1.0, -1.0), Vec2::new(1.0, -1.0), Vec2::new(1.0, 1.0), Vec2::new(-1.0, 1.0)],
            Vec2::zeros(),
        )
        .unwrap();
        let r = bounding_radii(&e, &sq).unwrap();
        assert_relative_eq!(r.r1, 1.0, epsilon = 1e-10);
        assert_relative_eq!(r.r2, 2f64.sqrt(), epsilon = 1e-12);

        assert!(matches!(bounding_radii(&e, &sq.translated(Vec2::new(5.0, 0.0))), Err(Error::OriginOutside)));
    }

    #[test]
    fn ellipse_wulff_boundary_has_equal_radii() {
        let n = MinkowskiNorm::ellipse_diag(4.0, 1.0).unwrap();
        let w = wulff_boundary(&n, WulffShapeSpec::centered(0.7).unwrap(), 4096).unwrap();
        let r = bounding_radii(&n, &w).unwrap();
        assert_relative_eq!(r.r2, 0.7, epsilon = 1e-8);
        assert!((r.r1 - 0.7).abs() < 1e-6);
    }

    #[test]
    fn generators_produce_valid_loops() {
        let rr = rounded_rectangle(2.0, 1.0, 0.4, 400).unwrap();
        assert!(rr.is_simple() && rr.is_convex() && rr.is_star_shaped());
        let exact = 4.0 * (2.0 - 0.4) + 4.0 * (1.0 - 0.4) + TAU * 0.4;
        assert!((rr.euclidean_length() / exact - 1.0).abs() < 1e-3);

        let n = MinkowskiNorm::euclidean();
        let pw = perturbed_wulff(&n, 1.0, &[FourierMode { k: 3, cos: 0.2, sin: 0.0 }], 256).unwrap();
        assert!(pw.is_simple() && pw.is_star_shaped() && !pw.is_convex());
    }

    #[test]
    fn csv_loader_accepts_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("square.csv");
        std::fs::write(&path, "x,y\n1,1\n-1,1\n-1,-1\n1,-1\n").unwrap();
        let p = load_polyline_csv(&path).unwrap();
        assert_eq!(p.len(), 4);
        assert_relative_eq!(p.signed_area(), 4.0);
    }

    #[test]
    fn ray_crossing_hits_the_boundary() {
        let ell = ellipse_domain(2.0, 1.0, 512).unwrap();
        let x = ell.ray_crossing(Vec2::new(1.0, 0.0)).unwrap();
        assert_relative_eq!(x, Vec2::new(2.0, 0.0), epsilon = 1e-12);
    }
}
