use std::collections::HashSet;
use std::f64::consts::TAU;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::norm::MinkowskiNorm;
use crate::wulff::BoundaryPolyline;
use crate::Vec2;

const MIN_TRIANGLE_AREA: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum NodeTag {
    Inner,
    Outer,
    Interior,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Topology {
    /// Ray-layer grid between two closed boundaries.
    Annulus,
    /// Ray-layer grid closed by a fan around a center node; the boundary nodes are
    /// tagged `Outer`.
    Disk,
}

/// Area and barycentric gradients of a linear triangle.
#[derive(Clone, Copy, Debug)]
pub struct Element {
    pub area: f64,
    pub grads: [Vec2; 3],
}

/// Structured triangulation built from rays through a common center. Layer `j` of ray
/// `i` is node `ray_node(j, i)`; for disks, layer 0 is the center node on every ray.
#[derive(Clone, Debug)]
pub struct AnnulusMesh {
    nodes: Vec<Vec2>,
    triangles: Vec<[usize; 3]>,
    tags: Vec<NodeTag>,
    elements: Vec<Element>,
    inner: Option<BoundaryPolyline>,
    outer: BoundaryPolyline,
    layers: usize,
    rays: usize,
    grid: Vec<usize>,
    topology: Topology,
}

impl AnnulusMesh {
    pub fn nodes(&self) -> &[Vec2] {
        &self.nodes
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn tags(&self) -> &[NodeTag] {
        &self.tags
    }

    pub fn tag(&self, node: usize) -> NodeTag {
        self.tags[node]
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    /// `None` for disk meshes.
    pub fn inner(&self) -> Option<&BoundaryPolyline> {
        self.inner.as_ref()
    }

    pub fn outer(&self) -> &BoundaryPolyline {
        &self.outer
    }

    pub fn layers(&self) -> usize {
        self.layers
    }

    pub fn rays(&self) -> usize {
        self.rays
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn center(&self) -> Vec2 {
        self.outer.star_center()
    }

    /// Node at layer `j` (0 = inner boundary or disk center) on ray `i` (taken mod rays).
    pub fn ray_node(&self, layer: usize, ray: usize) -> usize {
        self.grid[layer * self.rays + ray % self.rays]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn barycenter(&self, t: usize) -> Vec2 {
        let [a, b, c] = self.triangles[t];
        (self.nodes[a] + self.nodes[b] + self.nodes[c]) / 3.0
    }

    pub fn edge_count(&self) -> usize {
        let mut edges = HashSet::new();
        for tri in &self.triangles {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                edges.insert((a.min(b), a.max(b)));
            }
        }
        edges.len()
    }

    /// `V - E + F`.
    pub fn euler_characteristic(&self) -> i64 {
        self.nodes.len() as i64 - self.edge_count() as i64 + self.triangles.len() as i64
    }

    /// Inradius over circumradius of triangle `t`.
    pub fn quality(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t].map(|i| self.nodes[i]);
        let (la, lb, lc) = ((b - c).norm(), (c - a).norm(), (a - b).norm());
        let area = self.elements[t].area;
        let inradius = 2.0 * area / (la + lb + lc);
        let circumradius = la * lb * lc / (4.0 * area);
        inradius / circumradius
    }

    pub fn min_quality(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.quality(t)).fold(f64::INFINITY, f64::min)
    }

    pub fn longest_edge(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t].map(|i| self.nodes[i]);
        (b - c).norm().max((c - a).norm()).max((a - b).norm())
    }

    /// Euclidean diameter of the inner boundary, or of the outer one for disks.
    pub fn reference_diameter(&self) -> f64 {
        let v = self.inner.as_ref().unwrap_or(&self.outer).vertices();
        let mut d: f64 = 0.0;
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                d = d.max((v[i] - v[j]).norm());
            }
        }
        d
    }

    /// Dilation by `s` about the origin.
    pub fn dilated(&self, s: f64) -> Result<Self> {
        let mut out = self.clone();
        out.nodes.iter_mut().for_each(|x| *x *= s);
        out.inner = self.inner.as_ref().map(|p| p.scaled(s));
        out.outer = self.outer.scaled(s);
        out.elements = build_elements(&out.nodes, &mut out.triangles)?;
        Ok(out)
    }

    /// Relabels node `k` as `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.nodes.len();
        let mut seen = vec![false; n];
        if perm.len() != n || !perm.iter().all(|&k| k < n && !std::mem::replace(&mut seen[k], true)) {
            return Err(Error::MeshInvalid("node permutation is not a bijection".into()));
        }
        let mut nodes = vec![Vec2::zeros(); n];
        let mut tags = vec![NodeTag::Interior; n];
        for k in 0..n {
            nodes[perm[k]] = self.nodes[k];
            tags[perm[k]] = self.tags[k];
        }
        let mut triangles: Vec<[usize; 3]> = self.triangles.iter().map(|t| t.map(|k| perm[k])).collect();
        let elements = build_elements(&nodes, &mut triangles)?;
        Ok(Self {
            nodes,
            triangles,
            tags,
            elements,
            grid: self.grid.iter().map(|&k| perm[k]).collect(),
            ..self.clone()
        })
    }
}

fn build_elements(nodes: &[Vec2], triangles: &mut [[usize; 3]]) -> Result<Vec<Element>> {
    triangles
        .iter_mut()
        .enumerate()
        .map(|(t, tri)| {
            let mut e1 = nodes[tri[1]] - nodes[tri[0]];
            let mut e2 = nodes[tri[2]] - nodes[tri[0]];
            let mut det = e1.x * e2.y - e1.y * e2.x;
            if det < 0.0 {
                tri.swap(1, 2);
                std::mem::swap(&mut e1, &mut e2);
                det = -det;
            }
            if !(0.5 * det > MIN_TRIANGLE_AREA) {
                return Err(Error::MeshInvalid(format!("triangle {t} has area {:e}", 0.5 * det)));
            }
            let g1 = Vec2::new(e2.y, -e2.x) / det;
            let g2 = Vec2::new(-e1.y, e1.x) / det;
            Ok(Element { area: 0.5 * det, grads: [-g1 - g2, g1, g2] })
        })
        .collect()
}

/// Points of `curve` along `rays` directions from its star center. If the ray count is a
/// multiple of the vertex count, the curve's vertices are hit exactly and each edge is
/// split evenly.
fn ray_anchors(curve: &BoundaryPolyline, rays: usize) -> Result<Vec<Vec2>> {
    let n = curve.len();
    if rays % n == 0 {
        let m = rays / n;
        return Ok(curve
            .edges()
            .flat_map(|(a, b)| (0..m).map(move |k| a + (b - a) * (k as f64 / m as f64)))
            .collect());
    }
    // Start at the angle of the first vertex so that vertex is a node.
    let v0 = curve.vertices()[0] - curve.star_center();
    let t0 = v0.y.atan2(v0.x);
    (0..rays)
        .map(|i| {
            let t = t0 + TAU * i as f64 / rays as f64;
            curve
                .ray_crossing(Vec2::new(t.cos(), t.sin()))
                .ok_or_else(|| Error::MeshInvalid(format!("ray {i} misses the inner boundary")))
        })
        .collect()
}

/// Ray-layer mesh of the region between `inner` and `outer`. Along each ray the layer
/// radii grow geometrically from the inner to the outer crossing.
pub fn generate_annulus_mesh(inner: BoundaryPolyline, outer: BoundaryPolyline, radial_layers: usize, angular_nodes: usize) -> Result<AnnulusMesh> {
    if radial_layers < 1 || angular_nodes < 3 {
        return Err(Error::MeshInvalid("need at least one layer and three rays".into()));
    }
    let c = inner.star_center();
    if (outer.star_center() - c).norm() > 1e-12 * (1.0 + c.norm()) {
        return Err(Error::MeshInvalid("inner and outer boundaries need a common center".into()));
    }
    if !inner.is_star_shaped() || !outer.is_star_shaped() {
        return Err(Error::MeshInvalid("boundaries must be star-shaped about the center".into()));
    }
    let anchors = ray_anchors(&inner, angular_nodes)?;
    let (nl, na) = (radial_layers, angular_nodes);
    let mut nodes = vec![Vec2::zeros(); (nl + 1) * na];
    for (i, a) in anchors.iter().enumerate() {
        let dir = a - c;
        let rho_in = dir.norm();
        let hit = outer
            .ray_crossing(dir)
            .ok_or_else(|| Error::MeshInvalid(format!("ray {i} misses the outer boundary")))?;
        let rho_out = (hit - c).norm();
        if !(rho_out > rho_in * (1.0 + 1e-9)) {
            return Err(Error::MeshInvalid(format!("inner boundary is not strictly inside the outer one on ray {i}")));
        }
        let unit = dir / rho_in;
        for j in 0..=nl {
            nodes[j * na + i] = match j {
                0 => *a,
                _ if j == nl => hit,
                _ => c + unit * (rho_in * (rho_out / rho_in).powf(j as f64 / nl as f64)),
            };
        }
    }
    let tags = (0..nodes.len())
        .map(|k| match k / na {
            0 => NodeTag::Inner,
            j if j == nl => NodeTag::Outer,
            _ => NodeTag::Interior,
        })
        .collect();
    let mut triangles = Vec::with_capacity(2 * nl * na);
    for j in 0..nl {
        for i in 0..na {
            let a = j * na + i;
            let b = j * na + (i + 1) % na;
            let cc = (j + 1) * na + (i + 1) % na;
            let d = (j + 1) * na + i;
            triangles.push([a, b, cc]);
            triangles.push([a, cc, d]);
        }
    }
    let elements = build_elements(&nodes, &mut triangles)?;
    Ok(AnnulusMesh {
        grid: (0..nodes.len()).collect(),
        nodes,
        triangles,
        tags,
        elements,
        inner: Some(inner),
        outer,
        layers: nl,
        rays: na,
        topology: Topology::Annulus,
    })
}

/// Exterior of `inner` truncated at the Wulff boundary `{F° = l}`. The outer polyline
/// has a vertex on every ray, so outer nodes satisfy `F° = l` exactly.
pub fn truncated_exterior_mesh(
    norm: &MinkowskiNorm,
    inner: BoundaryPolyline,
    l: f64,
    radial_layers: usize,
    angular_nodes: usize,
) -> Result<AnnulusMesh> {
    let c = inner.star_center();
    let anchors = ray_anchors(&inner, angular_nodes)?;
    let outer = anchors
        .iter()
        .map(|a| {
            let d = a - c;
            Ok(c + l * d / norm.dual(d)?)
        })
        .collect::<Result<Vec<_>>>()?;
    let outer = BoundaryPolyline::new(outer, c)?;
    generate_annulus_mesh(inner, outer, radial_layers, angular_nodes)
}

/// Ray-layer mesh of the region inside `boundary` with evenly spaced layers and a fan of
/// triangles around the center.
pub fn generate_disk_mesh(boundary: BoundaryPolyline, radial_layers: usize, angular_nodes: usize) -> Result<AnnulusMesh> {
    if radial_layers < 1 || angular_nodes < 3 {
        return Err(Error::MeshInvalid("need at least one layer and three rays".into()));
    }
    if !boundary.is_star_shaped() {
        return Err(Error::MeshInvalid("boundary must be star-shaped about its center".into()));
    }
    let c = boundary.star_center();
    let anchors = ray_anchors(&boundary, angular_nodes)?;
    let (nl, na) = (radial_layers, angular_nodes);
    let mut nodes = vec![c];
    let mut tags = vec![NodeTag::Interior];
    for j in 1..=nl {
        for a in &anchors {
            nodes.push(if j == nl { *a } else { c + (a - c) * (j as f64 / nl as f64) });
            tags.push(if j == nl { NodeTag::Outer } else { NodeTag::Interior });
        }
    }
    let id = |j: usize, i: usize| if j == 0 { 0 } else { 1 + (j - 1) * na + i % na };
    let mut triangles = Vec::with_capacity(na * (2 * nl - 1));
    for i in 0..na {
        triangles.push([0, id(1, i), id(1, i + 1)]);
    }
    for j in 1..nl {
        for i in 0..na {
            triangles.push([id(j, i), id(j, i + 1), id(j + 1, i + 1)]);
            triangles.push([id(j, i), id(j + 1, i + 1), id(j + 1, i)]);
        }
    }
    let elements = build_elements(&nodes, &mut triangles)?;
    let grid = (0..=nl).flat_map(|j| (0..na).map(move |i| id(j, i))).collect();
    Ok(AnnulusMesh {
        nodes,
        triangles,
        tags,
        elements,
        inner: None,
        outer: boundary,
        layers: nl,
        rays: na,
        grid,
        topology: Topology::Disk,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wulff::{ellipse_domain, wulff_boundary, WulffShapeSpec};

    fn circle(r: f64, n: usize) -> BoundaryPolyline {
        wulff_boundary(&MinkowskiNorm::euclidean(), WulffShapeSpec::centered(r).unwrap(), n).unwrap()
    }

    #[test]
    fn circle_annulus_counts() {
        let m = generate_annulus_mesh(circle(1.0, 128), circle(10.0, 128), 32, 128).unwrap();
        assert_eq!(m.triangle_count(), 8192);
        assert_eq!(m.node_count(), 33 * 128);
        assert_eq!(m.euler_characteristic(), 0);
        assert!(m.min_quality() >= 0.05, "quality {}", m.min_quality());
        assert!(m.elements().iter().all(|e| e.area > 0.0));
    }

    #[test]
    fn inner_vertices_are_inner_nodes() {
        let inner = ellipse_domain(2.0, 1.0, 64).unwrap();
        let m = truncated_exterior_mesh(&MinkowskiNorm::euclidean(), inner.clone(), 40.0, 16, 256).unwrap();
        for v in inner.vertices() {
            assert!((0..m.node_count()).any(|k| m.tag(k) == NodeTag::Inner && (m.nodes()[k] - v).norm() < 1e-14));
        }
        for k in 0..m.node_count() {
            if m.tag(k) == NodeTag::Outer {
                assert!((m.nodes()[k].norm() - 40.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn barycentric_gradients_reproduce_linear_functions() {
        let m = generate_annulus_mesh(circle(1.0, 32), circle(3.0, 32), 4, 32).unwrap();
        let f = |x: Vec2| 2.0 * x.x - 3.0 * x.y + 1.0;
        for (t, e) in m.triangles().iter().zip(m.elements()) {
            let g: Vec2 = (0..3).map(|k| e.grads[k] * f(m.nodes()[t[k]])).sum();
            assert!((g - Vec2::new(2.0, -3.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn disk_mesh_is_a_disk() {
        let m = generate_disk_mesh(circle(2.0, 64), 12, 64).unwrap();
        assert_eq!(m.euler_characteristic(), 1);
        assert_eq!(m.tags().iter().filter(|t| **t == NodeTag::Outer).count(), 64);
        assert_eq!(m.ray_node(0, 5), 0);
        let total: f64 = m.elements().iter().map(|e| e.area).sum();
        assert!((total - m.outer().signed_area()).abs() < 1e-10);
    }

    #[test]
    fn rejects_crossing_boundaries() {
        assert!(generate_annulus_mesh(circle(2.0, 64), circle(1.0, 64), 8, 64).is_err());
    }
}
