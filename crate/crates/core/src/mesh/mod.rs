//! Conforming triangular meshes with optional curved boundary edges.
//!
//! Triangles are stored counter-clockwise. Local vertex `k` of a triangle
//! `[a, b, c]` sits at reference coordinates `(0,0)`, `(1,0)`, `(0,1)`
//! respectively, so `ξ` points towards `b` and `η` towards `c`. The first
//! local edge `a-b` doubles as the bisection edge for newest-vertex refinement.

mod generators;
mod geometry;
mod io;
mod refine;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use generators::{disk_mesh, lshape_mesh, square_mesh};
pub use geometry::GeometryMap;
pub use io::{mesh_from_json, mesh_to_json};
pub use refine::{refine_marked, refine_uniform};

use crate::tensor::Vec2;

/// Local edges as pairs of local vertices; the edge runs from the first to the second.
pub const LOCAL_EDGES: [[usize; 2]; 3] = [[0, 2], [0, 1], [2, 1]];

/// Reference coordinates of the local vertices.
pub const REF_VERTICES: [Vec2; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("invalid generator argument: {0}")]
    InvalidArgument(String),
    #[error("triangle {0} is not counter-clockwise or is degenerate")]
    Orientation(usize),
    #[error("edge {0:?} is shared by more than two triangles")]
    NonManifold([usize; 2]),
    #[error("vertex index {index} out of range in triangle {tri}")]
    BadIndex { tri: usize, index: usize },
    #[error("boundary edge {0:?} is not an edge on the mesh boundary")]
    NotBoundary([usize; 2]),
    #[error("malformed mesh JSON: {0}")]
    Json(String),
    #[error("point {0:?} lies outside the mesh")]
    PointOutside(Vec2),
}

/// Description of a curved boundary edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum BoundaryCurve {
    Circle { center: Vec2, radius: f64 },
}

impl BoundaryCurve {
    /// Point on the curve between `a` and `b` at parameter `s ∈ [0, 1]`,
    /// uniform in arc length.
    pub fn point(&self, a: Vec2, b: Vec2, s: f64) -> Vec2 {
        match self {
            BoundaryCurve::Circle { center, radius } => {
                let ta = (a[1] - center[1]).atan2(a[0] - center[0]);
                let tb = (b[1] - center[1]).atan2(b[0] - center[0]);
                let mut d = tb - ta;
                while d > std::f64::consts::PI {
                    d -= 2.0 * std::f64::consts::PI;
                }
                while d <= -std::f64::consts::PI {
                    d += 2.0 * std::f64::consts::PI;
                }
                let th = ta + s * d;
                [center[0] + radius * th.cos(), center[1] + radius * th.sin()]
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryEdge {
    pub vertices: [usize; 2],
    pub marker: u32,
    #[serde(default)]
    pub curve: Option<usize>,
}

#[derive(Debug, Clone)]
struct Topology {
    edges: Vec<[usize; 2]>,
    elem_edges: Vec<[usize; 3]>,
    edge_elems: Vec<Vec<(usize, usize)>>,
    edge_boundary: Vec<Option<usize>>,
    boundary_vertex: Vec<bool>,
}

#[derive(Debug, Clone)]
pub struct Mesh {
    vertices: Vec<Vec2>,
    triangles: Vec<[usize; 3]>,
    boundary: Vec<BoundaryEdge>,
    curves: Vec<BoundaryCurve>,
    geo_order: usize,
    topo: Topology,
}

impl Mesh {
    /// Builds a mesh and its topology. Boundary edges not listed in
    /// `boundary` receive marker 0.
    pub fn new(
        vertices: Vec<Vec2>,
        triangles: Vec<[usize; 3]>,
        boundary: Vec<BoundaryEdge>,
        curves: Vec<BoundaryCurve>,
        geo_order: usize,
    ) -> Result<Mesh, MeshError> {
        if geo_order == 0 {
            return Err(MeshError::InvalidArgument("geometry order must be at least 1".into()));
        }
        for (t, tri) in triangles.iter().enumerate() {
            for &v in tri {
                if v >= vertices.len() {
                    return Err(MeshError::BadIndex { tri: t, index: v });
                }
            }
            let (a, b, c) = (vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
            let area2 = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
            if !(area2 > 0.0) {
                return Err(MeshError::Orientation(t));
            }
        }
        let mut edge_index: HashMap<[usize; 2], usize> = HashMap::new();
        let mut edges = Vec::new();
        let mut edge_elems: Vec<Vec<(usize, usize)>> = Vec::new();
        let mut elem_edges = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            let mut ee = [0; 3];
            for (le, pair) in LOCAL_EDGES.iter().enumerate() {
                let (a, b) = (tri[pair[0]], tri[pair[1]]);
                let key = [a.min(b), a.max(b)];
                let idx = *edge_index.entry(key).or_insert_with(|| {
                    edges.push(key);
                    edge_elems.push(Vec::new());
                    edges.len() - 1
                });
                edge_elems[idx].push((t, le));
                if edge_elems[idx].len() > 2 {
                    return Err(MeshError::NonManifold(key));
                }
                ee[le] = idx;
            }
            elem_edges.push(ee);
        }
        let mut edge_boundary = vec![None; edges.len()];
        let mut boundary = boundary;
        for (i, be) in boundary.iter().enumerate() {
            let key = [be.vertices[0].min(be.vertices[1]), be.vertices[0].max(be.vertices[1])];
            match edge_index.get(&key) {
                Some(&e) if edge_elems[e].len() == 1 => edge_boundary[e] = Some(i),
                _ => return Err(MeshError::NotBoundary(be.vertices)),
            }
            if let Some(c) = be.curve {
                if c >= curves.len() {
                    return Err(MeshError::InvalidArgument(format!("curve index {c} out of range")));
                }
            }
        }
        for e in 0..edges.len() {
            if edge_elems[e].len() == 1 && edge_boundary[e].is_none() {
                boundary.push(BoundaryEdge { vertices: edges[e], marker: 0, curve: None });
                edge_boundary[e] = Some(boundary.len() - 1);
            }
        }
        let mut boundary_vertex = vec![false; vertices.len()];
        for be in &boundary {
            boundary_vertex[be.vertices[0]] = true;
            boundary_vertex[be.vertices[1]] = true;
        }
        let topo = Topology { edges, elem_edges, edge_elems, edge_boundary, boundary_vertex };
        Ok(Mesh { vertices, triangles, boundary, curves, geo_order, topo })
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary
    }

    pub fn curves(&self) -> &[BoundaryCurve] {
        &self.curves
    }

    pub fn geo_order(&self) -> usize {
        self.geo_order
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_elements(&self) -> usize {
        self.triangles.len()
    }

    pub fn n_edges(&self) -> usize {
        self.topo.edges.len()
    }

    /// Global edges with ascending vertex indices.
    pub fn edges(&self) -> &[[usize; 2]] {
        &self.topo.edges
    }

    pub fn element_edges(&self, elem: usize) -> [usize; 3] {
        self.topo.elem_edges[elem]
    }

    /// Elements adjacent to an edge, with the local edge index in each.
    pub fn edge_elements(&self, edge: usize) -> &[(usize, usize)] {
        &self.topo.edge_elems[edge]
    }

    pub fn is_boundary_edge(&self, edge: usize) -> bool {
        self.topo.edge_elems[edge].len() == 1
    }

    pub fn edge_marker(&self, edge: usize) -> Option<u32> {
        self.topo.edge_boundary[edge].map(|i| self.boundary[i].marker)
    }

    pub fn edge_curve(&self, edge: usize) -> Option<&BoundaryCurve> {
        self.topo.edge_boundary[edge].and_then(|i| self.boundary[i].curve).map(|c| &self.curves[c])
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.topo.boundary_vertex[v]
    }

    /// `true` if the local edge of `elem` runs from lower to higher global vertex index.
    pub fn local_edge_ascending(&self, elem: usize, local_edge: usize) -> bool {
        let tri = self.triangles[elem];
        let [i, j] = LOCAL_EDGES[local_edge];
        tri[i] < tri[j]
    }

    /// `true` if `elem` is the first element listed for the edge.
    pub fn is_primary_side(&self, elem: usize, local_edge: usize) -> bool {
        let e = self.topo.elem_edges[elem][local_edge];
        self.topo.edge_elems[e][0].0 == elem
    }

    pub fn geometry(&self, elem: usize) -> GeometryMap {
        GeometryMap::for_element(self, elem)
    }

    /// Length of the longest (straight) edge of an element.
    pub fn element_diameter(&self, elem: usize) -> f64 {
        let tri = self.triangles[elem];
        LOCAL_EDGES
            .iter()
            .map(|[i, j]| {
                let (a, b) = (self.vertices[tri[*i]], self.vertices[tri[*j]]);
                ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// Maximum element diameter.
    pub fn h(&self) -> f64 {
        (0..self.n_elements()).map(|e| self.element_diameter(e)).fold(0.0, f64::max)
    }

    /// Smallest interior angle of the straight triangle, in radians.
    pub fn min_angle(&self, elem: usize) -> f64 {
        let tri = self.triangles[elem];
        let p: Vec<Vec2> = tri.iter().map(|&v| self.vertices[v]).collect();
        (0..3)
            .map(|k| {
                let (a, b, c) = (p[k], p[(k + 1) % 3], p[(k + 2) % 3]);
                let u = [b[0] - a[0], b[1] - a[1]];
                let v = [c[0] - a[0], c[1] - a[1]];
                let cos = (u[0] * v[0] + u[1] * v[1]) / ((u[0] * u[0] + u[1] * u[1]).sqrt() * (v[0] * v[0] + v[1] * v[1]).sqrt());
                cos.clamp(-1.0, 1.0).acos()
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Area of the (possibly curved) element.
    pub fn element_area(&self, elem: usize) -> f64 {
        let g = self.geometry(elem);
        let q = crate::assembly::quadrature::triangle_rule(2 * g.order()).expect("quadrature");
        q.points.iter().zip(&q.weights).map(|(p, w)| w * g.jacobian(p[0], p[1]).1).sum()
    }

    /// Locates the element containing `x` and its reference coordinates.
    pub fn locate(&self, x: Vec2) -> Result<(usize, Vec2), MeshError> {
        let tol = 1e-10;
        for e in 0..self.n_elements() {
            let g = self.geometry(e);
            if let Some(r) = g.inverse(x) {
                if r[0] >= -tol && r[1] >= -tol && r[0] + r[1] <= 1.0 + tol {
                    return Ok((e, r));
                }
            }
        }
        Err(MeshError::PointOutside(x))
    }

    /// Elements within `layers` vertex-neighbour layers of the vertex closest to `x`.
    pub fn vertex_patch(&self, x: Vec2, layers: usize) -> Vec<usize> {
        let mut best = 0;
        let mut bd = f64::INFINITY;
        for (i, v) in self.vertices.iter().enumerate() {
            let d = (v[0] - x[0]).powi(2) + (v[1] - x[1]).powi(2);
            if d < bd {
                bd = d;
                best = i;
            }
        }
        let mut verts = vec![false; self.n_vertices()];
        verts[best] = true;
        let mut elems = vec![false; self.n_elements()];
        for _ in 0..layers {
            for (e, tri) in self.triangles.iter().enumerate() {
                if tri.iter().any(|&v| verts[v]) {
                    elems[e] = true;
                }
            }
            for (e, tri) in self.triangles.iter().enumerate() {
                if elems[e] {
                    tri.iter().for_each(|&v| verts[v] = true);
                }
            }
        }
        (0..self.n_elements()).filter(|&e| elems[e]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_clockwise_triangle() {
        let v = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        assert!(matches!(Mesh::new(v.clone(), vec![[0, 2, 1]], vec![], vec![], 1), Err(MeshError::Orientation(0))));
        assert!(Mesh::new(v, vec![[0, 1, 2]], vec![], vec![], 1).is_ok());
    }

    #[test]
    fn rejects_non_manifold_edge() {
        let v = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.0, -1.0], [1.0, 1.0]];
        let t = vec![[0, 1, 2], [0, 3, 1], [0, 1, 4]];
        assert!(matches!(Mesh::new(v, t, vec![], vec![], 1), Err(MeshError::NonManifold(_))));
    }

    #[test]
    fn unlisted_boundary_edges_get_marker_zero() {
        let v = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let m = Mesh::new(v, vec![[0, 1, 2]], vec![], vec![], 1).unwrap();
        assert_eq!(m.boundary_edges().len(), 3);
        assert!((0..3).all(|e| m.edge_marker(e) == Some(0)));
    }

    #[test]
    fn vertex_patch_grows() {
        let m = square_mesh(5).unwrap();
        let one = m.vertex_patch([0.5, 0.5], 1);
        let two = m.vertex_patch([0.5, 0.5], 2);
        assert!(!one.is_empty() && two.len() > one.len());
    }

    #[test]
    fn locate_finds_points() {
        let m = disk_mesh(24, 3).unwrap();
        let (e, r) = m.locate([0.3, -0.2]).unwrap();
        let x = m.geometry(e).map(r[0], r[1]);
        assert!((x[0] - 0.3).abs() < 1e-12 && (x[1] + 0.2).abs() < 1e-12);
        assert!(m.locate([3.0, 0.0]).is_err());
    }
}
