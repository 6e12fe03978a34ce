use crate::polynomials::{integrated_legendre, scaled_integrated_legendre_all, Dual, Jet, Scalar};
use crate::solver::dense::solve_dense;
use crate::tensor::{det2, inverse2, Mat2, Vec2};

use super::{Mesh, LOCAL_EDGES};

/// Polynomial map from the reference triangle onto a physical element.
///
/// The map is the affine interpolant of the vertices plus, for every curved
/// edge, a combination of that edge's scaled integrated Legendre kernels. The
/// correction vanishes on the other two edges, so straight edges stay straight
/// and affinely parametrised.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometryMap {
    vertices: [Vec2; 3],
    edge_coeffs: [Vec<Vec2>; 3],
    order: usize,
}

impl GeometryMap {
    pub fn affine(vertices: [Vec2; 3]) -> Self {
        GeometryMap { vertices, edge_coeffs: [Vec::new(), Vec::new(), Vec::new()], order: 1 }
    }

    /// Map whose local edges follow the given point functions `s ↦ x(s)`,
    /// running from the first to the second local vertex of the edge, interpolated
    /// with degree `order` at equispaced parameters.
    pub fn with_edges(vertices: [Vec2; 3], edges: [Option<&dyn Fn(f64) -> Vec2>; 3], order: usize) -> Self {
        let mut coeffs: [Vec<Vec2>; 3] = [Vec::new(), Vec::new(), Vec::new()];
        let mut max_order = 1;
        if order >= 2 {
            for (le, curve) in edges.iter().enumerate() {
                let Some(curve) = curve else { continue };
                let [i, j] = LOCAL_EDGES[le];
                let (a, b) = (vertices[i], vertices[j]);
                let n = order - 1;
                let mut mat = vec![0.0; n * n];
                let mut rhs = vec![0.0; 2 * n];
                for k in 0..n {
                    let s = (k + 1) as f64 / order as f64;
                    let x = curve(s);
                    for m in 0..n {
                        mat[k * n + m] = integrated_legendre(m + 2, 2.0 * s - 1.0);
                    }
                    rhs[k] = x[0] - ((1.0 - s) * a[0] + s * b[0]);
                    rhs[n + k] = x[1] - ((1.0 - s) * a[1] + s * b[1]);
                }
                let cx = solve_dense(&mat, &rhs[..n], n).expect("interpolation matrix is regular");
                let cy = solve_dense(&mat, &rhs[n..], n).expect("interpolation matrix is regular");
                coeffs[le] = cx.iter().zip(&cy).map(|(x, y)| [*x, *y]).collect();
                max_order = order;
            }
        }
        GeometryMap { vertices, edge_coeffs: coeffs, order: max_order }
    }

    pub(crate) fn for_element(mesh: &Mesh, elem: usize) -> Self {
        let tri = mesh.triangles()[elem];
        let verts = [mesh.vertices()[tri[0]], mesh.vertices()[tri[1]], mesh.vertices()[tri[2]]];
        if mesh.geo_order() < 2 {
            return Self::affine(verts);
        }
        let ee = mesh.element_edges(elem);
        let curves: Vec<Option<Box<dyn Fn(f64) -> Vec2 + '_>>> = (0..3)
            .map(|le| {
                mesh.edge_curve(ee[le]).map(|c| {
                    let [i, j] = LOCAL_EDGES[le];
                    let (a, b) = (verts[i], verts[j]);
                    Box::new(move |s: f64| c.point(a, b, s)) as Box<dyn Fn(f64) -> Vec2>
                })
            })
            .collect();
        let refs: [Option<&dyn Fn(f64) -> Vec2>; 3] =
            [curves[0].as_deref(), curves[1].as_deref(), curves[2].as_deref()];
        Self::with_edges(verts, refs, mesh.geo_order())
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn is_affine(&self) -> bool {
        self.edge_coeffs.iter().all(|c| c.is_empty())
    }

    pub fn vertices(&self) -> [Vec2; 3] {
        self.vertices
    }

    fn eval<S: Scalar>(&self, xi: S, eta: S) -> [S; 2] {
        let mu = [-(xi + eta) + 1.0, xi, eta];
        let mut x = [S::cst(0.0), S::cst(0.0)];
        for v in 0..3 {
            x[0] = x[0] + mu[v] * self.vertices[v][0];
            x[1] = x[1] + mu[v] * self.vertices[v][1];
        }
        for (le, c) in self.edge_coeffs.iter().enumerate() {
            if c.is_empty() {
                continue;
            }
            let [i, j] = LOCAL_EDGES[le];
            let ls = scaled_integrated_legendre_all(c.len() + 1, mu[j] - mu[i], mu[i] + mu[j]);
            for (m, cm) in c.iter().enumerate() {
                x[0] = x[0] + ls[m + 2] * cm[0];
                x[1] = x[1] + ls[m + 2] * cm[1];
            }
        }
        x
    }

    pub fn map(&self, xi: f64, eta: f64) -> Vec2 {
        self.eval(xi, eta)
    }

    /// Jacobian `J[a][b] = ∂x_a/∂ξ_b` and its determinant.
    pub fn jacobian(&self, xi: f64, eta: f64) -> (Mat2, f64) {
        if self.is_affine() {
            let v = &self.vertices;
            let j = [[v[1][0] - v[0][0], v[2][0] - v[0][0]], [v[1][1] - v[0][1], v[2][1] - v[0][1]]];
            return (j, det2(&j));
        }
        let x = self.eval(Dual::var(xi, 0), Dual::var(eta, 1));
        let j = [[x[0].d[0], x[0].d[1]], [x[1].d[0], x[1].d[1]]];
        (j, det2(&j))
    }

    /// Point, Jacobian and the derivatives `∂J/∂ξ_c` for `c = 0, 1`.
    pub fn jet(&self, xi: f64, eta: f64) -> (Vec2, Mat2, [Mat2; 2]) {
        let x: [Jet; 2] = self.eval(Jet::var(xi, 0), Jet::var(eta, 1));
        let j = [[x[0].d[0], x[0].d[1]], [x[1].d[0], x[1].d[1]]];
        let mut dj = [[[0.0; 2]; 2]; 2];
        for c in 0..2 {
            for a in 0..2 {
                for b in 0..2 {
                    dj[c][a][b] = x[a].h[b][c];
                }
            }
        }
        ([x[0].v, x[1].v], j, dj)
    }

    /// Reference coordinates of a physical point by Newton iteration. Returns
    /// `None` if the iteration does not converge.
    pub fn inverse(&self, x: Vec2) -> Option<Vec2> {
        let mut r = [1.0 / 3.0, 1.0 / 3.0];
        for _ in 0..50 {
            let y = self.map(r[0], r[1]);
            let res = [x[0] - y[0], x[1] - y[1]];
            let (j, d) = self.jacobian(r[0], r[1]);
            if !(d.abs() > 0.0) {
                return None;
            }
            let ji = inverse2(&j);
            let dr = [ji[0][0] * res[0] + ji[0][1] * res[1], ji[1][0] * res[0] + ji[1][1] * res[1]];
            r = [r[0] + dr[0], r[1] + dr[1]];
            if r[0].abs() > 10.0 || r[1].abs() > 10.0 {
                return None;
            }
            if dr[0].abs() + dr[1].abs() < 1e-15 {
                break;
            }
        }
        let y = self.map(r[0], r[1]);
        let scale = 1.0 + x[0].abs() + x[1].abs();
        if ((y[0] - x[0]).abs() + (y[1] - x[1]).abs()) < 1e-12 * scale {
            Some(r)
        } else {
            None
        }
    }

    /// Mapped equispaced lattice points of degree `order`.
    pub fn control_points(&self) -> Vec<Vec2> {
        let q = self.order.max(1);
        let mut out = Vec::new();
        for j in 0..=q {
            for i in 0..=(q - j) {
                out.push(self.map(i as f64 / q as f64, j as f64 / q as f64));
            }
        }
        out
    }
}
