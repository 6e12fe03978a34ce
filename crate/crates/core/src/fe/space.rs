use std::sync::Arc;

use super::hz::{eval_point, local_dim as hz_local_dim, n_cell};
use super::kernels::{dg_basis, h1_kernels};
use super::rt::RtReference;
use super::{FeError, Orientation, PointGeometry};
use crate::mesh::Mesh;
use crate::polynomials::Dual;
use crate::tensor::{SymMatrix2, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceKind {
    /// Continuous hierarchical `U^p`.
    Lagrange,
    /// Element-wise `P^degree`.
    Dg,
    /// `RT^order`.
    Rt,
    /// `HZ^p`.
    Hz,
}

/// A finite element space on a fixed mesh with its global numbering.
#[derive(Debug, Clone)]
pub struct FeSpace {
    kind: SpaceKind,
    degree: usize,
    n_dofs: usize,
    local_dim: usize,
    elem_dofs: Vec<usize>,
    elem_signs: Vec<f64>,
    elem_local: Vec<Vec<usize>>,
    rt: Option<Arc<RtReference>>,
}

/// Scalar basis at quadrature points, indexed `[q * n + i]`.
#[derive(Debug, Clone, Default)]
pub struct ScalarBasis {
    pub n: usize,
    pub values: Vec<f64>,
    pub grads: Vec<Vec2>,
}

#[derive(Debug, Clone, Default)]
pub struct HzBasis {
    pub n: usize,
    pub values: Vec<SymMatrix2>,
    pub divs: Vec<Vec2>,
}

#[derive(Debug, Clone, Default)]
pub struct RtBasis {
    pub n: usize,
    pub values: Vec<Vec2>,
    pub divs: Vec<f64>,
}

impl FeSpace {
    /// Continuous hierarchical Lagrange space of degree `p >= 1`.
    pub fn lagrange(mesh: &Mesh, p: usize) -> Result<Self, FeError> {
        if p < 1 {
            return Err(FeError::DegreeTooLow { space: "Lagrange space", degree: p, min: 1 });
        }
        let (nv, ne) = (mesh.n_vertices(), mesh.n_edges());
        let nk = p - 1;
        let nc = if p >= 3 { n_cell(p) } else { 0 };
        let local = 3 + 3 * nk + nc;
        let mut dofs = Vec::with_capacity(local * mesh.n_elements());
        let mut elem_local = Vec::with_capacity(mesh.n_elements());
        for (t, tri) in mesh.triangles().iter().enumerate() {
            dofs.extend_from_slice(tri);
            for e in mesh.element_edges(t) {
                dofs.extend((0..nk).map(|k| nv + e * nk + k));
            }
            let base = nv + ne * nk + t * nc;
            dofs.extend(base..base + nc);
            elem_local.push((base..base + nc).collect());
        }
        let n = nv + ne * nk + mesh.n_elements() * nc;
        let signs = vec![1.0; dofs.len()];
        Ok(FeSpace { kind: SpaceKind::Lagrange, degree: p, n_dofs: n, local_dim: local, elem_dofs: dofs, elem_signs: signs, elem_local, rt: None })
    }

    /// Discontinuous `P^degree`.
    pub fn dg(mesh: &Mesh, degree: usize) -> Result<Self, FeError> {
        let local = (degree + 1) * (degree + 2) / 2;
        let n = local * mesh.n_elements();
        let dofs: Vec<usize> = (0..n).collect();
        let elem_local = (0..mesh.n_elements()).map(|t| (t * local..(t + 1) * local).collect()).collect();
        Ok(FeSpace { kind: SpaceKind::Dg, degree, n_dofs: n, local_dim: local, elem_dofs: dofs, elem_signs: vec![1.0; n], elem_local, rt: None })
    }

    /// Raviart-Thomas space `RT^order`.
    pub fn rt(mesh: &Mesh, order: usize) -> Result<Self, FeError> {
        let r = RtReference::new(order);
        let (ne_loc, ni) = (r.n_edge(), r.n_interior());
        let local = r.dim();
        let mut dofs = Vec::with_capacity(local * mesh.n_elements());
        let mut signs = Vec::with_capacity(local * mesh.n_elements());
        let mut elem_local = Vec::new();
        let base_i = mesh.n_edges() * ne_loc;
        for t in 0..mesh.n_elements() {
            let o = Orientation::of(mesh, t);
            for (le, e) in mesh.element_edges(t).iter().enumerate() {
                for m in 0..ne_loc {
                    dofs.push(e * ne_loc + m);
                    let mut s = if o.primary[le] { 1.0 } else { -1.0 };
                    if !o.ascending[le] && m % 2 == 1 {
                        s = -s;
                    }
                    signs.push(s);
                }
            }
            let b = base_i + t * ni;
            dofs.extend(b..b + ni);
            signs.extend(std::iter::repeat(1.0).take(ni));
            elem_local.push((b..b + ni).collect());
        }
        let n = base_i + mesh.n_elements() * ni;
        Ok(FeSpace { kind: SpaceKind::Rt, degree: order, n_dofs: n, local_dim: local, elem_dofs: dofs, elem_signs: signs, elem_local, rt: Some(Arc::new(r)) })
    }

    /// Hu-Zhang space `HZ^p`, `p >= 3`.
    pub fn hz(mesh: &Mesh, p: usize) -> Result<Self, FeError> {
        if p < 3 {
            return Err(FeError::DegreeTooLow { space: "Hu-Zhang space", degree: p, min: 3 });
        }
        let (nv, ne) = (mesh.n_vertices(), mesh.n_edges());
        let nk = p - 1;
        let n_loc_only = 3 * nk + 3 * n_cell(p);
        let local = hz_local_dim(p);
        let mut dofs = Vec::with_capacity(local * mesh.n_elements());
        let mut signs = Vec::with_capacity(local * mesh.n_elements());
        let mut elem_local = Vec::new();
        let base_l = 3 * nv + 2 * nk * ne;
        for (t, tri) in mesh.triangles().iter().enumerate() {
            for v in tri {
                dofs.extend([3 * v, 3 * v + 1, 3 * v + 2]);
                signs.extend([1.0; 3]);
            }
            // the orientation sign of the tangent-normal functions is applied at evaluation
            for e in mesh.element_edges(t) {
                for k in 0..nk {
                    dofs.push(3 * nv + e * 2 * nk + 2 * k);
                    dofs.push(3 * nv + e * 2 * nk + 2 * k + 1);
                    signs.extend([1.0, 1.0]);
                }
            }
            let b = base_l + t * n_loc_only;
            dofs.extend(b..b + n_loc_only);
            signs.extend(std::iter::repeat(1.0).take(n_loc_only));
            elem_local.push((b..b + n_loc_only).collect());
        }
        let n = base_l + mesh.n_elements() * n_loc_only;
        Ok(FeSpace { kind: SpaceKind::Hz, degree: p, n_dofs: n, local_dim: local, elem_dofs: dofs, elem_signs: signs, elem_local, rt: None })
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn n_dofs(&self) -> usize {
        self.n_dofs
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    /// Global dof of every local function of `elem`.
    pub fn element_dofs(&self, elem: usize) -> &[usize] {
        &self.elem_dofs[elem * self.local_dim..(elem + 1) * self.local_dim]
    }

    fn element_signs(&self, elem: usize) -> &[f64] {
        &self.elem_signs[elem * self.local_dim..(elem + 1) * self.local_dim]
    }

    /// Dofs owned by a single element (cell dofs, Hu-Zhang tangent-tangent
    /// dofs, Raviart-Thomas interior dofs, all dofs of a discontinuous space).
    pub fn element_local_dofs(&self, elem: usize) -> &[usize] {
        &self.elem_local[elem]
    }

    /// Dofs whose functions have a non-vanishing trace on boundary edges with
    /// one of the given markers (for Hu-Zhang and Raviart-Thomas, a non-vanishing
    /// normal trace; vertex dofs are included for Hu-Zhang and Lagrange).
    pub fn boundary_dofs(&self, mesh: &Mesh, markers: &[u32]) -> Vec<usize> {
        let mut flag = vec![false; self.n_dofs];
        for e in 0..mesh.n_edges() {
            let Some(m) = mesh.edge_marker(e) else { continue };
            if !markers.contains(&m) {
                continue;
            }
            let [a, b] = mesh.edges()[e];
            match self.kind {
                SpaceKind::Lagrange => {
                    let nk = self.degree - 1;
                    flag[a] = true;
                    flag[b] = true;
                    for k in 0..nk {
                        flag[mesh.n_vertices() + e * nk + k] = true;
                    }
                }
                SpaceKind::Hz => {
                    let nk = self.degree - 1;
                    for v in [a, b] {
                        for c in 0..3 {
                            flag[3 * v + c] = true;
                        }
                    }
                    for k in 0..2 * nk {
                        flag[3 * mesh.n_vertices() + e * 2 * nk + k] = true;
                    }
                }
                SpaceKind::Rt => {
                    let ne = self.degree + 1;
                    for m in 0..ne {
                        flag[e * ne + m] = true;
                    }
                }
                SpaceKind::Dg => {}
            }
        }
        (0..self.n_dofs).filter(|&i| flag[i]).collect()
    }

    /// Lagrange or discontinuous basis with physical gradients.
    pub fn eval_scalar(&self, mesh: &Mesh, elem: usize, geo: &[PointGeometry]) -> ScalarBasis {
        let n = self.local_dim;
        let mut out = ScalarBasis { n, values: Vec::with_capacity(n * geo.len()), grads: Vec::with_capacity(n * geo.len()) };
        let asc = match self.kind {
            SpaceKind::Lagrange => Orientation::of(mesh, elem).ascending,
            _ => [true; 3],
        };
        for pg in geo {
            let (x, y) = (Dual::var(pg.xi[0], 0), Dual::var(pg.xi[1], 1));
            let k = match self.kind {
                SpaceKind::Lagrange => h1_kernels(self.degree, x, y, asc),
                SpaceKind::Dg => dg_basis(self.degree, x, y),
                _ => panic!("eval_scalar called on a non-scalar space"),
            };
            for d in k {
                out.values.push(d.v);
                out.grads.push(pg.grad(d.d));
            }
        }
        out
    }

    /// Hu-Zhang values and divergences.
    pub fn eval_hz(&self, mesh: &Mesh, elem: usize, geo: &[PointGeometry]) -> HzBasis {
        assert_eq!(self.kind, SpaceKind::Hz);
        let o = Orientation::of(mesh, elem);
        let mut out = HzBasis { n: self.local_dim, values: Vec::new(), divs: Vec::new() };
        for pg in geo {
            eval_point(self.degree, pg, &o, &mut out.values, &mut out.divs);
        }
        out
    }

    /// Piola-mapped Raviart-Thomas values and divergences with orientation signs.
    pub fn eval_rt(&self, elem: usize, geo: &[PointGeometry]) -> RtBasis {
        let r = self.rt.as_ref().expect("eval_rt called on a non-Raviart-Thomas space");
        let n = self.local_dim;
        let signs = self.element_signs(elem);
        let mut out = RtBasis { n, values: Vec::with_capacity(n * geo.len()), divs: Vec::with_capacity(n * geo.len()) };
        let (mut v, mut d) = (Vec::with_capacity(n), Vec::with_capacity(n));
        for pg in geo {
            v.clear();
            d.clear();
            r.eval(pg.xi[0], pg.xi[1], &mut v, &mut d);
            let j = &pg.jac;
            for i in 0..n {
                let s = signs[i] / pg.det;
                out.values.push([s * (j[0][0] * v[i][0] + j[0][1] * v[i][1]), s * (j[1][0] * v[i][0] + j[1][1] * v[i][1])]);
                out.divs.push(s * d[i]);
            }
        }
        out
    }
}
