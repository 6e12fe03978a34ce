//! Block systems and essential boundary conditions.
//!
//! Essential conditions are imposed by symmetric elimination. Constraints are
//! stated on transformed unknowns `y` with `x = T y`, where `T` is the
//! identity except for 3x3 blocks that rotate the stress frame at boundary
//! vertices. The reduced matrix is `(Tᵀ K T)` restricted to the free unknowns.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::forms::{edge_quadrature, EdgePoint};
use super::sparse::{SparseMatrix, TripletList};
use super::AssemblyError;
use crate::fe::{FeSpace, PointGeometry, SpaceKind, REF_EDGES};
use crate::mesh::{Mesh, LOCAL_EDGES};
use crate::solver::dense::DenseLu;
use crate::tensor::{cofactor, mat_vec, norm, rot_t, SymMatrix2, Vec2};

/// Named contiguous unknown ranges of a block system.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockLayout {
    pub names: Vec<String>,
    pub offsets: Vec<usize>,
    pub sizes: Vec<usize>,
}

impl BlockLayout {
    pub fn new(fields: &[(&str, usize)]) -> Self {
        let mut offsets = Vec::with_capacity(fields.len());
        let mut o = 0;
        for (_, n) in fields {
            offsets.push(o);
            o += n;
        }
        BlockLayout {
            names: fields.iter().map(|(s, _)| s.to_string()).collect(),
            offsets,
            sizes: fields.iter().map(|f| f.1).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.offsets.last().map_or(0, |o| o + self.sizes.last().unwrap())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn range(&self, block: usize) -> std::ops::Range<usize> {
        self.offsets[block]..self.offsets[block] + self.sizes[block]
    }
}

/// Assembled block system `K x = b`.
#[derive(Debug, Clone)]
pub struct SparseSystem {
    pub matrix: SparseMatrix,
    pub rhs: Vec<f64>,
    pub layout: BlockLayout,
}

/// Accumulates blocks into a [`SparseSystem`].
#[derive(Debug, Clone)]
pub struct SystemBuilder {
    layout: BlockLayout,
    trip: TripletList,
    rhs: Vec<f64>,
}

impl SystemBuilder {
    pub fn new(layout: BlockLayout) -> Self {
        let n = layout.len();
        SystemBuilder { layout, trip: TripletList::new(), rhs: vec![0.0; n] }
    }

    fn check(&self, block: usize, n: usize) -> Result<(), AssemblyError> {
        if self.layout.sizes[block] != n {
            return Err(AssemblyError::Dimension { expected: self.layout.sizes[block], got: n });
        }
        Ok(())
    }

    /// Adds `scale * m` at block position `(row, col)`.
    pub fn add(&mut self, row: usize, col: usize, m: &SparseMatrix, scale: f64) -> Result<(), AssemblyError> {
        self.check(row, m.nrows())?;
        self.check(col, m.ncols())?;
        let (ro, co) = (self.layout.offsets[row], self.layout.offsets[col]);
        for (i, j, v) in m.triplets() {
            self.trip.push(ro + i, co + j, scale * v);
        }
        Ok(())
    }

    /// Adds `scale * m` at `(row, col)` and `scale * mᵀ` at `(col, row)`.
    pub fn add_symmetric(&mut self, row: usize, col: usize, m: &SparseMatrix, scale: f64) -> Result<(), AssemblyError> {
        self.add(row, col, m, scale)?;
        self.add(col, row, &m.transpose(), scale)
    }

    pub fn add_rhs(&mut self, block: usize, b: &[f64], scale: f64) -> Result<(), AssemblyError> {
        self.check(block, b.len())?;
        let o = self.layout.offsets[block];
        for (i, v) in b.iter().enumerate() {
            self.rhs[o + i] += scale * v;
        }
        Ok(())
    }

    pub fn build(self) -> SparseSystem {
        let n = self.layout.len();
        SparseSystem { matrix: self.trip.into_matrix(n, n), rhs: self.rhs, layout: self.layout }
    }
}

/// Essential constraints on the unknowns of a system.
#[derive(Debug, Clone, Default)]
pub struct Constraints {
    fixed: BTreeMap<usize, f64>,
    blocks: Vec<([usize; 3], [[f64; 3]; 3])>,
}

impl Constraints {
    pub fn new() -> Self {
        Self::default()
    }

    /// Prescribes transformed unknown `i`.
    pub fn fix(&mut self, i: usize, value: f64) {
        self.fixed.insert(i, value);
    }

    /// Declares `x[dofs] = r · y[dofs]`.
    pub fn transform(&mut self, dofs: [usize; 3], r: [[f64; 3]; 3]) {
        self.blocks.push((dofs, r));
    }

    pub fn fixed(&self) -> &BTreeMap<usize, f64> {
        &self.fixed
    }

    pub fn is_empty(&self) -> bool {
        self.fixed.is_empty() && self.blocks.is_empty()
    }

    /// Merges `other`, shifting its indices by `offset`.
    pub fn extend_shifted(&mut self, other: &Constraints, offset: usize) {
        for (i, v) in &other.fixed {
            self.fixed.insert(i + offset, *v);
        }
        for (d, r) in &other.blocks {
            self.blocks.push(([d[0] + offset, d[1] + offset, d[2] + offset], *r));
        }
    }

    fn transform_matrix(&self, n: usize) -> Option<SparseMatrix> {
        if self.blocks.is_empty() {
            return None;
        }
        let mut in_block = vec![false; n];
        let mut trip = TripletList::new();
        for (d, r) in &self.blocks {
            for a in 0..3 {
                in_block[d[a]] = true;
                for b in 0..3 {
                    if r[a][b] != 0.0 {
                        trip.push(d[a], d[b], r[a][b]);
                    }
                }
            }
        }
        for (i, inb) in in_block.iter().enumerate() {
            if !inb {
                trip.push(i, i, 1.0);
            }
        }
        Some(trip.into_matrix(n, n))
    }
}

/// Elimination of constrained unknowns.
#[derive(Debug, Clone)]
pub struct Reduction {
    n: usize,
    free: Vec<usize>,
    map: Vec<isize>,
    y_fixed: Vec<f64>,
    transform: Option<SparseMatrix>,
}

impl Reduction {
    pub fn new(n: usize, c: &Constraints) -> Self {
        let mut map = vec![-1isize; n];
        let mut free = Vec::with_capacity(n - c.fixed.len());
        let mut y_fixed = vec![0.0; n];
        for i in 0..n {
            match c.fixed.get(&i) {
                Some(v) => y_fixed[i] = *v,
                None => {
                    map[i] = free.len() as isize;
                    free.push(i);
                }
            }
        }
        Reduction { n, free, map, y_fixed, transform: c.transform_matrix(n) }
    }

    pub fn n_free(&self) -> usize {
        self.free.len()
    }

    /// Reduced position of full unknown `i`, if it is free.
    pub fn reduced_index(&self, i: usize) -> Option<usize> {
        (self.map[i] >= 0).then_some(self.map[i] as usize)
    }

    pub fn reduce(&self, k: &SparseMatrix, b: &[f64]) -> (SparseMatrix, Vec<f64>) {
        let (kt, bt) = match &self.transform {
            Some(t) => {
                let tt = t.transpose();
                (tt.matmul(&k.matmul(t)), tt.mul_vec(b))
            }
            None => (k.clone(), b.to_vec()),
        };
        let lift = kt.mul_vec(&self.y_fixed);
        let rhs = self.free.iter().map(|&i| bt[i] - lift[i]).collect();
        (kt.extract(&self.map, &self.map, self.free.len(), self.free.len()), rhs)
    }

    /// Full unknowns `x = T y` from the free part of `y`.
    pub fn expand(&self, yr: &[f64]) -> Vec<f64> {
        let mut y = self.y_fixed.clone();
        for (r, &i) in self.free.iter().enumerate() {
            y[i] = yr[r];
        }
        match &self.transform {
            Some(t) => t.mul_vec(&y),
            None => y,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }
}

fn boundary_edges<'a>(mesh: &'a Mesh, markers: &'a [u32]) -> impl Iterator<Item = usize> + 'a {
    (0..mesh.n_edges()).filter(move |&e| mesh.edge_marker(e).is_some_and(|m| markers.contains(&m)))
}

fn solve_small(k: &[f64], f: &[f64], n: usize) -> Result<Vec<f64>, AssemblyError> {
    Ok(DenseLu::new(k, n, 1e-13)?.solve(f))
}

/// Dirichlet values of a Lagrange space: vertex values of `f` and, on each
/// edge, the `L²` projection of `f` minus the vertex interpolant onto the
/// edge functions. Returns `(dof, value)` pairs sorted by dof.
pub fn lagrange_dirichlet(
    mesh: &Mesh,
    space: &FeSpace,
    markers: &[u32],
    f: &dyn Fn(Vec2) -> f64,
) -> Result<Vec<(usize, f64)>, AssemblyError> {
    if space.kind() != SpaceKind::Lagrange {
        return Err(AssemblyError::Incompatible { form: "Dirichlet data".into(), test: space.kind(), trial: space.kind() });
    }
    let p = space.degree();
    let mut out = BTreeMap::new();
    for e in boundary_edges(mesh, markers) {
        let (elem, le) = mesh.edge_elements(e)[0];
        let tri = mesh.triangles()[elem];
        let dofs = space.element_dofs(elem);
        let vals: Vec<f64> = tri.iter().map(|&v| f(mesh.vertices()[v])).collect();
        for lv in LOCAL_EDGES[le] {
            out.insert(dofs[lv], vals[lv]);
        }
        let ne = p - 1;
        if ne == 0 {
            continue;
        }
        let pts = edge_quadrature(mesh, elem, le, 2 * p + 2 * mesh.geo_order() + 2)?;
        let geo: Vec<PointGeometry> = pts.iter().map(|q| q.geo).collect();
        let b = space.eval_scalar(mesh, elem, &geo);
        let first = 3 + le * ne;
        let mut k = vec![0.0; ne * ne];
        let mut rhs = vec![0.0; ne];
        for (iq, q) in pts.iter().enumerate() {
            let v = &b.values[iq * b.n..(iq + 1) * b.n];
            let interp: f64 = (0..3).map(|lv| vals[lv] * v[lv]).sum();
            let r = f(q.geo.x) - interp;
            for a in 0..ne {
                rhs[a] += q.weight * r * v[first + a];
                for c in 0..ne {
                    k[a * ne + c] += q.weight * v[first + a] * v[first + c];
                }
            }
        }
        for (a, x) in solve_small(&k, &rhs, ne)?.into_iter().enumerate() {
            out.insert(dofs[first + a], x);
        }
    }
    Ok(out.into_iter().collect())
}

/// Orthonormal frame `{d1⊗d1, √2 sym(d1⊗d2), d2⊗d2}` at a boundary vertex,
/// with `d2` the normalised sum of the adjacent unit outward normals.
fn vertex_frame(normals: &[Vec2], vertex: usize) -> Result<[SymMatrix2; 3], AssemblyError> {
    let s = normals.iter().fold([0.0, 0.0], |a, n| [a[0] + n[0], a[1] + n[1]]);
    let l = norm(s);
    if !(l > 1e-10 * normals.len() as f64) {
        return Err(AssemblyError::AntiparallelNormals { vertex });
    }
    let d2 = [s[0] / l, s[1] / l];
    let d1 = rot_t(d2);
    Ok([SymMatrix2::outer(d1), SymMatrix2::sym_outer(d1, d2).scale(std::f64::consts::SQRT_2), SymMatrix2::outer(d2)])
}

/// Coefficients of `d` in the Cartesian vertex templates.
fn cartesian_coeffs(d: &SymMatrix2) -> [f64; 3] {
    [d.xx, 2.0 * d.xy, d.yy]
}

fn unit_normal_at(mesh: &Mesh, elem: usize, le: usize, xi: Vec2) -> Vec2 {
    let pg = PointGeometry::new(&mesh.geometry(elem), xi);
    let n = mat_vec(&cofactor(&pg.jac), REF_EDGES[le].normal);
    let l = norm(n);
    [n[0] / l, n[1] / l]
}

/// Essential stress conditions `M n = M̃ n` on the boundary edges with one of
/// `markers`. Vertex unknowns are rotated into the frame of the averaged
/// boundary normal; the normal-normal and tangent-normal vertex components are
/// fixed by point evaluation while the tangent-tangent one stays free. The
/// normal-coupling edge unknowns solve an `L²` projection on each edge of the
/// data minus its vertex interpolant, so constant data is reproduced exactly.
pub fn hz_dirichlet(
    mesh: &Mesh,
    space: &FeSpace,
    markers: &[u32],
    m: &dyn Fn(Vec2) -> SymMatrix2,
) -> Result<Constraints, AssemblyError> {
    if space.kind() != SpaceKind::Hz {
        return Err(AssemblyError::Incompatible { form: "stress Dirichlet data".into(), test: space.kind(), trial: space.kind() });
    }
    let p = space.degree();
    let edges: Vec<usize> = boundary_edges(mesh, markers).collect();
    let mut normals: BTreeMap<usize, Vec<Vec2>> = BTreeMap::new();
    for &e in &edges {
        let (elem, le) = mesh.edge_elements(e)[0];
        let tri = mesh.triangles()[elem];
        for lv in LOCAL_EDGES[le] {
            let xi = crate::mesh::REF_VERTICES[lv];
            normals.entry(tri[lv]).or_default().push(unit_normal_at(mesh, elem, le, xi));
        }
    }
    let mut c = Constraints::new();
    let mut vertex_data = BTreeMap::new();
    for (&v, ns) in &normals {
        let d = vertex_frame(ns, v)?;
        let mut r = [[0.0; 3]; 3];
        for (j, dj) in d.iter().enumerate() {
            let cc = cartesian_coeffs(dj);
            for a in 0..3 {
                r[a][j] = cc[a];
            }
        }
        let dofs = [3 * v, 3 * v + 1, 3 * v + 2];
        c.transform(dofs, r);
        let mv = m(mesh.vertices()[v]);
        c.fix(dofs[1], d[1].ddot(&mv));
        c.fix(dofs[2], d[2].ddot(&mv));
        vertex_data.insert(v, mv);
    }
    let ne = 2 * (p - 1);
    for &e in &edges {
        let (elem, le) = mesh.edge_elements(e)[0];
        let tri = mesh.triangles()[elem];
        let pts: Vec<EdgePoint> = edge_quadrature(mesh, elem, le, 2 * p + 2 * mesh.geo_order() + 2)?;
        let geo: Vec<PointGeometry> = pts.iter().map(|q| q.geo).collect();
        let b = space.eval_hz(mesh, elem, &geo);
        let first = 9 + le * ne;
        let mut k = vec![0.0; ne * ne];
        let mut rhs = vec![0.0; ne];
        for (iq, q) in pts.iter().enumerate() {
            let vals = &b.values[iq * b.n..(iq + 1) * b.n];
            let [x, y] = q.geo.xi;
            let mu = [1.0 - x - y, x, y];
            let mut r = m(q.geo.x);
            for lv in LOCAL_EDGES[le] {
                r = r - vertex_data[&tri[lv]].scale(mu[lv]);
            }
            for a in 0..ne {
                rhs[a] += q.weight * vals[first + a].ddot(&r);
                for cc in 0..ne {
                    k[a * ne + cc] += q.weight * vals[first + a].ddot(&vals[first + cc]);
                }
            }
        }
        let dofs = space.element_dofs(elem);
        for (a, x) in solve_small(&k, &rhs, ne)?.into_iter().enumerate() {
            c.fix(dofs[first + a], x);
        }
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fe::element_geometry;
    use crate::mesh::{disk_mesh, square_mesh};
    use crate::solver::dense::solve_dense;

    fn dense(m: &SparseMatrix) -> Vec<f64> {
        m.to_dense().concat()
    }

    #[test]
    fn layout_offsets() {
        let l = BlockLayout::new(&[("a", 3), ("b", 0), ("c", 2)]);
        assert_eq!(l.offsets, vec![0, 3, 3]);
        assert_eq!(l.len(), 5);
        assert_eq!(l.range(2), 3..5);
        assert_eq!(l.index("c"), Some(2));
    }

    #[test]
    fn builder_rejects_wrong_block_size() {
        let mut b = SystemBuilder::new(BlockLayout::new(&[("a", 2)]));
        let m = SparseMatrix::identity(3);
        assert!(matches!(b.add(0, 0, &m, 1.0), Err(AssemblyError::Dimension { expected: 2, got: 3 })));
    }

    #[test]
    fn symmetric_block_placement() {
        let mut b = SystemBuilder::new(BlockLayout::new(&[("a", 1), ("b", 2)]));
        let m = SparseMatrix::from_triplets(1, 2, vec![(0, 0, 2.0), (0, 1, 3.0)]);
        b.add_symmetric(0, 1, &m, 2.0).unwrap();
        let s = b.build();
        assert_eq!(s.matrix.get(0, 2), 6.0);
        assert_eq!(s.matrix.get(2, 0), 6.0);
        assert_eq!(s.matrix.max_asymmetry(), 0.0);
    }

    #[test]
    fn elimination_matches_hand_solution() {
        // [[2,1,0],[1,3,1],[0,1,4]] x = [1,2,3] with x2 = 5
        let k = SparseMatrix::from_triplets(3, 3, vec![(0, 0, 2.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 3.0), (1, 2, 1.0), (2, 1, 1.0), (2, 2, 4.0)]);
        let mut c = Constraints::new();
        c.fix(2, 5.0);
        let r = Reduction::new(3, &c);
        let (kr, br) = r.reduce(&k, &[1.0, 2.0, 3.0]);
        let y = solve_dense(&dense(&kr), &br, 2).unwrap();
        let x = r.expand(&y);
        assert_eq!(x[2], 5.0);
        assert!((2.0 * x[0] + x[1] - 1.0).abs() < 1e-14);
        assert!((x[0] + 3.0 * x[1] + 5.0 - 2.0).abs() < 1e-14);
    }

    #[test]
    fn rotated_constraints_fix_rotated_components() {
        // SPD 3x3 with x = R y and y1 = 0.5, y2 = -1 prescribed
        let k = SparseMatrix::from_triplets(3, 3, vec![(0, 0, 4.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 3.0), (2, 2, 2.0), (0, 2, 0.5), (2, 0, 0.5)]);
        let (c, s) = (0.6f64, 0.8f64);
        let rot = [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]];
        let mut cons = Constraints::new();
        cons.transform([0, 1, 2], rot);
        cons.fix(1, 0.5);
        cons.fix(2, -1.0);
        let r = Reduction::new(3, &cons);
        let b = [1.0, 0.0, 2.0];
        let (kr, br) = r.reduce(&k, &b);
        assert_eq!(kr.nrows(), 1);
        let x = r.expand(&[br[0] / kr.get(0, 0)]);
        let y1 = rot[0][1] * x[0] + rot[1][1] * x[1] + rot[2][1] * x[2];
        assert!((y1 - 0.5).abs() < 1e-14 && (x[2] + 1.0).abs() < 1e-14);
        // the free direction satisfies the projected equation
        let kx = k.mul_vec(&x);
        let res: f64 = (0..3).map(|i| rot[i][0] * (kx[i] - b[i])).sum();
        assert!(res.abs() < 1e-13);
    }

    fn boundary_trace_error(mesh: &Mesh, space: &FeSpace, vals: &[(usize, f64)], f: &dyn Fn(Vec2) -> f64) -> f64 {
        let mut x = vec![0.0; space.n_dofs()];
        for &(i, v) in vals {
            x[i] = v;
        }
        let mut err: f64 = 0.0;
        for e in 0..mesh.n_edges() {
            if !mesh.is_boundary_edge(e) {
                continue;
            }
            let (elem, le) = mesh.edge_elements(e)[0];
            let pts = edge_quadrature(mesh, elem, le, 8).unwrap();
            let geo: Vec<PointGeometry> = pts.iter().map(|q| q.geo).collect();
            let b = space.eval_scalar(mesh, elem, &geo);
            let dofs = space.element_dofs(elem);
            for (iq, g) in geo.iter().enumerate() {
                let u: f64 = (0..b.n).map(|i| b.values[iq * b.n + i] * x[dofs[i]]).sum();
                err = err.max((u - f(g.x)).abs());
            }
        }
        err
    }

    #[test]
    fn lagrange_boundary_values_reproduce_polynomials() {
        let mesh = square_mesh(3).unwrap();
        for p in 1..=4 {
            let u = FeSpace::lagrange(&mesh, p).unwrap();
            let f = move |x: Vec2| (x[0] + 2.0 * x[1] - 0.3).powi(p as i32) + 1.0;
            let vals = lagrange_dirichlet(&mesh, &u, &[1, 2, 3, 4], &f).unwrap();
            assert_eq!(vals.len(), u.boundary_dofs(&mesh, &[1, 2, 3, 4]).len());
            assert!(boundary_trace_error(&mesh, &u, &vals, &f) < 1e-12, "p={p}");
        }
    }

    #[test]
    fn lagrange_boundary_values_converge_on_curved_edges() {
        let f = |x: Vec2| (3.0 * x[0]).sin() * x[1];
        let mut errs = vec![];
        for n in [24, 48] {
            let mesh = disk_mesh(n, 3).unwrap();
            let u = FeSpace::lagrange(&mesh, 3).unwrap();
            let vals = lagrange_dirichlet(&mesh, &u, &[1], &f).unwrap();
            errs.push(boundary_trace_error(&mesh, &u, &vals, &f));
        }
        assert!(errs[1] < errs[0] / 8.0, "{errs:?}");
    }

    #[test]
    fn opposite_normals_are_rejected() {
        assert!(matches!(vertex_frame(&[[1.0, 0.0], [-1.0, 0.0]], 7), Err(AssemblyError::AntiparallelNormals { vertex: 7 })));
        let d = vertex_frame(&[[1.0, 0.0], [0.0, 1.0]], 0).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((d[i].ddot(&d[j]) - e).abs() < 1e-15);
            }
        }
    }

    /// Applies the constraints with zero free unknowns and returns the field.
    fn constrained_field(hz: &FeSpace, c: &Constraints) -> Vec<f64> {
        let r = Reduction::new(hz.n_dofs(), c);
        r.expand(&vec![0.0; r.n_free()])
    }

    #[test]
    fn stress_boundary_values_reproduce_constants() {
        let mesh = square_mesh(3).unwrap();
        let hz = FeSpace::hz(&mesh, 3).unwrap();
        let m0 = SymMatrix2::new(1.5, -0.7, 0.4);
        let c = hz_dirichlet(&mesh, &hz, &[1, 2, 3, 4], &|_| m0).unwrap();
        let x = constrained_field(&hz, &c);
        // edge-normal unknowns vanish for constant data
        for (&i, &v) in c.fixed() {
            if i >= 3 * mesh.n_vertices() {
                assert!(v.abs() < 1e-12, "dof {i}: {v}");
            }
        }
        // normal traces match on every boundary edge
        for e in 0..mesh.n_edges() {
            if !mesh.is_boundary_edge(e) {
                continue;
            }
            let (elem, le) = mesh.edge_elements(e)[0];
            let pts = edge_quadrature(&mesh, elem, le, 6).unwrap();
            let geo: Vec<PointGeometry> = pts.iter().map(|q| q.geo).collect();
            let b = hz.eval_hz(&mesh, elem, &geo);
            let dofs = hz.element_dofs(elem);
            for (iq, q) in pts.iter().enumerate() {
                let mut mh = SymMatrix2::ZERO;
                for i in 0..b.n {
                    mh += b.values[iq * b.n + i].scale(x[dofs[i]]);
                }
                let d = (mh - m0).apply(q.normal);
                // the tangent-tangent vertex part stays free, which only
                // perturbs normal traces next to corners
                let near_corner = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]
                    .iter()
                    .any(|c: &Vec2| norm([c[0] - q.geo.x[0], c[1] - q.geo.x[1]]) < 0.51);
                if !near_corner {
                    assert!(norm(d) < 1e-12, "edge {e}: {d:?}");
                }
            }
        }
    }

    #[test]
    fn stress_boundary_values_on_curved_edges() {
        // M = x ⊗ x has M n = n on the unit circle
        let mesh = disk_mesh(24, 3).unwrap();
        let hz = FeSpace::hz(&mesh, 3).unwrap();
        let mfun = |x: Vec2| SymMatrix2::outer(x);
        let c = hz_dirichlet(&mesh, &hz, &[1], &mfun).unwrap();
        let x = constrained_field(&hz, &c);
        let mut worst: f64 = 0.0;
        for e in 0..mesh.n_edges() {
            if !mesh.is_boundary_edge(e) {
                continue;
            }
            let (elem, le) = mesh.edge_elements(e)[0];
            let pts = edge_quadrature(&mesh, elem, le, 8).unwrap();
            let geo: Vec<PointGeometry> = pts.iter().map(|q| q.geo).collect();
            let b = hz.eval_hz(&mesh, elem, &geo);
            let dofs = hz.element_dofs(elem);
            for (iq, q) in pts.iter().enumerate() {
                let mut mh = SymMatrix2::ZERO;
                for i in 0..b.n {
                    mh += b.values[iq * b.n + i].scale(x[dofs[i]]);
                }
                // tangent-tangent part is free; compare normal components only
                let d = (mh - mfun(q.geo.x)).apply(q.normal);
                worst = worst.max(norm(d));
            }
        }
        let _ = element_geometry;
        assert!(worst < 1e-2, "{worst}");
    }
}
