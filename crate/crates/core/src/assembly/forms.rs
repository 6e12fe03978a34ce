//! Element integration of the bilinear forms and loads of the plate problems.
//!
//! Every block is assembled from physical basis values at the quadrature
//! points of each element; orientation signs are already part of the values
//! returned by [`FeSpace`], so local matrices are scattered without further
//! sign handling.

use super::quadrature::{line_rule, triangle_rule, QuadRule};
use super::sparse::{SparseMatrix, TripletList};
use super::AssemblyError;
use crate::fe::{element_geometry, FeSpace, HzBasis, PointGeometry, RtBasis, ScalarBasis, SpaceKind, REF_EDGES};
use crate::mesh::{Mesh, REF_VERTICES};
use crate::tensor::{cofactor, mat_vec, norm, Material, SymMatrix2, Vec2};

/// Bilinear forms `b(v, u)` with test function `v` and trial function `u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Form {
    /// `⟨v, u⟩` on scalar spaces.
    Mass,
    /// `⟨∇v, ∇u⟩` on scalar spaces.
    Diffusion,
    /// `⟨v, ∂_c u⟩`, scalar test and scalar trial.
    Gradient { component: usize },
    /// `⟨sym D(v e_a), D* sym D(u e_b)⟩`, the bending energy of rotation components.
    Bending { material: Material, test_component: usize, trial_component: usize },
    /// `⟨δM, A M⟩` on the stress space.
    Compliance { material: Material },
    /// `⟨(Di δM)_c, u⟩`, stress test and scalar trial.
    StressDivergence { component: usize },
    /// `⟨δq, q⟩` on Raviart-Thomas.
    FluxMass,
    /// `⟨div δq, u⟩`, flux test and scalar trial.
    FluxDivergence,
    /// `⟨δq_c, u⟩`, flux test and scalar trial.
    FluxComponent { component: usize },
}

impl Form {
    fn spaces(&self) -> (&'static [SpaceKind], &'static [SpaceKind]) {
        const SCALAR: &[SpaceKind] = &[SpaceKind::Lagrange, SpaceKind::Dg];
        const HZ: &[SpaceKind] = &[SpaceKind::Hz];
        const RT: &[SpaceKind] = &[SpaceKind::Rt];
        match self {
            Form::Mass | Form::Diffusion | Form::Gradient { .. } | Form::Bending { .. } => (SCALAR, SCALAR),
            Form::Compliance { .. } => (HZ, HZ),
            Form::StressDivergence { .. } => (HZ, SCALAR),
            Form::FluxMass => (RT, RT),
            Form::FluxDivergence | Form::FluxComponent { .. } => (RT, SCALAR),
        }
    }
}

/// Quadrature degree for products of two degree-`p` functions on elements of
/// the given geometry order.
pub fn quadrature_degree(p: usize, geo_order: usize) -> usize {
    2 * p + 2 * (geo_order - 1)
}

/// Basis of one space evaluated at the quadrature points of one element.
#[derive(Debug, Clone)]
pub enum Evaluated {
    Scalar(ScalarBasis),
    Hz(HzBasis),
    Rt(RtBasis),
}

impl Evaluated {
    pub fn new(space: &FeSpace, mesh: &Mesh, elem: usize, geo: &[PointGeometry]) -> Self {
        match space.kind() {
            SpaceKind::Lagrange | SpaceKind::Dg => Evaluated::Scalar(space.eval_scalar(mesh, elem, geo)),
            SpaceKind::Hz => Evaluated::Hz(space.eval_hz(mesh, elem, geo)),
            SpaceKind::Rt => Evaluated::Rt(space.eval_rt(elem, geo)),
        }
    }

    fn scalar(&self) -> &ScalarBasis {
        match self {
            Evaluated::Scalar(b) => b,
            _ => unreachable!("space kinds are checked before integration"),
        }
    }

    fn hz(&self) -> &HzBasis {
        match self {
            Evaluated::Hz(b) => b,
            _ => unreachable!("space kinds are checked before integration"),
        }
    }

    fn rt(&self) -> &RtBasis {
        match self {
            Evaluated::Rt(b) => b,
            _ => unreachable!("space kinds are checked before integration"),
        }
    }
}

/// Quadrature points of one element with weights `w_q det J(ξ_q)`.
#[derive(Debug, Clone)]
pub struct ElementQuadrature {
    pub geo: Vec<PointGeometry>,
    pub weights: Vec<f64>,
}

impl ElementQuadrature {
    pub fn new(mesh: &Mesh, elem: usize, rule: &QuadRule) -> Result<Self, AssemblyError> {
        let geo = element_geometry(mesh, elem, &rule.points)?;
        let weights = geo.iter().zip(&rule.weights).map(|(g, w)| w * g.det).collect();
        Ok(ElementQuadrature { geo, weights })
    }
}

/// Applies `f` to every element, spreading the work over the available
/// threads. Results come back in element order, so downstream reductions are
/// independent of the thread count.
pub fn map_elements<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let threads = std::thread::available_parallelism().map(|t| t.get()).unwrap_or(1).min(n / 64).max(1);
    if threads == 1 {
        return (0..n).map(f).collect();
    }
    let chunk = n.div_ceil(threads);
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..threads)
            .map(|t| {
                let f = &f;
                s.spawn(move || (t * chunk..((t + 1) * chunk).min(n)).map(f).collect::<Vec<T>>())
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("assembly worker panicked")).collect()
    })
}

/// Local matrix `[i * n_trial + j]` of `form` on one element.
pub fn element_matrix(form: &Form, test: &Evaluated, trial: &Evaluated, q: &ElementQuadrature) -> Vec<f64> {
    let nq = q.weights.len();
    match *form {
        Form::Mass | Form::Diffusion | Form::Gradient { .. } | Form::Bending { .. } => {
            let (v, u) = (test.scalar(), trial.scalar());
            let mut k = vec![0.0; v.n * u.n];
            for iq in 0..nq {
                let w = q.weights[iq];
                let (vv, vg) = (&v.values[iq * v.n..(iq + 1) * v.n], &v.grads[iq * v.n..(iq + 1) * v.n]);
                let (uv, ug) = (&u.values[iq * u.n..(iq + 1) * u.n], &u.grads[iq * u.n..(iq + 1) * u.n]);
                for i in 0..v.n {
                    let row = &mut k[i * u.n..(i + 1) * u.n];
                    match *form {
                        Form::Mass => row.iter_mut().zip(uv).for_each(|(r, u)| *r += w * vv[i] * u),
                        Form::Diffusion => row
                            .iter_mut()
                            .zip(ug)
                            .for_each(|(r, g)| *r += w * (vg[i][0] * g[0] + vg[i][1] * g[1])),
                        Form::Gradient { component } => {
                            row.iter_mut().zip(ug).for_each(|(r, g)| *r += w * vv[i] * g[component])
                        }
                        Form::Bending { material, test_component: a, trial_component: b } => {
                            let ev = sym_grad(a, vg[i]);
                            for (r, g) in row.iter_mut().zip(ug) {
                                *r += w * ev.ddot(&material.apply_stiffness(&sym_grad(b, *g)));
                            }
                        }
                        _ => unreachable!(),
                    }
                }
            }
            k
        }
        Form::Compliance { material } => {
            let m = test.hz();
            let n = m.n;
            let mut k = vec![0.0; n * n];
            let mut am = Vec::with_capacity(n);
            for iq in 0..nq {
                let w = q.weights[iq];
                let vals = &m.values[iq * n..(iq + 1) * n];
                am.clear();
                am.extend(vals.iter().map(|s| material.apply_compliance(s)));
                for i in 0..n {
                    let row = &mut k[i * n..(i + 1) * n];
                    for (r, a) in row.iter_mut().zip(&am) {
                        *r += w * vals[i].ddot(a);
                    }
                }
            }
            k
        }
        Form::StressDivergence { component } => {
            let (m, u) = (test.hz(), trial.scalar());
            let mut k = vec![0.0; m.n * u.n];
            for iq in 0..nq {
                let w = q.weights[iq];
                let uv = &u.values[iq * u.n..(iq + 1) * u.n];
                for i in 0..m.n {
                    let d = w * m.divs[iq * m.n + i][component];
                    k[i * u.n..(i + 1) * u.n].iter_mut().zip(uv).for_each(|(r, u)| *r += d * u);
                }
            }
            k
        }
        Form::FluxMass => {
            let f = test.rt();
            let n = f.n;
            let mut k = vec![0.0; n * n];
            for iq in 0..nq {
                let w = q.weights[iq];
                let vals = &f.values[iq * n..(iq + 1) * n];
                for i in 0..n {
                    let row = &mut k[i * n..(i + 1) * n];
                    for (r, b) in row.iter_mut().zip(vals) {
                        *r += w * (vals[i][0] * b[0] + vals[i][1] * b[1]);
                    }
                }
            }
            k
        }
        Form::FluxDivergence | Form::FluxComponent { .. } => {
            let (f, u) = (test.rt(), trial.scalar());
            let mut k = vec![0.0; f.n * u.n];
            for iq in 0..nq {
                let w = q.weights[iq];
                let uv = &u.values[iq * u.n..(iq + 1) * u.n];
                for i in 0..f.n {
                    let d = w * match *form {
                        Form::FluxDivergence => f.divs[iq * f.n + i],
                        Form::FluxComponent { component } => f.values[iq * f.n + i][component],
                        _ => unreachable!(),
                    };
                    k[i * u.n..(i + 1) * u.n].iter_mut().zip(uv).for_each(|(r, u)| *r += d * u);
                }
            }
            k
        }
    }
}

/// `sym(e_c ⊗ g)`, the symmetric gradient of the vector field `u e_c` with `∇u = g`.
fn sym_grad(c: usize, g: Vec2) -> SymMatrix2 {
    let mut e = [0.0; 2];
    e[c] = 1.0;
    SymMatrix2::sym_outer(e, g)
}

fn check_spaces(form: &Form, test: &FeSpace, trial: &FeSpace) -> Result<(), AssemblyError> {
    let (a, b) = form.spaces();
    if !a.contains(&test.kind()) || !b.contains(&trial.kind()) {
        return Err(AssemblyError::Incompatible { form: format!("{form:?}"), test: test.kind(), trial: trial.kind() });
    }
    Ok(())
}

/// Global block `B[i][j] = b(v_i, u_j)` of `form`.
pub fn assemble_block(
    mesh: &Mesh,
    test: &FeSpace,
    trial: &FeSpace,
    form: &Form,
    degree: usize,
) -> Result<SparseMatrix, AssemblyError> {
    check_spaces(form, test, trial)?;
    let rule = triangle_rule(degree)?;
    let locals = map_elements(mesh.n_elements(), |e| -> Result<Vec<f64>, AssemblyError> {
        let q = ElementQuadrature::new(mesh, e, &rule)?;
        let v = Evaluated::new(test, mesh, e, &q.geo);
        let u = if std::ptr::eq(test, trial) { v.clone() } else { Evaluated::new(trial, mesh, e, &q.geo) };
        Ok(element_matrix(form, &v, &u, &q))
    });
    let (nt, ns) = (test.local_dim(), trial.local_dim());
    let mut trip = TripletList::with_capacity(mesh.n_elements() * nt * ns);
    for (e, k) in locals.into_iter().enumerate() {
        let k = k?;
        let (rows, cols) = (test.element_dofs(e), trial.element_dofs(e));
        for (i, &gi) in rows.iter().enumerate() {
            for (j, &gj) in cols.iter().enumerate() {
                let v = k[i * ns + j];
                if v != 0.0 {
                    trip.push(gi, gj, v);
                }
            }
        }
    }
    Ok(trip.into_matrix(test.n_dofs(), trial.n_dofs()))
}

/// Load vector `∫ f v` for a scalar space.
pub fn assemble_load(
    mesh: &Mesh,
    space: &FeSpace,
    f: &(dyn Fn(Vec2) -> f64 + Sync),
    degree: usize,
) -> Result<Vec<f64>, AssemblyError> {
    if !matches!(space.kind(), SpaceKind::Lagrange | SpaceKind::Dg) {
        return Err(AssemblyError::Incompatible { form: "load".into(), test: space.kind(), trial: space.kind() });
    }
    let rule = triangle_rule(degree)?;
    let locals = map_elements(mesh.n_elements(), |e| -> Result<Vec<f64>, AssemblyError> {
        let q = ElementQuadrature::new(mesh, e, &rule)?;
        let b = space.eval_scalar(mesh, e, &q.geo);
        let mut out = vec![0.0; b.n];
        for (iq, g) in q.geo.iter().enumerate() {
            let fw = q.weights[iq] * f(g.x);
            for (o, v) in out.iter_mut().zip(&b.values[iq * b.n..(iq + 1) * b.n]) {
                *o += fw * v;
            }
        }
        Ok(out)
    });
    let mut rhs = vec![0.0; space.n_dofs()];
    for (e, l) in locals.into_iter().enumerate() {
        for (&g, v) in space.element_dofs(e).iter().zip(l?) {
            rhs[g] += v;
        }
    }
    Ok(rhs)
}

/// A point on a boundary edge of an element.
#[derive(Debug, Clone, Copy)]
pub struct EdgePoint {
    pub geo: PointGeometry,
    /// Outward unit normal.
    pub normal: Vec2,
    /// Quadrature weight times the arc-length element.
    pub weight: f64,
}

/// Quadrature points along local edge `le` of `elem`, exact for polynomial
/// integrands of the given degree in the edge parameter.
pub fn edge_quadrature(mesh: &Mesh, elem: usize, le: usize, degree: usize) -> Result<Vec<EdgePoint>, AssemblyError> {
    let re = REF_EDGES[le];
    let a = REF_VERTICES[re.vertices[0]];
    let (s, w) = line_rule(degree);
    let pts: Vec<Vec2> = s.iter().map(|s| [a[0] + s * re.tangent[0], a[1] + s * re.tangent[1]]).collect();
    let geo = element_geometry(mesh, elem, &pts)?;
    Ok(geo
        .into_iter()
        .zip(w)
        .map(|(g, w)| {
            let t = mat_vec(&g.jac, re.tangent);
            let n = mat_vec(&cofactor(&g.jac), re.normal);
            let nn = norm(n);
            EdgePoint { geo: g, normal: [n[0] / nn, n[1] / nn], weight: w * norm(t) }
        })
        .collect())
}

fn boundary_vector(
    mesh: &Mesh,
    space: &FeSpace,
    markers: &[u32],
    degree: usize,
    term: &(dyn Fn(&Evaluated, usize, usize, &EdgePoint) -> f64 + Sync),
) -> Result<Vec<f64>, AssemblyError> {
    let mut rhs = vec![0.0; space.n_dofs()];
    for e in 0..mesh.n_edges() {
        match mesh.edge_marker(e) {
            Some(m) if markers.contains(&m) => {}
            _ => continue,
        }
        let (elem, le) = mesh.edge_elements(e)[0];
        let pts = edge_quadrature(mesh, elem, le, degree)?;
        let geo: Vec<PointGeometry> = pts.iter().map(|p| p.geo).collect();
        let b = Evaluated::new(space, mesh, elem, &geo);
        let dofs = space.element_dofs(elem);
        for (iq, p) in pts.iter().enumerate() {
            for (i, &d) in dofs.iter().enumerate() {
                rhs[d] += p.weight * term(&b, iq, i, p);
            }
        }
    }
    Ok(rhs)
}

/// Boundary term `∫ ⟨δq, n⟩ w̃ ds` over the boundary edges carrying one of
/// `markers`, for a Raviart-Thomas test space.
pub fn assemble_boundary_flux(
    mesh: &Mesh,
    space: &FeSpace,
    markers: &[u32],
    w: &(dyn Fn(Vec2) -> f64 + Sync),
    degree: usize,
) -> Result<Vec<f64>, AssemblyError> {
    if space.kind() != SpaceKind::Rt {
        return Err(AssemblyError::Incompatible { form: "boundary flux".into(), test: space.kind(), trial: space.kind() });
    }
    boundary_vector(mesh, space, markers, degree, &|b, iq, i, p| {
        let b = b.rt();
        let v = b.values[iq * b.n + i];
        w(p.geo.x) * (v[0] * p.normal[0] + v[1] * p.normal[1])
    })
}

/// Boundary term `∫ ⟨δM n, φ̃⟩ ds` for a Hu-Zhang test space.
pub fn assemble_boundary_moment(
    mesh: &Mesh,
    space: &FeSpace,
    markers: &[u32],
    phi: &(dyn Fn(Vec2) -> Vec2 + Sync),
    degree: usize,
) -> Result<Vec<f64>, AssemblyError> {
    if space.kind() != SpaceKind::Hz {
        return Err(AssemblyError::Incompatible { form: "boundary moment".into(), test: space.kind(), trial: space.kind() });
    }
    boundary_vector(mesh, space, markers, degree, &|b, iq, i, p| {
        let b = b.hz();
        let mn = b.values[iq * b.n + i].apply(p.normal);
        let f = phi(p.geo.x);
        mn[0] * f[0] + mn[1] * f[1]
    })
}

/// Boundary load `∫ h(x, n) v ds` for a scalar test space.
pub fn assemble_boundary_load(
    mesh: &Mesh,
    space: &FeSpace,
    markers: &[u32],
    h: &(dyn Fn(Vec2, Vec2) -> f64 + Sync),
    degree: usize,
) -> Result<Vec<f64>, AssemblyError> {
    if !matches!(space.kind(), SpaceKind::Lagrange | SpaceKind::Dg) {
        return Err(AssemblyError::Incompatible { form: "boundary load".into(), test: space.kind(), trial: space.kind() });
    }
    boundary_vector(mesh, space, markers, degree, &|b, iq, i, p| {
        let b = b.scalar();
        h(p.geo.x, p.normal) * b.values[iq * b.n + i]
    })
}
