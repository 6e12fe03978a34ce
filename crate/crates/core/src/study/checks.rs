//! Self-checks of the stress and flux elements on random meshes: normal
//! trace continuity, divergence against finite differences and the
//! divergence of the stress space against the discontinuous space.

use std::collections::BTreeMap;

use rand::rngs::StdRng;
use serde::Serialize;
use rand::{Rng, SeedableRng};

use super::StudyError;
use crate::assembly::quadrature::{line_rule, triangle_rule};
use crate::fe::{element_geometry, FeSpace, PointGeometry, SpaceKind};
use crate::mesh::{disk_mesh, square_mesh, BoundaryCurve, BoundaryEdge, Mesh, MeshError, LOCAL_EDGES, REF_VERTICES};
use crate::solver::dense::solve_dense;
use crate::tensor::{mat_vec, norm, rot, Vec2};

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
}

impl CheckOutcome {
    pub fn new(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        CheckOutcome { name: name.into(), value, tolerance }
    }

    pub fn passed(&self) -> bool {
        self.value <= self.tolerance
    }
}

fn rebuild(mesh: &Mesh, vertices: Vec<Vec2>) -> Result<Mesh, MeshError> {
    Mesh::new(vertices, mesh.triangles().to_vec(), mesh.boundary_edges().to_vec(), mesh.curves().to_vec(), mesh.geo_order())
}

/// Moves every interior vertex by up to `amplitude` times the local mesh size.
fn perturb(mesh: &Mesh, amplitude: f64, rng: &mut StdRng) -> Result<Mesh, MeshError> {
    let h = mesh.h();
    let verts = mesh
        .vertices()
        .iter()
        .enumerate()
        .map(|(i, v)| {
            if mesh.is_boundary_vertex(i) {
                *v
            } else {
                [v[0] + amplitude * h * rng.gen_range(-1.0..1.0), v[1] + amplitude * h * rng.gen_range(-1.0..1.0)]
            }
        })
        .collect();
    rebuild(mesh, verts)
}

/// Unit square with `2^k` triangles and randomly displaced interior vertices.
pub fn perturbed_square(k: u32, seed: u64) -> Result<Mesh, MeshError> {
    perturb(&square_mesh(k)?, 0.15, &mut StdRng::seed_from_u64(seed))
}

/// Disk with curved boundary and randomly displaced interior vertices.
pub fn perturbed_disk(n_elems: usize, geo_order: usize, seed: u64) -> Result<Mesh, MeshError> {
    perturb(&disk_mesh(n_elems, geo_order)?, 0.1, &mut StdRng::seed_from_u64(seed))
}

/// A single random triangle; a curved one has a circular arc as first edge.
pub fn random_element(rng: &mut StdRng, curved: bool) -> Result<Mesh, MeshError> {
    let c: Vec2 = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
    let r = rng.gen_range(0.3..1.5);
    let th = rng.gen_range(0.0..std::f64::consts::TAU);
    let span = rng.gen_range(0.4..1.2);
    let polar = |rad: f64, a: f64| [c[0] + rad * a.cos(), c[1] + rad * a.sin()];
    let a = polar(r, th);
    let b = polar(r, th + span);
    let chord = norm([b[0] - a[0], b[1] - a[1]]);
    let inner = polar(r - chord * rng.gen_range(0.6..1.1), th + span * rng.gen_range(0.3..0.7));
    let verts = vec![b, a, inner];
    let area2 = (a[0] - b[0]) * (inner[1] - b[1]) - (a[1] - b[1]) * (inner[0] - b[0]);
    let tri = if area2 > 0.0 { [0, 1, 2] } else { [0, 2, 1] };
    let boundary = vec![
        BoundaryEdge { vertices: [1, 0], marker: 1, curve: curved.then_some(0) },
        BoundaryEdge { vertices: [0, 2], marker: 1, curve: None },
        BoundaryEdge { vertices: [2, 1], marker: 1, curve: None },
    ];
    let curves = vec![BoundaryCurve::Circle { center: c, radius: r }];
    Mesh::new(verts, vec![tri], boundary, curves, if curved { 3 } else { 1 })
}

/// Reference points of an edge, ordered from the lower to the higher global vertex.
fn edge_points(mesh: &Mesh, elem: usize, le: usize, s: &[f64]) -> Vec<Vec2> {
    let [i, j] = LOCAL_EDGES[le];
    let tri = mesh.triangles()[elem];
    let (a, b) = if tri[i] < tri[j] { (REF_VERTICES[i], REF_VERTICES[j]) } else { (REF_VERTICES[j], REF_VERTICES[i]) };
    s.iter().map(|&t| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]).collect()
}

/// Largest jump of the normal trace of a global basis function across
/// interior edges, relative to the largest normal trace; `space` is
/// Hu-Zhang or Raviart-Thomas.
pub fn normal_trace_jump(mesh: &Mesh, space: &FeSpace) -> Result<f64, StudyError> {
    let (s, _) = line_rule(2 * space.degree() + 4);
    let (mut jump, mut scale) = (0.0f64, 0.0f64);
    for edge in 0..mesh.n_edges() {
        let sides = mesh.edge_elements(edge);
        if sides.len() != 2 {
            continue;
        }
        let mut traces: BTreeMap<usize, Vec<Vec2>> = BTreeMap::new();
        let mut normals: Vec<Vec2> = vec![];
        let mut points: Vec<Vec2> = vec![];
        for (side, &(e, le)) in sides.iter().enumerate() {
            let geo = element_geometry(mesh, e, &edge_points(mesh, e, le, &s)).map_err(crate::assembly::AssemblyError::from)?;
            if side == 0 {
                let [i, j] = LOCAL_EDGES[le];
                let tau = [REF_VERTICES[j][0] - REF_VERTICES[i][0], REF_VERTICES[j][1] - REF_VERTICES[i][1]];
                normals = geo.iter().map(|g| rot(mat_vec(&g.jac, tau))).collect();
                points = geo.iter().map(|g| g.x).collect();
            } else {
                for (g, x) in geo.iter().zip(&points) {
                    if norm([g.x[0] - x[0], g.x[1] - x[1]]) > 1e-12 {
                        return Err(StudyError::Config(format!("edge {edge}: element maps disagree at {x:?}")));
                    }
                }
            }
            let sign = if side == 0 { 1.0 } else { -1.0 };
            let vals: Vec<Vec2> = match space.kind() {
                SpaceKind::Hz => {
                    let b = space.eval_hz(mesh, e, &geo);
                    b.values.iter().enumerate().map(|(k, m)| m.apply(normals[k / b.n])).collect()
                }
                SpaceKind::Rt => {
                    let b = space.eval_rt(e, &geo);
                    b.values.iter().enumerate().map(|(k, v)| [v[0] * normals[k / b.n][0] + v[1] * normals[k / b.n][1], 0.0]).collect()
                }
                other => return Err(StudyError::Config(format!("normal traces of {other:?} spaces are not defined"))),
            };
            let n = space.local_dim();
            for (i, &d) in space.element_dofs(e).iter().enumerate() {
                let tr = traces.entry(d).or_insert_with(|| vec![[0.0; 2]; s.len()]);
                for q in 0..s.len() {
                    let v = vals[q * n + i];
                    let unit = norm(normals[q]);
                    tr[q][0] += sign * v[0] / unit;
                    tr[q][1] += sign * v[1] / unit;
                    if side == 0 {
                        scale = scale.max(norm(v) / unit);
                    }
                }
            }
        }
        for tr in traces.values() {
            for v in tr {
                jump = jump.max(norm(*v));
            }
        }
    }
    Ok(if scale > 0.0 { jump / scale } else { jump })
}

/// Largest asymmetry of the Hu-Zhang basis values at the quadrature points.
pub fn stress_asymmetry(mesh: &Mesh, hz: &FeSpace) -> Result<f64, StudyError> {
    let rule = triangle_rule(2 * hz.degree()).map_err(StudyError::from)?;
    let mut out = 0.0f64;
    for e in 0..mesh.n_elements() {
        let geo = element_geometry(mesh, e, &rule.points).map_err(crate::assembly::AssemblyError::from)?;
        for m in hz.eval_hz(mesh, e, &geo).values {
            let full = m.to_mat();
            out = out.max((full[0][1] - full[1][0]).abs());
        }
    }
    Ok(out)
}

/// Tensor or vector values at a point, flattened.
fn values_at(mesh: &Mesh, space: &FeSpace, pg: &PointGeometry) -> (Vec<Vec<f64>>, Vec<Vec2>) {
    let geo = [*pg];
    match space.kind() {
        SpaceKind::Hz => {
            let b = space.eval_hz(mesh, 0, &geo);
            (b.values.iter().map(|m| vec![m.xx, m.xy, m.yy]).collect(), b.divs)
        }
        _ => {
            let b = space.eval_rt(0, &geo);
            (b.values.iter().map(|v| v.to_vec()).collect(), b.divs.iter().map(|&d| [d, 0.0]).collect())
        }
    }
}

/// Largest relative difference between the divergence of the basis of a
/// single-element `space` and central finite differences of its values.
pub fn divergence_fd_error(mesh: &Mesh, space: &FeSpace, rng: &mut StdRng) -> f64 {
    let g = mesh.geometry(0);
    let diam = mesh.element_diameter(0);
    let h = 1e-5 * diam;
    let mut worst = 0.0f64;
    for _ in 0..3 {
        let (a, b) = (rng.gen_range(0.1..0.8), rng.gen_range(0.1..0.8));
        let xi = if a + b < 0.9 { [a, b] } else { [0.9 - b, 0.9 - a] };
        let pg = PointGeometry::new(&g, xi);
        let (vals, divs) = values_at(mesh, space, &pg);
        let shifted = |d: usize, s: f64| {
            let mut x = pg.x;
            x[d] += s;
            let xi = g.inverse(x).expect("shifted point stays near the element");
            values_at(mesh, space, &PointGeometry::new(&g, xi)).0
        };
        let (xp, xm, yp, ym) = (shifted(0, h), shifted(0, -h), shifted(1, h), shifted(1, -h));
        let dx = |k: usize, c: usize| (xp[k][c] - xm[k][c]) / (2.0 * h);
        let dy = |k: usize, c: usize| (yp[k][c] - ym[k][c]) / (2.0 * h);
        for k in 0..vals.len() {
            let fd = if space.kind() == SpaceKind::Hz {
                [dx(k, 0) + dy(k, 1), dx(k, 1) + dy(k, 2)]
            } else {
                [dx(k, 0) + dy(k, 1), 0.0]
            };
            let size = vals[k].iter().map(|v| v * v).sum::<f64>().sqrt() / diam;
            let err = norm([fd[0] - divs[k][0], fd[1] - divs[k][1]]) / norm(divs[k]).max(size);
            worst = worst.max(err);
        }
    }
    worst
}

/// Largest relative `L²` residual of the element-wise projection of the
/// divergence of every Hu-Zhang basis function onto `[P^{p-1}]²`.
pub fn divergence_projection_residual(mesh: &Mesh, hz: &FeSpace) -> Result<f64, StudyError> {
    let p = hz.degree();
    let dg = FeSpace::dg(mesh, p - 1).map_err(crate::assembly::AssemblyError::from)?;
    let rule = triangle_rule(2 * p + 2 * (mesh.geo_order() - 1) + 2)?;
    let mut worst = 0.0f64;
    for e in 0..mesh.n_elements() {
        let geo = element_geometry(mesh, e, &rule.points).map_err(crate::assembly::AssemblyError::from)?;
        let w: Vec<f64> = geo.iter().zip(&rule.weights).map(|(g, w)| g.det * w).collect();
        let phi = dg.eval_scalar(mesh, e, &geo);
        let nd = phi.n;
        let mut mass = vec![0.0; nd * nd];
        for (q, wq) in w.iter().enumerate() {
            for i in 0..nd {
                for j in 0..nd {
                    mass[i * nd + j] += wq * phi.values[q * nd + i] * phi.values[q * nd + j];
                }
            }
        }
        let b = hz.eval_hz(mesh, e, &geo);
        let mut div_norm = 0.0f64;
        let mut residuals = Vec::with_capacity(b.n);
        for k in 0..b.n {
            let mut res = 0.0;
            for c in 0..2 {
                let f: Vec<f64> = (0..geo.len()).map(|q| b.divs[q * b.n + k][c]).collect();
                let rhs: Vec<f64> = (0..nd).map(|i| (0..geo.len()).map(|q| w[q] * phi.values[q * nd + i] * f[q]).sum()).collect();
                let coef = solve_dense(&mass, &rhs, nd)?;
                for q in 0..geo.len() {
                    let proj: f64 = (0..nd).map(|i| coef[i] * phi.values[q * nd + i]).sum();
                    res += w[q] * (f[q] - proj).powi(2);
                    div_norm = div_norm.max(w[q] * f[q] * f[q]);
                }
                div_norm = div_norm.max((0..geo.len()).map(|q| w[q] * f[q] * f[q]).sum());
            }
            residuals.push(res);
        }
        if div_norm > 0.0 {
            for r in residuals {
                worst = worst.max((r / div_norm).sqrt());
            }
        }
    }
    Ok(worst)
}

/// Random meshes used by the conformity checks: two perturbed squares and
/// two perturbed disks with cubic boundary.
pub fn conformity_meshes(seed: u64) -> Result<Vec<(String, Mesh)>, StudyError> {
    Ok(vec![
        ("square".into(), perturbed_square(5, seed)?),
        ("square".into(), perturbed_square(3, seed + 1)?),
        ("curved disk".into(), perturbed_disk(24, 3, seed + 2)?),
        ("curved disk".into(), perturbed_disk(12, 3, seed + 3)?),
    ])
}

/// Normal continuity, symmetry and local dimension of `HZ^p`, `p = 3..=5`.
pub fn conformity_checks(seed: u64) -> Result<Vec<CheckOutcome>, StudyError> {
    let mut out = Vec::new();
    let meshes = conformity_meshes(seed)?;
    for p in 3..=5 {
        let (mut jump, mut asym, mut rt_jump) = (0.0f64, 0.0f64, 0.0f64);
        let mut dim_ok = true;
        for (_, mesh) in &meshes {
            let hz = FeSpace::hz(mesh, p).map_err(crate::assembly::AssemblyError::from)?;
            jump = jump.max(normal_trace_jump(mesh, &hz)?);
            asym = asym.max(stress_asymmetry(mesh, &hz)?);
            dim_ok &= hz.local_dim() == 3 * (p + 1) * (p + 2) / 2;
            let rt = FeSpace::rt(mesh, p - 1).map_err(crate::assembly::AssemblyError::from)?;
            rt_jump = rt_jump.max(normal_trace_jump(mesh, &rt)?);
        }
        out.push(CheckOutcome::new(format!("HZ^{p} normal trace jump"), jump, 1e-12));
        out.push(CheckOutcome::new(format!("HZ^{p} asymmetry"), asym, 0.0));
        out.push(CheckOutcome::new(format!("HZ^{p} local dimension 3(p+1)(p+2)/2"), if dim_ok { 0.0 } else { 1.0 }, 0.0));
        // the flux basis comes from inverting a moment matrix whose conditioning grows with the order
        out.push(CheckOutcome::new(format!("RT^{} normal trace jump", p - 1), rt_jump, 1e-10));
    }
    Ok(out)
}

/// Chain-rule divergences against finite differences on 20 random elements,
/// half of them curved.
pub fn divergence_checks(seed: u64) -> Result<Vec<CheckOutcome>, StudyError> {
    let mut rng = StdRng::seed_from_u64(seed);
    let (mut hz_err, mut rt_err) = (0.0f64, 0.0f64);
    for i in 0..20 {
        let mesh = random_element(&mut rng, i % 2 == 1)?;
        for p in [3, 4] {
            let hz = FeSpace::hz(&mesh, p).map_err(crate::assembly::AssemblyError::from)?;
            hz_err = hz_err.max(divergence_fd_error(&mesh, &hz, &mut rng));
            let rt = FeSpace::rt(&mesh, p - 1).map_err(crate::assembly::AssemblyError::from)?;
            rt_err = rt_err.max(divergence_fd_error(&mesh, &rt, &mut rng));
        }
    }
    Ok(vec![
        CheckOutcome::new("HZ divergence vs finite differences", hz_err, 1e-6),
        CheckOutcome::new("RT divergence vs finite differences", rt_err, 1e-6),
    ])
}

/// Divergence of `HZ^p` lies in `[DG^{p-1}]²` on the straight test meshes.
pub fn exact_sequence_checks(seed: u64) -> Result<Vec<CheckOutcome>, StudyError> {
    let mut out = Vec::new();
    let meshes: Vec<Mesh> = conformity_meshes(seed)?.into_iter().map(|(_, m)| m).filter(|m| m.geo_order() == 1).collect();
    for p in 3..=5 {
        let mut worst = 0.0f64;
        for mesh in &meshes {
            let hz = FeSpace::hz(mesh, p).map_err(crate::assembly::AssemblyError::from)?;
            worst = worst.max(divergence_projection_residual(mesh, &hz)?);
        }
        out.push(CheckOutcome::new(format!("HZ^{p} divergence in [DG^{}]^2", p - 1), worst, 1e-12));
    }
    Ok(out)
}

/// All element checks.
pub fn basis_checks(seed: u64) -> Result<Vec<CheckOutcome>, StudyError> {
    let mut out = conformity_checks(seed)?;
    out.extend(divergence_checks(seed)?);
    out.extend(exact_sequence_checks(seed)?);
    Ok(out)
}

/// Values and divergences of one basis at a set of points.
#[derive(Debug, Clone, Serialize)]
pub struct BasisSamples {
    pub space: String,
    /// `values[point][function]`: components (xx, xy, yy) or (x, y).
    pub values: Vec<Vec<Vec<f64>>>,
    /// Divergence per point and function; scalar for RT, stored in the first slot.
    pub divergences: Vec<Vec<Vec2>>,
}

/// Hu-Zhang and Raviart-Thomas bases of a random element at given
/// reference points, for comparison with other implementations.
#[derive(Debug, Clone, Serialize)]
pub struct BasisDump {
    pub p: usize,
    pub curved: bool,
    /// Element vertices; for a curved element the first edge is a circular arc.
    pub vertices: Vec<Vec2>,
    pub reference_points: Vec<Vec2>,
    pub physical_points: Vec<Vec2>,
    pub bases: Vec<BasisSamples>,
}

pub fn basis_dump(p: usize, curved: bool, seed: u64, points: &[Vec2]) -> Result<BasisDump, StudyError> {
    if p < 3 {
        return Err(StudyError::Config(format!("the Hu-Zhang element needs p >= 3, got {p}")));
    }
    if let Some(x) = points.iter().find(|x| x[0] < 0.0 || x[1] < 0.0 || x[0] + x[1] > 1.0) {
        return Err(StudyError::Config(format!("point {x:?} lies outside the reference triangle")));
    }
    let mesh = random_element(&mut StdRng::seed_from_u64(seed), curved)?;
    let g = mesh.geometry(0);
    let geo: Vec<PointGeometry> = points.iter().map(|&xi| PointGeometry::new(&g, xi)).collect();
    let spaces = [
        (format!("HZ^{p}"), FeSpace::hz(&mesh, p)),
        (format!("RT^{}", p - 1), FeSpace::rt(&mesh, p - 1)),
    ];
    let mut bases = Vec::new();
    for (name, space) in spaces {
        let space = space.map_err(crate::assembly::AssemblyError::from)?;
        let (values, divergences) = geo.iter().map(|pg| values_at(&mesh, &space, pg)).unzip();
        bases.push(BasisSamples { space: name, values, divergences });
    }
    Ok(BasisDump {
        p,
        curved,
        vertices: mesh.triangles()[0].iter().map(|&v| mesh.vertices()[v]).collect(),
        reference_points: points.to_vec(),
        physical_points: geo.iter().map(|g| g.x).collect(),
        bases,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_elements_are_valid() {
        let mut rng = StdRng::seed_from_u64(1);
        for i in 0..50 {
            let mesh = random_element(&mut rng, i % 2 == 0).unwrap();
            let geo = element_geometry(&mesh, 0, &triangle_rule(6).unwrap().points).unwrap();
            assert!(geo.iter().all(|g| g.det > 0.0));
        }
    }

    #[test]
    fn lagrange_traces_are_rejected() {
        let mesh = square_mesh(1).unwrap();
        let u = FeSpace::lagrange(&mesh, 2).unwrap();
        assert!(matches!(normal_trace_jump(&mesh, &u), Err(StudyError::Config(_))));
    }

    #[test]
    fn traces_are_continuous_on_a_perturbed_mesh() {
        let mesh = perturbed_square(3, 0).unwrap();
        let hz = FeSpace::hz(&mesh, 3).unwrap();
        assert!(normal_trace_jump(&mesh, &hz).unwrap() < 1e-12);
        let rt = FeSpace::rt(&mesh, 2).unwrap();
        assert!(normal_trace_jump(&mesh, &rt).unwrap() < 1e-12);
    }

    #[test]
    fn basis_dump_has_one_entry_per_point_and_function() {
        let d = basis_dump(3, true, 4, &[[0.2, 0.3], [0.0, 0.0]]).unwrap();
        assert_eq!(d.bases.len(), 2);
        assert_eq!(d.bases[0].values.len(), 2);
        assert_eq!(d.bases[0].values[0].len(), 30);
        assert_eq!(d.bases[0].values[0][0].len(), 3);
        assert_eq!(d.bases[1].divergences[1].len(), FeSpace::rt(&random_element(&mut StdRng::seed_from_u64(4), true).unwrap(), 2).unwrap().local_dim());
        assert!(basis_dump(2, false, 0, &[]).is_err());
        assert!(basis_dump(3, false, 0, &[[0.8, 0.8]]).is_err());
    }
}
