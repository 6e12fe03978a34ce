//! Recovery-based error estimation and Dörfler marking.
//!
//! The discontinuous-normal moment field is averaged at the nodes of a
//! continuous Lagrange space of the same degree; the distance between the
//! field and its continuous reconstruction serves as the error indicator.

use std::collections::HashMap;

use crate::assembly::forms::{map_elements, ElementQuadrature};
use crate::assembly::quadrature::triangle_rule;
use crate::fe::PointGeometry;
use crate::formulations::{Field, FormulationError, SolutionFields};
use crate::mesh::Mesh;
use crate::solver::dense::DenseLu;
use crate::tensor::Vec2;

/// Global estimate and its element-wise distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    /// `‖Π M - M‖ / ‖Π M‖`.
    pub global: f64,
    /// Squared element contributions, normalised so that they sum to `global²`.
    pub elements: Vec<f64>,
}

/// Equispaced nodal basis of degree `p` on the reference triangle.
struct NodalBasis {
    p: usize,
    /// Integer barycentric coordinates `(k, i, j)`, `k + i + j = p`, of each node.
    nodes: Vec<[usize; 3]>,
    /// Transposed Vandermonde matrix (rows: monomials, columns: nodes).
    vt: DenseLu,
}

impl NodalBasis {
    fn new(p: usize) -> Self {
        let mut nodes = Vec::new();
        for j in 0..=p {
            for i in 0..=p - j {
                nodes.push([p - i - j, i, j]);
            }
        }
        let n = nodes.len();
        let mut vt = vec![0.0; n * n];
        for (r, node) in nodes.iter().enumerate() {
            for (c, v) in Self::monomials(p, Self::point(p, node)).into_iter().enumerate() {
                vt[c * n + r] = v;
            }
        }
        let vt = DenseLu::new(&vt, n, 1e-14).expect("equispaced nodes are unisolvent");
        NodalBasis { p, nodes, vt }
    }

    fn point(p: usize, node: &[usize; 3]) -> Vec2 {
        [node[1] as f64 / p as f64, node[2] as f64 / p as f64]
    }

    fn monomials(p: usize, xi: Vec2) -> Vec<f64> {
        let mut out = Vec::with_capacity((p + 1) * (p + 2) / 2);
        for j in 0..=p {
            for i in 0..=p - j {
                out.push(xi[0].powi(i as i32) * xi[1].powi(j as i32));
            }
        }
        out
    }

    /// Values of all nodal functions at `xi`: they reproduce every monomial.
    fn eval(&self, xi: Vec2) -> Vec<f64> {
        self.vt.solve(&Self::monomials(self.p, xi))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum NodeKey {
    Vertex(usize),
    /// Vertex pair in increasing order and the weight of the smaller one.
    Edge(usize, usize, usize),
    Cell(usize, usize),
}

fn node_key(tri: &[usize; 3], elem: usize, local: usize, node: &[usize; 3], p: usize) -> NodeKey {
    let nonzero: Vec<usize> = (0..3).filter(|&k| node[k] > 0).collect();
    match nonzero.len() {
        1 => NodeKey::Vertex(tri[nonzero[0]]),
        2 => {
            let (a, b) = (nonzero[0], nonzero[1]);
            let (lo, hi) = if tri[a] < tri[b] { (a, b) } else { (b, a) };
            debug_assert_eq!(node[lo] + node[hi], p);
            NodeKey::Edge(tri[lo], tri[hi], node[lo])
        }
        _ => NodeKey::Cell(elem, local),
    }
}

/// Recovery estimate of an element-wise field with weighted components
/// (`discrete` returns `weights.len()` values per point), reconstructed in
/// the continuous Lagrange space of degree `p` by nodal averaging.
pub fn recovery_estimate_of(
    mesh: &Mesh,
    p: usize,
    degree: usize,
    weights: &[f64],
    discrete: &(dyn Fn(usize, &[PointGeometry]) -> Result<Vec<f64>, FormulationError> + Sync),
) -> Result<Estimate, FormulationError> {
    let basis = NodalBasis::new(p.max(1));
    let nc = weights.len();
    let nn = basis.nodes.len();
    let node_values = map_elements(mesh.n_elements(), |e| {
        let g = mesh.geometry(e);
        let geo: Vec<PointGeometry> = basis.nodes.iter().map(|n| PointGeometry::new(&g, NodalBasis::point(basis.p, n))).collect();
        discrete(e, &geo)
    });
    let mut index: HashMap<NodeKey, usize> = HashMap::new();
    let mut element_nodes = Vec::with_capacity(mesh.n_elements());
    let mut sums: Vec<f64> = Vec::new();
    let mut counts: Vec<f64> = Vec::new();
    for (e, vals) in node_values.into_iter().enumerate() {
        let vals = vals?;
        let tri = &mesh.triangles()[e];
        let mut ids = Vec::with_capacity(nn);
        for (k, node) in basis.nodes.iter().enumerate() {
            let key = node_key(tri, e, k, node, basis.p);
            let id = *index.entry(key).or_insert_with(|| {
                counts.push(0.0);
                sums.extend(std::iter::repeat(0.0).take(nc));
                counts.len() - 1
            });
            for c in 0..nc {
                sums[id * nc + c] += vals[k * nc + c];
            }
            counts[id] += 1.0;
            ids.push(id);
        }
        element_nodes.push(ids);
    }
    for (id, &n) in counts.iter().enumerate() {
        for c in 0..nc {
            sums[id * nc + c] /= n;
        }
    }
    let rule = triangle_rule(degree)?;
    let shape: Vec<Vec<f64>> = rule.points.iter().map(|&xi| basis.eval(xi)).collect();
    let parts = map_elements(mesh.n_elements(), |e| -> Result<(f64, f64), FormulationError> {
        let q = ElementQuadrature::new(mesh, e, &rule)?;
        let uh = discrete(e, &q.geo)?;
        let (mut err, mut nrm) = (0.0, 0.0);
        for (iq, w) in q.weights.iter().enumerate() {
            for c in 0..nc {
                let rec: f64 = element_nodes[e].iter().zip(&shape[iq]).map(|(&id, s)| s * sums[id * nc + c]).sum();
                let d = rec - uh[iq * nc + c];
                err += w * weights[c] * d * d;
                nrm += w * weights[c] * rec * rec;
            }
        }
        Ok((err, nrm))
    });
    let mut elements = Vec::with_capacity(parts.len());
    let mut total = 0.0;
    for part in parts {
        let (err, nrm) = part?;
        elements.push(err);
        total += nrm;
    }
    if !(total > 0.0) {
        return Err(FormulationError::ZeroNorm);
    }
    elements.iter_mut().for_each(|v| *v /= total);
    let global = elements.iter().sum::<f64>().sqrt();
    Ok(Estimate { global, elements })
}

/// Recovery estimate of the bending moments of a mixed solution.
pub fn recovery_estimate(fields: &SolutionFields) -> Result<Estimate, FormulationError> {
    if fields.m.is_none() {
        return Err(FormulationError::MissingField(Field::M));
    }
    recovery_estimate_of(&fields.mesh, fields.p, fields.error_degree(), Field::M.weights(), &|e, g| {
        fields.element_values(Field::M, e, g)
    })
}

/// Smallest set of elements whose contributions reach the fraction `theta`
/// of the total, largest contributions first (ties by element index).
pub fn dorfler_mark(contributions: &[f64], theta: f64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..contributions.len()).collect();
    order.sort_by(|&a, &b| contributions[b].total_cmp(&contributions[a]).then(a.cmp(&b)));
    let total: f64 = contributions.iter().sum();
    let mut acc = 0.0;
    let mut marked = Vec::new();
    for e in order {
        if acc >= theta * total && !marked.is_empty() {
            break;
        }
        acc += contributions[e];
        marked.push(e);
    }
    marked.sort_unstable();
    marked
}
