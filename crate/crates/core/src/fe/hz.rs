//! Hu-Zhang element built from polytopal templates.
//!
//! Local ordering for degree `p` with `nc = (p-1)(p-2)/2` cell kernels:
//!
//! * `9` vertex functions `λ_v E_c` with the Cartesian basis `E_c`,
//! * per edge and kernel degree `k = 2..=p` the pair (tangent-normal,
//!   normal-normal), shared with the neighbour,
//! * per edge and degree the tangent-tangent function, element-local,
//! * `3 nc` cell functions, element-local.

use super::{edge_templates, PointGeometry, CARTESIAN, REF_EDGES};
use crate::fe::Orientation;
use crate::polynomials::{cell_kernel_indices, Dual};
use crate::tensor::{cofactor, mat_vec, SymMatrix2, Vec2};

use super::kernels::h1_kernels;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polytope {
    Vertex(usize),
    Edge(usize),
    Cell,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DofClass {
    Vertex,
    /// Edge functions with a normal trace, shared across the edge.
    EdgeNormal,
    /// Tangent-tangent edge functions without normal trace.
    EdgeCell,
    Cell,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalarKernel {
    Vertex { vertex: usize },
    Edge { edge: usize, degree: usize },
    Cell { a: usize, k: usize },
}

/// Descriptor of a reference Hu-Zhang basis function `kernel · template`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisFunction {
    pub kernel: ScalarKernel,
    pub template: SymMatrix2,
    pub polytope: Polytope,
    pub degree: usize,
    pub class: DofClass,
}

/// Template index within `edge_templates`: tangent-tangent, tangent-normal, normal-normal.
pub(crate) const TT: usize = 0;
pub(crate) const TN: usize = 1;
pub(crate) const NN: usize = 2;

pub(crate) fn n_cell(p: usize) -> usize {
    (p - 1) * (p - 2) / 2
}

pub(crate) fn local_dim(p: usize) -> usize {
    3 * (p + 1) * (p + 2) / 2
}

/// Reference basis of `HZ^p` in local order.
pub fn hz_reference_basis(p: usize) -> Vec<BasisFunction> {
    let mut out = Vec::with_capacity(local_dim(p));
    for v in 0..3 {
        for t in CARTESIAN {
            out.push(BasisFunction {
                kernel: ScalarKernel::Vertex { vertex: v },
                template: t,
                polytope: Polytope::Vertex(v),
                degree: 1,
                class: DofClass::Vertex,
            });
        }
    }
    for e in 0..3 {
        let tpl = edge_templates(e);
        for k in 2..=p {
            for r in [TN, NN] {
                out.push(BasisFunction {
                    kernel: ScalarKernel::Edge { edge: e, degree: k },
                    template: tpl[r],
                    polytope: Polytope::Edge(e),
                    degree: k,
                    class: DofClass::EdgeNormal,
                });
            }
        }
    }
    for e in 0..3 {
        let tpl = edge_templates(e);
        for k in 2..=p {
            out.push(BasisFunction {
                kernel: ScalarKernel::Edge { edge: e, degree: k },
                template: tpl[TT],
                polytope: Polytope::Edge(e),
                degree: k,
                class: DofClass::EdgeCell,
            });
        }
    }
    for (a, k) in cell_kernel_indices(p) {
        for t in CARTESIAN {
            out.push(BasisFunction {
                kernel: ScalarKernel::Cell { a, k },
                template: t,
                polytope: Polytope::Cell,
                degree: a + k + 1,
                class: DofClass::Cell,
            });
        }
    }
    out
}

fn sym2(a: Vec2, b: Vec2) -> SymMatrix2 {
    SymMatrix2::sym_outer(a, b)
}

/// Physical values and divergences of all local functions at one point.
/// The tangent-normal functions carry the global orientation sign.
pub(crate) fn eval_point(
    p: usize,
    pg: &PointGeometry,
    orient: &Orientation,
    values: &mut Vec<SymMatrix2>,
    divs: &mut Vec<Vec2>,
) {
    let ker = h1_kernels(p, Dual::var(pg.xi[0], 0), Dual::var(pg.xi[1], 1), orient.ascending);
    let grads: Vec<Vec2> = ker.iter().map(|k| pg.grad(k.d)).collect();
    let ne = p - 1;
    let nc = n_cell(p);
    let cell0 = 3 + 3 * ne;
    for v in 0..3 {
        for t in CARTESIAN {
            values.push(t.scale(ker[v].v));
            divs.push(t.apply(grads[v]));
        }
    }
    let g = [[pg.jinv[0][0], pg.jinv[0][1]], [pg.jinv[1][0], pg.jinv[1][1]]];
    let mut frames = Vec::with_capacity(3);
    for (e, re) in REF_EDGES.iter().enumerate() {
        let t = mat_vec(&pg.jac, re.tangent);
        let n = mat_vec(&cofactor(&pg.jac), re.normal);
        let tc = [mat_vec(&pg.djac[0], re.tangent), mat_vec(&pg.djac[1], re.tangent)];
        let nc = [mat_vec(&cofactor(&pg.djac[0]), re.normal), mat_vec(&cofactor(&pg.djac[1]), re.normal)];
        let sign_tn = if orient.ascending[e] == orient.primary[e] { 1.0 } else { -1.0 };
        let f = [SymMatrix2::outer(t), sym2(t, n).scale(0.5 * sign_tn), SymMatrix2::outer(n)];
        // Σ_c F_{,c} g_c
        let mut dfg = [[0.0; 2]; 3];
        for c in 0..2 {
            let df = [
                sym2(tc[c], t).scale(2.0),
                (sym2(tc[c], n) + sym2(t, nc[c])).scale(0.5 * sign_tn),
                sym2(nc[c], n).scale(2.0),
            ];
            for r in 0..3 {
                let v = df[r].apply(g[c]);
                dfg[r][0] += v[0];
                dfg[r][1] += v[1];
            }
        }
        frames.push((f, dfg));
    }
    let push_edge = |e: usize, k: usize, r: usize, values: &mut Vec<SymMatrix2>, divs: &mut Vec<Vec2>| {
        let idx = 3 + e * ne + (k - 2);
        let (f, dfg) = &frames[e];
        let s = ker[idx].v;
        values.push(f[r].scale(s));
        let a = f[r].apply(grads[idx]);
        divs.push([a[0] + s * dfg[r][0], a[1] + s * dfg[r][1]]);
    };
    for e in 0..3 {
        for k in 2..=p {
            push_edge(e, k, TN, values, divs);
            push_edge(e, k, NN, values, divs);
        }
    }
    for e in 0..3 {
        for k in 2..=p {
            push_edge(e, k, TT, values, divs);
        }
    }
    for j in 0..nc {
        for t in CARTESIAN {
            values.push(t.scale(ker[cell0 + j].v));
            divs.push(t.apply(grads[cell0 + j]));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::quadrature::triangle_rule;
    use crate::mesh::GeometryMap;
    use crate::polynomials::{cell_kernel, edge_kernel};
    use crate::solver::dense::rank;
    use crate::tensor::edge_transformation;

    fn kernel_value(k: &ScalarKernel, x: f64, y: f64) -> f64 {
        let mu = [1.0 - x - y, x, y];
        match *k {
            ScalarKernel::Vertex { vertex } => mu[vertex],
            ScalarKernel::Edge { edge, degree } => {
                let [i, j] = REF_EDGES[edge].vertices;
                edge_kernel(degree, mu[i], mu[j]).unwrap()
            }
            ScalarKernel::Cell { a, k } => cell_kernel(a, k, x, y),
        }
    }

    #[test]
    fn counts() {
        for p in 3..=7 {
            let b = hz_reference_basis(p);
            assert_eq!(b.len(), 3 * (p + 1) * (p + 2) / 2);
            let count = |c: DofClass| b.iter().filter(|f| f.class == c).count();
            assert_eq!(count(DofClass::Vertex), 9);
            assert_eq!(count(DofClass::EdgeNormal), 6 * (p - 1));
            assert_eq!(count(DofClass::EdgeCell), 3 * (p - 1));
            assert_eq!(count(DofClass::Cell), 3 * n_cell(p));
        }
        assert_eq!(hz_reference_basis(3).len(), 30);
    }

    #[test]
    fn tangent_tangent_functions_have_no_trace_on_their_edge() {
        for f in hz_reference_basis(4).iter().filter(|f| f.class == DofClass::EdgeCell) {
            let Polytope::Edge(e) = f.polytope else { panic!() };
            assert!(f.template.apply(REF_EDGES[e].normal).iter().all(|v| v.abs() < 1e-15));
        }
    }

    #[test]
    fn mapped_basis_spans_full_polynomial_space() {
        // on an affine element the physical functions span P^p ⊗ Sym
        for p in 3..=5 {
            let g = GeometryMap::affine([[0.1, 0.2], [1.3, 0.4], [0.5, 1.1]]);
            let q = triangle_rule(2 * p + 2).unwrap();
            let n = local_dim(p);
            let mut gram = vec![0.0; n * n];
            let o = Orientation { ascending: [true, false, true], primary: [false, true, true] };
            for (pt, w) in q.points.iter().zip(&q.weights) {
                let pg = PointGeometry::new(&g, *pt);
                let (mut v, mut d) = (Vec::new(), Vec::new());
                eval_point(p, &pg, &o, &mut v, &mut d);
                for i in 0..n {
                    for j in 0..n {
                        gram[i * n + j] += w * v[i].ddot(&v[j]);
                    }
                }
            }
            assert_eq!(rank(&gram, n, n, 1e-12).unwrap(), n, "p={p}");
        }
    }

    #[test]
    fn edge_functions_match_tensor_transformation() {
        let v = [[0.0, 0.0], [1.0, 0.1], [0.2, 0.9]];
        let f = |s: f64| -> Vec2 { [0.2 + 0.8 * s + 0.1 * s * (1.0 - s), 0.9 - 0.8 * s + 0.1 * s * (1.0 - s)] };
        let g = GeometryMap::with_edges(v, [None, None, Some(&f)], 3);
        let p = 4;
        let basis = hz_reference_basis(p);
        let pt = [0.25, 0.35];
        let pg = PointGeometry::new(&g, pt);
        let (mut vals, mut divs) = (Vec::new(), Vec::new());
        eval_point(p, &pg, &Orientation::REFERENCE, &mut vals, &mut divs);
        for (i, bf) in basis.iter().enumerate() {
            let s = kernel_value(&bf.kernel, pt[0], pt[1]);
            let expect = match bf.polytope {
                Polytope::Edge(e) => {
                    let re = REF_EDGES[e];
                    let t = mat_vec(&pg.jac, re.tangent);
                    let n = mat_vec(&cofactor(&pg.jac), re.normal);
                    edge_transformation(t, n, re.tangent, re.normal).double_contract(&bf.template.scale(s))
                }
                _ => bf.template.scale(s),
            };
            assert!((vals[i] - expect).norm() < 1e-13, "function {i}");
        }
    }
}
