//! Raviart-Thomas space `RT^k = [P^k]^2 + x P̃^k` on the reference triangle.
//!
//! The reference basis is dual to edge moments against Legendre polynomials
//! in the local edge parameter and to interior moments against `[P^{k-1}]^2`.

use crate::assembly::quadrature::{line_rule, triangle_rule};
use crate::fe::kernels::dg_basis;
use crate::fe::REF_EDGES;
use crate::mesh::REF_VERTICES;
use crate::polynomials::legendre;
use crate::solver::dense::DenseLu;
use crate::tensor::Vec2;

/// Monomial spanning set of `RT^k`: `(m, 0)`, `(0, m)` for `m ∈ P^k` and
/// `x m` for homogeneous `m` of degree `k`.
fn span_eval(k: usize, x: f64, y: f64, vals: &mut Vec<Vec2>, divs: &mut Vec<f64>) {
    vals.clear();
    divs.clear();
    let pw = |v: f64, e: usize| if e == 0 { 1.0 } else { v.powi(e as i32) };
    let dpw = |v: f64, e: usize| if e == 0 { 0.0 } else { e as f64 * pw(v, e - 1) };
    for total in 0..=k {
        for a in (0..=total).rev() {
            let b = total - a;
            let m = pw(x, a) * pw(y, b);
            vals.push([m, 0.0]);
            divs.push(dpw(x, a) * pw(y, b));
            vals.push([0.0, m]);
            divs.push(pw(x, a) * dpw(y, b));
        }
    }
    for a in (0..=k).rev() {
        let b = k - a;
        let m = pw(x, a) * pw(y, b);
        vals.push([x * m, y * m]);
        // div(x m) = 2 m + x·∇m = (2 + k) m
        divs.push((2 + k) as f64 * m);
    }
}

/// Reference Raviart-Thomas basis of order `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct RtReference {
    pub order: usize,
    /// Row-major `dim x dim`, row `i` holds the span coefficients of basis function `i`.
    coeffs: Vec<f64>,
}

impl RtReference {
    pub fn dim_for(order: usize) -> usize {
        (order + 1) * (order + 3)
    }

    pub fn n_edge(&self) -> usize {
        self.order + 1
    }

    pub fn n_interior(&self) -> usize {
        self.order * (self.order + 1)
    }

    pub fn dim(&self) -> usize {
        Self::dim_for(self.order)
    }

    pub fn new(order: usize) -> Self {
        let k = order;
        let n = Self::dim_for(k);
        // dofs[d][s]: functional d applied to span function s
        let mut dofs = vec![0.0; n * n];
        let (lx, lw) = line_rule(2 * k + 2);
        let (mut v, mut dv) = (Vec::new(), Vec::new());
        for (e, re) in REF_EDGES.iter().enumerate() {
            let a = REF_VERTICES[re.vertices[0]];
            for (s, w) in lx.iter().zip(&lw) {
                let p = [a[0] + s * re.tangent[0], a[1] + s * re.tangent[1]];
                span_eval(k, p[0], p[1], &mut v, &mut dv);
                for m in 0..=k {
                    let q = legendre(m, 2.0 * s - 1.0);
                    let row = e * (k + 1) + m;
                    for (j, f) in v.iter().enumerate() {
                        dofs[row * n + j] += w * q * (f[0] * re.normal[0] + f[1] * re.normal[1]);
                    }
                }
            }
        }
        if k > 0 {
            let q = triangle_rule(2 * k + 1).expect("rule");
            for (pt, w) in q.points.iter().zip(&q.weights) {
                span_eval(k, pt[0], pt[1], &mut v, &mut dv);
                let b = dg_basis(k - 1, pt[0], pt[1]);
                for (i, bi) in b.iter().enumerate() {
                    for c in 0..2 {
                        let row = 3 * (k + 1) + 2 * i + c;
                        for (j, f) in v.iter().enumerate() {
                            dofs[row * n + j] += w * bi * f[c];
                        }
                    }
                }
            }
        }
        // basis function i = Σ_s C[s][i] span_s with dofs · C = I, so C = dofs^{-1}
        let lu = DenseLu::new(&dofs, n, 1e-13).expect("Raviart-Thomas moments are unisolvent");
        let mut coeffs = vec![0.0; n * n];
        for i in 0..n {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            let c = lu.solve(&e);
            for s in 0..n {
                coeffs[i * n + s] = c[s];
            }
        }
        RtReference { order, coeffs }
    }

    /// Reference values and divergences of all basis functions at `(x, y)`.
    pub fn eval(&self, x: f64, y: f64, vals: &mut Vec<Vec2>, divs: &mut Vec<f64>) {
        let n = self.dim();
        let (mut sv, mut sd) = (Vec::with_capacity(n), Vec::with_capacity(n));
        span_eval(self.order, x, y, &mut sv, &mut sd);
        for i in 0..n {
            let row = &self.coeffs[i * n..(i + 1) * n];
            let mut v = [0.0; 2];
            let mut d = 0.0;
            for s in 0..n {
                v[0] += row[s] * sv[s][0];
                v[1] += row[s] * sv[s][1];
                d += row[s] * sd[s];
            }
            vals.push(v);
            divs.push(d);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimensions() {
        for k in 0..5 {
            let r = RtReference::new(k);
            assert_eq!(r.dim(), 3 * r.n_edge() + r.n_interior());
        }
        assert_eq!(RtReference::dim_for(2), 15);
    }

    #[test]
    fn edge_moments_are_dual() {
        let k = 2;
        let r = RtReference::new(k);
        let (lx, lw) = line_rule(2 * k + 4);
        for (e, re) in REF_EDGES.iter().enumerate() {
            let a = REF_VERTICES[re.vertices[0]];
            for m in 0..=k {
                let mut mom = vec![0.0; r.dim()];
                for (s, w) in lx.iter().zip(&lw) {
                    let (mut v, mut d) = (Vec::new(), Vec::new());
                    r.eval(a[0] + s * re.tangent[0], a[1] + s * re.tangent[1], &mut v, &mut d);
                    let q = legendre(m, 2.0 * s - 1.0);
                    for i in 0..r.dim() {
                        mom[i] += w * q * (v[i][0] * re.normal[0] + v[i][1] * re.normal[1]);
                    }
                }
                for (i, mi) in mom.iter().enumerate() {
                    let expect = if i == e * (k + 1) + m { 1.0 } else { 0.0 };
                    assert!((mi - expect).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn divergence_theorem() {
        // ∫ div v = Σ_e ∫ v·ν ds, and only the m = 0 edge moments contribute
        let k = 3;
        let r = RtReference::new(k);
        let q = triangle_rule(2 * k).unwrap();
        let mut integral = vec![0.0; r.dim()];
        for (pt, w) in q.points.iter().zip(&q.weights) {
            let (mut v, mut d) = (Vec::new(), Vec::new());
            r.eval(pt[0], pt[1], &mut v, &mut d);
            for i in 0..r.dim() {
                integral[i] += w * d[i];
            }
        }
        for (i, s) in integral.iter().enumerate() {
            let expect = if i < 3 * (k + 1) && i % (k + 1) == 0 { 1.0 } else { 0.0 };
            assert!((s - expect).abs() < 1e-12, "{i}: {s}");
        }
    }
}
