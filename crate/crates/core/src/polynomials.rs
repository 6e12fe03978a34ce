//! Scalar polynomial families on the reference triangle.
//!
//! The reference triangle has vertices `(0,0)`, `(0,1)`, `(1,0)` with
//! barycentric coordinates `λ1 = 1-ξ-η`, `λ2 = η`, `λ3 = ξ`. All families are
//! generic over [`Scalar`] so that the same code yields values, gradients
//! ([`Dual`]) or gradients and Hessians ([`Jet`]) with respect to `(ξ, η)`.

use std::ops::{Add, Div, Mul, Neg, Sub};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("polynomial degree {degree} is below the minimum {min}")]
    DegreeTooLow { degree: usize, min: usize },
}

pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn cst(v: f64) -> Self;
    fn value(&self) -> f64;
}

impl Scalar for f64 {
    fn cst(v: f64) -> Self {
        v
    }
    fn value(&self) -> f64 {
        *self
    }
}

/// Value together with its gradient in `(ξ, η)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Dual {
    pub v: f64,
    pub d: [f64; 2],
}

impl Dual {
    pub fn var(v: f64, k: usize) -> Self {
        let mut d = [0.0; 2];
        d[k] = 1.0;
        Dual { v, d }
    }
}

impl Scalar for Dual {
    fn cst(v: f64) -> Self {
        Dual { v, d: [0.0; 2] }
    }
    fn value(&self) -> f64 {
        self.v
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, o: Dual) -> Dual {
        Dual { v: self.v + o.v, d: [self.d[0] + o.d[0], self.d[1] + o.d[1]] }
    }
}
impl Sub for Dual {
    type Output = Dual;
    fn sub(self, o: Dual) -> Dual {
        Dual { v: self.v - o.v, d: [self.d[0] - o.d[0], self.d[1] - o.d[1]] }
    }
}
impl Mul for Dual {
    type Output = Dual;
    fn mul(self, o: Dual) -> Dual {
        Dual {
            v: self.v * o.v,
            d: [self.d[0] * o.v + self.v * o.d[0], self.d[1] * o.v + self.v * o.d[1]],
        }
    }
}
impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual { v: -self.v, d: [-self.d[0], -self.d[1]] }
    }
}
impl Add<f64> for Dual {
    type Output = Dual;
    fn add(self, o: f64) -> Dual {
        Dual { v: self.v + o, d: self.d }
    }
}
impl Mul<f64> for Dual {
    type Output = Dual;
    fn mul(self, o: f64) -> Dual {
        Dual { v: self.v * o, d: [self.d[0] * o, self.d[1] * o] }
    }
}
impl Div<f64> for Dual {
    type Output = Dual;
    fn div(self, o: f64) -> Dual {
        self * (1.0 / o)
    }
}

/// Value, gradient and Hessian in `(ξ, η)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet {
    pub v: f64,
    pub d: [f64; 2],
    pub h: [[f64; 2]; 2],
}

impl Jet {
    pub fn var(v: f64, k: usize) -> Self {
        let mut d = [0.0; 2];
        d[k] = 1.0;
        Jet { v, d, h: [[0.0; 2]; 2] }
    }
}

impl Scalar for Jet {
    fn cst(v: f64) -> Self {
        Jet { v, d: [0.0; 2], h: [[0.0; 2]; 2] }
    }
    fn value(&self) -> f64 {
        self.v
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        let mut h = self.h;
        for i in 0..2 {
            for j in 0..2 {
                h[i][j] += o.h[i][j];
            }
        }
        Jet { v: self.v + o.v, d: [self.d[0] + o.d[0], self.d[1] + o.d[1]], h }
    }
}
impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        self + (-o)
    }
}
impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let mut h = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                h[i][j] = self.h[i][j] * o.v + self.d[i] * o.d[j] + self.d[j] * o.d[i] + self.v * o.h[i][j];
            }
        }
        Jet {
            v: self.v * o.v,
            d: [self.d[0] * o.v + self.v * o.d[0], self.d[1] * o.v + self.v * o.d[1]],
            h,
        }
    }
}
impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self * -1.0
    }
}
impl Add<f64> for Jet {
    type Output = Jet;
    fn add(self, o: f64) -> Jet {
        Jet { v: self.v + o, ..self }
    }
}
impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, o: f64) -> Jet {
        let mut h = self.h;
        h.iter_mut().flatten().for_each(|x| *x *= o);
        Jet { v: self.v * o, d: [self.d[0] * o, self.d[1] * o], h }
    }
}
impl Div<f64> for Jet {
    type Output = Jet;
    fn div(self, o: f64) -> Jet {
        self * (1.0 / o)
    }
}

/// Barycentric coordinates `(λ1, λ2, λ3) = (1-ξ-η, η, ξ)`.
pub fn barycentric<S: Scalar>(xi: S, eta: S) -> (S, S, S) {
    (-(xi + eta) + 1.0, eta, xi)
}

/// Legendre polynomials `l^0 ..= l^n` at `x`.
pub fn legendre_all<S: Scalar>(n: usize, x: S) -> Vec<S> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(S::cst(1.0));
    if n >= 1 {
        out.push(x);
    }
    for p in 2..=n {
        let pf = p as f64;
        let v = (x * out[p - 1] * (2.0 * pf - 1.0) - out[p - 2] * (pf - 1.0)) / pf;
        out.push(v);
    }
    out
}

pub fn legendre<S: Scalar>(p: usize, x: S) -> S {
    legendre_all(p, x)[p]
}

/// Scaled Legendre polynomials `t^p l^p(x/t)` for `p = 0 ..= n`.
pub fn scaled_legendre_all<S: Scalar>(n: usize, x: S, t: S) -> Vec<S> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(S::cst(1.0));
    if n >= 1 {
        out.push(x);
    }
    let t2 = t * t;
    for p in 2..=n {
        let pf = p as f64;
        let v = (x * out[p - 1] * (2.0 * pf - 1.0) - t2 * out[p - 2] * (pf - 1.0)) / pf;
        out.push(v);
    }
    out
}

/// Scaled integrated Legendre polynomials `L_s^p(x, t) = t^p L^p(x/t)` for
/// `p = 0 ..= n`, where `L^p(x) = ∫_{-1}^x l^{p-1}`. Entry 0 is unused and set to 1.
pub fn scaled_integrated_legendre_all<S: Scalar>(n: usize, x: S, t: S) -> Vec<S> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(S::cst(1.0));
    if n >= 1 {
        out.push(x);
    }
    let t2 = t * t;
    if n >= 2 {
        out.push((x * x - t2) * 0.5);
    }
    for p in 3..=n {
        let pf = p as f64;
        let v = (x * out[p - 1] * (2.0 * pf - 3.0) - t2 * out[p - 2] * (pf - 3.0)) / pf;
        out.push(v);
    }
    out
}

pub fn scaled_integrated_legendre<S: Scalar>(p: usize, x: S, t: S) -> S {
    scaled_integrated_legendre_all(p, x, t)[p]
}

/// Integrated Legendre polynomial `L^p(x)`.
pub fn integrated_legendre<S: Scalar>(p: usize, x: S) -> S {
    scaled_integrated_legendre(p, x, S::cst(1.0))
}

/// Kernel of the edge from barycentric `li` to `lj`: `L_s^p(lj - li, li + lj)`.
pub fn edge_kernel<S: Scalar>(p: usize, li: S, lj: S) -> Result<S, PolyError> {
    if p < 2 {
        return Err(PolyError::DegreeTooLow { degree: p, min: 2 });
    }
    Ok(scaled_integrated_legendre(p, lj - li, li + lj))
}

/// All edge kernels of degrees `2 ..= p` (empty for `p < 2`).
pub fn edge_kernels<S: Scalar>(p: usize, li: S, lj: S) -> Vec<S> {
    if p < 2 {
        return Vec::new();
    }
    scaled_integrated_legendre_all(p, lj - li, li + lj).split_off(2)
}

/// Index pairs `(a, k)` of the cell kernels of total degree `<= p`, with
/// `a >= 2`, `k >= 0` and `a + k + 1 <= p`. There are `(p-1)(p-2)/2` of them.
pub fn cell_kernel_indices(p: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    if p < 3 {
        return out;
    }
    for total in 3..=p {
        for a in 2..total {
            let k = total - 1 - a;
            out.push((a, k));
        }
    }
    out
}

/// Cell kernel `λ2 L_s^a(λ3-λ1, λ1+λ3) l^k(2ξ-1)`, vanishing on the whole boundary.
pub fn cell_kernel<S: Scalar>(a: usize, k: usize, xi: S, eta: S) -> S {
    let (l1, l2, l3) = barycentric(xi, eta);
    scaled_integrated_legendre(a, l3 - l1, l1 + l3) * l2 * legendre(k, xi * 2.0 + (-1.0))
}

/// All cell kernels of degree `<= p`, ordered as [`cell_kernel_indices`].
pub fn cell_kernels<S: Scalar>(p: usize, xi: S, eta: S) -> Vec<S> {
    let idx = cell_kernel_indices(p);
    if idx.is_empty() {
        return Vec::new();
    }
    let (l1, l2, l3) = barycentric(xi, eta);
    let ls = scaled_integrated_legendre_all(p, l3 - l1, l1 + l3);
    let lg = legendre_all(p, xi * 2.0 + (-1.0));
    idx.iter().map(|&(a, k)| ls[a] * l2 * lg[k]).collect()
}

/// Basis of `P^n` on the reference triangle, `l_s^i(λ3-λ1, λ1+λ3) l^j(2η-1)`
/// with `i + j <= n`. Used for element-wise discontinuous fields.
pub fn dubiner_like<S: Scalar>(n: usize, xi: S, eta: S) -> Vec<S> {
    let (l1, _l2, l3) = barycentric(xi, eta);
    let a = scaled_legendre_all(n, l3 - l1, l1 + l3);
    let b = legendre_all(n, eta * 2.0 + (-1.0));
    let mut out = Vec::with_capacity((n + 1) * (n + 2) / 2);
    for total in 0..=n {
        for i in (0..=total).rev() {
            out.push(a[i] * b[total - i]);
        }
    }
    out
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
                p1 = z;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        if n == 1 {
            z = 0.0;
            dp = 1.0;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}
