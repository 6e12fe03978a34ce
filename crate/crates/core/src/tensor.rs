//! Symmetric second-order and minor-symmetric fourth-order tensors in 2D.
//!
//! A [`SymMatrix2`] is stored by its three independent components. A
//! [`Tensor4`] is stored as a 3x3 matrix acting on Mandel vectors
//! `[s11, sqrt(2) s12, s22]`, so that the double contraction of two
//! symmetric tensors is the Euclidean product of their Mandel vectors.

use std::f64::consts::SQRT_2;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Vec2 = [f64; 2];
pub type Mat2 = [[f64; 2]; 2];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TensorError {
    #[error("invalid material parameters: {0}")]
    InvalidMaterial(String),
}

#[inline]
pub fn dot(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn norm(a: Vec2) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn mat_vec(m: &Mat2, v: Vec2) -> Vec2 {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

#[inline]
pub fn det2(m: &Mat2) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// Cofactor matrix, `cof(A) = det(A) A^{-T}`.
#[inline]
pub fn cofactor(m: &Mat2) -> Mat2 {
    [[m[1][1], -m[1][0]], [-m[0][1], m[0][0]]]
}

#[inline]
pub fn inverse2(m: &Mat2) -> Mat2 {
    let d = det2(m);
    [[m[1][1] / d, -m[0][1] / d], [-m[1][0] / d, m[0][0] / d]]
}

#[inline]
pub fn transpose2(m: &Mat2) -> Mat2 {
    [[m[0][0], m[1][0]], [m[0][1], m[1][1]]]
}

/// Rotation by -90 degrees, `R = [[0, 1], [-1, 0]]`.
#[inline]
pub fn rot(v: Vec2) -> Vec2 {
    [v[1], -v[0]]
}

/// Rotation by +90 degrees, the transpose of [`rot`].
#[inline]
pub fn rot_t(v: Vec2) -> Vec2 {
    [-v[1], v[0]]
}

/// Symmetric 2x2 matrix.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SymMatrix2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl SymMatrix2 {
    pub const ZERO: SymMatrix2 = SymMatrix2 { xx: 0.0, xy: 0.0, yy: 0.0 };
    pub const IDENTITY: SymMatrix2 = SymMatrix2 { xx: 1.0, xy: 0.0, yy: 1.0 };

    pub fn new(xx: f64, xy: f64, yy: f64) -> Self {
        SymMatrix2 { xx, xy, yy }
    }

    /// Symmetric part of `a ⊗ b`.
    pub fn sym_outer(a: Vec2, b: Vec2) -> Self {
        SymMatrix2 {
            xx: a[0] * b[0],
            xy: 0.5 * (a[0] * b[1] + a[1] * b[0]),
            yy: a[1] * b[1],
        }
    }

    /// `a ⊗ a`.
    pub fn outer(a: Vec2) -> Self {
        Self::sym_outer(a, a)
    }

    pub fn from_mandel(v: [f64; 3]) -> Self {
        SymMatrix2 { xx: v[0], xy: v[1] / SQRT_2, yy: v[2] }
    }

    pub fn mandel(&self) -> [f64; 3] {
        [self.xx, SQRT_2 * self.xy, self.yy]
    }

    pub fn to_mat(&self) -> Mat2 {
        [[self.xx, self.xy], [self.xy, self.yy]]
    }

    pub fn trace(&self) -> f64 {
        self.xx + self.yy
    }

    /// Frobenius product `A : B`.
    pub fn ddot(&self, other: &SymMatrix2) -> f64 {
        self.xx * other.xx + 2.0 * self.xy * other.xy + self.yy * other.yy
    }

    pub fn norm(&self) -> f64 {
        self.ddot(self).sqrt()
    }

    pub fn apply(&self, v: Vec2) -> Vec2 {
        [self.xx * v[0] + self.xy * v[1], self.xy * v[0] + self.yy * v[1]]
    }

    pub fn scale(&self, s: f64) -> Self {
        SymMatrix2 { xx: s * self.xx, xy: s * self.xy, yy: s * self.yy }
    }

    /// Symmetric part of a full matrix.
    pub fn sym(m: &Mat2) -> Self {
        SymMatrix2 { xx: m[0][0], xy: 0.5 * (m[0][1] + m[1][0]), yy: m[1][1] }
    }
}

impl Add for SymMatrix2 {
    type Output = SymMatrix2;
    fn add(self, o: SymMatrix2) -> SymMatrix2 {
        SymMatrix2 { xx: self.xx + o.xx, xy: self.xy + o.xy, yy: self.yy + o.yy }
    }
}

impl AddAssign for SymMatrix2 {
    fn add_assign(&mut self, o: SymMatrix2) {
        self.xx += o.xx;
        self.xy += o.xy;
        self.yy += o.yy;
    }
}

impl Sub for SymMatrix2 {
    type Output = SymMatrix2;
    fn sub(self, o: SymMatrix2) -> SymMatrix2 {
        SymMatrix2 { xx: self.xx - o.xx, xy: self.xy - o.xy, yy: self.yy - o.yy }
    }
}

impl Neg for SymMatrix2 {
    type Output = SymMatrix2;
    fn neg(self) -> SymMatrix2 {
        self.scale(-1.0)
    }
}

impl Mul<SymMatrix2> for f64 {
    type Output = SymMatrix2;
    fn mul(self, m: SymMatrix2) -> SymMatrix2 {
        m.scale(self)
    }
}

/// Fourth-order tensor with minor symmetries, as a 3x3 matrix in the Mandel frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tensor4 {
    pub m: [[f64; 3]; 3],
}

impl Tensor4 {
    pub const ZERO: Tensor4 = Tensor4 { m: [[0.0; 3]; 3] };

    /// Fourth-order identity on symmetric tensors, `J`.
    pub fn identity() -> Self {
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        Tensor4 { m }
    }

    /// `1 ⊗ 1`.
    pub fn one_one() -> Self {
        Self::dyad(&SymMatrix2::IDENTITY, &SymMatrix2::IDENTITY)
    }

    /// `A ⊗ B`, acting as `(A ⊗ B) : S = A (B : S)`.
    pub fn dyad(a: &SymMatrix2, b: &SymMatrix2) -> Self {
        let (va, vb) = (a.mandel(), b.mandel());
        let mut m = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = va[i] * vb[j];
            }
        }
        Tensor4 { m }
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut m = self.m;
        m.iter_mut().flatten().for_each(|x| *x *= s);
        Tensor4 { m }
    }

    pub fn double_contract(&self, s: &SymMatrix2) -> SymMatrix2 {
        let v = s.mandel();
        let mut r = [0.0; 3];
        for i in 0..3 {
            r[i] = self.m[i][0] * v[0] + self.m[i][1] * v[1] + self.m[i][2] * v[2];
        }
        SymMatrix2::from_mandel(r)
    }

    pub fn compose(&self, other: &Tensor4) -> Tensor4 {
        let mut m = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = (0..3).map(|k| self.m[i][k] * other.m[k][j]).sum();
            }
        }
        Tensor4 { m }
    }

    /// Full component array `A_ijkl` with respect to the Cartesian basis.
    pub fn to_full(&self) -> [[[[f64; 2]; 2]; 2]; 2] {
        let s = 1.0 / SQRT_2;
        let basis: [Mat2; 3] = [[[1.0, 0.0], [0.0, 0.0]], [[0.0, s], [s, 0.0]], [[0.0, 0.0], [0.0, 1.0]]];
        let mut out = [[[[0.0; 2]; 2]; 2]; 2];
        for a in 0..3 {
            for b in 0..3 {
                for i in 0..2 {
                    for j in 0..2 {
                        for k in 0..2 {
                            for l in 0..2 {
                                out[i][j][k][l] += self.m[a][b] * basis[a][i][j] * basis[b][k][l];
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

impl Add for Tensor4 {
    type Output = Tensor4;
    fn add(self, o: Tensor4) -> Tensor4 {
        let mut m = self.m;
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += o.m[i][j];
            }
        }
        Tensor4 { m }
    }
}

/// Fourth-order edge transformation carrying reference templates of an edge
/// with tangent `tau` and normal `nu` to the physical frame `t = J tau`,
/// `n = cof(J) nu`.
pub fn edge_transformation(t: Vec2, n: Vec2, tau: Vec2, nu: Vec2) -> Tensor4 {
    let s = 1.0 / dot(tau, tau).powi(2);
    let tt = Tensor4::dyad(&SymMatrix2::outer(t), &SymMatrix2::outer(tau));
    let tn = Tensor4::dyad(&SymMatrix2::sym_outer(t, n), &SymMatrix2::sym_outer(tau, nu));
    let nn = Tensor4::dyad(&SymMatrix2::outer(n), &SymMatrix2::outer(nu));
    (tt + tn + nn).scale(s)
}

/// Isotropic plate material.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Material {
    pub e: f64,
    pub nu: f64,
    #[serde(default = "default_shear_correction")]
    pub k_s: f64,
}

fn default_shear_correction() -> f64 {
    5.0 / 6.0
}

impl Default for Material {
    fn default() -> Self {
        Material { e: 1.0, nu: 0.3, k_s: 5.0 / 6.0 }
    }
}

impl Material {
    pub fn new(e: f64, nu: f64) -> Result<Self, TensorError> {
        let m = Material { e, nu, k_s: 5.0 / 6.0 };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), TensorError> {
        if !(self.e > 0.0) {
            return Err(TensorError::InvalidMaterial(format!("Young's modulus must be positive, got {}", self.e)));
        }
        if !(self.nu >= 0.0 && self.nu < 0.5) {
            return Err(TensorError::InvalidMaterial(format!("Poisson ratio must lie in [0, 0.5), got {}", self.nu)));
        }
        if !(self.k_s > 0.0) {
            return Err(TensorError::InvalidMaterial(format!("shear correction must be positive, got {}", self.k_s)));
        }
        Ok(())
    }

    pub fn shear_modulus(&self) -> f64 {
        self.e / (2.0 * (1.0 + self.nu))
    }

    /// Scaled bending stiffness `D* = E/(12(1-nu^2)) [nu 1⊗1 + (1-nu) J]`.
    pub fn stiffness(&self) -> Tensor4 {
        let c = self.e / (12.0 * (1.0 - self.nu * self.nu));
        (Tensor4::one_one().scale(self.nu) + Tensor4::identity().scale(1.0 - self.nu)).scale(c)
    }

    /// Compliance `A = (12/E) [(1+nu) J - nu 1⊗1]`, the inverse of [`Material::stiffness`].
    pub fn compliance(&self) -> Tensor4 {
        (Tensor4::identity().scale(1.0 + self.nu) + Tensor4::one_one().scale(-self.nu)).scale(12.0 / self.e)
    }

    pub fn apply_stiffness(&self, eps: &SymMatrix2) -> SymMatrix2 {
        let c = self.e / (12.0 * (1.0 - self.nu * self.nu));
        (c * self.nu * eps.trace()) * SymMatrix2::IDENTITY + (c * (1.0 - self.nu)) * *eps
    }

    pub fn apply_compliance(&self, m: &SymMatrix2) -> SymMatrix2 {
        (12.0 / self.e) * ((1.0 + self.nu) * *m - (self.nu * m.trace()) * SymMatrix2::IDENTITY)
    }
}
