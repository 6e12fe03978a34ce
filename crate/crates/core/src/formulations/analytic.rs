//! Closed-form benchmark solutions.
//!
//! Deflection and rotation are written once, generically over the scalar
//! type, so that bending moments and shear stresses follow from exact
//! automatic differentiation rather than separately derived formulas.

use serde::{Deserialize, Serialize};

use super::fields::Field;
use crate::polynomials::{Dual, Scalar};
use crate::tensor::{Material, SymMatrix2, Vec2};

/// Exact fields of the thickness-scaled problem at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticValues {
    pub w: f64,
    pub phi: Vec2,
    pub m: SymMatrix2,
    pub q: Vec2,
    /// Load `g` of the scaled system.
    pub g: f64,
}

impl AnalyticValues {
    /// Components of `field` in the layout of [`Field::components`].
    pub fn field(&self, field: Field) -> Vec<f64> {
        match field {
            Field::W => vec![self.w],
            Field::Phi => self.phi.to_vec(),
            Field::M => vec![self.m.xx, self.m.xy, self.m.yy],
            Field::Q => self.q.to_vec(),
        }
    }
}

/// Benchmarks with a known solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Benchmark {
    /// Clamped unit square with a polynomial solution.
    Square,
    /// Clamped unit disk under uniform pressure.
    Disk,
}

impl Benchmark {
    pub fn eval(&self, material: &Material, t: f64, x: Vec2) -> AnalyticValues {
        match self {
            Benchmark::Square => analytic_square(material, t, x),
            Benchmark::Disk => analytic_disk(material, t, x),
        }
    }

    pub fn load(&self, material: &Material, t: f64, x: Vec2) -> f64 {
        match self {
            Benchmark::Square => square_load(material, x),
            Benchmark::Disk => disk_load(t),
        }
    }
}

fn f0<S: Scalar>(a: S) -> S {
    (a + -1.0) * a
}

fn f1<S: Scalar>(a: S) -> S {
    a * a * 5.0 - a * 5.0 + 1.0
}

fn f2<S: Scalar>(a: S) -> S {
    a * 2.0 + -1.0
}

fn cube<S: Scalar>(a: S) -> S {
    a * a * a
}

/// Coefficient of the shear correction of the square deflection.
fn square_alpha(m: &Material) -> f64 {
    50.0 * m.e / (3.0 * (1.0 - m.nu * m.nu) * m.k_s * m.shear_modulus())
}

pub fn square_deflection<S: Scalar>(m: &Material, t: f64, x: S, y: S) -> S {
    let (a, b) = (f0(x), f0(y));
    let bend = cube(a) * cube(b) * (100.0 / 3.0);
    let shear = cube(b) * a * f1(x) + cube(a) * b * f1(y);
    bend - shear * (square_alpha(m) * t * t)
}

pub fn square_rotation<S: Scalar>(x: S, y: S) -> [S; 2] {
    let (a, b) = (f0(x), f0(y));
    [cube(b) * a * a * f2(x) * 100.0, cube(a) * b * b * f2(y) * 100.0]
}

/// Load `g` of the square benchmark.
pub fn square_load(m: &Material, x: Vec2) -> f64 {
    let (a, b) = (f0(x[0]), f0(x[1]));
    let (c, d) = (f1(x[0]), f1(x[1]));
    100.0 * m.e / (1.0 - m.nu * m.nu) * (b * c * (2.0 * b * b + a * d) + a * d * (2.0 * a * a + b * c))
}

pub fn disk_deflection<S: Scalar>(m: &Material, t: f64, x: S, y: S) -> S {
    let s = -(x * x + y * y) + 1.0;
    let a = 12.0 * (m.nu * m.nu - 1.0) / (64.0 * m.e * t * t * t);
    let b = 1.0 / (4.0 * m.k_s * m.shear_modulus() * t);
    s * s * a - s * b
}

pub fn disk_rotation<S: Scalar>(m: &Material, t: f64, x: S, y: S) -> [S; 2] {
    let s = -(x * x + y * y) + 1.0;
    let a = -12.0 * (m.nu * m.nu - 1.0) / (16.0 * m.e * t * t * t);
    [s * x * a, s * y * a]
}

/// Scaled load of a unit downward pressure, `g = f / t²` with `t f = -1`.
pub fn disk_load(t: f64) -> f64 {
    -1.0 / (t * t * t)
}

fn derived(m: &Material, t: f64, w: Dual, phi: [Dual; 2], g: f64) -> AnalyticValues {
    let c = m.k_s * m.shear_modulus() / (t * t);
    let eps = SymMatrix2::new(phi[0].d[0], 0.5 * (phi[0].d[1] + phi[1].d[0]), phi[1].d[1]);
    AnalyticValues {
        w: w.v,
        phi: [phi[0].v, phi[1].v],
        m: m.apply_stiffness(&eps),
        q: [-c * (w.d[0] - phi[0].v), -c * (w.d[1] - phi[1].v)],
        g,
    }
}

/// Exact square benchmark fields; `M = D* sym D φ` and `q = -(k_s μ / t²)(∇w - φ)`.
pub fn analytic_square(m: &Material, t: f64, x: Vec2) -> AnalyticValues {
    let (a, b) = (Dual::var(x[0], 0), Dual::var(x[1], 1));
    derived(m, t, square_deflection(m, t, a, b), square_rotation(a, b), square_load(m, x))
}

/// Exact disk benchmark fields.
pub fn analytic_disk(m: &Material, t: f64, x: Vec2) -> AnalyticValues {
    let (a, b) = (Dual::var(x[0], 0), Dual::var(x[1], 1));
    derived(m, t, disk_deflection(m, t, a, b), disk_rotation(m, t, a, b), disk_load(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polynomials::Jet;
    use rand::{Rng, SeedableRng};

    /// Strong-form residuals `(div q - g, Di M - q)` of the scaled plate
    /// equations, relative to the size of the individual terms.
    fn residuals(m: &Material, t: f64, w: impl Fn(Jet, Jet) -> Jet, phi: impl Fn(Jet, Jet) -> [Jet; 2], g: f64, x: Vec2) -> (f64, f64) {
        let (a, b) = (Jet::var(x[0], 0), Jet::var(x[1], 1));
        let (w, p) = (w(a, b), phi(a, b));
        let c = m.k_s * m.shear_modulus() / (t * t);
        let q = [-c * (w.d[0] - p[0].v), -c * (w.d[1] - p[1].v)];
        let div_q = -c * (w.h[0][0] + w.h[1][1] - p[0].d[0] - p[1].d[1]);
        let r1 = (div_q - g).abs() / (g.abs() + c * (w.h[0][0].abs() + w.h[1][1].abs()) + 1.0);
        // Di (D* eps(φ)) with eps_ij = (φ_i,j + φ_j,i) / 2
        let k = m.e / (12.0 * (1.0 - m.nu * m.nu));
        let h = |i: usize, j: usize, l: usize| p[i].h[j][l];
        let lap = |i: usize| h(i, 0, 0) + h(i, 1, 1);
        let grad_div = |i: usize| h(0, 0, i) + h(1, 1, i);
        let mut r2: f64 = 0.0;
        for i in 0..2 {
            let di_m = k * ((1.0 - m.nu) * 0.5 * (lap(i) + grad_div(i)) + m.nu * grad_div(i));
            // q is a difference of nearly equal terms amplified by c
            let size = di_m.abs() + c * (w.d[i].abs() + p[i].v.abs()) + 1.0;
            r2 = r2.max((di_m - q[i]).abs() / size);
        }
        (r1, r2)
    }

    #[test]
    fn square_solution_satisfies_strong_form() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        let m = Material::default();
        for t in [0.1, 1e-2, 1e-5] {
            for _ in 0..50 {
                let x = [rng.gen::<f64>(), rng.gen::<f64>()];
                let (r1, r2) = residuals(&m, t, |a, b| square_deflection(&m, t, a, b), square_rotation, square_load(&m, x), x);
                assert!(r1 < 1e-8 && r2 < 1e-8, "t={t} x={x:?}: {r1:e} {r2:e}");
            }
        }
    }

    #[test]
    fn square_solution_with_other_material() {
        let m = Material { e: 240.0, nu: 0.2, k_s: 0.7 };
        let x = [0.3, 0.65];
        let (r1, r2) = residuals(&m, 0.05, |a, b| square_deflection(&m, 0.05, a, b), square_rotation, square_load(&m, x), x);
        assert!(r1 < 1e-8 && r2 < 1e-8, "{r1:e} {r2:e}");
    }

    #[test]
    fn disk_solution_satisfies_strong_form() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(4);
        let m = Material::new(240.0, 0.3).unwrap();
        let t = 0.1;
        for _ in 0..50 {
            let r = rng.gen::<f64>().sqrt();
            let th = rng.gen::<f64>() * std::f64::consts::TAU;
            let x = [r * th.cos(), r * th.sin()];
            let (r1, r2) = residuals(&m, t, |a, b| disk_deflection(&m, t, a, b), |a, b| disk_rotation(&m, t, a, b), disk_load(t), x);
            assert!(r1 < 1e-8 && r2 < 1e-8, "x={x:?}: {r1:e} {r2:e}");
        }
    }

    #[test]
    fn boundary_values_vanish() {
        let m = Material::default();
        for s in [0.0, 0.25, 0.7, 1.0] {
            for x in [[s, 0.0], [s, 1.0], [0.0, s], [1.0, s]] {
                let v = analytic_square(&m, 0.1, x);
                assert!(v.w.abs() < 1e-15 && v.phi[0].abs() < 1e-15 && v.phi[1].abs() < 1e-15);
            }
            let th = s * 6.0;
            let v = analytic_disk(&m, 0.1, [th.cos(), th.sin()]);
            assert!(v.w.abs() < 1e-12 && v.phi[0].abs() < 1e-10 && v.phi[1].abs() < 1e-10);
        }
    }

    #[test]
    fn square_centre_value() {
        // f0(1/2) = -1/4, f1(1/2) = -1/4
        let m = Material::default();
        let t = 0.1;
        let a = -0.25f64;
        let alpha = 40.0 / 0.7;
        let expected = 100.0 / 3.0 * a.powi(6) - alpha * t * t * 2.0 * (a.powi(3) * a * a);
        assert!((analytic_square(&m, t, [0.5, 0.5]).w - expected).abs() < 1e-15);
    }

    #[test]
    fn disk_centre_value() {
        let m = Material::new(240.0, 0.3).unwrap();
        let t = 0.1;
        let expected = 12.0 * (0.09 - 1.0) / (64.0 * 240.0 * 1e-3) - 1.0 / (4.0 * m.k_s * m.shear_modulus() * t);
        assert!((analytic_disk(&m, t, [0.0, 0.0]).w - expected).abs() < 1e-12);
    }

    #[test]
    fn moments_match_finite_differences() {
        let m = Material::default();
        let x = [0.37, 0.61];
        let h = 1e-6;
        let p = |x: Vec2| analytic_square(&m, 0.1, x).phi;
        let d = |i: usize, j: usize| {
            let mut a = x;
            let mut b = x;
            a[j] += h;
            b[j] -= h;
            (p(a)[i] - p(b)[i]) / (2.0 * h)
        };
        let eps = SymMatrix2::new(d(0, 0), 0.5 * (d(0, 1) + d(1, 0)), d(1, 1));
        let fd = m.apply_stiffness(&eps);
        let exact = analytic_square(&m, 0.1, x).m;
        assert!((fd - exact).norm() < 1e-7 * exact.norm());
    }
}
