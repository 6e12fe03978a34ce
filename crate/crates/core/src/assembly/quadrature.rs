use crate::polynomials::gauss_legendre;
use crate::tensor::Vec2;

use super::AssemblyError;

pub const MAX_DEGREE: usize = 40;

/// Quadrature on the reference triangle; weights sum to its area 1/2.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadRule {
    pub points: Vec<Vec2>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl QuadRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Barycentric coordinates `(λ1, λ2, λ3) = (1-ξ-η, η, ξ)` of point `i`.
    pub fn barycentric(&self, i: usize) -> [f64; 3] {
        let [x, y] = self.points[i];
        [1.0 - x - y, y, x]
    }
}

/// Gauss-Legendre rule on `[0, 1]` exact for polynomials of the given degree.
pub fn line_rule(degree: usize) -> (Vec<f64>, Vec<f64>) {
    let n = degree / 2 + 1;
    let (x, w) = gauss_legendre(n);
    (x.iter().map(|s| 0.5 * (s + 1.0)).collect(), w.iter().map(|w| 0.5 * w).collect())
}

/// Collapsed Gauss rule on the reference triangle, exact for polynomials of
/// total degree `degree`.
pub fn triangle_rule(degree: usize) -> Result<QuadRule, AssemblyError> {
    if degree > MAX_DEGREE {
        return Err(AssemblyError::QuadratureDegree { requested: degree, max: MAX_DEGREE });
    }
    let n = (degree + 3) / 2;
    let (x, w) = gauss_legendre(n);
    let mut points = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for (xv, wv) in x.iter().zip(&w) {
        let v = 0.5 * (xv + 1.0);
        for (xu, wu) in x.iter().zip(&w) {
            let u = 0.5 * (xu + 1.0);
            points.push([u * (1.0 - v), v]);
            weights.push(0.25 * wu * wv * (1.0 - v));
        }
    }
    Ok(QuadRule { points, weights, degree })
}
