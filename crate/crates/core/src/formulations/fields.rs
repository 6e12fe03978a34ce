//! Discrete solution fields, point probes and `L²` errors.

use serde::{Deserialize, Serialize};

use super::{Formulation, FormulationError};
use crate::assembly::forms::{map_elements, ElementQuadrature};
use crate::assembly::quadrature::triangle_rule;
use crate::fe::{FeSpace, PointGeometry};
use crate::mesh::Mesh;
use crate::solver::SolveReport;
use crate::tensor::{Material, Vec2};

/// Physical fields of a plate solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    W,
    Phi,
    M,
    Q,
}

impl Field {
    pub const ALL: [Field; 4] = [Field::W, Field::Phi, Field::M, Field::Q];

    pub fn name(&self) -> &'static str {
        match self {
            Field::W => "w",
            Field::Phi => "phi",
            Field::M => "m",
            Field::Q => "q",
        }
    }

    /// Number of stored components: `w`; `φx, φy`; `Mxx, Mxy, Myy`; `qx, qy`.
    pub fn components(&self) -> usize {
        match self {
            Field::W => 1,
            Field::Phi | Field::Q => 2,
            Field::M => 3,
        }
    }

    /// Weights turning the squared components into the squared Euclidean or
    /// Frobenius norm.
    pub fn weights(&self) -> &'static [f64] {
        match self {
            Field::W => &[1.0],
            Field::Phi | Field::Q => &[1.0, 1.0],
            Field::M => &[1.0, 2.0, 1.0],
        }
    }

    pub fn parse(s: &str) -> Option<Field> {
        Field::ALL.into_iter().find(|f| f.name() == s)
    }
}

/// Coefficients of one scalar-, vector- or tensor-valued discrete field.
#[derive(Debug, Clone)]
pub struct DiscreteField {
    pub space: FeSpace,
    /// One coefficient vector per component space (two for rotations).
    pub coeffs: Vec<Vec<f64>>,
}

/// Solution of a plate problem together with its mesh.
#[derive(Debug, Clone)]
pub struct SolutionFields {
    pub formulation: Formulation,
    pub p: usize,
    pub material: Material,
    pub t: f64,
    pub mesh: Mesh,
    pub w: DiscreteField,
    pub phi: DiscreteField,
    pub m: Option<DiscreteField>,
    pub q: Option<DiscreteField>,
    /// Unknowns of the full system before boundary elimination and condensation.
    pub n_dofs: usize,
    pub report: SolveReport,
}

fn combine(n: usize, basis: &[f64], coeffs: &[f64], dofs: &[usize]) -> Vec<f64> {
    basis.chunks(n).map(|b| b.iter().zip(dofs).map(|(v, &d)| v * coeffs[d]).sum()).collect()
}

impl SolutionFields {
    /// Whether `field` has a discrete approximation (shear stresses of PRM and
    /// TFSRM are post-processed from `w` and `φ`).
    pub fn has(&self, field: Field) -> bool {
        field != Field::M || self.m.is_some()
    }

    /// Values of `field` at element points, `components()` values per point.
    pub fn element_values(&self, field: Field, elem: usize, geo: &[PointGeometry]) -> Result<Vec<f64>, FormulationError> {
        let mesh = &self.mesh;
        match field {
            Field::W => {
                let b = self.w.space.eval_scalar(mesh, elem, geo);
                Ok(combine(b.n, &b.values, &self.w.coeffs[0], self.w.space.element_dofs(elem)))
            }
            Field::Phi => {
                let b = self.phi.space.eval_scalar(mesh, elem, geo);
                let dofs = self.phi.space.element_dofs(elem);
                let x = combine(b.n, &b.values, &self.phi.coeffs[0], dofs);
                let y = combine(b.n, &b.values, &self.phi.coeffs[1], dofs);
                Ok(x.into_iter().zip(y).flat_map(|(a, b)| [a, b]).collect())
            }
            Field::M => {
                let m = self.m.as_ref().ok_or(FormulationError::MissingField(field))?;
                let b = m.space.eval_hz(mesh, elem, geo);
                let dofs = m.space.element_dofs(elem);
                Ok(b
                    .values
                    .chunks(b.n)
                    .flat_map(|vals| {
                        let s = vals.iter().zip(dofs).fold(crate::tensor::SymMatrix2::ZERO, |s, (v, &d)| s + v.scale(m.coeffs[0][d]));
                        [s.xx, s.xy, s.yy]
                    })
                    .collect())
            }
            Field::Q => match &self.q {
                Some(q) => {
                    let b = q.space.eval_rt(elem, geo);
                    let dofs = q.space.element_dofs(elem);
                    Ok(b
                        .values
                        .chunks(b.n)
                        .flat_map(|vals| {
                            vals.iter().zip(dofs).fold([0.0, 0.0], |s, (v, &d)| {
                                let c = q.coeffs[0][d];
                                [s[0] + c * v[0], s[1] + c * v[1]]
                            })
                        })
                        .collect())
                }
                None => Ok(self.postprocess_shear(elem, geo).into_iter().flatten().collect()),
            },
        }
    }

    /// `q = -(k_s μ / t²)(∇w - φ)` evaluated element-wise from the primal fields.
    pub fn postprocess_shear(&self, elem: usize, geo: &[PointGeometry]) -> Vec<Vec2> {
        let c = self.material.k_s * self.material.shear_modulus() / (self.t * self.t);
        let b = self.w.space.eval_scalar(&self.mesh, elem, geo);
        let dofs = self.w.space.element_dofs(elem);
        let phi = self.element_values(Field::Phi, elem, geo).expect("rotations always exist");
        b.grads
            .chunks(b.n)
            .enumerate()
            .map(|(iq, g)| {
                let gw = g.iter().zip(dofs).fold([0.0, 0.0], |s, (v, &d)| {
                    let c = self.w.coeffs[0][d];
                    [s[0] + c * v[0], s[1] + c * v[1]]
                });
                [-c * (gw[0] - phi[2 * iq]), -c * (gw[1] - phi[2 * iq + 1])]
            })
            .collect()
    }

    /// Value of `field` at a physical point.
    pub fn eval(&self, field: Field, x: Vec2) -> Result<Vec<f64>, FormulationError> {
        let (elem, xi) = self.mesh.locate(x)?;
        let geo = PointGeometry::new(&self.mesh.geometry(elem), xi);
        self.element_values(field, elem, &[geo])
    }

    /// Quadrature degree used for errors and estimators.
    pub fn error_degree(&self) -> usize {
        2 * self.p + 4 + 2 * (self.mesh.geo_order() - 1)
    }

    /// Relative `L²` error of `field` against `exact`.
    pub fn error_l2(&self, field: Field, exact: &(dyn Fn(Vec2) -> Vec<f64> + Sync)) -> Result<f64, FormulationError> {
        relative_l2_error(&self.mesh, self.error_degree(), field.weights(), &|e, g| self.element_values(field, e, g), exact)
    }
}

/// Relative `L²` distance `‖u - u_h‖ / ‖u‖` of an element-wise discrete field
/// with weighted components.
pub fn relative_l2_error(
    mesh: &Mesh,
    degree: usize,
    weights: &[f64],
    discrete: &(dyn Fn(usize, &[PointGeometry]) -> Result<Vec<f64>, FormulationError> + Sync),
    exact: &(dyn Fn(Vec2) -> Vec<f64> + Sync),
) -> Result<f64, FormulationError> {
    let rule = triangle_rule(degree)?;
    let nc = weights.len();
    let parts = map_elements(mesh.n_elements(), |e| -> Result<(f64, f64), FormulationError> {
        let q = ElementQuadrature::new(mesh, e, &rule)?;
        let uh = discrete(e, &q.geo)?;
        let (mut err, mut nrm) = (0.0, 0.0);
        for (iq, g) in q.geo.iter().enumerate() {
            let u = exact(g.x);
            for c in 0..nc {
                let d = u[c] - uh[iq * nc + c];
                err += q.weights[iq] * weights[c] * d * d;
                nrm += q.weights[iq] * weights[c] * u[c] * u[c];
            }
        }
        Ok((err, nrm))
    });
    let (mut err, mut nrm) = (0.0, 0.0);
    for p in parts {
        let (a, b) = p?;
        err += a;
        nrm += b;
    }
    if !(nrm > 0.0) {
        return Err(FormulationError::ZeroNorm);
    }
    Ok((err / nrm).sqrt())
}
