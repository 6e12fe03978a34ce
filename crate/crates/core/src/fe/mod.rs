//! Finite element spaces: Hu-Zhang symmetric stresses, Raviart-Thomas,
//! hierarchical Lagrange and discontinuous polynomials.
//!
//! Every space is evaluated element by element at reference points. Global
//! orientation signs are folded into the returned values, so that assembling
//! with [`FeSpace::element_dofs`] yields conforming global functions.

mod hz;
mod kernels;
mod rt;
mod space;

use thiserror::Error;

pub use hz::{hz_reference_basis, BasisFunction, DofClass, Polytope, ScalarKernel};
pub use kernels::{dg_basis, h1_kernels};
pub use rt::RtReference;
pub use space::{FeSpace, HzBasis, RtBasis, ScalarBasis, SpaceKind};

use crate::mesh::{GeometryMap, Mesh};
use crate::tensor::{det2, inverse2, Mat2, SymMatrix2, Vec2};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FeError {
    #[error("{space} needs degree at least {min}, got {degree}")]
    DegreeTooLow { space: &'static str, degree: usize, min: usize },
    #[error("element {elem} has a non-positive Jacobian determinant {det}")]
    Degenerate { elem: usize, det: f64 },
}

/// A reference edge with its tangent `τ` (from the first to the second
/// vertex) and outward normal `ν`, `|τ| = |ν|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefEdge {
    pub vertices: [usize; 2],
    pub tangent: Vec2,
    pub normal: Vec2,
}

pub const REF_EDGES: [RefEdge; 3] = [
    RefEdge { vertices: [0, 2], tangent: [0.0, 1.0], normal: [-1.0, 0.0] },
    RefEdge { vertices: [0, 1], tangent: [1.0, 0.0], normal: [0.0, -1.0] },
    RefEdge { vertices: [2, 1], tangent: [1.0, -1.0], normal: [1.0, 1.0] },
];

pub fn reference_edges() -> [RefEdge; 3] {
    REF_EDGES
}

/// Cartesian basis of symmetric tensors used for vertex and cell functions.
pub const CARTESIAN: [SymMatrix2; 3] = [
    SymMatrix2 { xx: 1.0, xy: 0.0, yy: 0.0 },
    SymMatrix2 { xx: 0.0, xy: 0.5, yy: 0.0 },
    SymMatrix2 { xx: 0.0, xy: 0.0, yy: 1.0 },
];

/// Templates `{τ⊗τ, sym(τ⊗ν), ν⊗ν}` of a reference edge.
pub fn edge_templates(edge: usize) -> [SymMatrix2; 3] {
    let e = REF_EDGES[edge];
    [
        SymMatrix2::outer(e.tangent),
        SymMatrix2::sym_outer(e.tangent, e.normal),
        SymMatrix2::outer(e.normal),
    ]
}

/// Orientation of an element's edges relative to the global edge numbering.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Orientation {
    /// Local edge direction agrees with ascending global vertex indices.
    pub ascending: [bool; 3],
    /// The element is the first one listed for the edge.
    pub primary: [bool; 3],
}

impl Orientation {
    pub const REFERENCE: Orientation = Orientation { ascending: [true; 3], primary: [true; 3] };

    pub fn of(mesh: &Mesh, elem: usize) -> Self {
        let mut o = Orientation::REFERENCE;
        for le in 0..3 {
            o.ascending[le] = mesh.local_edge_ascending(elem, le);
            o.primary[le] = mesh.is_primary_side(elem, le);
        }
        o
    }
}

/// Geometry of the element map at one reference point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointGeometry {
    pub xi: Vec2,
    pub x: Vec2,
    pub jac: Mat2,
    pub det: f64,
    pub jinv: Mat2,
    /// `∂J/∂ξ_c`.
    pub djac: [Mat2; 2],
}

impl PointGeometry {
    pub fn new(g: &GeometryMap, xi: Vec2) -> Self {
        let (x, jac, djac) = if g.is_affine() {
            let (jac, _) = g.jacobian(xi[0], xi[1]);
            (g.map(xi[0], xi[1]), jac, [[[0.0; 2]; 2]; 2])
        } else {
            g.jet(xi[0], xi[1])
        };
        let det = det2(&jac);
        PointGeometry { xi, x, jac, det, jinv: inverse2(&jac), djac }
    }

    /// Physical gradient from reference derivatives.
    #[inline]
    pub fn grad(&self, d: [f64; 2]) -> Vec2 {
        [
            self.jinv[0][0] * d[0] + self.jinv[1][0] * d[1],
            self.jinv[0][1] * d[0] + self.jinv[1][1] * d[1],
        ]
    }
}

/// Geometry at a set of reference points, checking the Jacobian sign.
pub fn element_geometry(mesh: &Mesh, elem: usize, points: &[Vec2]) -> Result<Vec<PointGeometry>, FeError> {
    let g = mesh.geometry(elem);
    points
        .iter()
        .map(|p| {
            let pg = PointGeometry::new(&g, *p);
            if !(pg.det > 0.0) {
                Err(FeError::Degenerate { elem, det: pg.det })
            } else {
                Ok(pg)
            }
        })
        .collect()
}
