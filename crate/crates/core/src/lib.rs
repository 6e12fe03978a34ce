//! Mixed finite elements for Reissner-Mindlin plates.
//!
//! The crate provides the Hu-Zhang symmetric stress element on straight and
//! curved triangles, the companion Raviart-Thomas, Lagrange and discontinuous
//! spaces, three plate formulations (primal, three-field and four-field) and
//! a harness reproducing convergence and locking studies.

pub mod assembly;
pub mod fe;
pub mod formulations;
pub mod mesh;
pub mod polynomials;
pub mod solver;
pub mod study;
pub mod tensor;
