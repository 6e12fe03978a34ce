//! Quadrature, sparse storage and the assembly of the plate systems.

pub mod condense;
pub mod forms;
pub mod quadrature;
pub mod sparse;
pub mod system;

use thiserror::Error;

use crate::fe::{FeError, SpaceKind};
use crate::solver::SolverError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AssemblyError {
    #[error("no quadrature rule of degree {requested} (maximum {max})")]
    QuadratureDegree { requested: usize, max: usize },
    #[error("form {form} is not defined for test space {test:?} and trial space {trial:?}")]
    Incompatible { form: String, test: SpaceKind, trial: SpaceKind },
    #[error("block has {got} unknowns, layout expects {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("boundary normals cancel at vertex {vertex}")]
    AntiparallelNormals { vertex: usize },
    #[error("static condensation failed: {0}")]
    Condensation(String),
    #[error(transparent)]
    Fe(#[from] FeError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}
