//! Sparse direct solution of the assembled systems and convergence-rate fits.
//!
//! Systems are symmetrically equilibrated, factorised with faer's sparse LU
//! and polished by a few steps of iterative refinement.

pub mod dense;

use faer::sparse::{SparseColMat, Triplet};
use faer::prelude::Solve;
use faer::{Mat, Par};
use thiserror::Error;

use crate::assembly::sparse::SparseMatrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("matrix is singular (detected at index {index})")]
    Singular { index: usize },
    #[error("invalid solver input: {0}")]
    InvalidInput(String),
    #[error("linear algebra backend failure: {0}")]
    Backend(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveReport {
    /// `||K x - b|| / ||b||` of the returned solution.
    pub relative_residual: f64,
    pub refinement_steps: usize,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Sparse LU factorisation of an equilibrated square matrix.
pub struct SparseLu {
    n: usize,
    scale: Vec<f64>,
    lu: faer::sparse::linalg::solvers::Lu<usize, f64>,
}

impl SparseLu {
    pub fn new(k: &SparseMatrix) -> Result<Self, SolverError> {
        let n = k.nrows();
        if k.ncols() != n {
            return Err(SolverError::InvalidInput(format!("matrix is {}x{}, expected square", n, k.ncols())));
        }
        faer::set_global_parallelism(Par::Seq);
        let mut scale = vec![0.0; n];
        for (i, s) in scale.iter_mut().enumerate() {
            let (_, v) = k.row(i);
            let m = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
            if !(m > 0.0) || !m.is_finite() {
                return Err(SolverError::Singular { index: i });
            }
            *s = 1.0 / m.sqrt();
        }
        let trip: Vec<Triplet<usize, usize, f64>> =
            k.triplets().map(|(i, j, v)| Triplet::new(i, j, v * scale[i] * scale[j])).collect();
        let mat = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &trip)
            .map_err(|e| SolverError::Backend(format!("{e:?}")))?;
        let lu = mat.sp_lu().map_err(|e| match e {
            faer::sparse::linalg::LuError::SymbolicSingular { index } => SolverError::Singular { index },
            other => SolverError::Backend(format!("{other:?}")),
        })?;
        Ok(SparseLu { n, scale, lu })
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, SolverError> {
        let mut rhs = Mat::from_fn(self.n, 1, |i, _| b[i] * self.scale[i]);
        self.lu.solve_in_place(rhs.as_mut());
        let x: Vec<f64> = (0..self.n).map(|i| rhs[(i, 0)] * self.scale[i]).collect();
        if let Some(index) = x.iter().position(|v| !v.is_finite()) {
            return Err(SolverError::Singular { index });
        }
        Ok(x)
    }
}

/// Solves `K x = b` and reports the achieved relative residual.
pub fn solve(k: &SparseMatrix, b: &[f64]) -> Result<(Vec<f64>, SolveReport), SolverError> {
    if b.len() != k.nrows() {
        return Err(SolverError::InvalidInput(format!("rhs has length {}, matrix has {} rows", b.len(), k.nrows())));
    }
    let lu = SparseLu::new(k)?;
    let bn = norm(b);
    let mut x = lu.solve(b)?;
    if bn == 0.0 {
        return Ok((x, SolveReport { relative_residual: 0.0, refinement_steps: 0 }));
    }
    let residual = |x: &[f64]| -> Vec<f64> { k.mul_vec(x).iter().zip(b).map(|(a, b)| b - a).collect() };
    let mut r = residual(&x);
    let mut rel = norm(&r) / bn;
    let mut steps = 0;
    while steps < 4 && rel > 1e-14 {
        let dx = lu.solve(&r)?;
        let cand: Vec<f64> = x.iter().zip(&dx).map(|(a, b)| a + b).collect();
        let rc = residual(&cand);
        let relc = norm(&rc) / bn;
        steps += 1;
        if relc < rel {
            x = cand;
            r = rc;
            rel = relc;
        } else {
            break;
        }
    }
    if !rel.is_finite() {
        return Err(SolverError::Singular { index: 0 });
    }
    Ok((x, SolveReport { relative_residual: rel, refinement_steps: steps }))
}

/// Least-squares slope of `log y` against `log x` over the last `window` points.
pub fn fit_loglog_slope(points: &[(f64, f64)], window: usize) -> Result<f64, SolverError> {
    let n = points.len().min(window);
    if n < 2 {
        return Err(SolverError::InvalidInput(format!("need at least two points, got {}", points.len())));
    }
    let pts = &points[points.len() - n..];
    if pts.iter().any(|(x, y)| !(*x > 0.0) || !(*y > 0.0)) {
        return Err(SolverError::InvalidInput("log-log fit needs positive data".into()));
    }
    let lx: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n as f64;
    let my = ly.iter().sum::<f64>() / n as f64;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(SolverError::InvalidInput("abscissae must not coincide".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

/// Convergence order from `(h, error)` pairs over the last three points.
pub fn fit_slope(points: &[(f64, f64)]) -> Result<f64, SolverError> {
    fit_loglog_slope(points, 3)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_exact_power() {
        let pts: Vec<(f64, f64)> = (0..5).map(|k| (0.5f64.powi(k), 0.5f64.powi(3 * k))).collect();
        assert!((fit_slope(&pts).unwrap() - 3.0).abs() < 1e-12);
        assert!(fit_slope(&pts[..1]).is_err());
        assert!(fit_slope(&[(1.0, 0.0), (0.5, 1.0)]).is_err());
    }

    #[test]
    fn slope_of_tabulated_errors() {
        let dofs = [4388.0f64, 17220.0, 68228.0];
        let err = [0.0004651026837020827, 2.729552659762359e-05, 1.6619553419387787e-06];
        let pts: Vec<(f64, f64)> = dofs.iter().zip(err).map(|(d, e)| (d.powf(-0.5), e)).collect();
        let s = fit_slope(&pts).unwrap();
        assert!((s - 4.0).abs() < 0.3, "{s}");
    }

    #[test]
    fn sparse_solve_small() {
        let k = SparseMatrix::from_triplets(
            3,
            3,
            vec![(0, 0, 4.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 0.0), (1, 2, 2.0), (2, 1, 2.0), (2, 2, 1e-8)],
        );
        let b = [1.0, 2.0, 3.0];
        let (x, rep) = solve(&k, &b).unwrap();
        let r = k.mul_vec(&x);
        for i in 0..3 {
            assert!((r[i] - b[i]).abs() < 1e-10);
        }
        assert!(rep.relative_residual < 1e-12);
    }

    #[test]
    fn sparse_solve_reports_singular() {
        let k = SparseMatrix::from_triplets(2, 2, vec![(0, 0, 1.0)]);
        assert!(matches!(solve(&k, &[1.0, 1.0]), Err(SolverError::Singular { index: 1 })));
        let k = SparseMatrix::from_triplets(2, 2, vec![(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)]);
        assert!(solve(&k, &[1.0, 2.0]).is_err());
    }
}
