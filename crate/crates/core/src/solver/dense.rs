//! Small dense kernels: LU with partial pivoting for element blocks,
//! eigenvalues and singular values through faer.

use faer::{Mat, Side};

use super::SolverError;

/// Row-major LU factorisation with partial pivoting.
#[derive(Debug, Clone)]
pub struct DenseLu {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl DenseLu {
    /// Factorises the row-major `n x n` matrix `a`. A pivot smaller than
    /// `rtol` times the largest entry is reported as singular.
    pub fn new(a: &[f64], n: usize, rtol: f64) -> Result<Self, SolverError> {
        assert_eq!(a.len(), n * n);
        let mut lu = a.to_vec();
        let scale = lu.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut p = k;
            let mut best = lu[k * n + k].abs();
            for i in k + 1..n {
                let v = lu[i * n + k].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if !(best > rtol * scale) || !best.is_finite() {
                return Err(SolverError::Singular { index: k });
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let d = lu[k * n + k];
            for i in k + 1..n {
                let f = lu[i * n + k] / d;
                lu[i * n + k] = f;
                if f != 0.0 {
                    for j in k + 1..n {
                        lu[i * n + j] -= f * lu[k * n + j];
                    }
                }
            }
        }
        Ok(DenseLu { n, lu, perm })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let s: f64 = (0..i).map(|j| self.lu[i * n + j] * x[j]).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| self.lu[i * n + j] * x[j]).sum();
            x[i] = (x[i] - s) / self.lu[i * n + i];
        }
        x
    }
}

/// Solves the row-major system `a x = b`.
pub fn solve_dense(a: &[f64], b: &[f64], n: usize) -> Result<Vec<f64>, SolverError> {
    Ok(DenseLu::new(a, n, 1e-14)?.solve(b))
}

fn to_mat(a: &[f64], nrows: usize, ncols: usize) -> Mat<f64> {
    Mat::from_fn(nrows, ncols, |i, j| a[i * ncols + j])
}

/// Eigenvalues of a symmetric row-major matrix, ascending.
pub fn symmetric_eigenvalues(a: &[f64], n: usize) -> Result<Vec<f64>, SolverError> {
    to_mat(a, n, n)
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| SolverError::Backend(format!("{e:?}")))
}

/// Singular values of a row-major matrix, descending.
pub fn singular_values(a: &[f64], nrows: usize, ncols: usize) -> Result<Vec<f64>, SolverError> {
    to_mat(a, nrows, ncols).singular_values().map_err(|e| SolverError::Backend(format!("{e:?}")))
}

/// Numerical rank with relative threshold `rtol`.
pub fn rank(a: &[f64], nrows: usize, ncols: usize, rtol: f64) -> Result<usize, SolverError> {
    let s = singular_values(a, nrows, ncols)?;
    let top = s.first().copied().unwrap_or(0.0);
    Ok(s.iter().filter(|&&v| v > rtol * top).count())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lu_solves_and_reports_singular() {
        let a = [0.0, 2.0, 1.0, 1.0, 1.0, 0.0, 3.0, 0.0, 1.0];
        let x = solve_dense(&a, &[3.0, 2.0, 4.0], 3).unwrap();
        for (xi, e) in x.iter().zip([1.0, 1.0, 1.0]) {
            assert!((xi - e).abs() < 1e-14);
        }
        let s = [1.0, 2.0, 2.0, 4.0];
        assert!(matches!(solve_dense(&s, &[1.0, 1.0], 2), Err(SolverError::Singular { index: 1 })));
    }

    #[test]
    fn eigen_and_rank() {
        let a = [2.0, 1.0, 1.0, 2.0];
        let e = symmetric_eigenvalues(&a, 2).unwrap();
        assert!((e[0] - 1.0).abs() < 1e-14 && (e[1] - 3.0).abs() < 1e-14);
        assert_eq!(rank(&[1.0, 2.0, 2.0, 4.0], 2, 2, 1e-12).unwrap(), 1);
    }
}
