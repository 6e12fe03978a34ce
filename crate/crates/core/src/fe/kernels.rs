use crate::mesh::LOCAL_EDGES;
use crate::polynomials::{cell_kernels, dubiner_like, edge_kernels, Scalar};

/// Hierarchical `H^1` kernels of degree `p`: three vertex functions, `p-1`
/// kernels per edge evaluated in the global edge direction, then the cell
/// kernels.
pub fn h1_kernels<S: Scalar>(p: usize, xi: S, eta: S, ascending: [bool; 3]) -> Vec<S> {
    let mu = [-(xi + eta) + 1.0, xi, eta];
    let mut out = Vec::with_capacity((p + 1) * (p + 2) / 2);
    out.extend_from_slice(&mu);
    for (le, [i, j]) in LOCAL_EDGES.iter().enumerate() {
        let (a, b) = if ascending[le] { (*i, *j) } else { (*j, *i) };
        out.extend(edge_kernels(p, mu[a], mu[b]));
    }
    out.extend(cell_kernels(p, xi, eta));
    out
}

/// Basis of `P^n` for element-wise discontinuous fields.
pub fn dg_basis<S: Scalar>(n: usize, xi: S, eta: S) -> Vec<S> {
    dubiner_like(n, xi, eta)
}
