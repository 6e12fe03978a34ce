//! Static condensation of element-local unknowns.
//!
//! Each group collects unknowns that couple only among themselves and with
//! retained unknowns. The groups are eliminated independently through dense
//! local factorisations, leaving the Schur complement on the retained set.

use super::forms::map_elements;
use super::sparse::{SparseMatrix, TripletList};
use super::AssemblyError;
use crate::solver::dense::DenseLu;

struct Group {
    dofs: Vec<usize>,
    lu: DenseLu,
    /// Retained columns coupled to the group and the row-major block `K_gr`.
    cols: Vec<usize>,
    k_gr: Vec<f64>,
    b_g: Vec<f64>,
}

/// Recovery data of a condensed system.
pub struct Condensation {
    n: usize,
    retained: Vec<usize>,
    groups: Vec<Group>,
}

struct Local {
    group: Group,
    /// Schur contributions `(retained row, retained col, value)` and rhs updates.
    schur: Vec<(usize, usize, f64)>,
    rhs: Vec<(usize, f64)>,
}

/// Eliminates the unknowns in `groups` from `K x = b`. Returns the Schur
/// complement on the retained unknowns (in increasing index order), its
/// right-hand side and the data needed to recover the eliminated unknowns.
pub fn condense(
    k: &SparseMatrix,
    b: &[f64],
    groups: &[Vec<usize>],
) -> Result<(SparseMatrix, Vec<f64>, Condensation), AssemblyError> {
    let n = k.nrows();
    let mut owner = vec![usize::MAX; n];
    for (g, dofs) in groups.iter().enumerate() {
        for &i in dofs {
            if owner[i] != usize::MAX {
                return Err(AssemblyError::Condensation(format!("unknown {i} belongs to two groups")));
            }
            owner[i] = g;
        }
    }
    let mut map = vec![-1isize; n];
    let mut retained = Vec::new();
    for i in 0..n {
        if owner[i] == usize::MAX {
            map[i] = retained.len() as isize;
            retained.push(i);
        }
    }
    let kt = k.transpose();
    let locals = map_elements(groups.len(), |g| -> Result<Local, AssemblyError> {
        let dofs = &groups[g];
        let m = dofs.len();
        let pos = |i: usize| dofs.iter().position(|&d| d == i);
        let mut k_gg = vec![0.0; m * m];
        let mut cols: Vec<usize> = Vec::new();
        let mut rows: Vec<usize> = Vec::new();
        for (a, &i) in dofs.iter().enumerate() {
            let (ci, cv) = k.row(i);
            for (&j, &v) in ci.iter().zip(cv) {
                if owner[j] == g {
                    k_gg[a * m + pos(j).unwrap()] += v;
                } else if owner[j] != usize::MAX {
                    if v != 0.0 {
                        return Err(AssemblyError::Condensation(format!("groups {g} and {} are coupled", owner[j])));
                    }
                } else {
                    cols.push(j);
                }
            }
            let (ri, rv) = kt.row(i);
            for (&j, &v) in ri.iter().zip(rv) {
                if owner[j] == usize::MAX && v != 0.0 {
                    rows.push(j);
                }
            }
        }
        cols.sort_unstable();
        cols.dedup();
        rows.sort_unstable();
        rows.dedup();
        let (nc, nr) = (cols.len(), rows.len());
        let mut k_gr = vec![0.0; m * nc];
        let mut k_rg = vec![0.0; nr * m];
        for (a, &i) in dofs.iter().enumerate() {
            let (ci, cv) = k.row(i);
            for (&j, &v) in ci.iter().zip(cv) {
                if owner[j] == usize::MAX {
                    k_gr[a * nc + cols.binary_search(&j).unwrap()] += v;
                }
            }
            let (ri, rv) = kt.row(i);
            for (&j, &v) in ri.iter().zip(rv) {
                if let Ok(r) = rows.binary_search(&j) {
                    k_rg[r * m + a] += v;
                }
            }
        }
        let lu = DenseLu::new(&k_gg, m, 1e-14).map_err(|e| AssemblyError::Condensation(format!("group {g}: {e}")))?;
        let b_g: Vec<f64> = dofs.iter().map(|&i| b[i]).collect();
        // X = K_gg^{-1} [K_gr | b_g]
        let mut x = vec![0.0; m * (nc + 1)];
        let mut col = vec![0.0; m];
        for c in 0..=nc {
            for a in 0..m {
                col[a] = if c < nc { k_gr[a * nc + c] } else { b_g[a] };
            }
            let s = lu.solve(&col);
            for a in 0..m {
                x[a * (nc + 1) + c] = s[a];
            }
        }
        let mut schur = Vec::with_capacity(nr * nc);
        let mut rhs = Vec::with_capacity(nr);
        for (r, &gr) in rows.iter().enumerate() {
            let krow = &k_rg[r * m..(r + 1) * m];
            for c in 0..=nc {
                let v: f64 = (0..m).map(|a| krow[a] * x[a * (nc + 1) + c]).sum();
                if c < nc {
                    schur.push((map[gr] as usize, map[cols[c]] as usize, -v));
                } else {
                    rhs.push((map[gr] as usize, -v));
                }
            }
        }
        Ok(Local { group: Group { dofs: dofs.clone(), lu, cols, k_gr, b_g }, schur, rhs })
    });
    let nr = retained.len();
    let mut trip = TripletList::new();
    for (i, j, v) in k.triplets() {
        if map[i] >= 0 && map[j] >= 0 {
            trip.push(map[i] as usize, map[j] as usize, v);
        }
    }
    let mut rhs: Vec<f64> = retained.iter().map(|&i| b[i]).collect();
    let mut out = Vec::with_capacity(groups.len());
    for l in locals {
        let l = l?;
        for (i, j, v) in l.schur {
            trip.push(i, j, v);
        }
        for (i, v) in l.rhs {
            rhs[i] += v;
        }
        out.push(l.group);
    }
    Ok((trip.into_matrix(nr, nr), rhs, Condensation { n, retained, groups: out }))
}

impl Condensation {
    /// Number of retained unknowns.
    pub fn n_retained(&self) -> usize {
        self.retained.len()
    }

    /// Full solution from the retained one by local back-substitution.
    pub fn recover(&self, xr: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        for (r, &i) in self.retained.iter().enumerate() {
            x[i] = xr[r];
        }
        let locals = map_elements(self.groups.len(), |g| {
            let gr = &self.groups[g];
            let nc = gr.cols.len();
            let rhs: Vec<f64> = (0..gr.dofs.len())
                .map(|a| gr.b_g[a] - (0..nc).map(|c| gr.k_gr[a * nc + c] * x[gr.cols[c]]).sum::<f64>())
                .collect();
            gr.lu.solve(&rhs)
        });
        for (gr, v) in self.groups.iter().zip(locals) {
            for (&i, xi) in gr.dofs.iter().zip(v) {
                x[i] = xi;
            }
        }
        x
    }
}
