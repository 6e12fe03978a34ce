use std::f64::consts::PI;

use super::{BoundaryCurve, BoundaryEdge, Mesh, MeshError};
use crate::tensor::Vec2;

/// Orders a triangle counter-clockwise with its longest edge first.
pub(crate) fn orient(tri: [usize; 3], v: &[Vec2]) -> [usize; 3] {
    let (a, b, c) = (v[tri[0]], v[tri[1]], v[tri[2]]);
    let area2 = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
    let t = if area2 < 0.0 { [tri[0], tri[2], tri[1]] } else { tri };
    let len = |i: usize, j: usize| {
        let (p, q) = (v[t[i]], v[t[j]]);
        (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)
    };
    let l = [len(0, 1), len(1, 2), len(2, 0)];
    let mut best = 0;
    for k in 1..3 {
        if l[k] > l[best] * (1.0 + 1e-12) {
            best = k;
        }
    }
    [t[best], t[(best + 1) % 3], t[(best + 2) % 3]]
}

/// Unit square split into `2^k` congruent right triangles, `k` odd.
///
/// Boundary markers: 1 bottom, 2 right, 3 top, 4 left.
pub fn square_mesh(k: u32) -> Result<Mesh, MeshError> {
    if k % 2 == 0 || k > 25 {
        return Err(MeshError::InvalidArgument(format!("2^{k} triangles do not form a uniform square grid; k must be odd")));
    }
    let n = 1usize << ((k - 1) / 2);
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut verts = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            verts.push([i as f64 / n as f64, j as f64 / n as f64]);
        }
    }
    let mut tris = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (p00, p10, p11, p01) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            tris.push([p00, p11, p01]);
            tris.push([p11, p00, p10]);
        }
    }
    let mut bnd = Vec::new();
    for i in 0..n {
        bnd.push(BoundaryEdge { vertices: [id(i, 0), id(i + 1, 0)], marker: 1, curve: None });
        bnd.push(BoundaryEdge { vertices: [id(n, i), id(n, i + 1)], marker: 2, curve: None });
        bnd.push(BoundaryEdge { vertices: [id(i + 1, n), id(i, n)], marker: 3, curve: None });
        bnd.push(BoundaryEdge { vertices: [id(0, i + 1), id(0, i)], marker: 4, curve: None });
    }
    Mesh::new(verts, tris, bnd, vec![], 1)
}

/// Unit disk with `n_elems` triangles and boundary geometry of order `geo_order`.
///
/// Multiples of four from 12 on use a centre fan inside a polygon of radius
/// one half surrounded by a ring reaching twice as many boundary vertices;
/// other counts use a single fan around the centre.
pub fn disk_mesh(n_elems: usize, geo_order: usize) -> Result<Mesh, MeshError> {
    if n_elems < 4 {
        return Err(MeshError::InvalidArgument(format!("a disk mesh needs at least 4 elements, got {n_elems}")));
    }
    if geo_order == 0 {
        return Err(MeshError::InvalidArgument("geometry order must be at least 1".into()));
    }
    let polar = |r: f64, th: f64| [r * th.cos(), r * th.sin()];
    let mut verts: Vec<Vec2> = vec![[0.0, 0.0]];
    let mut tris = Vec::new();
    let outer: Vec<usize>;
    if n_elems % 4 == 0 && n_elems >= 12 {
        let m = n_elems / 4;
        let inner: Vec<usize> = (0..m)
            .map(|i| {
                verts.push(polar(0.5, 2.0 * PI * i as f64 / m as f64));
                verts.len() - 1
            })
            .collect();
        outer = (0..2 * m)
            .map(|i| {
                verts.push(polar(1.0, PI * i as f64 / m as f64));
                verts.len() - 1
            })
            .collect();
        for i in 0..m {
            let ni = (i + 1) % m;
            tris.push([0, inner[i], inner[ni]]);
            tris.push([inner[i], outer[2 * i], outer[2 * i + 1]]);
            tris.push([inner[i], outer[2 * i + 1], inner[ni]]);
            tris.push([inner[ni], outer[2 * i + 1], outer[(2 * i + 2) % (2 * m)]]);
        }
    } else {
        outer = (0..n_elems)
            .map(|i| {
                verts.push(polar(1.0, 2.0 * PI * i as f64 / n_elems as f64));
                verts.len() - 1
            })
            .collect();
        for i in 0..n_elems {
            tris.push([0, outer[i], outer[(i + 1) % n_elems]]);
        }
    }
    let tris = tris.into_iter().map(|t| orient(t, &verts)).collect();
    let nb = outer.len();
    let bnd = (0..nb)
        .map(|i| BoundaryEdge { vertices: [outer[i], outer[(i + 1) % nb]], marker: 1, curve: Some(0) })
        .collect();
    let curves = vec![BoundaryCurve::Circle { center: [0.0, 0.0], radius: 1.0 }];
    Mesh::new(verts, tris, bnd, curves, geo_order)
}

/// L-shaped domain `(-1,1)^2 \ [0,1]^2` from three unit squares, each split
/// along the diagonal through the re-entrant corner. Boundary marker 1.
pub fn lshape_mesh() -> Result<Mesh, MeshError> {
    let verts: Vec<Vec2> = vec![
        [-1.0, -1.0],
        [0.0, -1.0],
        [1.0, -1.0],
        [-1.0, 0.0],
        [0.0, 0.0],
        [1.0, 0.0],
        [-1.0, 1.0],
        [0.0, 1.0],
    ];
    let tris = [[0, 4, 3], [4, 0, 1], [4, 2, 5], [2, 4, 1], [4, 6, 3], [6, 4, 7]];
    let tris = tris.into_iter().map(|t| orient(t, &verts)).collect();
    let ring = [0, 1, 2, 5, 4, 7, 6, 3];
    let bnd = (0..ring.len())
        .map(|i| BoundaryEdge { vertices: [ring[i], ring[(i + 1) % ring.len()]], marker: 1, curve: None })
        .collect();
    Mesh::new(verts, tris, bnd, vec![], 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_counts() {
        let m = square_mesh(1).unwrap();
        assert_eq!((m.n_elements(), m.n_vertices(), m.n_edges()), (2, 4, 5));
        let m = square_mesh(9).unwrap();
        assert_eq!((m.n_elements(), m.n_vertices(), m.n_edges()), (512, 289, 800));
        assert!(square_mesh(2).is_err());
        let area: f64 = (0..m.n_elements()).map(|e| m.element_area(e)).sum();
        assert!((area - 1.0).abs() < 1e-13);
    }

    #[test]
    fn lshape_counts() {
        let m = lshape_mesh().unwrap();
        assert_eq!((m.n_elements(), m.n_vertices(), m.n_edges()), (6, 8, 13));
        assert_eq!(m.boundary_edges().len(), 8);
        let area: f64 = (0..6).map(|e| m.element_area(e)).sum();
        assert!((area - 3.0).abs() < 1e-14);
    }

    #[test]
    fn disk_counts_and_area() {
        let m = disk_mesh(24, 3).unwrap();
        assert_eq!((m.n_elements(), m.n_vertices(), m.n_edges()), (24, 19, 42));
        assert_eq!(m.boundary_edges().len(), 12);
        let area: f64 = (0..24).map(|e| m.element_area(e)).sum();
        assert!((area - PI).abs() / PI < 1e-2);
        let lin = disk_mesh(24, 1).unwrap();
        let area1: f64 = (0..24).map(|e| lin.element_area(e)).sum();
        assert!((area1 - 3.0).abs() < 1e-13);
        assert!((area - PI).abs() < (area1 - PI).abs() / 100.0);
        assert!(disk_mesh(3, 1).is_err());
        assert_eq!(disk_mesh(7, 1).unwrap().n_elements(), 7);
    }
}
