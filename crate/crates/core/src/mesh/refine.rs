use super::generators::orient;
use super::{BoundaryEdge, Mesh};
use crate::tensor::Vec2;

fn midpoint(mesh: &Mesh, edge: usize) -> Vec2 {
    let [a, b] = mesh.edges()[edge];
    let (pa, pb) = (mesh.vertices()[a], mesh.vertices()[b]);
    match mesh.edge_curve(edge) {
        Some(c) => c.point(pa, pb, 0.5),
        None => [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])],
    }
}

fn split_boundary(mesh: &Mesh, mid: &[Option<usize>]) -> Vec<BoundaryEdge> {
    let mut index = std::collections::HashMap::new();
    for (e, key) in mesh.edges().iter().enumerate() {
        if mesh.is_boundary_edge(e) {
            index.insert(*key, e);
        }
    }
    let mut out = Vec::new();
    for be in mesh.boundary_edges() {
        let [a, b] = be.vertices;
        match index.get(&[a.min(b), a.max(b)]).and_then(|&e| mid[e]) {
            Some(m) => {
                out.push(BoundaryEdge { vertices: [a, m], marker: be.marker, curve: be.curve });
                out.push(BoundaryEdge { vertices: [m, b], marker: be.marker, curve: be.curve });
            }
            None => out.push(be.clone()),
        }
    }
    out
}

/// Red refinement: every triangle is split into four by its edge midpoints.
/// Returns the refined mesh and the parent of every new element.
pub fn refine_uniform(mesh: &Mesh) -> (Mesh, Vec<usize>) {
    let mut verts = mesh.vertices().to_vec();
    let mut mid = vec![None; mesh.n_edges()];
    for (e, m) in mid.iter_mut().enumerate() {
        verts.push(midpoint(mesh, e));
        *m = Some(verts.len() - 1);
    }
    let mut tris = Vec::with_capacity(4 * mesh.n_elements());
    let mut parent = Vec::with_capacity(4 * mesh.n_elements());
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let ee = mesh.element_edges(t);
        let (m31, m12, m23) = (mid[ee[0]].unwrap(), mid[ee[1]].unwrap(), mid[ee[2]].unwrap());
        let [n1, n2, n3] = *tri;
        for child in [[n1, m12, m31], [m12, n2, m23], [m31, m23, n3], [m12, m23, m31]] {
            tris.push(orient(child, &verts));
            parent.push(t);
        }
    }
    let bnd = split_boundary(mesh, &mid);
    let out = Mesh::new(verts, tris, bnd, mesh.curves().to_vec(), mesh.geo_order()).expect("red refinement keeps a valid mesh");
    (out, parent)
}

/// Newest-vertex bisection of the marked elements with closure. Marked
/// elements are split into four; neighbours are bisected as needed to keep
/// the mesh conforming. Returns the refined mesh and the parent of every new element.
pub fn refine_marked(mesh: &Mesh, marked: &[usize]) -> (Mesh, Vec<usize>) {
    let mut edge_marked = vec![false; mesh.n_edges()];
    for &t in marked {
        for e in mesh.element_edges(t) {
            edge_marked[e] = true;
        }
    }
    loop {
        let mut changed = false;
        for t in 0..mesh.n_elements() {
            let ee = mesh.element_edges(t);
            if ee.iter().any(|&e| edge_marked[e]) && !edge_marked[ee[1]] {
                edge_marked[ee[1]] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let mut verts = mesh.vertices().to_vec();
    let mut mid = vec![None; mesh.n_edges()];
    for e in 0..mesh.n_edges() {
        if edge_marked[e] {
            verts.push(midpoint(mesh, e));
            mid[e] = Some(verts.len() - 1);
        }
    }
    let mut tris = Vec::new();
    let mut parent = Vec::new();
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let ee = mesh.element_edges(t);
        let [n1, n2, n3] = *tri;
        let children: Vec<[usize; 3]> = match (mid[ee[1]], mid[ee[2]], mid[ee[0]]) {
            (None, _, _) => vec![[n1, n2, n3]],
            (Some(m12), None, None) => vec![[n3, n1, m12], [n2, n3, m12]],
            (Some(m12), Some(m23), None) => vec![[n3, n1, m12], [m12, n2, m23], [n3, m12, m23]],
            (Some(m12), None, Some(m31)) => vec![[m12, n3, m31], [n1, m12, m31], [n2, n3, m12]],
            (Some(m12), Some(m23), Some(m31)) => {
                vec![[m12, n3, m31], [n1, m12, m31], [m12, n2, m23], [n3, m12, m23]]
            }
        };
        for c in children {
            tris.push(c);
            parent.push(t);
        }
    }
    let bnd = split_boundary(mesh, &mid);
    let out = Mesh::new(verts, tris, bnd, mesh.curves().to_vec(), mesh.geo_order()).expect("bisection keeps a valid mesh");
    (out, parent)
}
