//! Mesh exchange format.
//!
//! ```json
//! {
//!   "vertices": [[x, y], ...],
//!   "triangles": [[a, b, c], ...],
//!   "boundary_edges": [{"vertices": [a, b], "marker": 1, "curve": 0}, ...],
//!   "curves": [{"type": "circle", "center": [0.0, 0.0], "radius": 1.0}],
//!   "geo_order": 3,
//!   "control_points": [{"element": 4, "points": [[x, y], ...]}]
//! }
//! ```
//!
//! Triangles are counter-clockwise. `curve` indexes `curves` and may be
//! omitted for straight edges. `control_points` lists the mapped degree
//! `geo_order` lattice of every curved element; it is written for
//! inspection and ignored on import, where the maps are rebuilt from `curves`.

use serde::{Deserialize, Serialize};

use super::{BoundaryCurve, BoundaryEdge, Mesh, MeshError};
use crate::tensor::Vec2;

#[derive(Debug, Serialize, Deserialize)]
struct ControlPoints {
    element: usize,
    points: Vec<Vec2>,
}

#[derive(Debug, Serialize, Deserialize)]
struct MeshFile {
    vertices: Vec<Vec2>,
    triangles: Vec<[usize; 3]>,
    #[serde(default)]
    boundary_edges: Vec<BoundaryEdge>,
    #[serde(default)]
    curves: Vec<BoundaryCurve>,
    #[serde(default = "one")]
    geo_order: usize,
    #[serde(default)]
    control_points: Vec<ControlPoints>,
}

fn one() -> usize {
    1
}

pub fn mesh_to_json(mesh: &Mesh) -> String {
    let control_points = (0..mesh.n_elements())
        .filter_map(|e| {
            let g = mesh.geometry(e);
            (!g.is_affine()).then(|| ControlPoints { element: e, points: g.control_points() })
        })
        .collect();
    let file = MeshFile {
        vertices: mesh.vertices().to_vec(),
        triangles: mesh.triangles().to_vec(),
        boundary_edges: mesh.boundary_edges().to_vec(),
        curves: mesh.curves().to_vec(),
        geo_order: mesh.geo_order(),
        control_points,
    };
    serde_json::to_string_pretty(&file).expect("mesh serialises")
}

pub fn mesh_from_json(text: &str) -> Result<Mesh, MeshError> {
    let f: MeshFile = serde_json::from_str(text).map_err(|e| MeshError::Json(e.to_string()))?;
    Mesh::new(f.vertices, f.triangles, f.boundary_edges, f.curves, f.geo_order)
}
