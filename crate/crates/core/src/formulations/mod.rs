//! Plate problems: the primal formulation and the three- and four-field mixed
//! formulations with Hu-Zhang bending moments.
//!
//! Mixed systems are assembled in thickness-scaled form, with compliance
//! `A`, scaled shear stiffness `k_s μ / t²` and load `g`. The primal system
//! carries the physical factors `t³` and `k_s μ t` and is driven by
//! `t f = t³ g`, so all three formulations share the same exact solution.

pub mod analytic;
pub mod fields;

use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use analytic::{analytic_disk, analytic_square, AnalyticValues, Benchmark};
pub use fields::{relative_l2_error, DiscreteField, Field, SolutionFields};

use crate::assembly::condense::condense;
use crate::assembly::forms::{
    assemble_block, assemble_boundary_flux, assemble_boundary_load, assemble_boundary_moment, assemble_load,
    quadrature_degree, Form,
};
use crate::assembly::system::{hz_dirichlet, lagrange_dirichlet, BlockLayout, Constraints, Reduction, SparseSystem, SystemBuilder};
use crate::assembly::AssemblyError;
use crate::fe::{FeError, FeSpace};
use crate::mesh::{Mesh, MeshError};
use crate::solver::{self, SolveReport, SolverError};
use crate::tensor::{Material, SymMatrix2, TensorError, Vec2};

pub type ScalarFn = Arc<dyn Fn(Vec2) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(Vec2) -> Vec2 + Send + Sync>;
pub type TensorFn = Arc<dyn Fn(Vec2) -> SymMatrix2 + Send + Sync>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormulationError {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("field {0:?} is not part of this solution")]
    MissingField(Field),
    #[error("the exact solution has zero norm")]
    ZeroNorm,
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Fe(#[from] FeError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Material(#[from] TensorError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Formulation {
    /// Primal `w, φ ∈ U^p`.
    Prm,
    /// `w ∈ U^p`, `φ ∈ [DG^{p-1}]²`, `M ∈ HZ^p`.
    Tfsrm,
    /// `w, φ ∈ DG^{p-1}`, `M ∈ HZ^p`, `q ∈ RT^{p-1}`.
    Qfsrm,
}

impl Formulation {
    pub fn name(&self) -> &'static str {
        match self {
            Formulation::Prm => "prm",
            Formulation::Tfsrm => "tfsrm",
            Formulation::Qfsrm => "qfsrm",
        }
    }

    pub fn min_degree(&self) -> usize {
        match self {
            Formulation::Prm => 1,
            _ => 3,
        }
    }
}

impl FromStr for Formulation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "prm" => Ok(Formulation::Prm),
            "tfsrm" => Ok(Formulation::Tfsrm),
            "qfsrm" => Ok(Formulation::Qfsrm),
            _ => Err(format!("unknown formulation '{s}' (expected prm, tfsrm or qfsrm)")),
        }
    }
}

impl std::fmt::Display for Formulation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A plate problem on a fixed mesh.
///
/// Boundary edges are either clamped (deflection and rotation prescribed) or
/// free (moment traction `M n` prescribed, zero shear traction). Unlisted
/// boundary markers are treated as free with zero traction in the natural
/// sense for every formulation.
#[derive(Clone)]
pub struct PlateProblem {
    pub formulation: Formulation,
    pub p: usize,
    pub material: Material,
    pub t: f64,
    pub mesh: Mesh,
    /// Load `g` of the scaled system.
    pub load: ScalarFn,
    pub clamped: Vec<u32>,
    pub free: Vec<u32>,
    /// Prescribed deflection on clamped edges, zero if absent.
    pub deflection: Option<ScalarFn>,
    /// Prescribed rotation on clamped edges, zero if absent.
    pub rotation: Option<VectorFn>,
    /// Prescribed moment on free edges, zero if absent.
    pub moment: Option<TensorFn>,
    /// Eliminate element-local unknowns before the global solve.
    pub condense: bool,
}

impl std::fmt::Debug for PlateProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PlateProblem")
            .field("formulation", &self.formulation)
            .field("p", &self.p)
            .field("material", &self.material)
            .field("t", &self.t)
            .field("elements", &self.mesh.n_elements())
            .field("clamped", &self.clamped)
            .field("free", &self.free)
            .field("condense", &self.condense)
            .finish_non_exhaustive()
    }
}

/// All markers present on the boundary of `mesh`, sorted.
pub fn boundary_markers(mesh: &Mesh) -> Vec<u32> {
    let mut m: Vec<u32> = mesh.boundary_edges().iter().map(|b| b.marker).collect();
    m.sort_unstable();
    m.dedup();
    m
}

impl PlateProblem {
    /// Problem clamped along the whole boundary with homogeneous data.
    pub fn clamped(formulation: Formulation, p: usize, material: Material, t: f64, mesh: Mesh, load: ScalarFn) -> Self {
        let clamped = boundary_markers(&mesh);
        PlateProblem {
            formulation,
            p,
            material,
            t,
            mesh,
            load,
            clamped,
            free: vec![],
            deflection: None,
            rotation: None,
            moment: None,
            condense: false,
        }
    }

    /// Clamped benchmark problem with the benchmark's load.
    pub fn benchmark(formulation: Formulation, benchmark: Benchmark, p: usize, material: Material, t: f64, mesh: Mesh) -> Self {
        let load: ScalarFn = Arc::new(move |x| benchmark.load(&material, t, x));
        Self::clamped(formulation, p, material, t, mesh, load)
    }

    pub fn validate(&self) -> Result<(), FormulationError> {
        self.material.validate()?;
        if !(self.t > 0.0 && self.t.is_finite()) {
            return Err(FormulationError::InvalidProblem(format!("thickness must be positive, got {}", self.t)));
        }
        if self.p < self.formulation.min_degree() {
            return Err(FormulationError::InvalidProblem(format!(
                "{} needs p >= {}, got {}",
                self.formulation,
                self.formulation.min_degree(),
                self.p
            )));
        }
        if let Some(m) = self.clamped.iter().find(|m| self.free.contains(m)) {
            return Err(FormulationError::InvalidProblem(format!("marker {m} is both clamped and free")));
        }
        Ok(())
    }

    fn load_degree(&self) -> usize {
        2 * self.p + 4 + 2 * (self.mesh.geo_order() - 1)
    }

    fn block_degree(&self) -> usize {
        quadrature_degree(self.p, self.mesh.geo_order())
    }

    pub fn solve(&self) -> Result<SolutionFields, FormulationError> {
        match self.formulation {
            Formulation::Prm => solve_prm(self),
            Formulation::Tfsrm => solve_tfsrm(self),
            Formulation::Qfsrm => solve_qfsrm(self),
        }
    }
}

fn shear_factor(pb: &PlateProblem) -> f64 {
    pb.material.k_s * pb.material.shear_modulus()
}

/// Eliminates constraints, optionally condenses the given groups of full
/// unknowns, solves and returns the full solution.
fn solve_constrained(
    sys: &SparseSystem,
    constraints: &Constraints,
    groups: Option<Vec<Vec<usize>>>,
) -> Result<(Vec<f64>, SolveReport), FormulationError> {
    let red = Reduction::new(sys.layout.len(), constraints);
    let (k, b) = red.reduce(&sys.matrix, &sys.rhs);
    let (y, report) = match groups {
        Some(groups) => {
            let reduced: Vec<Vec<usize>> = groups
                .iter()
                .map(|g| {
                    g.iter()
                        .map(|&i| {
                            red.reduced_index(i).ok_or_else(|| {
                                FormulationError::InvalidProblem(format!("condensed unknown {i} is constrained"))
                            })
                        })
                        .collect()
                })
                .collect::<Result<_, _>>()?;
            let (kc, bc, cond) = condense(&k, &b, &reduced)?;
            let (yc, report) = solver::solve(&kc, &bc)?;
            (cond.recover(&yc), report)
        }
        None => solver::solve(&k, &b)?,
    };
    Ok((red.expand(&y), report))
}

fn lagrange_constraints(
    pb: &PlateProblem,
    space: &FeSpace,
    f: Option<&dyn Fn(Vec2) -> f64>,
    offset: usize,
    c: &mut Constraints,
) -> Result<(), FormulationError> {
    if pb.clamped.is_empty() {
        return Ok(());
    }
    match f {
        Some(f) => {
            for (i, v) in lagrange_dirichlet(&pb.mesh, space, &pb.clamped, f)? {
                c.fix(offset + i, v);
            }
        }
        None => {
            for i in space.boundary_dofs(&pb.mesh, &pb.clamped) {
                c.fix(offset + i, 0.0);
            }
        }
    }
    Ok(())
}

fn moment_constraints(pb: &PlateProblem, hz: &FeSpace, offset: usize, c: &mut Constraints) -> Result<(), FormulationError> {
    if pb.free.is_empty() {
        return Ok(());
    }
    let zero = |_: Vec2| SymMatrix2::ZERO;
    let m: &dyn Fn(Vec2) -> SymMatrix2 = match &pb.moment {
        Some(m) => m.as_ref(),
        None => &zero,
    };
    c.extend_shifted(&hz_dirichlet(&pb.mesh, hz, &pb.free, m)?, offset);
    Ok(())
}

fn slice(x: &[f64], layout: &BlockLayout, block: usize) -> Vec<f64> {
    x[layout.range(block)].to_vec()
}

/// Primal formulation with continuous deflection and rotations.
pub fn solve_prm(pb: &PlateProblem) -> Result<SolutionFields, FormulationError> {
    pb.validate()?;
    let (sys, u) = prm_system(pb)?;
    let layout = &sys.layout;
    let mut cons = Constraints::new();
    lagrange_constraints(pb, &u, pb.deflection.as_deref().map(|f| f as &dyn Fn(Vec2) -> f64), 0, &mut cons)?;
    for c in 0..2 {
        let rot = pb.rotation.clone();
        let f = rot.map(|r| move |x: Vec2| r(x)[c]);
        lagrange_constraints(pb, &u, f.as_ref().map(|f| f as &dyn Fn(Vec2) -> f64), layout.offsets[1 + c], &mut cons)?;
    }
    let (x, report) = solve_constrained(&sys, &cons, None)?;
    Ok(SolutionFields {
        formulation: Formulation::Prm,
        p: pb.p,
        material: pb.material,
        t: pb.t,
        mesh: pb.mesh.clone(),
        w: DiscreteField { space: u.clone(), coeffs: vec![slice(&x, layout, 0)] },
        phi: DiscreteField { space: u, coeffs: vec![slice(&x, layout, 1), slice(&x, layout, 2)] },
        m: None,
        q: None,
        n_dofs: layout.len(),
        report,
    })
}

fn prm_system(pb: &PlateProblem) -> Result<(SparseSystem, FeSpace), FormulationError> {
    let mesh = &pb.mesh;
    let u = FeSpace::lagrange(mesh, pb.p)?;
    let n = u.n_dofs();
    let layout = BlockLayout::new(&[("w", n), ("phi_x", n), ("phi_y", n)]);
    let (t, s) = (pb.t, shear_factor(pb) * pb.t);
    let deg = pb.block_degree();
    let mut b = SystemBuilder::new(layout.clone());
    b.add(0, 0, &assemble_block(mesh, &u, &u, &Form::Diffusion, deg)?, s)?;
    let mass = assemble_block(mesh, &u, &u, &Form::Mass, deg)?;
    for c in 0..2 {
        b.add_symmetric(1 + c, 0, &assemble_block(mesh, &u, &u, &Form::Gradient { component: c }, deg)?, -s)?;
        b.add(1 + c, 1 + c, &mass, s)?;
        for d in 0..2 {
            let form = Form::Bending { material: pb.material, test_component: c, trial_component: d };
            b.add(1 + c, 1 + d, &assemble_block(mesh, &u, &u, &form, deg)?, t * t * t)?;
        }
    }
    let g = pb.load.clone();
    b.add_rhs(0, &assemble_load(mesh, &u, &move |x| g(x), pb.load_degree())?, t * t * t)?;
    if let (Some(m), false) = (&pb.moment, pb.free.is_empty()) {
        for c in 0..2 {
            let m = m.clone();
            let h = move |x: Vec2, nrm: Vec2| m(x).apply(nrm)[c];
            b.add_rhs(1 + c, &assemble_boundary_load(mesh, &u, &pb.free, &h, pb.load_degree())?, t * t * t)?;
        }
    }
    Ok((b.build(), u))
}

/// Three-field formulation: `M ∈ HZ^p`, `w ∈ U^p`, `φ ∈ [DG^{p-1}]²`.
pub fn solve_tfsrm(pb: &PlateProblem) -> Result<SolutionFields, FormulationError> {
    pb.validate()?;
    let mesh = &pb.mesh;
    let (sys, [hz, u, dg]) = tfsrm_system(pb)?;
    let layout = &sys.layout;
    let mut cons = Constraints::new();
    lagrange_constraints(pb, &u, pb.deflection.as_deref().map(|f| f as &dyn Fn(Vec2) -> f64), layout.offsets[1], &mut cons)?;
    moment_constraints(pb, &hz, 0, &mut cons)?;
    let groups = pb.condense.then(|| {
        (0..mesh.n_elements())
            .map(|e| {
                let mut g: Vec<usize> = hz.element_local_dofs(e).to_vec();
                for k in 0..2 {
                    g.extend(dg.element_dofs(e).iter().map(|d| layout.offsets[2 + k] + d));
                }
                g
            })
            .collect()
    });
    let (x, report) = solve_constrained(&sys, &cons, groups)?;
    Ok(SolutionFields {
        formulation: Formulation::Tfsrm,
        p: pb.p,
        material: pb.material,
        t: pb.t,
        mesh: mesh.clone(),
        w: DiscreteField { space: u, coeffs: vec![slice(&x, layout, 1)] },
        phi: DiscreteField { space: dg, coeffs: vec![slice(&x, layout, 2), slice(&x, layout, 3)] },
        m: Some(DiscreteField { space: hz, coeffs: vec![slice(&x, layout, 0)] }),
        q: None,
        n_dofs: layout.len(),
        report,
    })
}

fn tfsrm_system(pb: &PlateProblem) -> Result<(SparseSystem, [FeSpace; 3]), FormulationError> {
    let mesh = &pb.mesh;
    let hz = FeSpace::hz(mesh, pb.p)?;
    let u = FeSpace::lagrange(mesh, pb.p)?;
    let dg = FeSpace::dg(mesh, pb.p - 1)?;
    let layout = BlockLayout::new(&[("m", hz.n_dofs()), ("w", u.n_dofs()), ("phi_x", dg.n_dofs()), ("phi_y", dg.n_dofs())]);
    let c = shear_factor(pb) / (pb.t * pb.t);
    let deg = pb.block_degree();
    let mut b = SystemBuilder::new(layout.clone());
    b.add(0, 0, &assemble_block(mesh, &hz, &hz, &Form::Compliance { material: pb.material }, deg)?, 1.0)?;
    b.add(1, 1, &assemble_block(mesh, &u, &u, &Form::Diffusion, deg)?, -c)?;
    let mass = assemble_block(mesh, &dg, &dg, &Form::Mass, deg)?;
    for k in 0..2 {
        b.add_symmetric(0, 2 + k, &assemble_block(mesh, &hz, &dg, &Form::StressDivergence { component: k }, deg)?, 1.0)?;
        b.add_symmetric(2 + k, 1, &assemble_block(mesh, &dg, &u, &Form::Gradient { component: k }, deg)?, c)?;
        b.add(2 + k, 2 + k, &mass, -c)?;
    }
    let g = pb.load.clone();
    b.add_rhs(1, &assemble_load(mesh, &u, &move |x| g(x), pb.load_degree())?, -1.0)?;
    if let (Some(r), false) = (&pb.rotation, pb.clamped.is_empty()) {
        let r = r.clone();
        b.add_rhs(0, &assemble_boundary_moment(mesh, &hz, &pb.clamped, &move |x| r(x), pb.load_degree())?, 1.0)?;
    }
    Ok((b.build(), [hz, u, dg]))
}

/// Number of constant and linear modes of the discontinuous basis, which stay
/// global under condensation of the four-field system.
const DG_AFFINE_MODES: usize = 3;

/// Four-field formulation: `M ∈ HZ^p`, `q ∈ RT^{p-1}`, `w, φ ∈ DG^{p-1}`.
pub fn solve_qfsrm(pb: &PlateProblem) -> Result<SolutionFields, FormulationError> {
    pb.validate()?;
    let mesh = &pb.mesh;
    let (sys, [hz, rt, dg]) = qfsrm_system(pb)?;
    let layout = &sys.layout;
    let mut cons = Constraints::new();
    moment_constraints(pb, &hz, 0, &mut cons)?;
    for i in rt.boundary_dofs(mesh, &pb.free) {
        cons.fix(layout.offsets[1] + i, 0.0);
    }
    let groups = pb.condense.then(|| {
        (0..mesh.n_elements())
            .map(|e| {
                let mut g: Vec<usize> = hz.element_local_dofs(e).to_vec();
                g.extend(rt.element_local_dofs(e).iter().map(|d| layout.offsets[1] + d));
                g.extend(dg.element_dofs(e)[DG_AFFINE_MODES..].iter().map(|d| layout.offsets[2] + d));
                for k in 0..2 {
                    g.extend(dg.element_dofs(e).iter().map(|d| layout.offsets[3 + k] + d));
                }
                g
            })
            .collect()
    });
    let (x, report) = solve_constrained(&sys, &cons, groups)?;
    Ok(SolutionFields {
        formulation: Formulation::Qfsrm,
        p: pb.p,
        material: pb.material,
        t: pb.t,
        mesh: mesh.clone(),
        w: DiscreteField { space: dg.clone(), coeffs: vec![slice(&x, layout, 2)] },
        phi: DiscreteField { space: dg, coeffs: vec![slice(&x, layout, 3), slice(&x, layout, 4)] },
        m: Some(DiscreteField { space: hz, coeffs: vec![slice(&x, layout, 0)] }),
        q: Some(DiscreteField { space: rt, coeffs: vec![slice(&x, layout, 1)] }),
        n_dofs: layout.len(),
        report,
    })
}

fn qfsrm_system(pb: &PlateProblem) -> Result<(SparseSystem, [FeSpace; 3]), FormulationError> {
    let mesh = &pb.mesh;
    let hz = FeSpace::hz(mesh, pb.p)?;
    let rt = FeSpace::rt(mesh, pb.p - 1)?;
    let dg = FeSpace::dg(mesh, pb.p - 1)?;
    let nd = dg.n_dofs();
    let layout = BlockLayout::new(&[("m", hz.n_dofs()), ("q", rt.n_dofs()), ("w", nd), ("phi_x", nd), ("phi_y", nd)]);
    let deg = pb.block_degree();
    let mut b = SystemBuilder::new(layout.clone());
    b.add(0, 0, &assemble_block(mesh, &hz, &hz, &Form::Compliance { material: pb.material }, deg)?, 1.0)?;
    b.add(1, 1, &assemble_block(mesh, &rt, &rt, &Form::FluxMass, deg)?, pb.t * pb.t / shear_factor(pb))?;
    b.add_symmetric(1, 2, &assemble_block(mesh, &rt, &dg, &Form::FluxDivergence, deg)?, -1.0)?;
    for k in 0..2 {
        b.add_symmetric(0, 3 + k, &assemble_block(mesh, &hz, &dg, &Form::StressDivergence { component: k }, deg)?, 1.0)?;
        b.add_symmetric(1, 3 + k, &assemble_block(mesh, &rt, &dg, &Form::FluxComponent { component: k }, deg)?, -1.0)?;
    }
    let g = pb.load.clone();
    b.add_rhs(2, &assemble_load(mesh, &dg, &move |x| g(x), pb.load_degree())?, -1.0)?;
    if !pb.clamped.is_empty() {
        if let Some(w) = &pb.deflection {
            let w = w.clone();
            b.add_rhs(1, &assemble_boundary_flux(mesh, &rt, &pb.clamped, &move |x| w(x), pb.load_degree())?, -1.0)?;
        }
        if let Some(r) = &pb.rotation {
            let r = r.clone();
            b.add_rhs(0, &assemble_boundary_moment(mesh, &hz, &pb.clamped, &move |x| r(x), pb.load_degree())?, 1.0)?;
        }
    }
    Ok((b.build(), [hz, rt, dg]))
}

/// Assembled system of a problem before boundary elimination, for
/// inspection and matrix export.
pub fn assemble_system(pb: &PlateProblem) -> Result<SparseSystem, FormulationError> {
    pb.validate()?;
    Ok(match pb.formulation {
        Formulation::Prm => prm_system(pb)?.0,
        Formulation::Tfsrm => tfsrm_system(pb)?.0,
        Formulation::Qfsrm => qfsrm_system(pb)?.0,
    })
}
