//! Convergence and adaptivity studies.
//!
//! A study solves one plate problem on a sequence of meshes, measures the
//! relative errors against the analytic solution where one exists, evaluates
//! the recovery estimator for mixed formulations and fits convergence rates.

pub mod checks;
pub mod output;
pub mod recovery;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formulations::{Benchmark, Field, Formulation, FormulationError, PlateProblem, ScalarFn, SolutionFields};
use crate::mesh::{disk_mesh, lshape_mesh, refine_marked, refine_uniform, square_mesh, Mesh, MeshError};
use crate::solver::{fit_loglog_slope, fit_slope};
use crate::tensor::Material;

pub use output::{emit_csv, emit_json, emit_results, field_dump, parse_json, OutputFormat};
pub use recovery::{dorfler_mark, recovery_estimate, recovery_estimate_of, Estimate};

/// Number of trailing steps used for estimator-versus-dofs rates.
pub const ESTIMATOR_WINDOW: usize = 5;

#[derive(Debug, Error)]
pub enum StudyError {
    #[error("invalid study configuration: {0}")]
    Config(String),
    #[error("step {step}: {source}")]
    Step {
        step: usize,
        #[source]
        source: FormulationError,
    },
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Assembly(#[from] crate::assembly::AssemblyError),
    #[error(transparent)]
    Solver(#[from] crate::solver::SolverError),
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("nothing to emit: {0}")]
    Empty(String),
    #[error("malformed study JSON: {0}")]
    Json(String),
}

/// Computational domain of a study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    /// Clamped unit square with the polynomial benchmark.
    Square,
    /// Clamped unit disk under uniform pressure.
    Disk,
    /// Clamped L-shaped plate under uniform load, without exact solution.
    Lshape,
}

impl Domain {
    pub fn benchmark(&self) -> Option<Benchmark> {
        match self {
            Domain::Square => Some(Benchmark::Square),
            Domain::Disk => Some(Benchmark::Disk),
            Domain::Lshape => None,
        }
    }

    /// Material used for the domain unless configured otherwise.
    pub fn default_material(&self) -> Material {
        match self {
            Domain::Square => Material::default(),
            Domain::Disk | Domain::Lshape => Material { e: 240.0, nu: 0.3, k_s: 5.0 / 6.0 },
        }
    }

    pub fn default_refinements(&self) -> usize {
        match self {
            Domain::Square => 5,
            Domain::Disk => 1,
            Domain::Lshape => 4,
        }
    }
}

/// Settings of one study.
///
/// Uniform studies use `refinements` meshes: squares with `2^1, 2^3, ...`
/// triangles, or the initial disk and L-shape meshes refined uniformly.
/// Adaptive studies start from the initial mesh and refine until the dof
/// budget is reached or the estimator stagnates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub domain: Domain,
    pub formulation: Formulation,
    pub p: usize,
    pub t: f64,
    pub material: Material,
    pub refinements: usize,
    /// Polynomial order of curved boundary edges.
    pub geo_order: usize,
    /// Elements of the initial disk mesh.
    pub disk_elements: usize,
    /// Uniform load `g` of the scaled L-shape problem.
    pub load: f64,
    pub adaptive: bool,
    /// Dörfler marking fraction.
    pub theta: f64,
    pub max_dofs: usize,
    /// Upper bound on adaptive steps.
    pub max_steps: usize,
    pub condense: bool,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
}

impl StudyConfig {
    pub fn new(domain: Domain, formulation: Formulation, p: usize, t: f64) -> Self {
        StudyConfig {
            domain,
            formulation,
            p,
            t,
            material: domain.default_material(),
            refinements: domain.default_refinements(),
            geo_order: if domain == Domain::Disk { 3 } else { 1 },
            disk_elements: 24,
            load: -1000.0,
            adaptive: false,
            theta: 0.5,
            max_dofs: 100_000,
            max_steps: 40,
            condense: false,
            out: None,
            format: OutputFormat::Csv,
        }
    }

    pub fn validate(&self) -> Result<(), StudyError> {
        let bad = |m: String| Err(StudyError::Config(m));
        self.material.validate().map_err(|e| StudyError::Config(e.to_string()))?;
        if self.p < self.formulation.min_degree() {
            return bad(format!("{} needs p >= {}, got {}", self.formulation, self.formulation.min_degree(), self.p));
        }
        if !(self.t > 0.0 && self.t.is_finite()) {
            return bad(format!("thickness must be positive, got {}", self.t));
        }
        if self.refinements == 0 && !self.adaptive {
            return bad("a uniform study needs at least one mesh".into());
        }
        if self.geo_order == 0 {
            return bad("geometry order must be at least 1".into());
        }
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return bad(format!("marking fraction must lie in (0, 1], got {}", self.theta));
        }
        if self.adaptive {
            if self.formulation == Formulation::Prm {
                return bad("adaptive refinement needs the bending moments of a mixed formulation".into());
            }
            if self.max_dofs == 0 || self.max_steps == 0 {
                return bad("adaptive studies need a positive dof budget and step limit".into());
            }
        }
        if !self.load.is_finite() {
            return bad("load must be finite".into());
        }
        Ok(())
    }

    fn initial_mesh(&self) -> Result<Mesh, StudyError> {
        Ok(match self.domain {
            Domain::Square => square_mesh(1)?,
            Domain::Disk => disk_mesh(self.disk_elements, self.geo_order)?,
            Domain::Lshape => lshape_mesh()?,
        })
    }

    /// Meshes of a uniform study.
    pub fn meshes(&self) -> Result<Vec<Mesh>, StudyError> {
        let mut out = Vec::with_capacity(self.refinements);
        match self.domain {
            Domain::Square => {
                for i in 0..self.refinements {
                    out.push(square_mesh(2 * i as u32 + 1)?);
                }
            }
            Domain::Disk | Domain::Lshape => {
                let mut mesh = self.initial_mesh()?;
                for i in 0..self.refinements {
                    if i > 0 {
                        mesh = refine_uniform(&mesh).0;
                    }
                    out.push(mesh.clone());
                }
            }
        }
        Ok(out)
    }

    pub fn problem(&self, mesh: Mesh) -> PlateProblem {
        let mut pb = match self.domain.benchmark() {
            Some(b) => PlateProblem::benchmark(self.formulation, b, self.p, self.material, self.t, mesh),
            None => {
                let g = self.load;
                let load: ScalarFn = Arc::new(move |_| g);
                PlateProblem::clamped(self.formulation, self.p, self.material, self.t, mesh, load)
            }
        };
        pb.condense = self.condense;
        pb
    }
}

/// Outcome of one step of a study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRecord {
    pub step: usize,
    pub elements: usize,
    pub dofs: usize,
    /// Largest element diameter.
    pub h: f64,
    /// Relative `L²` errors of the fields with an analytic reference.
    pub errors: BTreeMap<Field, f64>,
    /// Recovery estimate of the bending moments.
    pub estimator: Option<f64>,
    /// Seconds spent on the step; not part of any reproducibility guarantee.
    pub wall_time: f64,
}

/// Why an adaptive study stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StopReason {
    /// All configured meshes were used.
    Completed,
    Budget,
    Stagnation,
    StepLimit,
}

/// Records of a study with its configuration and fitted rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyResult {
    pub config: StudyConfig,
    /// Fields whose errors were measured, in column order.
    pub fields: Vec<Field>,
    pub records: Vec<ConvergenceRecord>,
    /// Error rates with respect to `h`, keyed by field name.
    pub slopes: BTreeMap<String, f64>,
    /// Rate of the estimator with respect to the number of unknowns.
    pub estimator_slope: Option<f64>,
    pub stop: StopReason,
}

impl StudyResult {
    pub fn errors(&self, field: Field) -> Vec<(f64, f64)> {
        self.records.iter().filter_map(|r| r.errors.get(&field).map(|&e| (r.h, e))).collect()
    }

    pub fn estimates(&self) -> Vec<(f64, f64)> {
        self.records.iter().filter_map(|r| r.estimator.map(|e| (r.dofs as f64, e))).collect()
    }
}

/// Fields measured against the analytic solution.
fn measured_fields(config: &StudyConfig, fields: &SolutionFields) -> Vec<Field> {
    match config.domain.benchmark() {
        Some(_) => Field::ALL.into_iter().filter(|&f| fields.has(f)).collect(),
        None => vec![],
    }
}

fn evaluate(config: &StudyConfig, step: usize, fields: &SolutionFields, start: Instant) -> Result<(ConvergenceRecord, Option<Estimate>), FormulationError> {
    let mut errors = BTreeMap::new();
    if let Some(b) = config.domain.benchmark() {
        let (m, t) = (config.material, config.t);
        for f in measured_fields(config, fields) {
            errors.insert(f, fields.error_l2(f, &|x| b.eval(&m, t, x).field(f))?);
        }
    }
    let estimate = match fields.m {
        Some(_) => Some(recovery_estimate(fields)?),
        None => None,
    };
    let record = ConvergenceRecord {
        step,
        elements: fields.mesh.n_elements(),
        dofs: fields.n_dofs,
        h: fields.mesh.h(),
        errors,
        estimator: estimate.as_ref().map(|e| e.global),
        wall_time: start.elapsed().as_secs_f64(),
    };
    Ok((record, estimate))
}

fn finish(config: &StudyConfig, fields: Vec<Field>, records: Vec<ConvergenceRecord>, stop: StopReason) -> Result<StudyResult, StudyError> {
    if records.windows(2).any(|w| w[1].dofs <= w[0].dofs) {
        return Err(StudyError::Config("mesh sequence does not increase the number of unknowns".into()));
    }
    let mut result = StudyResult { config: config.clone(), fields, records, slopes: BTreeMap::new(), estimator_slope: None, stop };
    if result.records.len() >= 2 {
        for &f in &result.fields {
            if let Ok(s) = fit_slope(&result.errors(f)) {
                result.slopes.insert(f.name().to_string(), s);
            }
        }
        result.estimator_slope = fit_loglog_slope(&result.estimates(), ESTIMATOR_WINDOW).ok();
    }
    Ok(result)
}

/// Solves on every mesh of a uniform study.
pub fn run_convergence(config: &StudyConfig) -> Result<StudyResult, StudyError> {
    run_convergence_observed(config, |_, _| {})
}

/// Uniform study calling `observe` with the solution and estimate of every step.
pub fn run_convergence_observed(
    config: &StudyConfig,
    mut observe: impl FnMut(&SolutionFields, Option<&Estimate>),
) -> Result<StudyResult, StudyError> {
    config.validate()?;
    let mut records = Vec::new();
    let mut fields = vec![];
    for (step, mesh) in config.meshes()?.into_iter().enumerate() {
        let start = Instant::now();
        let wrap = |source| StudyError::Step { step, source };
        let sol = config.problem(mesh).solve().map_err(wrap)?;
        fields = measured_fields(config, &sol);
        let (record, estimate) = evaluate(config, step, &sol, start).map_err(wrap)?;
        observe(&sol, estimate.as_ref());
        records.push(record);
    }
    finish(config, fields, records, StopReason::Completed)
}

/// Whether each of the last three steps reduced the estimator by less than
/// one percent.
fn stagnated(records: &[ConvergenceRecord]) -> bool {
    let n = records.len();
    if n < 4 {
        return false;
    }
    records[n - 4..].windows(2).all(|w| match (w[0].estimator, w[1].estimator) {
        (Some(a), Some(b)) => b > 0.99 * a,
        _ => false,
    })
}

/// Adaptive loop: solve, estimate, mark and refine.
pub fn run_adaptive(config: &StudyConfig) -> Result<StudyResult, StudyError> {
    run_adaptive_observed(config, |_, _| {})
}

/// Adaptive loop calling `observe` with the solution and estimate of every step.
pub fn run_adaptive_observed(
    config: &StudyConfig,
    mut observe: impl FnMut(&SolutionFields, Option<&Estimate>),
) -> Result<StudyResult, StudyError> {
    config.validate()?;
    if !config.adaptive {
        return Err(StudyError::Config("adaptive study requested for a uniform configuration".into()));
    }
    let mut mesh = config.initial_mesh()?;
    let mut records = Vec::new();
    let mut fields = vec![];
    let mut stop = StopReason::StepLimit;
    for step in 0..config.max_steps {
        let start = Instant::now();
        let wrap = |source| StudyError::Step { step, source };
        let sol = config.problem(mesh.clone()).solve().map_err(wrap)?;
        fields = measured_fields(config, &sol);
        let (record, estimate) = evaluate(config, step, &sol, start).map_err(wrap)?;
        let estimate = estimate.expect("mixed formulations carry moments");
        observe(&sol, Some(&estimate));
        records.push(record);
        if sol.n_dofs >= config.max_dofs {
            stop = StopReason::Budget;
            break;
        }
        if stagnated(&records) {
            stop = StopReason::Stagnation;
            break;
        }
        let marked = dorfler_mark(&estimate.elements, config.theta);
        mesh = refine_marked(&mesh, &marked).0;
    }
    finish(config, fields, records, stop)
}

/// Runs the uniform or adaptive study selected by the configuration.
pub fn run(config: &StudyConfig) -> Result<StudyResult, StudyError> {
    run_observed(config, |_, _| {})
}

pub fn run_observed(config: &StudyConfig, observe: impl FnMut(&SolutionFields, Option<&Estimate>)) -> Result<StudyResult, StudyError> {
    if config.adaptive {
        run_adaptive_observed(config, observe)
    } else {
        run_convergence_observed(config, observe)
    }
}
