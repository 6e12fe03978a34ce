//! CSV and JSON serialisation of study results.
//!
//! CSV columns: `step, elements, dofs, h`, then `err_<field>, slope_<field>`
//! for every measured field and `estimator, slope_estimator` when the
//! estimator was evaluated. Slopes are fitted on the rows up to the current
//! one and left empty on the first row. Wall times appear only in JSON so
//! that the CSV of a rerun is byte-identical.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{StudyError, StudyResult, ESTIMATOR_WINDOW};
use crate::fe::PointGeometry;
use crate::formulations::{Field, SolutionFields};
use crate::solver::{fit_loglog_slope, fit_slope};
use crate::tensor::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("unknown output format '{other}', expected csv or json")),
        }
    }
}

fn number(out: &mut String, v: Option<f64>) {
    if let Some(v) = v {
        write!(out, "{v:e}").unwrap();
    }
}

pub fn emit_csv(result: &StudyResult) -> Result<String, StudyError> {
    if result.records.is_empty() {
        return Err(StudyError::Empty("study has no records".into()));
    }
    let with_estimator = result.records.iter().any(|r| r.estimator.is_some());
    if result.fields.is_empty() && !with_estimator {
        return Err(StudyError::Empty("study measured no fields and no estimator".into()));
    }
    let mut out = String::from("step,elements,dofs,h");
    for f in &result.fields {
        write!(out, ",err_{0},slope_{0}", f.name()).unwrap();
    }
    if with_estimator {
        out.push_str(",estimator,slope_estimator");
    }
    out.push('\n');
    let errors: Vec<Vec<(f64, f64)>> = result.fields.iter().map(|&f| result.errors(f)).collect();
    let estimates = result.estimates();
    for (i, r) in result.records.iter().enumerate() {
        write!(out, "{},{},{},{:e}", r.step, r.elements, r.dofs, r.h).unwrap();
        for (k, f) in result.fields.iter().enumerate() {
            out.push(',');
            number(&mut out, r.errors.get(f).copied());
            out.push(',');
            number(&mut out, fit_slope(&errors[k][..(i + 1).min(errors[k].len())]).ok());
        }
        if with_estimator {
            out.push(',');
            number(&mut out, r.estimator);
            out.push(',');
            number(&mut out, fit_loglog_slope(&estimates[..(i + 1).min(estimates.len())], ESTIMATOR_WINDOW).ok());
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn emit_json(result: &StudyResult) -> Result<String, StudyError> {
    if result.records.is_empty() {
        return Err(StudyError::Empty("study has no records".into()));
    }
    let mut s = serde_json::to_string_pretty(result).map_err(|e| StudyError::Json(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn parse_json(text: &str) -> Result<StudyResult, StudyError> {
    serde_json::from_str(text).map_err(|e| StudyError::Json(e.to_string()))
}

/// Writes the result to `path` in the given format and returns the text.
pub fn emit_results(result: &StudyResult, format: OutputFormat, path: Option<&Path>) -> Result<String, StudyError> {
    let text = match format {
        OutputFormat::Csv => emit_csv(result)?,
        OutputFormat::Json => emit_json(result)?,
    };
    if let Some(path) = path {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| StudyError::Io { path: dir.to_path_buf(), message: e.to_string() })?;
        }
        std::fs::write(path, &text).map_err(|e| StudyError::Io { path: path.to_path_buf(), message: e.to_string() })?;
    }
    Ok(text)
}

/// Point values of all fields of a solution at a few points of every
/// element: `elem, x, y` followed by the field components.
pub fn field_dump(fields: &SolutionFields) -> Result<String, StudyError> {
    const POINTS: [Vec2; 4] = [[1.0 / 3.0, 1.0 / 3.0], [0.6, 0.2], [0.2, 0.6], [0.2, 0.2]];
    let names = [("w", &["w"][..]), ("phi", &["phi_x", "phi_y"]), ("m", &["m_xx", "m_xy", "m_yy"]), ("q", &["q_x", "q_y"])];
    let present: Vec<Field> = Field::ALL.into_iter().filter(|&f| fields.has(f)).collect();
    let mut out = String::from("elem,x,y");
    for f in &present {
        for c in names.iter().find(|n| n.0 == f.name()).map(|n| n.1).unwrap_or_default() {
            write!(out, ",{c}").unwrap();
        }
    }
    out.push('\n');
    for e in 0..fields.mesh.n_elements() {
        let g = fields.mesh.geometry(e);
        let geo: Vec<PointGeometry> = POINTS.iter().map(|&xi| PointGeometry::new(&g, xi)).collect();
        let values: Vec<Vec<f64>> = present
            .iter()
            .map(|&f| fields.element_values(f, e, &geo))
            .collect::<Result<_, _>>()
            .map_err(|source| StudyError::Step { step: 0, source })?;
        for (q, pg) in geo.iter().enumerate() {
            write!(out, "{e},{:e},{:e}", pg.x[0], pg.x[1]).unwrap();
            for (f, v) in present.iter().zip(&values) {
                let nc = f.components();
                for c in 0..nc {
                    write!(out, ",{:e}", v[q * nc + c]).unwrap();
                }
            }
            out.push('\n');
        }
    }
    Ok(out)
}
