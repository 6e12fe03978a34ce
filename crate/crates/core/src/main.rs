use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use hzplate::formulations::{Formulation, SolutionFields};
use hzplate::study::checks::{basis_checks, basis_dump};
use hzplate::study::{emit_results, field_dump, run_observed, Domain, OutputFormat, StudyConfig, StudyError};
use hzplate::tensor::Vec2;

/// Mixed finite element studies for Reissner-Mindlin plates.
#[derive(Parser)]
#[command(name = "hzplate", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Clamped unit square with a known polynomial solution.
    Square(StudyArgs),
    /// Clamped unit disk under uniform pressure.
    Disk(StudyArgs),
    /// L-shaped plate under uniform load, adaptive unless --uniform is given.
    Lshape {
        #[command(flatten)]
        study: StudyArgs,
        /// Refine uniformly instead of adaptively.
        #[arg(long)]
        uniform: bool,
    },
    /// Runs the element checks, or dumps basis values with --points.
    BasisCheck(BasisArgs),
}

#[derive(Args)]
struct StudyArgs {
    #[arg(long, default_value = "tfsrm")]
    formulation: Formulation,
    #[arg(long, default_value_t = 3)]
    p: usize,
    /// Plate thickness.
    #[arg(long, default_value_t = 0.1)]
    t: f64,
    /// Number of meshes of a uniform study.
    #[arg(long)]
    refinements: Option<usize>,
    /// Polynomial order of curved boundary edges.
    #[arg(long, value_parser = ["1", "3"])]
    geo_order: Option<String>,
    /// Dörfler marking fraction.
    #[arg(long)]
    theta: Option<f64>,
    /// Dof budget of an adaptive study.
    #[arg(long)]
    max_dofs: Option<usize>,
    /// Refine adaptively.
    #[arg(long)]
    adaptive: bool,
    /// Eliminate element-local unknowns before the global solve.
    #[arg(long)]
    condense: bool,
    /// Result file; printed to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    format: Option<OutputFormat>,
    /// JSON file whose entries override the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Writes point values of the final solution to this CSV file.
    #[arg(long)]
    dump_fields: Option<PathBuf>,
}

#[derive(Args)]
struct BasisArgs {
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Degree of the dumped element.
    #[arg(long, default_value_t = 3)]
    p: usize,
    /// Dump a curved element.
    #[arg(long)]
    curved: bool,
    /// Reference points `x,y;x,y;...` at which the bases are dumped as JSON.
    #[arg(long)]
    points: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, p) => *b = p,
    }
}

fn read(path: &Path) -> Result<String, StudyError> {
    std::fs::read_to_string(path).map_err(|e| StudyError::Io { path: path.to_path_buf(), message: e.to_string() })
}

fn write(path: &Path, text: &str) -> Result<(), StudyError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| StudyError::Io { path: dir.to_path_buf(), message: e.to_string() })?;
    }
    std::fs::write(path, text).map_err(|e| StudyError::Io { path: path.to_path_buf(), message: e.to_string() })
}

fn config(domain: Domain, a: &StudyArgs, adaptive: bool) -> Result<StudyConfig, StudyError> {
    let mut c = StudyConfig::new(domain, a.formulation, a.p, a.t);
    if let Some(r) = a.refinements {
        c.refinements = r;
    }
    if let Some(g) = &a.geo_order {
        c.geo_order = g.parse().expect("restricted by the parser");
    }
    if let Some(th) = a.theta {
        c.theta = th;
    }
    if let Some(m) = a.max_dofs {
        c.max_dofs = m;
    }
    if let Some(f) = a.format {
        c.format = f;
    }
    c.adaptive = adaptive;
    c.condense = a.condense;
    c.out = a.out.clone();
    if let Some(path) = &a.config {
        let patch: Value = serde_json::from_str(&read(path)?).map_err(|e| StudyError::Config(format!("{}: {e}", path.display())))?;
        if !patch.is_object() {
            return Err(StudyError::Config(format!("{}: expected a JSON object", path.display())));
        }
        let mut value = serde_json::to_value(&c).map_err(|e| StudyError::Json(e.to_string()))?;
        merge(&mut value, patch);
        c = serde_json::from_value(value).map_err(|e| StudyError::Config(format!("{}: {e}", path.display())))?;
    }
    c.validate()?;
    Ok(c)
}

fn study(domain: Domain, a: &StudyArgs, adaptive: bool) -> Result<(), StudyError> {
    let c = config(domain, a, adaptive)?;
    let mut last: Option<SolutionFields> = None;
    let keep = a.dump_fields.is_some();
    let result = run_observed(&c, |sol, _| {
        if keep {
            last = Some(sol.clone());
        }
    })?;
    let text = emit_results(&result, c.format, c.out.as_deref())?;
    if c.out.is_none() {
        print!("{text}");
    }
    if let (Some(path), Some(sol)) = (&a.dump_fields, &last) {
        write(path, &field_dump(sol)?)?;
    }
    for (f, s) in &result.slopes {
        eprintln!("slope {f}: {s:.3}");
    }
    if let Some(s) = result.estimator_slope {
        eprintln!("estimator slope vs dofs: {s:.3}");
    }
    eprintln!("{} steps, stopped: {:?}", result.records.len(), result.stop);
    Ok(())
}

fn parse_points(s: &str) -> Result<Vec<Vec2>, StudyError> {
    s.split(';')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let xy: Vec<f64> = p.split(',').map(|v| v.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|e| StudyError::Config(format!("point '{p}': {e}")))?;
            match xy[..] {
                [x, y] => Ok([x, y]),
                _ => Err(StudyError::Config(format!("point '{p}' needs two coordinates"))),
            }
        })
        .collect()
}

/// Returns whether every check passed.
fn basis_check(a: &BasisArgs) -> Result<bool, StudyError> {
    if let Some(points) = &a.points {
        let dump = basis_dump(a.p, a.curved, a.seed, &parse_points(points)?)?;
        let mut text = serde_json::to_string_pretty(&dump).map_err(|e| StudyError::Json(e.to_string()))?;
        text.push('\n');
        match &a.out {
            Some(path) => write(path, &text)?,
            None => print!("{text}"),
        }
        return Ok(true);
    }
    let checks = basis_checks(a.seed)?;
    for c in &checks {
        println!("{} {}: {:.3e} (tolerance {:.0e})", if c.passed() { "PASS" } else { "FAIL" }, c.name, c.value, c.tolerance);
    }
    if let Some(path) = &a.out {
        let text = serde_json::to_string_pretty(&checks).map_err(|e| StudyError::Json(e.to_string()))?;
        write(path, &(text + "\n"))?;
    }
    Ok(checks.iter().all(|c| c.passed()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Square(a) => study(Domain::Square, a, a.adaptive),
        Command::Disk(a) => study(Domain::Disk, a, a.adaptive),
        Command::Lshape { study: a, uniform } => study(Domain::Lshape, a, !uniform),
        Command::BasisCheck(a) => match basis_check(a) {
            Ok(true) => Ok(()),
            Ok(false) => {
                eprintln!("error: some element checks failed");
                return ExitCode::from(2);
            }
            Err(e) => Err(e),
        },
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
