use std::process::Command;

use hzplate::formulations::{Field, Formulation};
use hzplate::solver::fit_loglog_slope;
use hzplate::study::*;

fn square(f: Formulation, t: f64, refinements: usize) -> StudyResult {
    let mut c = StudyConfig::new(Domain::Square, f, 3, t);
    c.refinements = refinements;
    run(&c).unwrap()
}

#[test]
fn errors_decrease_along_the_mesh_sequence() {
    for f in [Formulation::Prm, Formulation::Tfsrm, Formulation::Qfsrm] {
        let r = square(f, 0.1, 4);
        for field in &r.fields {
            let e: Vec<f64> = r.records.iter().map(|rec| rec.errors[field]).collect();
            assert!(e.windows(2).all(|w| w[1] < w[0]), "{f} {field:?}: {e:?}");
        }
        assert!(r.records.windows(2).all(|w| w[1].dofs > w[0].dofs));
    }
}

#[test]
fn estimator_tracks_the_moment_error() {
    for f in [Formulation::Tfsrm, Formulation::Qfsrm] {
        let r = square(f, 0.1, 5);
        // on the two-element mesh the discrete moments happen to be continuous
        for rec in &r.records[1..] {
            let eff = rec.estimator.unwrap() / rec.errors[&Field::M];
            assert!((0.2..=5.0).contains(&eff), "{f} step {}: {eff}", rec.step);
        }
        let est: Vec<(f64, f64)> = r.records[1..].iter().map(|rec| (rec.h, rec.estimator.unwrap())).collect();
        let err: Vec<(f64, f64)> = r.records[1..].iter().map(|rec| (rec.h, rec.errors[&Field::M])).collect();
        let (se, sm) = (fit_loglog_slope(&est, 3).unwrap(), fit_loglog_slope(&err, 3).unwrap());
        assert!((se - sm).abs() < 0.5, "{f}: estimator rate {se}, error rate {sm}");
    }
}

#[test]
fn reruns_are_bitwise_identical() {
    let mut c = StudyConfig::new(Domain::Disk, Formulation::Qfsrm, 3, 0.1);
    c.refinements = 2;
    let strip = |mut r: StudyResult| {
        r.records.iter_mut().for_each(|rec| rec.wall_time = 0.0);
        r
    };
    let a = strip(run(&c).unwrap());
    let b = strip(run(&c).unwrap());
    assert_eq!(a, b);
    for (x, y) in a.records.iter().zip(&b.records) {
        for (f, e) in &x.errors {
            assert_eq!(e.to_bits(), y.errors[f].to_bits());
        }
    }
}

#[test]
fn adaptive_refinement_matches_uniform_on_smooth_problems() {
    let uniform = square(Formulation::Tfsrm, 0.1, 4);
    let mut c = StudyConfig::new(Domain::Square, Formulation::Tfsrm, 3, 0.1);
    c.adaptive = true;
    c.max_dofs = uniform.records.last().unwrap().dofs;
    let adaptive = run(&c).unwrap();
    let su = fit_loglog_slope(&uniform.records[1..].iter().map(|r| (r.dofs as f64, r.estimator.unwrap())).collect::<Vec<_>>(), 3).unwrap();
    let sa = adaptive.estimator_slope.unwrap();
    assert!(sa <= su + 0.3, "adaptive {sa} vs uniform {su}");
    // at equal cost the adaptive estimate is not worse by more than a small factor
    let last_a = adaptive.records.last().unwrap();
    let last_u = uniform.records.last().unwrap();
    assert!(last_a.estimator.unwrap() <= 2.0 * last_u.estimator.unwrap() * (last_u.dofs as f64 / last_a.dofs as f64).powf(1.5));
}

#[test]
fn adaptive_lshape_stops_on_the_budget() {
    let mut c = StudyConfig::new(Domain::Lshape, Formulation::Qfsrm, 3, 0.1);
    c.adaptive = true;
    c.max_dofs = 8000;
    let r = run(&c).unwrap();
    assert_eq!(r.stop, StopReason::Budget);
    assert!(r.fields.is_empty());
    let n = r.records.len();
    assert!(r.records[n - 2].dofs < 8000 && r.records[n - 1].dofs >= 8000);
    assert!(r.records.iter().all(|rec| rec.estimator.unwrap() > 0.0));
}

fn cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_hzplate")).args(args).output().unwrap()
}

#[test]
fn cli_prints_csv_and_honours_config_files() {
    let out = cli(&["square", "--formulation", "qfsrm", "--refinements", "2"]);
    assert!(out.status.success());
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.starts_with("step,elements,dofs,h,err_w,slope_w"));
    assert_eq!(csv.lines().count(), 3);

    let dir = std::env::temp_dir().join(format!("hzplate-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("cfg.json");
    std::fs::write(&cfg, r#"{"refinements": 3, "format": "json", "material": {"nu": 0.25}}"#).unwrap();
    let json = dir.join("out/result.json");
    let fields = dir.join("fields.csv");
    let out = cli(&["square", "--config", cfg.to_str().unwrap(), "--out", json.to_str().unwrap(), "--dump-fields", fields.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let r = parse_json(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(r.records.len(), 3);
    assert_eq!(r.config.material.nu, 0.25);
    let dump = std::fs::read_to_string(&fields).unwrap();
    assert!(dump.starts_with("elem,x,y,w,phi_x,phi_y,m_xx,m_xy,m_yy,q_x,q_y"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn cli_reports_failures() {
    let out = cli(&["square", "--p", "2"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("p >= 3"));
    let out = cli(&["disk", "--config", "/nonexistent/cfg.json"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/cfg.json"));
    let out = cli(&["lshape", "--uniform", "--formulation", "prm", "--refinements", "0"]);
    assert!(!out.status.success());
}

#[test]
fn cli_basis_check_dumps_json() {
    let out = cli(&["basis-check", "--points", "0.2,0.3;0.5,0.25", "--p", "4", "--curved"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["bases"][0]["space"], "HZ^4");
    assert_eq!(v["bases"][0]["values"].as_array().unwrap().len(), 2);
    assert_eq!(v["bases"][0]["values"][0].as_array().unwrap().len(), 45);
    assert!(!cli(&["basis-check", "--points", "0.9,0.9"]).status.success());
}
