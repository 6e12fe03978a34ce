use std::collections::BTreeMap;
use std::sync::Arc;

use proptest::prelude::*;

use hzplate::assembly::quadrature::triangle_rule;
use hzplate::formulations::*;
use hzplate::mesh::{refine_marked, square_mesh};
use hzplate::polynomials::scaled_integrated_legendre;
use hzplate::solver::fit_slope;
use hzplate::study::*;
use hzplate::tensor::*;

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

fn close(a: &SymMatrix2, b: &SymMatrix2, tol: f64) -> bool {
    let scale = 1.0 + a.norm().max(b.norm());
    (a.xx - b.xx).abs() <= tol * scale && (a.xy - b.xy).abs() <= tol * scale && (a.yy - b.yy).abs() <= tol * scale
}

fn vec2() -> impl Strategy<Value = Vec2> {
    [-2.0..2.0f64, -2.0..2.0f64]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn compliance_inverts_stiffness(e in 0.1..1e4f64, nu in 0.0..0.49f64, m in [-5.0..5.0f64, -5.0..5.0, -5.0..5.0]) {
        let mat = Material::new(e, nu).unwrap();
        let s = SymMatrix2::new(m[0], m[1], m[2]);
        let back = mat.apply_stiffness(&mat.apply_compliance(&s));
        prop_assert!(close(&back, &s, 1e-12));
        // the compliance is positive definite
        prop_assert!(mat.apply_compliance(&s).ddot(&s) >= -1e-14 * s.norm().powi(2));
    }

    #[test]
    fn mandel_action_is_the_full_contraction(m in prop::array::uniform3(prop::array::uniform3(-3.0..3.0f64)), s in [-3.0..3.0f64, -3.0..3.0, -3.0..3.0]) {
        let t = Tensor4 { m };
        let s = SymMatrix2::new(s[0], s[1], s[2]);
        let full = t.to_full();
        let sm = s.to_mat();
        let mut r = [[0.0; 2]; 2];
        for (i, ri) in r.iter_mut().enumerate() {
            for (j, rij) in ri.iter_mut().enumerate() {
                *rij = (0..2).flat_map(|k| (0..2).map(move |l| (k, l))).map(|(k, l)| full[i][j][k][l] * sm[k][l]).sum();
            }
        }
        let d = t.double_contract(&s);
        prop_assert!((r[0][0] - d.xx).abs() < 1e-12 && (r[0][1] - d.xy).abs() < 1e-12 && (r[1][0] - d.xy).abs() < 1e-12 && (r[1][1] - d.yy).abs() < 1e-12);
    }

    #[test]
    fn edge_transformation_carries_reference_dyads(tau in vec2(), t in vec2(), n in vec2()) {
        prop_assume!(norm(tau) > 0.1);
        let nu = rot(tau);
        let tr = edge_transformation(t, n, tau, nu);
        prop_assert!(close(&tr.double_contract(&SymMatrix2::outer(tau)), &SymMatrix2::outer(t), 1e-12));
        prop_assert!(close(&tr.double_contract(&SymMatrix2::outer(nu)), &SymMatrix2::outer(n), 1e-12));
    }

    #[test]
    fn scaled_legendre_is_homogeneous(p in 2usize..10, x in -1.0..1.0f64, t in 0.1..1.0f64, lambda in 0.2..3.0f64) {
        let a = scaled_integrated_legendre(p, lambda * x, lambda * t);
        let b = lambda.powi(p as i32) * scaled_integrated_legendre(p, x, t);
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
    }

    #[test]
    fn quadrature_integrates_monomials(degree in 0usize..20, a in 0u32..20, b in 0u32..20) {
        prop_assume!((a + b) as usize <= degree);
        let rule = triangle_rule(degree).unwrap();
        let q: f64 = rule.points.iter().zip(&rule.weights).map(|(x, w)| w * x[0].powi(a as i32) * x[1].powi(b as i32)).sum();
        let exact = factorial(a) * factorial(b) / factorial(a + b + 2);
        prop_assert!((q - exact).abs() <= 1e-14 + 1e-13 * exact);
    }

    #[test]
    fn dorfler_set_is_minimal(c in prop::collection::vec(0.0..1.0f64, 1..60), theta in 0.05..1.0f64) {
        let marked = dorfler_mark(&c, theta);
        let total: f64 = c.iter().sum();
        let sum: f64 = marked.iter().map(|&e| c[e]).sum();
        prop_assert!(sum >= theta * total * (1.0 - 1e-12));
        let smallest = marked.iter().map(|&e| c[e]).fold(f64::INFINITY, f64::min);
        prop_assert!(marked.len() == 1 || sum - smallest < theta * total);
        // every unmarked contribution is at most the smallest marked one
        prop_assert!((0..c.len()).filter(|e| !marked.contains(e)).all(|e| c[e] <= smallest));
    }

    #[test]
    fn slopes_of_power_laws_are_recovered(c in 1e-6..1e3f64, r in 0.5..6.0f64, n in 3usize..8) {
        let pts: Vec<(f64, f64)> = (0..n).map(|k| {
            let h = 0.5f64.powi(k as i32);
            (h, c * h.powf(r))
        }).collect();
        prop_assert!((fit_slope(&pts).unwrap() - r).abs() < 1e-9);
    }

    #[test]
    fn json_output_round_trips(errs in prop::collection::vec((1e-12..1.0f64, 1e-12..1.0f64), 1..6), with_est in any::<bool>()) {
        let records: Vec<ConvergenceRecord> = errs.iter().enumerate().map(|(i, &(w, m))| ConvergenceRecord {
            step: i,
            elements: 2 << (2 * i),
            dofs: 10 << (2 * i),
            h: 0.5f64.powi(i as i32),
            errors: BTreeMap::from([(Field::W, w), (Field::M, m)]),
            estimator: with_est.then_some(m / 3.0),
            wall_time: w * 7.0,
        }).collect();
        let result = StudyResult {
            config: StudyConfig::new(Domain::Square, Formulation::Tfsrm, 3, 0.1),
            fields: vec![Field::W, Field::M],
            records,
            slopes: BTreeMap::new(),
            estimator_slope: None,
            stop: StopReason::Completed,
        };
        let text = emit_json(&result).unwrap();
        let back = parse_json(&text).unwrap();
        prop_assert_eq!(&back, &result);
        prop_assert_eq!(emit_json(&back).unwrap(), text);
        prop_assert_eq!(emit_csv(&back).unwrap(), emit_csv(&result).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn refinement_keeps_area_angles_and_conformity(mask in prop::collection::vec(any::<bool>(), 32), rounds in 1usize..4) {
        let mut mesh = square_mesh(5).unwrap();
        for r in 0..rounds {
            let marked: Vec<usize> = (0..mesh.n_elements()).filter(|&e| mask[(e + r) % mask.len()]).collect();
            let before = mesh.n_elements();
            mesh = refine_marked(&mesh, &marked).0;
            prop_assert!(marked.is_empty() || mesh.n_elements() > before);
        }
        let area: f64 = (0..mesh.n_elements()).map(|e| mesh.element_area(e)).sum();
        prop_assert!((area - 1.0).abs() < 1e-13);
        // bisection of right isosceles triangles keeps them similar
        for e in 0..mesh.n_elements() {
            prop_assert!((mesh.min_angle(e) - std::f64::consts::FRAC_PI_4).abs() < 1e-10);
        }
        for edge in 0..mesh.n_edges() {
            let expected = if mesh.is_boundary_edge(edge) { 1 } else { 2 };
            prop_assert_eq!(mesh.edge_elements(edge).len(), expected);
        }
    }

    #[test]
    fn condensation_and_linearity_hold_for_any_load(g in [-5.0..5.0f64, -5.0..5.0, -5.0..5.0], scale in 0.1..10.0f64, thin in any::<bool>()) {
        let t = if thin { 1e-4 } else { 0.1 };
        let solve = |s: f64, condense: bool| {
            let load: ScalarFn = Arc::new(move |x| s * (g[0] + g[1] * x[0] + g[2] * x[1] * x[1]));
            let mut pb = PlateProblem::clamped(Formulation::Qfsrm, 3, Material::default(), t, square_mesh(3).unwrap(), load);
            pb.condense = condense;
            let s = pb.solve().unwrap();
            let mut v = s.w.coeffs.concat();
            v.extend(s.m.unwrap().coeffs.concat());
            v
        };
        let base = solve(1.0, false);
        let peak = base.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1e-300);
        let condensed = solve(1.0, true);
        let scaled = solve(scale, false);
        for i in 0..base.len() {
            prop_assert!((base[i] - condensed[i]).abs() <= 1e-10 * peak);
            prop_assert!((scale * base[i] - scaled[i]).abs() <= 1e-10 * scale * peak);
        }
    }
}
