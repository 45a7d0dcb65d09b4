use sdpsmooth::pipeline::*;
use sdpsmooth::*;

fn cfg(name: PresetName, n: usize) -> RunConfig {
    let mut c = RunConfig::preset(name, false);
    c.nx = n;
    c.ny = n;
    c
}

#[test]
fn linear_ode_matches_analytic_solution() {
    let c = RunConfig::preset(PresetName::LinearOde, false);
    assert_eq!((c.nx, c.order, c.moments), (2000, 1, 1));
    let (u, rep) = run_sdpr(&c).unwrap();
    let e2 = std::f64::consts::E.powi(2);
    let sup = (0..u.grid.nx).fold(0.0f64, |a, i| a.max((u.at(0, i, 0) - e2 * (-2.0 * u.grid.x(i)).exp()).abs()));
    assert!(sup <= 5e-3, "sup error {sup}");
    assert!(rep.lower_bound.unwrap() <= rep.refined_objective.unwrap() + 1e-6);
    assert!(rep.roundtrip_error.unwrap() <= 1e-9);
    assert!(rep.converged(), "{:?}", rep.flags);
}

#[test]
fn elliptic_solution_is_nontrivial() {
    let (u, rep) = run_sdpr(&RunConfig::preset(PresetName::EllipticBifur, false)).unwrap();
    let max = u.values[0].iter().cloned().fold(f64::MIN, f64::max);
    assert!(max > 0.4, "max {max}");
    assert!(u.values[0].iter().all(|&v| (0.0..=1.0).contains(&v)));
    assert!(rep.discretization_residual.unwrap() <= 1e-6);
}

#[test]
fn production_consumption_switches_near_three() {
    let (u, rep) = run_sdpr(&RunConfig::preset(PresetName::ProdConsumption, false)).unwrap();
    assert!(rep.converged(), "{:?}", rep.flags);
    let g = u.grid;
    // last node with control above one half
    let last_on = (0..g.nx).filter(|&i| u.at(1, i, 0) > 0.5).max().unwrap();
    assert!((g.x(last_on) - 3.0).abs() <= 2.0 * g.dx(), "switch at {}", g.x(last_on));
}

#[test]
fn reports_are_reproducible() {
    let c = cfg(PresetName::LinearOde, 101);
    let a = run_full(&c).unwrap().report.without_timings();
    let b = run_full(&c).unwrap().report.without_timings();
    assert_eq!(a, b);
}

fn header(path: &std::path::Path) -> String {
    std::fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

#[test]
fn outputs_single_unknown() {
    let mut c = cfg(PresetName::LinearOde, 101);
    c.moments = 0;
    let out = run_full(&c).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let files = emit_outputs(&out, dir.path()).unwrap();
    let names: Vec<String> = files.iter().map(|f| f.file_name().unwrap().to_string_lossy().into_owned()).collect();
    assert_eq!(names, ["solution.csv", "moments.csv", "vstar.csv", "estimate.csv", "report.json"]);
    assert_eq!(header(&files[0]), "x,u");
    assert_eq!(header(&files[1]), "i,j,moment");
    assert_eq!(std::fs::read_to_string(&files[1]).unwrap().lines().count(), 2);
    assert_eq!(header(&files[2]), "i,j,v");
    assert_eq!(std::fs::read_to_string(&files[3]).unwrap().lines().count(), 1 + ESTIMATE_SAMPLES);
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&files[4]).unwrap()).unwrap();
    assert_eq!(json["problem"], "linear_ode");

    let back = read_solution_csv(&out.problem, &files[0]).unwrap();
    assert_eq!(back.grid, out.solution.grid);
    for (a, b) in back.values[0].iter().zip(&out.solution.values[0]) {
        assert_eq!(a, b);
    }
}

#[test]
fn outputs_two_unknowns_get_suffixes() {
    let mut c = cfg(PresetName::ProdConsumption, 30);
    c.moments = 1;
    let out = run_full(&c).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let files = emit_outputs(&out, dir.path()).unwrap();
    let names: Vec<String> = files.iter().map(|f| f.file_name().unwrap().to_string_lossy().into_owned()).collect();
    for want in ["solution.csv", "moments_u0.csv", "moments_u1.csv", "vstar_u0.csv", "estimate_u1.csv", "report.json"] {
        assert!(names.iter().any(|n| n == want), "{want} missing from {names:?}");
    }
    assert_eq!(header(&dir.path().join("solution.csv")), "x,x,u");
    // estimate samples span the original domain [0, 4]
    let last = std::fs::read_to_string(dir.path().join("estimate_u0.csv")).unwrap();
    assert!(last.lines().last().unwrap().starts_with("4,"));
}

#[test]
fn stage_errors_name_the_stage() {
    let mut c = cfg(PresetName::EllipticBifur, 5);
    c.order = 1;
    let err = run_sdpr(&c).unwrap_err();
    assert!(matches!(err, CoreError::Stage { stage: "relax", .. }), "{err}");
    assert!(err.to_string().starts_with("relax:"));
}

#[test]
fn config_file_overrides() {
    let mut c = RunConfig::preset(PresetName::LinearOde, false);
    c.apply_file("nx = 55\norder = 2\ncliques = \"dense\"\n[maxent]\ntol_grad = 1e-6\n").unwrap();
    assert_eq!((c.nx, c.order), (55, 2));
    assert_eq!(c.cliques, sdpsmooth::relaxation::CliqueStrategy::Dense);
    assert_eq!(c.maxent.tol_grad, 1e-6);
    assert!(c.apply_file("bogus = 1").is_err());
    assert!(c.apply_file("problem = \"no_such_thing\"").is_err());
}

#[test]
fn full_scale_grids() {
    let c = RunConfig::preset(PresetName::ReactionDiffusion, true);
    assert_eq!((c.nx, c.order), (100, 3));
    let c = RunConfig::preset(PresetName::EllipticBifur, true);
    assert_eq!(c.nx, 49);
}

#[test]
fn shifted_unknowns_come_back_in_original_coordinates() {
    let mut c = cfg(PresetName::DoubleIntegrator, 12);
    c.order = 2;
    c.moments = 1;
    let out = run_full(&c).unwrap();
    let u = &out.solution;
    assert!((u.at(0, 0, 0) - 0.8).abs() < 1e-6);
    assert!((u.at(1, 0, 0) + 1.0).abs() < 1e-6);
    assert!(u.values[2].iter().all(|&v| (-1.0 - 1e-9..=1.0 + 1e-9).contains(&v)));
    assert_eq!(out.report.smooth[2].shift, -1.0);
    let t = out.report.scalars["T"];
    assert!(t > 1.2 && t < 1.5, "T = {t}");
}
