use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sdpsmooth_conic::{solve, verify, AffineRow, LmiBlock, SdpInstance, SolverSettings, Status};

fn row(coefs: &[(usize, f64)], constant: f64) -> AffineRow {
    AffineRow { coefs: coefs.to_vec(), constant }
}

fn two_by_two() -> SdpInstance {
    // min t  s.t. [[t, 1], [1, t]] >= 0
    let mut s = SdpInstance::new(1);
    s.objective = vec![(0, 1.0)];
    let mut b = LmiBlock::new(2);
    b.push(Some(0), 0, 0, 1.0);
    b.push(Some(0), 1, 1, 1.0);
    b.push(None, 0, 1, 1.0);
    s.blocks.push(b);
    s
}

/// Order-1 moment relaxation of min x s.t. x^2 - 1 = 0, x in [0, 2].
fn unit_circle_relaxation(with_product_bound: bool) -> SdpInstance {
    let mut s = SdpInstance::new(3);
    s.objective = vec![(1, 1.0)];
    let mut b = LmiBlock::new(2);
    b.push(Some(0), 0, 0, 1.0);
    b.push(Some(1), 0, 1, 1.0);
    b.push(Some(2), 1, 1, 1.0);
    s.blocks.push(b);
    s.eq.push(row(&[(0, 1.0)], -1.0));
    s.eq.push(row(&[(2, 1.0), (0, -1.0)], 0.0));
    s.lin.push(row(&[(1, 1.0)], 0.0));
    s.lin.push(row(&[(1, -1.0)], 2.0));
    if with_product_bound {
        s.lin.push(row(&[(1, 2.0), (2, -1.0)], 0.0));
    }
    s
}

#[test]
fn eigenvalue_condition_gives_one() {
    let sol = solve(&two_by_two(), &SolverSettings::default()).unwrap();
    assert_eq!(sol.status, Status::Optimal);
    assert!((sol.objective_value - 1.0).abs() < 1e-6, "{}", sol.objective_value);
}

#[test]
fn pure_box_lp() {
    let mut s = SdpInstance::new(1);
    s.objective = vec![(0, 1.0)];
    s.lin.push(row(&[(0, 1.0)], 3.0));
    s.lin.push(row(&[(0, -1.0)], 5.0));
    let sol = solve(&s, &SolverSettings::default()).unwrap();
    assert_eq!(sol.status, Status::Optimal);
    assert!((sol.objective_value + 3.0).abs() < 1e-6);
}

#[test]
fn first_order_relaxation_oracle_values() {
    // hand oracle: without the product bound the optimum is 0, with it 0.5
    let sol = solve(&unit_circle_relaxation(false), &SolverSettings::default()).unwrap();
    assert_eq!(sol.status, Status::Optimal);
    assert!(sol.objective_value.abs() < 1e-6, "{}", sol.objective_value);
    let sol = solve(&unit_circle_relaxation(true), &SolverSettings::default()).unwrap();
    assert_eq!(sol.status, Status::Optimal);
    assert!((sol.objective_value - 0.5).abs() < 1e-6, "{}", sol.objective_value);
    assert!((sol.y[1] - 0.5).abs() < 1e-6);
}

#[test]
fn verify_agrees_with_solver() {
    for s in [two_by_two(), unit_circle_relaxation(true)] {
        let set = SolverSettings::default();
        let sol = solve(&s, &set).unwrap();
        let v = verify(&s, &sol);
        assert!(v.primal_relative <= 10.0 * sol.residuals.primal.max(set.tol_feas), "{v:?}");
        assert!(v.dual_relative <= 10.0 * sol.residuals.dual.max(set.tol_feas), "{v:?}");
        assert!(v.gap_relative <= 10.0 * sol.residuals.gap.max(set.tol_gap), "{v:?}");
        assert!(v.psd_violation <= 10.0 * set.tol_psd.max(set.tol_feas));
    }
}

#[test]
fn verify_detects_corruption() {
    let s = unit_circle_relaxation(true);
    let mut sol = solve(&s, &SolverSettings::default()).unwrap();
    sol.y[2] += 1.0;
    let v = verify(&s, &sol);
    assert!((v.eq_residual - 1.0).abs() < 1e-6);
    sol.y = vec![0.0; 3];
    let v = verify(&s, &sol);
    assert!((v.eq_residual - 1.0).abs() < 1e-12);
}

#[test]
fn detects_infeasibility() {
    let mut s = SdpInstance::new(1);
    s.objective = vec![(0, 1.0)];
    s.lin.push(row(&[(0, 1.0)], -1.0));
    s.lin.push(row(&[(0, -1.0)], 0.0));
    let sol = solve(&s, &SolverSettings::default()).unwrap();
    assert_eq!(sol.status, Status::Infeasible);
}

#[test]
fn rejects_malformed() {
    let mut s = two_by_two();
    s.blocks[0].entries[0].j = 7;
    assert!(solve(&s, &SolverSettings::default()).is_err());
}

fn random_instance(rng: &mut ChaCha8Rng, nv: usize, nb: usize) -> SdpInstance {
    let mut s = SdpInstance::new(nv);
    s.objective = (0..nv).map(|v| (v, rng.random_range(-1.0..1.0))).collect();
    for _ in 0..nb {
        let dim = rng.random_range(1..5);
        let mut b = LmiBlock::new(dim);
        for i in 0..dim {
            b.push(None, i, i, 1.0);
        }
        for v in 0..nv {
            if rng.random_bool(0.6) {
                for i in 0..dim {
                    for j in i..dim {
                        b.push(Some(v), i, j, rng.random_range(-1.0..1.0));
                    }
                }
            }
        }
        s.blocks.push(b);
    }
    for v in 0..nv {
        s.lin.push(row(&[(v, 1.0)], 1.0));
        s.lin.push(row(&[(v, -1.0)], 1.0));
    }
    if nv > 1 {
        s.eq.push(row(&[(0, 1.0), (1, 1.0)], -0.1));
    }
    s
}

#[test]
fn random_instances_satisfy_weak_duality_and_verify() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let set = SolverSettings::default();
    for _ in 0..25 {
        let nv = rng.random_range(1..5);
        let nb = rng.random_range(1..4);
        let s = random_instance(&mut rng, nv, nb);
        let sol = solve(&s, &set).unwrap();
        assert_eq!(sol.status, Status::Optimal, "{}", s.to_text());
        assert!(sol.dual_value <= sol.objective_value + set.tol_gap * (1.0 + sol.objective_value.abs()));
        let v = verify(&s, &sol);
        assert!(v.primal_relative <= 10.0 * sol.residuals.primal.max(set.tol_feas), "{v:?} {:?}", sol.residuals);
        assert!(v.dual_relative <= 10.0 * sol.residuals.dual.max(set.tol_feas), "{v:?} {:?}", sol.residuals);
    }
}

#[test]
fn argmin_is_scale_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let set = SolverSettings { tol_feas: 1e-11, tol_gap: 1e-11, ..Default::default() };
    for _ in 0..10 {
        let s = random_instance(&mut rng, 3, 2);
        let mut s10 = s.clone();
        for c in &mut s10.objective {
            c.1 *= 10.0;
        }
        let a = solve(&s, &set).unwrap();
        let b = solve(&s10, &set).unwrap();
        for (ya, yb) in a.y.iter().zip(&b.y) {
            assert!((ya - yb).abs() < 1e-6, "{:?} vs {:?}", a.y, b.y);
        }
        assert!((10.0 * a.objective_value - b.objective_value).abs() < 1e-5);
    }
}

#[test]
fn deterministic() {
    let s = unit_circle_relaxation(true);
    let a = solve(&s, &SolverSettings::default()).unwrap();
    let b = solve(&s, &SolverSettings::default()).unwrap();
    assert_eq!(a.y, b.y);
    assert_eq!(a.iterations, b.iterations);
}

#[test]
fn redundant_equalities_are_tolerated() {
    let mut s = unit_circle_relaxation(true);
    s.eq.push(row(&[(2, 2.0), (0, -2.0)], 0.0));
    s.eq.push(row(&[(2, 1.0)], -1.0));
    let sol = solve(&s, &SolverSettings::default()).unwrap();
    assert_eq!(sol.status, Status::Optimal);
    assert!((sol.objective_value - 0.5).abs() < 1e-6, "{}", sol.objective_value);
    assert_eq!(sol.eq_dual.len(), 4);
}
