use proptest::prelude::*;
use sdpsmooth::discretize::residual;
use sdpsmooth::*;

/// Symbol vector for one unknown: value and derivatives at (x, y).
fn point(syms: &SymbolTable, derivs: &[[f64; 5]], x: f64, y: f64, scalars: &[f64]) -> Vec<f64> {
    let mut s = vec![0.0; syms.len()];
    for (k, d) in derivs.iter().enumerate() {
        for (dv, v) in [Deriv::Value, Deriv::X, Deriv::Xx, Deriv::Y, Deriv::Yy].into_iter().zip(d) {
            s[syms.u(k, dv)] = *v;
        }
    }
    s[syms.x()] = x;
    s[syms.y()] = y;
    for (j, v) in scalars.iter().enumerate() {
        s[syms.scalar(j)] = *v;
    }
    s
}

fn eq_residual(e: &Equation, s: &[f64], x: f64, y: f64) -> f64 {
    e.lhs.evaluate(s).unwrap() - e.rhs.at(x, y)
}

#[test]
fn analytic_solutions_satisfy_presets() {
    let e2 = std::f64::consts::E.powi(2);
    let ode = preset(PresetName::LinearOde);
    let syms = ode.symbols();
    for i in 0..=20 {
        let x = i as f64 / 20.0;
        let u = e2 * (-2.0 * x).exp();
        let s = point(&syms, &[[u, -2.0 * u, 4.0 * u, 0.0, 0.0]], x, 0.0, &[]);
        assert!(eq_residual(&ode.interior[0], &s, x, 0.0).abs() <= 1e-10);
    }
    for (b, x) in ode.boundary.iter().zip([0.0f64, 1.0]) {
        let u = e2 * (-2.0 * x).exp();
        let s = point(&syms, &[[u, -2.0 * u, 4.0 * u, 0.0, 0.0]], x, 0.0, &[]);
        assert!(eq_residual(&b.eq, &s, x, 0.0).abs() <= 1e-10);
    }

    let pde = preset(PresetName::LinearPde);
    let syms = pde.symbols();
    for i in 0..=10 {
        for j in 0..=10 {
            let (x, y) = (i as f64 / 10.0, j as f64 / 10.0);
            let u = (x + y).exp();
            let s = point(&syms, &[[u; 5]], x, y, &[]);
            assert!(eq_residual(&pde.interior[0], &s, x, y).abs() <= 1e-10);
            for b in &pde.boundary {
                assert!(eq_residual(&b.eq, &s, x, y).abs() <= 1e-10);
            }
        }
    }
}

#[test]
fn shift_examples() {
    let p = preset(PresetName::LinearOde);
    let (q, shift) = shift_to_nonnegative(&p);
    assert_eq!(shift, vec![0.0]);
    assert_eq!(q.interior[0].lhs, p.interior[0].lhs);
}

fn transformed_agrees(p: &DiffProblem, derivs: &[[f64; 5]], x: f64, y: f64, scalars: &[f64]) {
    let (q, shift) = shift_to_nonnegative(p);
    let (q, rep) = scale_domain_to_unit(&q);
    let syms = p.symbols();
    let s = point(&syms, derivs, x, y, scalars);
    let (sx, sy) = rep.to_unit(x, y);
    let moved: Vec<[f64; 5]> = derivs
        .iter()
        .zip(&shift)
        .map(|(d, c)| {
            [
                d[0] - c,
                d[1] * rep.x_len,
                d[2] * rep.x_len * rep.x_len,
                d[3] * rep.y_len,
                d[4] * rep.y_len * rep.y_len,
            ]
        })
        .collect();
    let t = point(&syms, &moved, sx, sy, scalars);
    let pairs = p.interior.iter().zip(&q.interior).chain(p.boundary.iter().map(|b| &b.eq).zip(q.boundary.iter().map(|b| &b.eq)));
    for (a, b) in pairs {
        let (va, vb) = (eq_residual(a, &s, x, y), eq_residual(b, &t, sx, sy));
        assert!((va - vb).abs() <= 1e-12 * (1.0 + va.abs()), "{va} vs {vb}");
    }
    for (a, b) in p.dynamics.iter().zip(&q.dynamics) {
        let (va, vb) = (a.rhs.evaluate(&s).unwrap() * rep.x_len, b.rhs.evaluate(&t).unwrap());
        assert!((va - vb).abs() <= 1e-12 * (1.0 + va.abs()), "{va} vs {vb}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn shift_and_scale_round_trip(
        which in 0usize..6,
        vals in proptest::collection::vec(-3.0f64..3.0, 15),
        sx in 0.0f64..1.0,
        sy in 0.0f64..1.0,
        t in 0.5f64..3.0,
    ) {
        let name = PresetName::ALL[which];
        let mut p = preset(name);
        // widen bounds so that the shift is exercised on every preset
        for u in &mut p.unknowns {
            u.lbd -= 1.5;
        }
        let d = p.domain;
        let x = d.x_min + sx * (d.x_max - d.x_min);
        let y = if d.dims == 2 { d.y_min + sy * (d.y_max - d.y_min) } else { 0.0 };
        let derivs: Vec<[f64; 5]> = vals.chunks(5).take(p.unknowns.len()).map(|c| [c[0], c[1], c[2], c[3], c[4]]).collect();
        let scalars = vec![t; p.scalars.len()];
        transformed_agrees(&p, &derivs, x, y, &scalars);
    }
}

#[test]
fn grid_function_sampling_and_residual() {
    let e2 = std::f64::consts::E.powi(2);
    let p = preset(PresetName::LinearOde);
    let g = Grid::new(p.domain, 11, 1).unwrap();
    let zero = GridFunction::sample(g, &[std::sync::Arc::new(|_, _| 0.0)]);
    let r = residual(&p, &g, &zero).unwrap();
    assert!((r - 2.0 * e2).abs() < 1e-12);
    let wrong = Grid::new(p.domain, 12, 1).unwrap();
    assert!(residual(&p, &wrong, &zero).is_err());
}
