use std::sync::Arc;

use sdpsmooth::discretize::{residual, transcribe};
use sdpsmooth::*;

fn ode_residual(n: usize) -> f64 {
    let p = preset(PresetName::LinearOde);
    let g = Grid::new(p.domain, n, 1).unwrap();
    let e2 = std::f64::consts::E.powi(2);
    let u = GridFunction::sample(g, &[Arc::new(move |x, _| e2 * (-2.0 * x).exp())]);
    residual(&p, &g, &u).unwrap()
}

#[test]
fn analytic_residual_matches_truncation_oracle() {
    // leading truncation terms for u = e²e^{-2x}:
    //   interior row  h²(u''''/12 + 3u'''/6) = e²h²(4/3 - 4)e^{-2x}
    //   one-sided u'  -h²u'''/3              = e²h²(8/3)e^{-2x}
    // both peak at magnitude (8/3)e²h² next to x = 0
    let e2 = std::f64::consts::E.powi(2);
    let h: f64 = 0.01;
    let oracle = e2 * h * h * (8.0 / 3.0);
    let r = ode_residual(101);
    assert!((r / oracle - 1.0).abs() < 0.05, "{r} vs {oracle}");
}

#[test]
fn second_order_convergence() {
    let r: Vec<f64> = [51, 101, 201, 401].iter().map(|&n| ode_residual(n)).collect();
    for w in r.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
    }
}

#[test]
fn pde_residual_is_second_order() {
    let p = preset(PresetName::LinearPde);
    let res = |n: usize| {
        let g = Grid::new(p.domain, n, n).unwrap();
        let u = GridFunction::sample(g, &[Arc::new(|x: f64, y: f64| (x + y).exp())]);
        residual(&p, &g, &u).unwrap()
    };
    let ratio = res(21) / res(41);
    assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
}

#[test]
fn dimensions_and_bounds() {
    let p = preset(PresetName::ReactionDiffusion);
    let g = Grid::new(p.domain, 40, 1).unwrap();
    let pop = transcribe(&p, &g).unwrap();
    assert_eq!(pop.nvars, 80);
    // two interior equations on 38 nodes, two Neumann rows per end
    assert_eq!(pop.eqs.len(), 2 * 38 + 4);
    assert!(pop.lbd.iter().zip(&pop.ubd).all(|(l, u)| *l == 0.0 && *u == 14.0));

    let p = preset(PresetName::DoubleIntegrator);
    let g = Grid::new(p.domain, 30, 1).unwrap();
    let pop = transcribe(&p, &g).unwrap();
    assert_eq!(pop.nvars, 3 * 30 + 1);
    assert_eq!(pop.objective.evaluate(&vec![0.5; pop.nvars]).unwrap(), 0.5);
}

#[test]
fn pop_text_dump_lists_every_row() {
    let p = preset(PresetName::LinearOde);
    let g = Grid::new(p.domain, 6, 1).unwrap();
    let pop = transcribe(&p, &g).unwrap();
    let text = pop.to_text();
    assert!(text.lines().count() >= 1 + pop.eqs.len() + pop.nvars);
}
