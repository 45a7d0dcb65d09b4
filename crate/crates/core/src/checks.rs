//! Small self-checks: random box-constrained POPs with a brute-force
//! oracle, and an invariant suite on tiny instances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sdpsmooth_poly::{Monomial, Polynomial};

use crate::discretize::PopInstance;
use crate::entropy::{dual_eval, multi_indices, MomentVector, Quadrature};
use crate::refine::{refine, RefineSettings};
use crate::relaxation::{build_relaxation_with, csp_cliques, RelaxOptions};
use crate::CoreError;

/// Random POP in `nvars ≤ 3` variables: objective of degree `degree`,
/// random box, and with `ball` an extra `r² − |x − c|² ≥ 0` with `c`
/// inside the box.
pub fn random_box_pop(rng: &mut impl Rng, nvars: usize, degree: u32, ball: bool) -> PopInstance {
    let lbd: Vec<f64> = (0..nvars).map(|_| rng.random_range(-2.0..0.0)).collect();
    let ubd: Vec<f64> = (0..nvars).map(|_| rng.random_range(0.5..2.0)).collect();
    let mut f = Polynomial::zero(nvars);
    for m in monomials(nvars, degree) {
        f.add_term(m, rng.random_range(-1.0..1.0));
    }
    // make sure the top degree is present
    f.add_term(Monomial::from_pairs([(0, degree)]), 1.0);
    let mut pop = PopInstance::new(nvars, f, lbd, ubd);
    if ball {
        let c: Vec<f64> = (0..nvars).map(|s| rng.random_range(pop.lbd[s]..pop.ubd[s])).collect();
        let r: f64 = rng.random_range(0.3..1.0);
        let mut g = Polynomial::constant(nvars, r * r);
        for (s, cs) in c.iter().enumerate() {
            let d = Polynomial::linear(nvars, &[(s, 1.0)], -cs).expect("variable in range");
            g = g.sub(&d.pow(2)).expect("same variable count");
        }
        pop.ineqs.push(g);
    }
    pop
}

/// All monomials of degree `≤ d` in `n` variables.
fn monomials(n: usize, d: u32) -> Vec<Monomial> {
    let mut out = vec![Monomial::one()];
    for v in 0..n {
        let mut next = Vec::new();
        for m in &out {
            for e in 0..=(d - m.degree()) {
                next.push(m.mul(&Monomial::from_pairs([(v, e)])));
            }
        }
        out = next;
    }
    out
}

/// Upper bound on the POP minimum: best feasible point of a tensor grid
/// with `per_axis` points, then polished by local refinement when that
/// stays feasible.
pub fn brute_force_min(pop: &PopInstance, per_axis: usize) -> Result<(f64, Vec<f64>), CoreError> {
    let n = pop.nvars;
    let axes: Vec<Vec<f64>> = (0..n)
        .map(|s| (0..per_axis).map(|i| pop.lbd[s] + (pop.ubd[s] - pop.lbd[s]) * i as f64 / (per_axis - 1) as f64).collect())
        .collect();
    // powers per axis and node
    let deg = pop.objective.degree().max(2) as usize;
    let pw: Vec<Vec<Vec<f64>>> = axes.iter().map(|a| a.iter().map(|&x| (0..=deg).map(|e| x.powi(e as i32)).collect()).collect()).collect();
    let terms: Vec<(Vec<(usize, usize)>, f64)> = pop
        .objective
        .terms()
        .map(|(m, c)| (m.factors().iter().map(|&(v, e)| (v, e as usize)).collect(), c))
        .collect();
    let total = per_axis.pow(n as u32);
    let mut best = (f64::INFINITY, vec![0.0; n]);
    let mut idx = vec![0usize; n];
    let mut x = vec![0.0; n];
    for _ in 0..total {
        let val: f64 = terms.iter().map(|(f, c)| f.iter().fold(*c, |a, &(v, e)| a * pw[v][idx[v]][e])).sum();
        if val < best.0 {
            for s in 0..n {
                x[s] = axes[s][idx[s]];
            }
            if pop.max_ineq_violation(&x) == 0.0 {
                best = (val, x.clone());
            }
        }
        for s in 0..n {
            idx[s] += 1;
            if idx[s] < per_axis {
                break;
            }
            idx[s] = 0;
        }
    }
    if !best.0.is_finite() {
        return Err(CoreError::Numeric("no feasible grid point".into()));
    }
    let r = refine(pop, &best.1, &RefineSettings::default())?;
    let inside = r.x.iter().enumerate().all(|(s, &v)| v >= pop.lbd[s] && v <= pop.ubd[s]);
    if inside && pop.max_ineq_violation(&r.x) == 0.0 && r.objective < best.0 {
        best = (r.objective, r.x);
    }
    Ok(best)
}

/// Lower bound from the order-`w` relaxation.
pub fn relaxation_bound(pop: &PopInstance, w: usize) -> Result<f64, CoreError> {
    let cs = csp_cliques(pop)?;
    let r = build_relaxation_with(pop, &cs, w, &RelaxOptions::default())?;
    let sol = sdpsmooth_conic::solve(&r.sdp, &Default::default())?;
    if !sol.status.is_usable() {
        return Err(CoreError::Numeric(format!("relaxation solve ended with status {}", sol.status)));
    }
    Ok(r.lower_bound(&sol))
}

/// Random positive density on the unit box: exp of a random
/// polynomial of degree `order`, returned with its quadrature moments.
pub fn random_density_moments(rng: &mut impl Rng, order: usize, dims: usize, quad: &Quadrature) -> (Vec<f64>, MomentVector) {
    let index = multi_indices(order, dims);
    let v: Vec<f64> = index.iter().map(|_| rng.random_range(-1.5..1.5)).collect();
    let mut m = vec![0.0; index.len()];
    for (x, y, w) in quad.nodes(dims) {
        let s: f64 = v.iter().zip(&index).map(|(c, &(i, j))| c * x.powi(i as i32) * y.powi(j as i32)).sum();
        let d = w * s.exp();
        for (mk, &(i, j)) in m.iter_mut().zip(&index) {
            *mk += d * x.powi(i as i32) * y.powi(j as i32);
        }
    }
    let domain = if dims == 2 { crate::Domain::rectangle(0.0, 1.0, 0.0, 1.0) } else { crate::Domain::interval(0.0, 1.0) };
    (v, MomentVector::new(order, domain, m).expect("index matches values"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn result(name: &'static str, r: Result<(bool, String), CoreError>) -> CheckResult {
    match r {
        Ok((passed, detail)) => CheckResult { name, passed, detail },
        Err(e) => CheckResult { name, passed: false, detail: e.to_string() },
    }
}

/// Invariant checks on tiny instances, for `sdpsmooth check`.
pub fn self_check() -> Vec<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut out = Vec::new();

    out.push(result("ring laws", (|| {
        let p = Polynomial::parse("1 + x0 x1 - 2 x1^3", 2)?;
        let q = Polynomial::parse("x0^2 - 3 x1 + 0.5", 2)?;
        let mut worst: f64 = 0.0;
        for _ in 0..50 {
            let x = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
            let (a, b) = (p.evaluate(&x)?, q.evaluate(&x)?);
            worst = worst.max((p.mul(&q)?.evaluate(&x)? - a * b).abs() / (1.0 + (a * b).abs()));
            worst = worst.max((p.add(&q)?.evaluate(&x)? - a - b).abs() / (1.0 + (a + b).abs()));
        }
        Ok((worst <= 1e-12, format!("max relative error {worst:.1e}")))
    })()));

    out.push(result("stencils", (|| {
        let sq = crate::discretize::fd_second(0, 1, 2, 0.5, 3)?.evaluate(&[0.0, 0.25, 1.0])?;
        let lin = crate::discretize::fd_first_central(0, 1, 0.5, 2)?.evaluate(&[-0.5, 0.5])?;
        let err = (sq - 2.0).abs().max((lin - 1.0).abs());
        Ok((err <= 1e-12, format!("error {err:.1e}")))
    })()));

    out.push(result("relaxation bound", (|| {
        let mut worst = f64::NEG_INFINITY;
        for k in 0..3 {
            let pop = random_box_pop(&mut rng, 1 + k % 2, 4, k == 2);
            let lb = relaxation_bound(&pop, pop.min_order())?;
            let (ub, _) = brute_force_min(&pop, 200)?;
            worst = worst.max(lb - ub);
        }
        Ok((worst <= 1e-6, format!("max(lb − grid min) {worst:.2e}")))
    })()));

    out.push(result("entropy gradient", (|| {
        let quad = Quadrature { points_per_dim: 401 };
        let (_, m) = random_density_moments(&mut rng, 3, 1, &quad);
        let v = [0.3, -0.2, 0.4, -0.1];
        let d = dual_eval(&m, &v, &quad)?;
        let mut worst: f64 = 0.0;
        for k in 0..v.len() {
            let h = 1e-6;
            let (mut a, mut b) = (v, v);
            a[k] += h;
            b[k] -= h;
            let fd = (dual_eval(&m, &a, &quad)?.value - dual_eval(&m, &b, &quad)?.value) / (2.0 * h);
            worst = worst.max((fd - d.gradient[k]).abs() / (1.0 + d.gradient[k].abs()));
        }
        Ok((worst <= 1e-5, format!("max relative error {worst:.1e}")))
    })()));

    out.push(result("pipeline sandwich", (|| {
        let mut cfg = crate::pipeline::RunConfig::preset(crate::PresetName::LinearOde, false);
        cfg.nx = 21;
        let (_, rep) = crate::pipeline::run_sdpr(&cfg)?;
        let (lb, obj) = (rep.lower_bound.unwrap_or(f64::NAN), rep.refined_objective.unwrap_or(f64::NAN));
        let rt = rep.roundtrip_error.unwrap_or(f64::NAN);
        Ok((lb <= obj + 1e-6 && rt <= 1e-9, format!("bound {lb:.6} ≤ objective {obj:.6}, round trip {rt:.1e}")))
    })()));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomial_counts() {
        assert_eq!(monomials(1, 4).len(), 5);
        assert_eq!(monomials(2, 4).len(), 15);
        assert_eq!(monomials(3, 4).len(), 35);
    }

    #[test]
    fn brute_force_finds_known_minimum() {
        // (x − 0.3)² + 1 on [−1, 1]
        let f = Polynomial::parse("x0^2 - 0.6 x0 + 1.09", 1).unwrap();
        let pop = PopInstance::new(1, f, vec![-1.0], vec![1.0]);
        let (v, x) = brute_force_min(&pop, 11).unwrap();
        assert!((v - 1.0).abs() < 1e-10 && (x[0] - 0.3).abs() < 1e-6);
    }

    #[test]
    fn self_check_passes() {
        for c in self_check() {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
