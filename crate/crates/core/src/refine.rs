//! Local polishing of a POP point.
//!
//! Augmented Lagrangian over the equality and inequality constraints, with
//! projected Newton steps on the box for the inner problems. Equality rows are
//! scaled to unit max coefficient, and all violations are reported on that
//! scale.

use std::collections::BTreeSet;

use sdpsmooth_conic::linsolve::{SymFactor, SymPattern};
use sdpsmooth_poly::Polynomial;

use crate::discretize::PopInstance;
use crate::CoreError;

#[derive(Debug, Clone, PartialEq)]
pub struct RefineSettings {
    /// Max scaled equality violation for convergence.
    pub tol_eq: f64,
    /// Relative step length below which an inner solve stops.
    pub tol_step: f64,
    /// Projected-gradient tolerance relative to `1 + |∇f|∞`.
    pub tol_opt: f64,
    /// Newton steps over all outer iterations.
    pub max_iter: usize,
}

impl Default for RefineSettings {
    fn default() -> Self {
        Self { tol_eq: 1e-9, tol_step: 1e-12, tol_opt: 1e-6, max_iter: 200 }
    }
}

#[derive(Debug, Clone)]
pub struct RefineResult {
    pub x: Vec<f64>,
    pub objective: f64,
    /// Max violation of the unit-scaled equality rows.
    pub max_eq_violation: f64,
    pub max_ineq_violation: f64,
    pub iterations: usize,
    pub converged: bool,
    pub penalty: f64,
    pub log: Vec<String>,
}

/// Polynomial in a form that is cheap to differentiate.
#[derive(Debug, Clone)]
struct Compiled {
    terms: Vec<(f64, Vec<(usize, u32)>)>,
    vars: Vec<usize>,
}

impl Compiled {
    fn new(p: &Polynomial, scale: f64) -> Self {
        let terms: Vec<(f64, Vec<(usize, u32)>)> =
            p.terms().map(|(m, c)| (c * scale, m.factors().to_vec())).filter(|(c, _)| *c != 0.0).collect();
        let vars: BTreeSet<usize> = terms.iter().flat_map(|(_, f)| f.iter().map(|&(v, _)| v)).collect();
        Self { terms, vars: vars.into_iter().collect() }
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|(c, f)| c * f.iter().map(|&(v, e)| x[v].powi(e as i32)).product::<f64>()).sum()
    }

    /// `value(a) - value(b)` accumulated term by term.
    fn difference(&self, a: &[f64], b: &[f64]) -> f64 {
        let mono = |f: &[(usize, u32)], x: &[f64]| f.iter().map(|&(v, e)| x[v].powi(e as i32)).product::<f64>();
        self.terms.iter().map(|(c, f)| c * (mono(f, a) - mono(f, b))).sum()
    }

    /// Product of all factors except those at positions `skip`, with the
    /// skipped ones differentiated `d` times.
    fn partial(f: &[(usize, u32)], x: &[f64], skip: &[(usize, u32)]) -> f64 {
        let mut out = 1.0;
        for (k, &(v, e)) in f.iter().enumerate() {
            let d = skip.iter().filter(|s| s.0 == k).map(|s| s.1).sum::<u32>();
            if d > e {
                return 0.0;
            }
            let mut coef = 1.0;
            for j in 0..d {
                coef *= f64::from(e - j);
            }
            out *= coef * x[v].powi((e - d) as i32);
        }
        out
    }

    fn gradient(&self, x: &[f64]) -> Vec<(usize, f64)> {
        let mut g: Vec<(usize, f64)> = self.vars.iter().map(|&v| (v, 0.0)).collect();
        for (c, f) in &self.terms {
            for (k, &(v, _)) in f.iter().enumerate() {
                let pos = self.vars.binary_search(&v).expect("support var");
                g[pos].1 += c * Self::partial(f, x, &[(k, 1)]);
            }
        }
        g
    }

    /// Calls `add(r, c, v)` for each upper-triangle Hessian entry `r <= c`.
    fn hessian(&self, x: &[f64], mut add: impl FnMut(usize, usize, f64)) {
        for (c, f) in &self.terms {
            for (k, &(v, e)) in f.iter().enumerate() {
                if e >= 2 {
                    add(v, v, c * Self::partial(f, x, &[(k, 2)]));
                }
                for (l, &(w, _)) in f.iter().enumerate().skip(k + 1) {
                    let h = c * Self::partial(f, x, &[(k, 1), (l, 1)]);
                    if v <= w {
                        add(v, w, h);
                    } else {
                        add(w, v, h);
                    }
                }
            }
        }
    }
}

struct Model {
    n: usize,
    f: Compiled,
    eqs: Vec<Compiled>,
    ineqs: Vec<Compiled>,
    lbd: Vec<f64>,
    ubd: Vec<f64>,
}

fn unit_scale(p: &Polynomial) -> f64 {
    let m = p.max_abs_coeff();
    if m > 0.0 {
        1.0 / m
    } else {
        1.0
    }
}

impl Model {
    fn new(pop: &PopInstance) -> Self {
        Self {
            n: pop.nvars,
            f: Compiled::new(&pop.objective, 1.0),
            eqs: pop.eqs.iter().map(|h| Compiled::new(h, unit_scale(h))).collect(),
            ineqs: pop.ineqs.iter().map(|g| Compiled::new(g, unit_scale(g))).collect(),
            lbd: pop.lbd.clone(),
            ubd: pop.ubd.clone(),
        }
    }

    fn project(&self, x: &mut [f64]) {
        for ((xi, &lo), &hi) in x.iter_mut().zip(&self.lbd).zip(&self.ubd) {
            *xi = xi.clamp(lo, hi);
        }
    }

    fn eq_values(&self, x: &[f64]) -> Vec<f64> {
        self.eqs.iter().map(|h| h.value(x)).collect()
    }

    fn ineq_values(&self, x: &[f64]) -> Vec<f64> {
        self.ineqs.iter().map(|g| g.value(x)).collect()
    }

    /// Sparsity of the merit Hessian.
    fn pattern(&self) -> SymPattern {
        let mut pairs = Vec::new();
        for p in std::iter::once(&self.f).chain(&self.eqs).chain(&self.ineqs) {
            for (i, &a) in p.vars.iter().enumerate() {
                for &b in &p.vars[i..] {
                    pairs.push((a, b));
                }
            }
        }
        SymPattern::new(self.n, pairs)
    }
}

/// State of the augmented Lagrangian for fixed multipliers and penalty.
struct Merit<'a> {
    model: &'a Model,
    lam: &'a [f64],
    mu: &'a [f64],
    rho: f64,
}

impl Merit<'_> {
    fn value(&self, x: &[f64]) -> f64 {
        let mut v = self.model.f.value(x);
        for (h, &l) in self.model.eqs.iter().zip(self.lam) {
            let c = h.value(x);
            v += l * c + 0.5 * self.rho * c * c;
        }
        for (g, &m) in self.model.ineqs.iter().zip(self.mu) {
            let t = (m - self.rho * g.value(x)).max(0.0);
            v += (t * t - m * m) / (2.0 * self.rho);
        }
        v
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.model.n];
        for (v, a) in self.model.f.gradient(x) {
            g[v] += a;
        }
        for (h, &l) in self.model.eqs.iter().zip(self.lam) {
            let w = l + self.rho * h.value(x);
            for (v, a) in h.gradient(x) {
                g[v] += w * a;
            }
        }
        for (q, &m) in self.model.ineqs.iter().zip(self.mu) {
            let t = (m - self.rho * q.value(x)).max(0.0);
            if t > 0.0 {
                for (v, a) in q.gradient(x) {
                    g[v] -= t * a;
                }
            }
        }
        g
    }

    fn hessian(&self, x: &[f64], pat: &SymPattern) -> Vec<f64> {
        let mut vals = vec![0.0; pat.nnz()];
        let mut put = |r: usize, c: usize, v: f64| {
            if let Some(k) = pat.index(r, c) {
                vals[k] += v;
            }
        };
        self.model.f.hessian(x, &mut put);
        let outer = |grad: &[(usize, f64)], w: f64, put: &mut dyn FnMut(usize, usize, f64)| {
            for (i, &(a, ga)) in grad.iter().enumerate() {
                for &(b, gb) in &grad[i..] {
                    put(a, b, w * ga * gb);
                }
            }
        };
        for (h, &l) in self.model.eqs.iter().zip(self.lam) {
            let w = l + self.rho * h.value(x);
            h.hessian(x, |r, c, v| put(r, c, w * v));
            outer(&h.gradient(x), self.rho, &mut put);
        }
        for (q, &m) in self.model.ineqs.iter().zip(self.mu) {
            let t = (m - self.rho * q.value(x)).max(0.0);
            if t > 0.0 {
                q.hessian(x, |r, c, v| put(r, c, -t * v));
                outer(&q.gradient(x), self.rho, &mut put);
            }
        }
        vals
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

/// `|x − P(x − g)|∞`, the projected-gradient size.
fn projected_gradient(model: &Model, x: &[f64], g: &[f64]) -> f64 {
    (0..x.len()).map(|i| (x[i] - (x[i] - g[i]).clamp(model.lbd[i], model.ubd[i])).abs()).fold(0.0, f64::max)
}

/// Least-squares equality multipliers on the variables off their bounds.
fn ls_multipliers(model: &Model, x: &[f64]) -> Vec<f64> {
    let m = model.eqs.len();
    if m == 0 {
        return Vec::new();
    }
    let gf = {
        let mut g = vec![0.0; model.n];
        for (v, a) in model.f.gradient(x) {
            g[v] += a;
        }
        g
    };
    let free = |v: usize| {
        let span = 1e-10 * (1.0 + (model.ubd[v] - model.lbd[v]).abs().min(1e10));
        !((x[v] <= model.lbd[v] + span && gf[v] > 0.0) || (x[v] >= model.ubd[v] - span && gf[v] < 0.0))
    };
    // min |g + Jᵀλ| over the free variables via the augmented system
    // [I Jᵀ; J 0] (r, λ) = (−g, 0), which avoids squaring the condition of J
    let n = model.n;
    let rows: Vec<Vec<(usize, f64)>> =
        model.eqs.iter().map(|h| h.gradient(x).into_iter().filter(|&(v, _)| free(v)).collect()).collect();
    let pat = SymPattern::new(n + m, rows.iter().enumerate().flat_map(|(i, r)| r.iter().map(move |&(v, _)| (v, n + i))));
    let mut vals = vec![0.0; pat.nnz()];
    for v in 0..n {
        vals[pat.diag_index(v)] = 1.0;
    }
    for (i, r) in rows.iter().enumerate() {
        for &(v, a) in r {
            vals[pat.index(v, n + i).expect("pattern entry")] += a;
        }
    }
    let mut rhs = vec![0.0; n + m];
    for v in (0..n).filter(|&v| free(v)) {
        rhs[v] = -gf[v];
    }
    let signs: Vec<i8> = (0..n + m).map(|k| if k < n { 1 } else { -1 }).collect();
    let Ok(mut factor) = SymFactor::analyze(pat.clone()) else { return vec![0.0; m] };
    let tol = 1e-14 * (1.0 + inf_norm(&rhs)) * ((n + m) as f64).sqrt();
    let mut delta = 1e-12;
    for _ in 0..4 {
        let mut fv = vals.clone();
        for i in 0..m {
            fv[pat.diag_index(n + i)] -= delta;
        }
        if factor.factor_ldlt(&fv, &signs, 1e-8, 1e-14).is_ok() {
            if let Ok((sol, _)) = factor.solve_gmres(&vals, &rhs, 50, 4, tol) {
                return sol[n..].to_vec();
            }
        }
        delta *= 100.0;
    }
    vec![0.0; m]
}

struct Inner {
    steps: usize,
    pgrad: f64,
}

/// Projected Newton on the merit function over the box.
#[allow(clippy::too_many_arguments)]
fn minimize(
    merit: &Merit,
    x: &mut Vec<f64>,
    factor: &mut SymFactor,
    pat: &SymPattern,
    omega: f64,
    tol_step: f64,
    budget: usize,
) -> Result<Inner, CoreError> {
    let model = merit.model;
    let n = model.n;
    let mut phi = merit.value(x);
    if !phi.is_finite() {
        return Err(CoreError::Numeric("non-finite merit value".into()));
    }
    let mut steps = 0;
    loop {
        let g = merit.gradient(x);
        if g.iter().any(|v| !v.is_finite()) {
            return Err(CoreError::Numeric("non-finite gradient".into()));
        }
        let pgrad = projected_gradient(model, x, &g);
        if pgrad <= omega || steps >= budget {
            return Ok(Inner { steps, pgrad });
        }
        let eps = pgrad.min(1e-6);
        let active: Vec<bool> = (0..n)
            .map(|i| (x[i] <= model.lbd[i] + eps && g[i] > 0.0) || (x[i] >= model.ubd[i] - eps && g[i] < 0.0))
            .collect();

        let mut h = merit.hessian(x, pat);
        // decouple the active variables
        for c in 0..n {
            for r in 0..=c {
                if let Some(k) = pat.index(r, c) {
                    if active[r] || active[c] {
                        h[k] = if r == c { 1.0 } else { 0.0 };
                    }
                }
            }
        }
        let hmax = (0..n).map(|i| h[pat.diag_index(i)].abs()).fold(1.0, f64::max);
        let rhs: Vec<f64> = (0..n).map(|i| if active[i] { 0.0 } else { -g[i] }).collect();
        let mut tau = 0.0;
        let mut dir = None;
        for _ in 0..24 {
            let mut hv = h.clone();
            if tau > 0.0 {
                for i in 0..n {
                    if !active[i] {
                        hv[pat.diag_index(i)] += tau;
                    }
                }
            }
            if factor.factor_llt(&hv).is_ok() {
                if let Ok(d) = factor.solve_refined(&hv, &rhs, 2) {
                    let slope: f64 = d.iter().zip(&g).map(|(a, b)| a * b).sum();
                    if slope < 0.0 && d.iter().all(|v| v.is_finite()) {
                        dir = Some(d);
                        break;
                    }
                }
            }
            tau = if tau == 0.0 { 1e-10 * hmax } else { tau * 10.0 };
        }
        let mut d = dir.unwrap_or_else(|| rhs.clone());
        for i in 0..n {
            if active[i] {
                d[i] = -g[i];
            }
        }

        let mut alpha = 1.0;
        let mut accepted = None;
        while alpha > 1e-14 {
            let mut xt: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + alpha * b).collect();
            model.project(&mut xt);
            let decrease: f64 = g.iter().zip(xt.iter().zip(x.iter())).map(|(gi, (a, b))| gi * (a - b)).sum();
            let pt = merit.value(&xt);
            if pt.is_finite() && pt <= phi + 1e-4 * decrease {
                accepted = Some((xt, pt));
                break;
            }
            alpha *= 0.5;
        }
        let Some((xt, pt)) = accepted else { return Ok(Inner { steps, pgrad }) };
        steps += 1;
        let moved = xt.iter().zip(x.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        *x = xt;
        phi = pt;
        if moved <= tol_step * (1.0 + inf_norm(x)) {
            let g = merit.gradient(x);
            return Ok(Inner { steps, pgrad: projected_gradient(model, x, &g) });
        }
    }
}

/// Polishes `x0` (clipped into the box) towards a local KKT point of the POP.
pub fn refine(pop: &PopInstance, x0: &[f64], settings: &RefineSettings) -> Result<RefineResult, CoreError> {
    pop.validate()?;
    if x0.len() != pop.nvars {
        return Err(CoreError::Precondition(format!("x0 has length {}, expected {}", x0.len(), pop.nvars)));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(CoreError::Precondition("x0 is not finite".into()));
    }
    let model = Model::new(pop);
    let mut x = x0.to_vec();
    model.project(&mut x);

    let viol_of = |x: &[f64]| inf_norm(&model.eq_values(x));
    let ineq_viol_of = |x: &[f64]| model.ineq_values(x).iter().map(|g| (-g).max(0.0)).fold(0.0, f64::max);
    let check = |v: f64| {
        if v.is_finite() {
            Ok(v)
        } else {
            Err(CoreError::Numeric("non-finite constraint value".into()))
        }
    };

    let gf0 = {
        let mut g = vec![0.0; model.n];
        for (v, a) in model.f.gradient(&x) {
            g[v] += a;
        }
        g
    };
    let omega = settings.tol_opt * (1.0 + inf_norm(&gf0));
    let mut lam = ls_multipliers(&model, &x);
    let mut mu = vec![0.0; model.ineqs.len()];
    let mut rho = 10.0;
    let mut log = Vec::new();

    let mut viol = check(viol_of(&x))?;
    let mut iviol = check(ineq_viol_of(&x))?;
    let objective = |x: &[f64]| model.f.value(x);
    let mut best = (x.clone(), viol.max(iviol), objective(&x));
    let better = |cand: (f64, f64), best: (f64, f64), tol: f64| {
        if cand.0 <= tol && best.0 <= tol {
            cand.1 < best.1
        } else {
            cand.0 < best.0
        }
    };

    // already a KKT point
    {
        let merit = Merit { model: &model, lam: &lam, mu: &mu, rho: 0.0 };
        let g = merit.gradient(&x);
        if viol <= settings.tol_eq && iviol <= settings.tol_eq && projected_gradient(&model, &x, &g) <= omega {
            return Ok(RefineResult {
                objective: objective(&x),
                x,
                max_eq_violation: viol,
                max_ineq_violation: iviol,
                iterations: 0,
                converged: true,
                penalty: rho,
                log,
            });
        }
    }

    let pat = model.pattern();
    let mut factor = SymFactor::analyze(pat.clone()).map_err(|e| CoreError::Numeric(e.to_string()))?;
    let mut iterations = 0;
    let mut converged = false;
    for outer in 0..100 {
        let merit = Merit { model: &model, lam: &lam, mu: &mu, rho };
        let budget = settings.max_iter.saturating_sub(iterations);
        let inner = minimize(&merit, &mut x, &mut factor, &pat, omega, settings.tol_step, budget)?;
        iterations += inner.steps;
        let c = model.eq_values(&x);
        let gq = model.ineq_values(&x);
        let new_viol = check(inf_norm(&c))?;
        iviol = check(gq.iter().map(|g| (-g).max(0.0)).fold(0.0, f64::max))?;
        log.push(format!(
            "outer {outer} rho {rho:.1e} steps {} pgrad {:.2e} eq {new_viol:.3e} ineq {iviol:.3e} obj {:.10e}",
            inner.steps,
            inner.pgrad,
            objective(&x)
        ));
        let cand = (new_viol.max(iviol), objective(&x));
        if better(cand, (best.1, best.2), settings.tol_eq) {
            best = (x.clone(), cand.0, cand.1);
        }
        if new_viol <= settings.tol_eq && iviol <= settings.tol_eq && inner.pgrad <= omega {
            converged = true;
            break;
        }
        for (l, ci) in lam.iter_mut().zip(&c) {
            *l += rho * ci;
        }
        for (m, gi) in mu.iter_mut().zip(&gq) {
            *m = (*m - rho * gi).max(0.0);
        }
        if new_viol.max(iviol) > 0.25 * viol.max(1e-300) {
            rho *= 10.0;
        }
        viol = new_viol;
        if iterations >= settings.max_iter || rho > 1e14 {
            break;
        }
    }

    let x = if converged { x } else { best.0 };
    Ok(RefineResult {
        objective: objective(&x),
        max_eq_violation: viol_of(&x),
        max_ineq_violation: ineq_viol_of(&x),
        x,
        iterations,
        converged,
        penalty: rho,
        log,
    })
}

/// Worst relative deviation between the analytic constraint Jacobian and
/// central differences with step `1e-6·(1 + |x_s|)`.
pub fn constraint_jacobian_check(pop: &PopInstance, x: &[f64]) -> f64 {
    let mut worst = 0.0f64;
    for p in pop.eqs.iter().chain(&pop.ineqs) {
        let c = Compiled::new(p, 1.0);
        for (v, a) in c.gradient(x) {
            let h = 1e-6 * (1.0 + x[v].abs());
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[v] += h;
            xm[v] -= h;
            // term-wise differences keep constants from cancelling in round-off
            let fd = c.difference(&xp, &xm) / (xp[v] - xm[v]);
            let dev = (a - fd).abs() / a.abs().max(fd.abs()).max(1.0);
            worst = worst.max(dev);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pop1(eqs: &[&str], obj: &str, lo: f64, hi: f64, n: usize) -> PopInstance {
        let mut p = PopInstance::new(n, Polynomial::parse(obj, n).unwrap(), vec![lo; n], vec![hi; n]);
        for (i, e) in eqs.iter().enumerate() {
            p.push_eq(Polynomial::parse(e, n).unwrap(), format!("e{i}"));
        }
        p
    }

    #[test]
    fn compiled_derivatives() {
        let p = Polynomial::parse("3 x0^3 x1 - 2 x1^2 + x0", 2).unwrap();
        let c = Compiled::new(&p, 1.0);
        let x = [2.0, -1.0];
        assert!((c.value(&x) - (-24.0 - 2.0 + 2.0)).abs() < 1e-12);
        let g = c.gradient(&x);
        assert_eq!(g, vec![(0, 9.0 * 4.0 * -1.0 + 1.0), (1, 24.0 + 4.0)]);
        let mut h = [[0.0; 2]; 2];
        c.hessian(&x, |r, cc, v| h[r][cc] += v);
        assert_eq!(h[0][0], 18.0 * 2.0 * -1.0);
        assert_eq!(h[0][1], 9.0 * 4.0);
        assert_eq!(h[1][1], -4.0);
    }

    #[test]
    fn least_squares_point_for_inconsistent_pair() {
        let p = pop1(&["x0", "x0 - 1"], "0", -5.0, 5.0, 1);
        let r = refine(&p, &[3.0], &RefineSettings::default()).unwrap();
        assert!(!r.converged);
        assert!((r.x[0] - 0.5).abs() < 1e-6, "{:?}", r.x);
        assert!((r.max_eq_violation - 0.5).abs() < 1e-6);
    }

    #[test]
    fn solution_start_takes_no_steps() {
        let p = pop1(&["x0^2 + x1 - 3", "x0 - x1 + 1"], "x0 + x1", 0.0, 4.0, 2);
        let r = refine(&p, &[1.0, 2.0], &RefineSettings::default()).unwrap();
        assert!(r.converged);
        assert_eq!(r.iterations, 0);
        assert_eq!(r.x, vec![1.0, 2.0]);
    }

    #[test]
    fn bounds_hold_and_optimum_found() {
        // min -x0 - x1 on the circle x0^2 + x1^2 = 2 within [0, 1.2]^2
        let p = pop1(&["x0^2 + x1^2 - 2"], "-x0 - x1", 0.0, 1.2, 2);
        let r = refine(&p, &[0.2, 1.2], &RefineSettings::default()).unwrap();
        assert!(r.converged, "{:?}", r.log);
        assert!((r.x[0] - 1.0).abs() < 1e-6 && (r.x[1] - 1.0).abs() < 1e-6, "{:?}", r.x);
        // the optimum sits on the bound
        let p = pop1(&["x0^2 + x1^2 - 2"], "-x0", 0.1, 1.2, 2);
        let r = refine(&p, &[0.5, 0.5], &RefineSettings::default()).unwrap();
        assert!(r.converged, "{:?}", r.log);
        assert_eq!(r.x[0], 1.2);
        assert!((r.x[1] - 0.56f64.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn inequality_constraints_respected() {
        let mut p = pop1(&[], "(x0 - 2)^2", -5.0, 5.0, 1);
        p.ineqs.push(Polynomial::parse("1 - x0", 1).unwrap());
        let r = refine(&p, &[0.0], &RefineSettings::default()).unwrap();
        assert!(r.converged, "{:?}", r.log);
        assert!((r.x[0] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn jacobian_check_examples() {
        let p = pop1(&["x0^3"], "0", -5.0, 5.0, 1);
        assert!(constraint_jacobian_check(&p, &[2.0]) <= 1e-6);
        let c = Compiled::new(&p.eqs[0], 1.0);
        assert_eq!(c.gradient(&[2.0]), vec![(0, 12.0)]);
        let p = pop1(&["3 x0 - 2 x1 + 7", "x1 + 0.5"], "0", -5.0, 5.0, 2);
        assert!(constraint_jacobian_check(&p, &[0.3, -1.7]) <= 1e-10);
    }
}
