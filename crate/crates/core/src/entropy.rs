//! Maximum-entropy smoothing: discrete moments of a grid solution, the dual
//! Newton fit of `exp(Σ v_ij x^i y^j)`, and error metrics.

use nalgebra::{DMatrix, DVector};

use crate::problems::{Domain, Grid, GridFunction, Sampler};
use crate::CoreError;

/// Node weights for the discrete moment sums.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum MomentRule {
    /// Half weight on boundary nodes of each axis.
    #[default]
    Trapezoid,
    /// Every node weighted `Δx Δy`.
    FullNode,
}

impl std::str::FromStr for MomentRule {
    type Err = CoreError;
    fn from_str(s: &str) -> Result<Self, CoreError> {
        match s {
            "trapezoid" => Ok(Self::Trapezoid),
            "full" | "full_node" | "full-node" => Ok(Self::FullNode),
            _ => Err(CoreError::Parameter(format!("unknown moment rule '{s}'"))),
        }
    }
}

/// Multi-indices `(i, j)` with `i + j ≤ order`, graded, x-power first.
pub fn multi_indices(order: usize, dims: usize) -> Vec<(usize, usize)> {
    if dims == 1 {
        return (0..=order).map(|i| (i, 0)).collect();
    }
    let mut out = Vec::new();
    for d in 0..=order {
        for j in 0..=d {
            out.push((d - j, j));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentVector {
    pub order: usize,
    pub dims: usize,
    pub index: Vec<(usize, usize)>,
    pub values: Vec<f64>,
    pub domain: Domain,
}

impl MomentVector {
    pub fn new(order: usize, domain: Domain, values: Vec<f64>) -> Result<Self, CoreError> {
        let index = multi_indices(order, domain.dims);
        if values.len() != index.len() {
            return Err(CoreError::Parameter(format!(
                "{} moments given, order {order} in {}-D needs {}",
                values.len(),
                domain.dims,
                index.len()
            )));
        }
        Ok(Self { order, dims: domain.dims, index, values, domain })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.index.iter().position(|&k| k == (i, j)).map(|p| self.values[p])
    }

    pub fn mass(&self) -> f64 {
        self.values[0]
    }
}

/// Discrete moments `Σ w_kl x_k^i y_l^j u_kl` of unknown `unknown`.
pub fn discrete_moments(
    u: &GridFunction,
    unknown: usize,
    order: usize,
    rule: MomentRule,
) -> Result<MomentVector, CoreError> {
    let g = &u.grid;
    let vals = u
        .values
        .get(unknown)
        .ok_or_else(|| CoreError::Lookup(format!("grid function has no unknown {unknown}")))?;
    if let Some(p) = vals.iter().position(|&v| v < 0.0) {
        return Err(CoreError::Precondition(format!(
            "node {p} has negative value {}; shift the solution to be nonnegative before taking moments",
            vals[p]
        )));
    }
    let dims = g.domain.dims;
    let axis_weight = |k: usize, n: usize, h: f64| match rule {
        MomentRule::FullNode => h,
        MomentRule::Trapezoid if k == 0 || k + 1 == n => 0.5 * h,
        MomentRule::Trapezoid => h,
    };
    let index = multi_indices(order, dims);
    let mut m = vec![0.0; index.len()];
    for node in 0..g.len() {
        let (i, j) = g.coords(node);
        let mut w = axis_weight(i, g.nx, g.dx()) * vals[node];
        if dims == 2 {
            w *= axis_weight(j, g.ny, g.dy());
        }
        if w == 0.0 {
            continue;
        }
        let (x, y) = (g.x(i), g.y(j));
        for (mk, &(a, b)) in m.iter_mut().zip(&index) {
            *mk += w * x.powi(a as i32) * y.powi(b as i32);
        }
    }
    MomentVector::new(order, g.domain, m)
}

/// Tensor trapezoid rule on the unit box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub points_per_dim: usize,
}

impl Quadrature {
    pub fn default_for(dims: usize) -> Self {
        Self { points_per_dim: if dims == 1 { 2001 } else { 201 } }
    }

    /// Nodes `(x, y, weight)` on `[0,1]^dims`.
    pub fn nodes(&self, dims: usize) -> Vec<(f64, f64, f64)> {
        let n = self.points_per_dim.max(2);
        let h = 1.0 / (n - 1) as f64;
        let axis: Vec<(f64, f64)> =
            (0..n).map(|k| ((k as f64 * h).min(1.0), if k == 0 || k + 1 == n { 0.5 * h } else { h })).collect();
        if dims == 1 {
            axis.iter().map(|&(x, w)| (x, 0.0, w)).collect()
        } else {
            let mut out = Vec::with_capacity(n * n);
            for &(y, wy) in &axis {
                for &(x, wx) in &axis {
                    out.push((x, y, wx * wy));
                }
            }
            out
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaxentSettings {
    /// Stop when the max-norm of the dual gradient (monomial moments) is below.
    pub tol_grad: f64,
    pub max_iter: usize,
    pub backtrack: f64,
    pub armijo: f64,
    /// Exponent cap used when evaluating the estimate.
    pub exp_cap: f64,
}

impl Default for MaxentSettings {
    fn default() -> Self {
        Self { tol_grad: 1e-8, max_iter: 200, backtrack: 0.5, armijo: 1e-4, exp_cap: 50.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyEstimate {
    pub order: usize,
    pub index: Vec<(usize, usize)>,
    /// Monomial coefficients of the exponent.
    pub v: Vec<f64>,
    pub domain: Domain,
    pub converged: bool,
    pub iterations: usize,
    pub grad_norm: f64,
    pub exp_cap: f64,
}

impl EntropyEstimate {
    pub fn exponent(&self, x: f64, y: f64) -> f64 {
        self.v.iter().zip(&self.index).map(|(c, &(i, j))| c * x.powi(i as i32) * y.powi(j as i32)).sum()
    }
}

/// Orthonormal shifted Legendre polynomials on [0,1] as monomial
/// coefficients: row k holds the coefficients of `P_k`.
fn legendre_coefficients(order: usize) -> Vec<Vec<f64>> {
    // (k+1) P_{k+1}(t) = (2k+1) t P_k(t) − k P_{k−1}(t) with t = 2x − 1
    let mut p: Vec<Vec<f64>> = vec![vec![1.0]];
    if order >= 1 {
        p.push(vec![-1.0, 2.0]);
    }
    for k in 1..order {
        let kf = k as f64;
        let mut next = vec![0.0; k + 2];
        for (d, &c) in p[k].iter().enumerate() {
            // (2x − 1) c x^d
            next[d + 1] += (2.0 * kf + 1.0) * 2.0 * c;
            next[d] -= (2.0 * kf + 1.0) * c;
        }
        for (d, &c) in p[k - 1].iter().enumerate() {
            next[d] -= kf * c;
        }
        for c in &mut next {
            *c /= kf + 1.0;
        }
        p.push(next);
    }
    p.iter().enumerate().map(|(k, row)| row.iter().map(|c| c * ((2 * k + 1) as f64).sqrt()).collect()).collect()
}

/// Change of basis: `psi = T phi`, where phi are the monomials
/// `x^i y^j` and psi the products `P_a(x) P_b(y)` (same index order).
fn basis_transform(index: &[(usize, usize)], order: usize) -> DMatrix<f64> {
    let leg = legendre_coefficients(order);
    let n = index.len();
    let mut t = DMatrix::zeros(n, n);
    for (r, &(a, b)) in index.iter().enumerate() {
        for (c, &(i, j)) in index.iter().enumerate() {
            let ca = leg[a].get(i).copied().unwrap_or(0.0);
            let cb = leg[b].get(j).copied().unwrap_or(0.0);
            t[(r, c)] = ca * cb;
        }
    }
    t
}

/// Dual objective, gradient and Hessian in monomial coordinates.
#[derive(Debug, Clone)]
pub struct DualEval {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub hessian: DMatrix<f64>,
}

struct Cache {
    nodes: Vec<(f64, f64, f64)>,
    /// Monomial values at each node, row-major `nodes × basis`.
    phi: Vec<f64>,
    n: usize,
}

impl Cache {
    fn new(index: &[(usize, usize)], dims: usize, quad: &Quadrature) -> Self {
        let nodes = quad.nodes(dims);
        let n = index.len();
        let mut phi = Vec::with_capacity(nodes.len() * n);
        for &(x, y, _) in &nodes {
            for &(i, j) in index {
                phi.push(x.powi(i as i32) * y.powi(j as i32));
            }
        }
        Self { nodes, phi, n }
    }

    fn row(&self, q: usize) -> &[f64] {
        &self.phi[q * self.n..(q + 1) * self.n]
    }

    /// Values `exp(vᵀφ)` times quadrature weight; `None` on overflow.
    fn weighted_density(&self, v: &[f64]) -> Option<Vec<f64>> {
        let mut out = Vec::with_capacity(self.nodes.len());
        for (q, &(_, _, w)) in self.nodes.iter().enumerate() {
            let e: f64 = self.row(q).iter().zip(v).map(|(a, b)| a * b).sum::<f64>().exp();
            if !e.is_finite() {
                return None;
            }
            out.push(w * e);
        }
        Some(out)
    }

    fn moments(&self, dens: &[f64]) -> Vec<f64> {
        let mut m = vec![0.0; self.n];
        for (q, &d) in dens.iter().enumerate() {
            for (mk, p) in m.iter_mut().zip(self.row(q)) {
                *mk += d * p;
            }
        }
        m
    }

    fn moment_matrix(&self, dens: &[f64]) -> DMatrix<f64> {
        let mut h = DMatrix::zeros(self.n, self.n);
        for (q, &d) in dens.iter().enumerate() {
            let r = self.row(q);
            for a in 0..self.n {
                let da = d * r[a];
                for b in a..self.n {
                    h[(a, b)] += da * r[b];
                }
            }
        }
        for a in 0..self.n {
            for b in 0..a {
                h[(a, b)] = h[(b, a)];
            }
        }
        h
    }
}

fn check_unit(m: &MomentVector) -> Result<(), CoreError> {
    if !m.domain.is_unit() {
        return Err(CoreError::Precondition(format!(
            "maximum-entropy fit needs moments on the unit box, got {:?}; scale the domain first",
            m.domain
        )));
    }
    if !(m.mass() > 0.0) || m.values.iter().any(|v| !v.is_finite()) {
        return Err(CoreError::Precondition("moment vector needs positive finite mass".into()));
    }
    Ok(())
}

/// Dual `⟨m, v⟩ − ∫ exp(Σ v x^i y^j)` with its derivatives.
pub fn dual_eval(m: &MomentVector, v: &[f64], quad: &Quadrature) -> Result<DualEval, CoreError> {
    check_unit(m)?;
    if v.len() != m.len() {
        return Err(CoreError::Parameter(format!("v has {} entries, expected {}", v.len(), m.len())));
    }
    let cache = Cache::new(&m.index, m.dims, quad);
    let dens = cache.weighted_density(v).ok_or_else(|| CoreError::Numeric("exponent overflow".into()))?;
    let mom = cache.moments(&dens);
    let value = m.values.iter().zip(v).map(|(a, b)| a * b).sum::<f64>() - mom[0];
    let gradient = m.values.iter().zip(&mom).map(|(a, b)| a - b).collect();
    let hessian = -cache.moment_matrix(&dens);
    Ok(DualEval { value, gradient, hessian })
}

/// Newton maximization of the entropy dual.
pub fn maxent_fit(m: &MomentVector, quad: &Quadrature, settings: &MaxentSettings) -> Result<EntropyEstimate, CoreError> {
    check_unit(m)?;
    let n = m.len();
    let cache = Cache::new(&m.index, m.dims, quad);
    let t = basis_transform(&m.index, m.order);
    // orthonormal-basis coordinates: exponent = wᵀ T φ, so v = Tᵀ w
    let p = &t * DVector::from_column_slice(&m.values);
    let to_v = |w: &DVector<f64>| -> Vec<f64> { (t.transpose() * w).iter().copied().collect() };
    let dual = |w: &DVector<f64>| -> Option<(f64, Vec<f64>, Vec<f64>)> {
        let v = to_v(w);
        let dens = cache.weighted_density(&v)?;
        let mom = cache.moments(&dens);
        Some((p.dot(w) - mom[0], v, dens))
    };

    let mut w = DVector::zeros(n);
    // exp(w0 P_0) with P_0 = 1 matches the mass on the unit box
    w[0] = m.mass().ln();
    let Some((mut val, mut v, mut dens)) = dual(&w) else {
        return Err(CoreError::Numeric("initial density overflows".into()));
    };
    let mut iterations = 0;
    let mut grad_norm;
    let mut converged = false;
    loop {
        let mom = cache.moments(&dens);
        let g_mono: Vec<f64> = m.values.iter().zip(&mom).map(|(a, b)| a - b).collect();
        grad_norm = g_mono.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        if grad_norm <= settings.tol_grad {
            converged = true;
            break;
        }
        if iterations >= settings.max_iter {
            break;
        }
        let g = &t * DVector::from_column_slice(&g_mono);
        let h = &t * cache.moment_matrix(&dens) * t.transpose();
        let d = match h.clone().cholesky() {
            Some(c) => c.solve(&g),
            None => {
                let mut hr = h;
                let s = 1e-12 * hr.diagonal().amax().max(1.0);
                for k in 0..n {
                    hr[(k, k)] += s;
                }
                hr.lu().solve(&g).unwrap_or_else(|| g.clone())
            }
        };
        let slope = g.dot(&d);
        let mut alpha = 1.0;
        let mut accepted = false;
        while alpha > 1e-16 {
            let wt = &w + &d * alpha;
            if let Some((vt, vv, dt)) = dual(&wt) {
                if vt >= val + settings.armijo * alpha * slope {
                    w = wt;
                    val = vt;
                    v = vv;
                    dens = dt;
                    accepted = true;
                    break;
                }
            }
            alpha *= settings.backtrack;
        }
        iterations += 1;
        if !accepted {
            break;
        }
    }
    Ok(EntropyEstimate {
        order: m.order,
        index: m.index.clone(),
        v,
        domain: m.domain,
        converged,
        iterations,
        grad_norm,
        exp_cap: settings.exp_cap,
    })
}

/// Estimate values with the exponent capped; `capped` counts the points
/// where the cap was active.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub values: Vec<f64>,
    pub capped: usize,
}

pub fn evaluate_estimate(e: &EntropyEstimate, pts: &[(f64, f64)]) -> Evaluation {
    let mut capped = 0;
    let values = pts
        .iter()
        .map(|&(x, y)| {
            let s = e.exponent(x, y);
            if s > e.exp_cap {
                capped += 1;
            }
            s.min(e.exp_cap).exp()
        })
        .collect();
    Evaluation { values, capped }
}

/// Quadrature moments of the estimate up to `order`.
pub fn estimate_moments(e: &EntropyEstimate, order: usize, quad: &Quadrature) -> Result<MomentVector, CoreError> {
    let dims = e.domain.dims;
    let index = multi_indices(order, dims);
    let cache = Cache::new(&index, dims, quad);
    let mut m = vec![0.0; index.len()];
    for (q, &(x, y, w)) in cache.nodes.iter().enumerate() {
        let d = w * e.exponent(x, y).exp();
        for (mk, p) in m.iter_mut().zip(cache.row(q)) {
            *mk += d * p;
        }
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(CoreError::Numeric("estimate moments overflow".into()));
    }
    MomentVector::new(order, e.domain, m)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    /// `Δx Σ (u − u*)` (times `Δy` in 2-D), signed.
    pub avg_error: f64,
    /// `max |u − u*|` over the nodes.
    pub max_error: f64,
    pub diffs: Vec<f64>,
    pub capped: usize,
}

/// Affine map of a point of `from` onto `to`.
fn map_point(from: &Domain, to: &Domain, x: f64, y: f64) -> (f64, f64) {
    let mx = to.x_min + (x - from.x_min) / (from.x_max - from.x_min) * (to.x_max - to.x_min);
    let my = if from.dims == 2 { to.y_min + (y - from.y_min) / (from.y_max - from.y_min) * (to.y_max - to.y_min) } else { y };
    (mx, my)
}

fn metrics(grid: &Grid, reference: &[f64], e: &EntropyEstimate) -> ErrorReport {
    let pts: Vec<(f64, f64)> = (0..grid.len())
        .map(|node| {
            let (i, j) = grid.coords(node);
            map_point(&grid.domain, &e.domain, grid.x(i), grid.y(j))
        })
        .collect();
    let est = evaluate_estimate(e, &pts);
    let diffs: Vec<f64> = reference.iter().zip(&est.values).map(|(a, b)| a - b).collect();
    let cell = grid.dx() * if grid.domain.dims == 2 { grid.dy() } else { 1.0 };
    ErrorReport {
        avg_error: cell * diffs.iter().sum::<f64>(),
        max_error: diffs.iter().fold(0.0, |a, d| a.max(d.abs())),
        diffs,
        capped: est.capped,
    }
}

/// Metrics against the grid values of `unknown`; grid points are mapped
/// affinely onto the estimate's domain.
pub fn error_metrics(u_ref: &GridFunction, unknown: usize, e: &EntropyEstimate) -> Result<ErrorReport, CoreError> {
    let vals = u_ref
        .values
        .get(unknown)
        .ok_or_else(|| CoreError::Lookup(format!("grid function has no unknown {unknown}")))?;
    if u_ref.grid.domain.dims != e.domain.dims {
        return Err(CoreError::Precondition("grid and estimate dimensions differ".into()));
    }
    Ok(metrics(&u_ref.grid, vals, e))
}

/// Metrics against an analytic reference sampled on `grid`.
pub fn error_metrics_analytic(reference: &Sampler, grid: &Grid, e: &EntropyEstimate) -> Result<ErrorReport, CoreError> {
    if grid.domain.dims != e.domain.dims {
        return Err(CoreError::Precondition("grid and estimate dimensions differ".into()));
    }
    let vals: Vec<f64> = (0..grid.len())
        .map(|node| {
            let (i, j) = grid.coords(node);
            reference(grid.x(i), grid.y(j))
        })
        .collect();
    Ok(metrics(grid, &vals, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn unit1() -> Domain {
        Domain::interval(0.0, 1.0)
    }

    fn ones(n: usize) -> GridFunction {
        let g = Grid::new(unit1(), n, 1).unwrap();
        GridFunction::new(g, vec![vec![1.0; n]], vec![]).unwrap()
    }

    #[test]
    fn full_node_rule_example() {
        let m = discrete_moments(&ones(3), 0, 1, MomentRule::FullNode).unwrap();
        assert_eq!(m.values, vec![1.5, 0.75]);
        let m = discrete_moments(&ones(3), 0, 1, MomentRule::Trapezoid).unwrap();
        assert_eq!(m.values, vec![1.0, 0.5]);
    }

    #[test]
    fn negative_values_are_rejected() {
        let mut u = ones(3);
        u.values[0][1] = -0.1;
        let err = discrete_moments(&u, 0, 1, MomentRule::default()).unwrap_err();
        assert!(err.to_string().contains("shift"));
    }

    #[test]
    fn analytic_sample_mass() {
        let g = Grid::new(unit1(), 2000, 1).unwrap();
        let f: Sampler = std::sync::Arc::new(|x, _| E * E * (-2.0 * x).exp());
        let u = GridFunction::sample(g, &[f]);
        let m = discrete_moments(&u, 0, 1, MomentRule::Trapezoid).unwrap();
        assert!((m.values[0] - (E * E - 1.0) / 2.0).abs() < 2e-3);
    }

    #[test]
    fn indices_and_legendre_orthonormality() {
        assert_eq!(multi_indices(2, 2), vec![(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]);
        let leg = legendre_coefficients(4);
        let q = Quadrature { points_per_dim: 4001 };
        let nodes = q.nodes(1);
        let eval = |c: &[f64], x: f64| c.iter().enumerate().map(|(k, a)| a * x.powi(k as i32)).sum::<f64>();
        for a in 0..5 {
            for b in 0..5 {
                let s: f64 = nodes.iter().map(|&(x, _, w)| w * eval(&leg[a], x) * eval(&leg[b], x)).sum();
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((s - expect).abs() < 1e-5, "{a} {b} {s}");
            }
        }
    }

    #[test]
    fn uniform_moments_give_zero_exponent() {
        // exact moments carry the O(h²) trapezoid error into v, so use a finer rule
        let m = MomentVector::new(3, unit1(), vec![1.0, 0.5, 1.0 / 3.0, 0.25]).unwrap();
        let e = maxent_fit(&m, &Quadrature { points_per_dim: 20001 }, &MaxentSettings::default()).unwrap();
        assert!(e.converged);
        assert!(e.v.iter().all(|v| v.abs() < 1e-6), "{:?}", e.v);
    }

    #[test]
    fn mass_only_gives_log() {
        let m = MomentVector::new(0, unit1(), vec![2.0]).unwrap();
        let e = maxent_fit(&m, &Quadrature::default_for(1), &MaxentSettings::default()).unwrap();
        assert!((e.v[0] - 2f64.ln()).abs() < 1e-12);
        assert_eq!(e.iterations, 0);
    }

    #[test]
    fn exponential_family_is_recovered() {
        let m = MomentVector::new(1, unit1(), vec![(E * E - 1.0) / 2.0, (E * E - 3.0) / 4.0]).unwrap();
        let e = maxent_fit(&m, &Quadrature::default_for(1), &MaxentSettings::default()).unwrap();
        assert!(e.converged);
        assert!((e.v[0] - 2.0).abs() < 1e-3 && (e.v[1] + 2.0).abs() < 1e-3, "{:?}", e.v);
    }

    #[test]
    fn two_d_family_is_recovered() {
        let d = Domain::rectangle(0.0, 1.0, 0.0, 1.0);
        let truth = [0.3, 1.0, -0.5, -0.7, 0.4, 0.2];
        let quad = Quadrature::default_for(2);
        let est = EntropyEstimate {
            order: 2,
            index: multi_indices(2, 2),
            v: truth.to_vec(),
            domain: d,
            converged: true,
            iterations: 0,
            grad_norm: 0.0,
            exp_cap: 50.0,
        };
        let m = estimate_moments(&est, 2, &quad).unwrap();
        let e = maxent_fit(&m, &quad, &MaxentSettings::default()).unwrap();
        assert!(e.converged);
        for (a, b) in e.v.iter().zip(&truth) {
            assert!((a - b).abs() < 1e-6, "{:?}", e.v);
        }
    }

    #[test]
    fn evaluation_examples() {
        let mut e = EntropyEstimate {
            order: 0,
            index: multi_indices(0, 1),
            v: vec![2f64.ln()],
            domain: unit1(),
            converged: true,
            iterations: 0,
            grad_norm: 0.0,
            exp_cap: 50.0,
        };
        assert!((evaluate_estimate(&e, &[(0.3, 0.0)]).values[0] - 2.0).abs() < 1e-12);
        e.order = 1;
        e.index = multi_indices(1, 1);
        e.v = vec![2.0, -2.0];
        let r = evaluate_estimate(&e, &[(0.0, 0.0), (1.0, 0.0)]);
        assert!((r.values[0] - E * E).abs() < 1e-12 && (r.values[1] - 1.0).abs() < 1e-12);
        assert_eq!(r.capped, 0);
        e.v = vec![60.0, 0.0];
        let r = evaluate_estimate(&e, &[(0.5, 0.0)]);
        assert_eq!(r.capped, 1);
        assert_eq!(r.values[0], 50f64.exp());
    }

    #[test]
    fn moments_of_simple_estimates() {
        let quad = Quadrature::default_for(1);
        let mut e = EntropyEstimate {
            order: 1,
            index: multi_indices(1, 1),
            v: vec![0.0, 0.0],
            domain: unit1(),
            converged: true,
            iterations: 0,
            grad_norm: 0.0,
            exp_cap: 50.0,
        };
        let m = estimate_moments(&e, 4, &quad).unwrap();
        for (k, v) in m.values.iter().enumerate() {
            assert!((v - 1.0 / (k + 1) as f64).abs() < 1e-6);
        }
        e.v = vec![2.0, -2.0];
        let m = estimate_moments(&e, 0, &quad).unwrap();
        assert!((m.values[0] - (E * E - 1.0) / 2.0).abs() < 1e-5);
    }

    #[test]
    fn offset_metrics_example() {
        let e = EntropyEstimate {
            order: 0,
            index: multi_indices(0, 1),
            v: vec![0.0],
            domain: unit1(),
            converged: true,
            iterations: 0,
            grad_norm: 0.0,
            exp_cap: 50.0,
        };
        let g = Grid::new(unit1(), 3, 1).unwrap();
        let u = GridFunction::new(g, vec![vec![1.1; 3]], vec![]).unwrap();
        let r = error_metrics(&u, 0, &e).unwrap();
        assert!((r.avg_error - 0.15).abs() < 1e-12);
        assert!((r.max_error - 0.1).abs() < 1e-12);
        let same = GridFunction::new(g, vec![vec![1.0; 3]], vec![]).unwrap();
        let r = error_metrics(&same, 0, &e).unwrap();
        assert_eq!((r.avg_error, r.max_error), (0.0, 0.0));
    }

    #[test]
    fn fit_needs_unit_domain() {
        let m = MomentVector::new(0, Domain::interval(0.0, 5.0), vec![1.0]).unwrap();
        assert!(maxent_fit(&m, &Quadrature::default_for(1), &MaxentSettings::default()).is_err());
    }
}
