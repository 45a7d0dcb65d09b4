//! Finite-difference transcription of a [`DiffProblem`] into a polynomial
//! optimization problem.
//!
//! POP variables are laid out unknown by unknown (`k·nodes + node`, nodes x
//! fastest) followed by the extra scalars.

use std::fmt::{self, Write as _};

use sdpsmooth_poly::Polynomial;

use crate::problems::{Deriv, DiffProblem, Face, Grid, GridFunction, Objective, OcpScheme};
use crate::CoreError;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum VarName {
    Node { unknown: usize, i: usize, j: usize },
    Scalar(String),
}

impl fmt::Display for VarName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarName::Node { unknown, i, j } => write!(f, "u{unknown}[{i},{j}]"),
            VarName::Scalar(s) => f.write_str(s),
        }
    }
}

/// `min objective  s.t.  eqs = 0, ineqs ≥ 0, lbd ≤ x ≤ ubd`.
#[derive(Debug, Clone, PartialEq)]
pub struct PopInstance {
    pub nvars: usize,
    pub objective: Polynomial,
    pub eqs: Vec<Polynomial>,
    pub ineqs: Vec<Polynomial>,
    pub lbd: Vec<f64>,
    pub ubd: Vec<f64>,
    pub names: Vec<VarName>,
    /// Origin of each equality, for diagnostics.
    pub eq_labels: Vec<String>,
}

impl PopInstance {
    /// A POP with anonymous variables, mostly for tests.
    pub fn new(nvars: usize, objective: Polynomial, lbd: Vec<f64>, ubd: Vec<f64>) -> Self {
        Self {
            nvars,
            objective,
            eqs: Vec::new(),
            ineqs: Vec::new(),
            lbd,
            ubd,
            names: (0..nvars).map(|s| VarName::Scalar(format!("x{s}"))).collect(),
            eq_labels: Vec::new(),
        }
    }

    pub fn push_eq(&mut self, h: Polynomial, label: impl Into<String>) {
        self.eqs.push(h);
        self.eq_labels.push(label.into());
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        let bad = |m: String| Err(CoreError::Problem(m));
        if self.lbd.len() != self.nvars || self.ubd.len() != self.nvars || self.names.len() != self.nvars {
            return bad("bound or name vectors have the wrong length".into());
        }
        for s in 0..self.nvars {
            let (l, u) = (self.lbd[s], self.ubd[s]);
            if !l.is_finite() || !u.is_finite() || l > u {
                return bad(format!("variable {} has bounds [{l}, {u}]", self.names[s]));
            }
        }
        for p in std::iter::once(&self.objective).chain(&self.eqs).chain(&self.ineqs) {
            if p.nvars() != self.nvars {
                return bad("polynomial over the wrong number of variables".into());
            }
            if p.terms().any(|(_, c)| !c.is_finite()) {
                return bad("non-finite coefficient".into());
            }
        }
        Ok(())
    }

    /// `max(⌈deg/2⌉)` over objective and constraints, at least 1.
    pub fn min_order(&self) -> usize {
        std::iter::once(&self.objective)
            .chain(&self.eqs)
            .chain(&self.ineqs)
            .map(|p| (p.degree() as usize).div_ceil(2))
            .max()
            .unwrap_or(0)
            .max(1)
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.eval_unchecked(x)
    }

    pub fn max_eq_violation(&self, x: &[f64]) -> f64 {
        self.eqs.iter().map(|h| h.eval_unchecked(x).abs()).fold(0.0, f64::max)
    }

    pub fn max_ineq_violation(&self, x: &[f64]) -> f64 {
        self.ineqs.iter().map(|g| (-g.eval_unchecked(x)).max(0.0)).fold(0.0, f64::max)
    }

    /// Plain-text dump: bounds, objective and constraints in `x<s>` names.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "pop 1");
        let _ = writeln!(s, "nvars {}", self.nvars);
        for v in 0..self.nvars {
            let _ = writeln!(s, "var x{v} {} {} {}", self.names[v], self.lbd[v], self.ubd[v]);
        }
        let _ = writeln!(s, "objective {}", self.objective);
        for (h, l) in self.eqs.iter().zip(&self.eq_labels) {
            let _ = writeln!(s, "eq {h}  # {l}");
        }
        for g in &self.ineqs {
            let _ = writeln!(s, "ineq {g}");
        }
        s
    }
}

fn check_spacing(delta: f64) -> Result<(), CoreError> {
    if delta > 0.0 && delta.is_finite() {
        Ok(())
    } else {
        Err(CoreError::Parameter(format!("grid spacing must be positive, got {delta}")))
    }
}

/// `(u_p1 − 2u_0 + u_m1)/Δ²` over `nvars` variables.
pub fn fd_second(u_m1: usize, u_0: usize, u_p1: usize, delta: f64, nvars: usize) -> Result<Polynomial, CoreError> {
    check_spacing(delta)?;
    let h2 = delta * delta;
    Ok(Polynomial::linear(nvars, &[(u_m1, 1.0 / h2), (u_0, -2.0 / h2), (u_p1, 1.0 / h2)], 0.0)?)
}

/// `(u_p1 − u_m1)/(2Δ)` over `nvars` variables.
pub fn fd_first_central(u_m1: usize, u_p1: usize, delta: f64, nvars: usize) -> Result<Polynomial, CoreError> {
    check_spacing(delta)?;
    Ok(Polynomial::linear(nvars, &[(u_m1, -0.5 / delta), (u_p1, 0.5 / delta)], 0.0)?)
}

/// Stencil weights along one axis for a derivative of order 1 or 2 at
/// position `i` of `n` points. Central inside, second-order one-sided at the
/// ends.
fn stencil(order: usize, i: usize, n: usize, h: f64) -> Option<Vec<(usize, f64)>> {
    let interior = i > 0 && i + 1 < n;
    match (order, interior) {
        (1, true) => Some(vec![(i - 1, -0.5 / h), (i + 1, 0.5 / h)]),
        (2, true) => Some(vec![(i - 1, 1.0 / (h * h)), (i, -2.0 / (h * h)), (i + 1, 1.0 / (h * h))]),
        (1, false) if n >= 3 => {
            let w = [-1.5 / h, 2.0 / h, -0.5 / h];
            Some(if i == 0 { (0..3).map(|k| (k, w[k])).collect() } else { (0..3).map(|k| (n - 1 - k, -w[k])).collect() })
        }
        (2, false) if n >= 4 => {
            let w = [2.0 / (h * h), -5.0 / (h * h), 4.0 / (h * h), -1.0 / (h * h)];
            Some(if i == 0 { (0..4).map(|k| (k, w[k])).collect() } else { (0..4).map(|k| (n - 1 - k, w[k])).collect() })
        }
        _ => None,
    }
}

/// Index of unknown `k` at `node`.
pub fn var_index(grid: &Grid, k: usize, node: usize) -> usize {
    k * grid.len() + node
}

/// Index of extra scalar `j`.
pub fn scalar_index(grid: &Grid, unknowns: usize, j: usize) -> usize {
    unknowns * grid.len() + j
}

pub fn pop_dimension(p: &DiffProblem, grid: &Grid) -> usize {
    p.unknowns.len() * grid.len() + p.scalars.len()
}

/// Splits a POP point into a grid function.
pub fn grid_function_from_point(p: &DiffProblem, grid: &Grid, x: &[f64]) -> GridFunction {
    let n = grid.len();
    let values = (0..p.unknowns.len()).map(|k| x[k * n..(k + 1) * n].to_vec()).collect();
    let scalars = x[p.unknowns.len() * n..].to_vec();
    GridFunction { grid: *grid, values, scalars }
}

pub fn point_from_grid_function(u: &GridFunction) -> Vec<f64> {
    let mut x: Vec<f64> = u.values.iter().flatten().copied().collect();
    x.extend(&u.scalars);
    x
}

struct NodeSubs<'a> {
    p: &'a DiffProblem,
    grid: &'a Grid,
    nvars: usize,
}

impl NodeSubs<'_> {
    /// Linear polynomials (in POP variables) for every symbol used by `used`
    /// at node `(i, j)`.
    fn at(&self, i: usize, j: usize, used: &std::collections::BTreeSet<usize>) -> Result<Vec<Polynomial>, CoreError> {
        let syms = self.p.symbols();
        let g = self.grid;
        let nv = self.nvars;
        let mut subs = vec![Polynomial::zero(nv); syms.len()];
        for (k, _) in self.p.unknowns.iter().enumerate() {
            for d in Deriv::ALL {
                let s = syms.u(k, d);
                if !used.contains(&s) {
                    continue;
                }
                let var = |ii: usize, jj: usize| var_index(g, k, g.node(ii, jj));
                let (axis_order, along_x) = match d {
                    Deriv::Value => {
                        subs[s] = Polynomial::var(nv, var(i, j))?;
                        continue;
                    }
                    Deriv::X => (1, true),
                    Deriv::Xx => (2, true),
                    Deriv::Y => (1, false),
                    Deriv::Yy => (2, false),
                };
                if !along_x && g.domain.dims == 1 {
                    return Err(CoreError::Transcription(format!("y-derivative {} in a 1-D problem", syms.name(s))));
                }
                let (pos, n, h) = if along_x { (i, g.nx, g.dx()) } else { (j, g.ny, g.dy()) };
                let w = stencil(axis_order, pos, n, h).ok_or_else(|| {
                    CoreError::Transcription(format!(
                        "stencil for {} out of range at node ({i},{j}) on a {}×{} grid",
                        syms.name(s),
                        g.nx,
                        g.ny
                    ))
                })?;
                let coefs: Vec<(usize, f64)> =
                    w.into_iter().map(|(q, c)| (if along_x { var(q, j) } else { var(i, q) }, c)).collect();
                subs[s] = Polynomial::linear(nv, &coefs, 0.0)?;
            }
        }
        subs[syms.x()] = Polynomial::constant(nv, g.x(i));
        subs[syms.y()] = Polynomial::constant(nv, g.y(j));
        for jj in 0..self.p.scalars.len() {
            subs[syms.scalar(jj)] = Polynomial::var(nv, scalar_index(g, self.p.unknowns.len(), jj))?;
        }
        Ok(subs)
    }
}

fn boundary_nodes(grid: &Grid, face: Face) -> Vec<(usize, usize)> {
    let (nx, ny) = (grid.nx, grid.ny);
    match face {
        Face::XMin => (0..ny).map(|j| (0, j)).collect(),
        Face::XMax => (0..ny).map(|j| (nx - 1, j)).collect(),
        // corners belong to the x-faces
        Face::YMin => (1..nx - 1).map(|i| (i, 0)).collect(),
        Face::YMax => (1..nx - 1).map(|i| (i, ny - 1)).collect(),
    }
}

fn interior_nodes(grid: &Grid) -> Vec<(usize, usize)> {
    if grid.domain.dims == 1 {
        (1..grid.nx - 1).map(|i| (i, 0)).collect()
    } else {
        (1..grid.ny - 1).flat_map(|j| (1..grid.nx - 1).map(move |i| (i, j))).collect()
    }
}

/// Trapezoid weight of a node (including the cell sizes).
pub fn trapezoid_weight(grid: &Grid, i: usize, j: usize) -> f64 {
    let end = |q: usize, n: usize| if q == 0 || q + 1 == n { 0.5 } else { 1.0 };
    let mut w = grid.dx() * end(i, grid.nx);
    if grid.domain.dims == 2 {
        w *= grid.dy() * end(j, grid.ny);
    }
    w
}

/// Node index used by the midpoint objective: ⌈N/2⌉ in 1-based numbering.
pub fn midpoint_index(n: usize) -> usize {
    n.div_ceil(2) - 1
}

/// Transcribes `p` on `grid` into a POP.
pub fn transcribe(p: &DiffProblem, grid: &Grid) -> Result<PopInstance, CoreError> {
    p.validate()?;
    if grid.domain != p.domain {
        return Err(CoreError::Transcription("grid domain differs from the problem domain".into()));
    }
    let m = p.unknowns.len();
    let nodes = grid.len();
    let nv = pop_dimension(p, grid);
    let ns = NodeSubs { p, grid, nvars: nv };

    let mut names = Vec::with_capacity(nv);
    let mut lbd = Vec::with_capacity(nv);
    let mut ubd = Vec::with_capacity(nv);
    for k in 0..m {
        for node in 0..nodes {
            let (i, j) = grid.coords(node);
            names.push(VarName::Node { unknown: k, i, j });
            let (l, u) = p.bounds_at(k, grid.x(i), grid.y(j));
            lbd.push(l);
            ubd.push(u);
        }
    }
    for s in &p.scalars {
        names.push(VarName::Scalar(s.name.clone()));
        lbd.push(s.lbd);
        ubd.push(s.ubd);
    }
    let mut pop = PopInstance::new(nv, Polynomial::zero(nv), lbd, ubd);
    pop.names = names;

    let compose = |poly: &Polynomial, subs: &[Polynomial]| poly.compose(subs, nv);
    for (e_idx, e) in p.interior.iter().enumerate() {
        let used = e.lhs.support_vars();
        for (i, j) in interior_nodes(grid) {
            let subs = ns.at(i, j, &used)?;
            let h = compose(&e.lhs, &subs)?.add_constant(-e.rhs.at(grid.x(i), grid.y(j)));
            pop.push_eq(h, format!("interior equation {e_idx} at node ({i},{j})"));
        }
    }
    for (b_idx, b) in p.boundary.iter().enumerate() {
        let used = b.eq.lhs.support_vars();
        for (i, j) in boundary_nodes(grid, b.face) {
            let subs = ns.at(i, j, &used)?;
            let h = compose(&b.eq.lhs, &subs)?.add_constant(-b.eq.rhs.at(grid.x(i), grid.y(j)));
            pop.push_eq(h, format!("boundary equation {b_idx} ({:?}) at node ({i},{j})", b.face));
        }
    }
    let dx = grid.dx();
    for (d_idx, d) in p.dynamics.iter().enumerate() {
        let used = d.rhs.support_vars();
        let f: Vec<Polynomial> =
            (0..grid.nx).map(|i| compose(&d.rhs, &ns.at(i, 0, &used)?).map_err(CoreError::from)).collect::<Result<_, _>>()?;
        for i in 0..grid.nx - 1 {
            let xs = var_index(grid, d.state, i);
            let diff = Polynomial::linear(nv, &[(xs + 1, 1.0 / dx), (xs, -1.0 / dx)], 0.0)?;
            let avg = match p.scheme {
                OcpScheme::Trapezoid => f[i].add(&f[i + 1])?.scale(0.5),
                OcpScheme::ForwardEuler => f[i].clone(),
            };
            pop.push_eq(diff.sub(&avg)?, format!("dynamics {d_idx} on step {i}"));
        }
    }

    pop.objective = match &p.objective {
        Objective::NegSum(ks) => {
            let coefs: Vec<(usize, f64)> =
                ks.iter().flat_map(|&k| (0..nodes).map(move |n| (var_index(grid, k, n), -1.0))).collect();
            Polynomial::linear(nv, &coefs, 0.0)?
        }
        Objective::Midpoint(k) => {
            let i = midpoint_index(grid.nx);
            let j = if grid.domain.dims == 2 { midpoint_index(grid.ny) } else { 0 };
            Polynomial::linear(nv, &[(var_index(grid, *k, grid.node(i, j)), -1.0)], 0.0)?
        }
        Objective::Integral(f) => {
            let used = f.support_vars();
            let mut acc = Polynomial::zero(nv);
            for node in 0..nodes {
                let (i, j) = grid.coords(node);
                let term = compose(f, &ns.at(i, j, &used)?)?;
                acc = acc.add(&term.scale(trapezoid_weight(grid, i, j)))?;
            }
            acc
        }
        Objective::FreeTime(jj) => Polynomial::var(nv, scalar_index(grid, m, *jj))?,
    };
    pop.validate()?;
    Ok(pop)
}

/// Largest absolute violation of the transcribed equalities at `u`.
pub fn residual(p: &DiffProblem, grid: &Grid, u: &GridFunction) -> Result<f64, CoreError> {
    if u.grid != *grid || u.values.len() != p.unknowns.len() || u.scalars.len() != p.scalars.len() {
        return Err(CoreError::Precondition("grid function does not match the problem and grid".into()));
    }
    let pop = transcribe(p, grid)?;
    Ok(pop.max_eq_violation(&point_from_grid_function(u)))
}
