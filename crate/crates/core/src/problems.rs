//! Differential problems on rectangles, grids, grid functions and the
//! benchmark presets.
//!
//! Equations are polynomials over a fixed symbol table. For `m` unknowns and
//! `s` extra scalars the symbols are, in order,
//!
//! ```text
//! u0 u0_x u0_xx u0_y u0_yy  u1 u1_x ...  x y  <scalars>
//! ```

use std::fmt;
use std::sync::Arc;

use sdpsmooth_poly::Polynomial;

use crate::CoreError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub dims: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Domain {
    pub fn interval(x_min: f64, x_max: f64) -> Self {
        Self { dims: 1, x_min, x_max, y_min: 0.0, y_max: 1.0 }
    }

    pub fn rectangle(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Self {
        Self { dims: 2, x_min, x_max, y_min, y_max }
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        let ok = match self.dims {
            1 => self.x_min < self.x_max,
            2 => self.x_min < self.x_max && self.y_min < self.y_max,
            _ => false,
        };
        if ok && [self.x_min, self.x_max, self.y_min, self.y_max].iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(CoreError::Problem(format!("invalid domain {self:?}")))
        }
    }

    pub fn volume(&self) -> f64 {
        let lx = self.x_max - self.x_min;
        if self.dims == 2 {
            lx * (self.y_max - self.y_min)
        } else {
            lx
        }
    }

    pub fn is_unit(&self) -> bool {
        self.x_min == 0.0 && self.x_max == 1.0 && (self.dims == 1 || (self.y_min == 0.0 && self.y_max == 1.0))
    }
}

/// Derivative slot of an unknown in the symbol table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Deriv {
    Value,
    X,
    Xx,
    Y,
    Yy,
}

impl Deriv {
    pub const ALL: [Deriv; 5] = [Deriv::Value, Deriv::X, Deriv::Xx, Deriv::Y, Deriv::Yy];

    fn offset(self) -> usize {
        self as usize
    }

    fn suffix(self) -> &'static str {
        match self {
            Deriv::Value => "",
            Deriv::X => "_x",
            Deriv::Xx => "_xx",
            Deriv::Y => "_y",
            Deriv::Yy => "_yy",
        }
    }
}

/// Layout of the equation symbols for a given number of unknowns and scalars.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolTable {
    pub unknowns: usize,
    pub scalars: Vec<String>,
}

impl SymbolTable {
    pub fn len(&self) -> usize {
        5 * self.unknowns + 2 + self.scalars.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn u(&self, k: usize, d: Deriv) -> usize {
        5 * k + d.offset()
    }

    pub fn x(&self) -> usize {
        5 * self.unknowns
    }

    pub fn y(&self) -> usize {
        5 * self.unknowns + 1
    }

    pub fn scalar(&self, j: usize) -> usize {
        5 * self.unknowns + 2 + j
    }

    pub fn name(&self, s: usize) -> String {
        let base = 5 * self.unknowns;
        if s < base {
            format!("u{}{}", s / 5, Deriv::ALL[s % 5].suffix())
        } else if s == base {
            "x".into()
        } else if s == base + 1 {
            "y".into()
        } else {
            self.scalars[s - base - 2].clone()
        }
    }

    pub fn resolve(&self, name: &str) -> Option<usize> {
        (0..self.len()).find(|&s| self.name(s) == name)
    }

    pub fn parse(&self, text: &str) -> Result<Polynomial, CoreError> {
        Polynomial::parse_with(text, self.len(), |n: &str| self.resolve(n))
            .map_err(|e| CoreError::Problem(format!("cannot parse `{text}`: {e}")))
    }

    pub fn display(&self, p: &Polynomial) -> String {
        p.display_with(&|s| self.name(s)).to_string()
    }
}

pub type Sampler = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Right-hand side of an equation, sampled at grid nodes.
#[derive(Clone)]
pub enum Rhs {
    Const(f64),
    Func(Sampler),
}

impl Rhs {
    pub fn at(&self, x: f64, y: f64) -> f64 {
        match self {
            Rhs::Const(c) => *c,
            Rhs::Func(f) => f(x, y),
        }
    }
}

impl fmt::Debug for Rhs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rhs::Const(c) => write!(f, "Const({c})"),
            Rhs::Func(_) => write!(f, "Func(..)"),
        }
    }
}

/// `lhs(symbols) = rhs(x, y)`.
#[derive(Debug, Clone)]
pub struct Equation {
    pub lhs: Polynomial,
    pub rhs: Rhs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Face {
    XMin,
    XMax,
    YMin,
    YMax,
}

#[derive(Debug, Clone)]
pub struct BoundaryEq {
    pub face: Face,
    pub eq: Equation,
}

/// `d u_state / dx = rhs(values, x, scalars)` transcribed by a one-step scheme.
#[derive(Debug, Clone)]
pub struct Dynamics {
    pub state: usize,
    pub rhs: Polynomial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OcpScheme {
    #[default]
    Trapezoid,
    ForwardEuler,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Unknown {
    pub name: String,
    pub lbd: f64,
    pub ubd: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarVar {
    pub name: String,
    pub lbd: f64,
    pub ubd: f64,
}

/// Tighter bounds for `unknown` on nodes inside the closed box.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundOverride {
    pub unknown: usize,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub lbd: f64,
    pub ubd: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Objective {
    /// `-Σ u_k` over all nodes of the listed unknowns.
    NegSum(Vec<usize>),
    /// `-u_k` at node ⌈N/2⌉ (1-based, along x).
    Midpoint(usize),
    /// Trapezoid quadrature of a polynomial in the symbols.
    Integral(Polynomial),
    /// Minimize the given scalar.
    FreeTime(usize),
}

#[derive(Clone)]
pub struct DiffProblem {
    pub name: String,
    pub domain: Domain,
    pub unknowns: Vec<Unknown>,
    pub scalars: Vec<ScalarVar>,
    pub interior: Vec<Equation>,
    pub boundary: Vec<BoundaryEq>,
    pub dynamics: Vec<Dynamics>,
    pub scheme: OcpScheme,
    pub overrides: Vec<BoundOverride>,
    pub objective: Objective,
    /// Analytic solution per unknown, where known.
    pub reference: Vec<Option<Sampler>>,
}

impl fmt::Debug for DiffProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiffProblem")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("unknowns", &self.unknowns)
            .field("scalars", &self.scalars)
            .field("interior", &self.interior.len())
            .field("boundary", &self.boundary.len())
            .field("dynamics", &self.dynamics.len())
            .field("objective", &self.objective)
            .finish()
    }
}

impl DiffProblem {
    pub fn symbols(&self) -> SymbolTable {
        SymbolTable { unknowns: self.unknowns.len(), scalars: self.scalars.iter().map(|s| s.name.clone()).collect() }
    }

    pub fn is_ocp(&self) -> bool {
        !self.dynamics.is_empty()
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        self.domain.validate()?;
        let bad = |m: String| Err(CoreError::Problem(format!("{}: {m}", self.name)));
        if self.unknowns.is_empty() {
            return bad("no unknowns".into());
        }
        for u in &self.unknowns {
            if !(u.lbd < u.ubd) || !u.lbd.is_finite() || !u.ubd.is_finite() {
                return bad(format!("bounds of {} must be finite with lbd < ubd", u.name));
            }
        }
        for s in &self.scalars {
            if !(s.lbd < s.ubd) || !s.lbd.is_finite() || !s.ubd.is_finite() {
                return bad(format!("bounds of {} must be finite with lbd < ubd", s.name));
            }
        }
        for o in &self.overrides {
            if o.unknown >= self.unknowns.len() || !(o.lbd < o.ubd) {
                return bad(format!("bad bound override {o:?}"));
            }
        }
        let syms = self.symbols();
        let n = syms.len();
        let eqs = self.interior.iter().chain(self.boundary.iter().map(|b| &b.eq));
        for e in eqs {
            if e.lhs.nvars() != n {
                return bad("equation over the wrong symbol table".into());
            }
            if self.domain.dims == 1 {
                for s in e.lhs.support_vars() {
                    let nm = syms.name(s);
                    if nm == "y" || nm.ends_with("_y") || nm.ends_with("_yy") {
                        return bad(format!("symbol {nm} used in a 1-D problem"));
                    }
                }
            }
        }
        for b in &self.boundary {
            if self.domain.dims == 1 && matches!(b.face, Face::YMin | Face::YMax) {
                return bad("y-face boundary condition in a 1-D problem".into());
            }
        }
        for d in &self.dynamics {
            if self.domain.dims != 1 || d.state >= self.unknowns.len() || d.rhs.nvars() != n {
                return bad("dynamics need a 1-D domain and a valid state".into());
            }
            for s in d.rhs.support_vars() {
                if s < 5 * self.unknowns.len() && s % 5 != 0 {
                    return bad("dynamics right-hand sides may not contain derivatives".into());
                }
            }
        }
        match &self.objective {
            Objective::NegSum(ks) if ks.iter().any(|&k| k >= self.unknowns.len()) => bad("objective unknown".into()),
            Objective::Midpoint(k) if *k >= self.unknowns.len() => bad("objective unknown".into()),
            Objective::Integral(p) if p.nvars() != n => bad("objective over the wrong symbol table".into()),
            Objective::FreeTime(j) if *j >= self.scalars.len() => bad("objective scalar".into()),
            _ => Ok(()),
        }
    }

    /// Bounds of unknown `k` at the point `(x, y)`.
    pub fn bounds_at(&self, k: usize, x: f64, y: f64) -> (f64, f64) {
        let mut b = (self.unknowns[k].lbd, self.unknowns[k].ubd);
        for o in self.overrides.iter().filter(|o| o.unknown == k) {
            let tol = 1e-12 * (1.0 + x.abs().max(y.abs()));
            let inside = x >= o.x_range.0 - tol
                && x <= o.x_range.1 + tol
                && (self.domain.dims == 1 || (y >= o.y_range.0 - tol && y <= o.y_range.1 + tol));
            if inside {
                b = (b.0.max(o.lbd), b.1.min(o.ubd));
            }
        }
        b
    }
}

/// Rectangular grid with `nx × ny` nodes (`ny = 1` in 1-D).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub domain: Domain,
    pub nx: usize,
    pub ny: usize,
}

impl Grid {
    pub fn new(domain: Domain, nx: usize, ny: usize) -> Result<Self, CoreError> {
        domain.validate()?;
        let ny = if domain.dims == 1 { 1 } else { ny };
        if nx < 3 || (domain.dims == 2 && ny < 3) {
            return Err(CoreError::Problem(format!("grid {nx}×{ny} too small, need at least 3 nodes per axis")));
        }
        Ok(Self { domain, nx, ny })
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        (self.domain.x_max - self.domain.x_min) / (self.nx - 1) as f64
    }

    pub fn dy(&self) -> f64 {
        if self.domain.dims == 1 {
            1.0
        } else {
            (self.domain.y_max - self.domain.y_min) / (self.ny - 1) as f64
        }
    }

    pub fn x(&self, i: usize) -> f64 {
        if i + 1 == self.nx {
            self.domain.x_max
        } else {
            self.domain.x_min + i as f64 * self.dx()
        }
    }

    pub fn y(&self, j: usize) -> f64 {
        if self.domain.dims == 1 {
            0.0
        } else if j + 1 == self.ny {
            self.domain.y_max
        } else {
            self.domain.y_min + j as f64 * self.dy()
        }
    }

    /// Flat node index, x fastest.
    pub fn node(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn coords(&self, node: usize) -> (usize, usize) {
        (node % self.nx, node / self.nx)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub grid: Grid,
    /// `values[k][node]`.
    pub values: Vec<Vec<f64>>,
    pub scalars: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<Vec<f64>>, scalars: Vec<f64>) -> Result<Self, CoreError> {
        for v in &values {
            if v.len() != grid.len() {
                return Err(CoreError::Problem(format!("grid function has {} values, grid has {}", v.len(), grid.len())));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(CoreError::Problem("grid function has non-finite values".into()));
            }
        }
        Ok(Self { grid, values, scalars })
    }

    pub fn sample(grid: Grid, f: &[Sampler]) -> Self {
        let values = f
            .iter()
            .map(|f| (0..grid.len()).map(|n| {
                let (i, j) = grid.coords(n);
                f(grid.x(i), grid.y(j))
            }).collect())
            .collect();
        Self { grid, values, scalars: Vec::new() }
    }

    pub fn at(&self, k: usize, i: usize, j: usize) -> f64 {
        self.values[k][self.grid.node(i, j)]
    }
}

/// Record of the substitution `x = x_min + x_len·s` (and likewise for y).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleReport {
    pub x_min: f64,
    pub x_len: f64,
    pub y_min: f64,
    pub y_len: f64,
}

impl ScaleReport {
    pub fn to_original(&self, s: f64, t: f64) -> (f64, f64) {
        (self.x_min + self.x_len * s, self.y_min + self.y_len * t)
    }

    pub fn to_unit(&self, x: f64, y: f64) -> (f64, f64) {
        ((x - self.x_min) / self.x_len, (y - self.y_min) / self.y_len)
    }
}

fn sym_var(n: usize, s: usize) -> Polynomial {
    Polynomial::var(n, s).expect("symbol in range")
}

fn identity_subs(n: usize) -> Vec<Polynomial> {
    (0..n).map(|s| sym_var(n, s)).collect()
}

fn compose(p: &Polynomial, subs: &[Polynomial]) -> Polynomial {
    p.compose(subs, subs.len()).expect("substitution matches symbol table")
}

fn map_equations(p: &mut DiffProblem, subs: &[Polynomial], rhs_map: impl Fn(&Rhs) -> Rhs) {
    for e in p.interior.iter_mut().chain(p.boundary.iter_mut().map(|b| &mut b.eq)) {
        e.lhs = compose(&e.lhs, subs);
        e.rhs = rhs_map(&e.rhs);
    }
}

/// Rewrites `p` in `ũ = u − lbd` for every unknown with a negative lower
/// bound. Returns the applied shift per unknown.
///
/// `neg_sum` and `midpoint` objective values change by a constant.
pub fn shift_to_nonnegative(p: &DiffProblem) -> (DiffProblem, Vec<f64>) {
    let shift: Vec<f64> = p.unknowns.iter().map(|u| if u.lbd < 0.0 { u.lbd } else { 0.0 }).collect();
    let mut q = p.clone();
    if shift.iter().all(|&s| s == 0.0) {
        return (q, shift);
    }
    let syms = p.symbols();
    let n = syms.len();
    let mut subs = identity_subs(n);
    for (k, &s) in shift.iter().enumerate() {
        subs[syms.u(k, Deriv::Value)] = sym_var(n, syms.u(k, Deriv::Value)).add_constant(s);
    }
    map_equations(&mut q, &subs, |r| r.clone());
    for d in &mut q.dynamics {
        d.rhs = compose(&d.rhs, &subs);
    }
    if let Objective::Integral(f) = &q.objective {
        q.objective = Objective::Integral(compose(f, &subs));
    }
    for (u, &s) in q.unknowns.iter_mut().zip(&shift) {
        u.lbd -= s;
        u.ubd -= s;
    }
    for o in &mut q.overrides {
        o.lbd -= shift[o.unknown];
        o.ubd -= shift[o.unknown];
    }
    for (r, &s) in q.reference.iter_mut().zip(&shift) {
        if let Some(f) = r.take() {
            *r = Some(Arc::new(move |x, y| f(x, y) - s));
        }
    }
    (q, shift)
}

/// Maps the domain affinely onto `[0,1]^dims`, rescaling derivative symbols
/// by the chain rule.
pub fn scale_domain_to_unit(p: &DiffProblem) -> (DiffProblem, ScaleReport) {
    let d = p.domain;
    let two_d = d.dims == 2;
    let rep = ScaleReport {
        x_min: d.x_min,
        x_len: d.x_max - d.x_min,
        y_min: if two_d { d.y_min } else { 0.0 },
        y_len: if two_d { d.y_max - d.y_min } else { 1.0 },
    };
    let mut q = p.clone();
    q.domain = if two_d { Domain::rectangle(0.0, 1.0, 0.0, 1.0) } else { Domain::interval(0.0, 1.0) };
    if d.is_unit() {
        return (q, rep);
    }
    let syms = p.symbols();
    let n = syms.len();
    let mut subs = identity_subs(n);
    for k in 0..p.unknowns.len() {
        let f = [
            (Deriv::X, 1.0 / rep.x_len),
            (Deriv::Xx, 1.0 / (rep.x_len * rep.x_len)),
            (Deriv::Y, 1.0 / rep.y_len),
            (Deriv::Yy, 1.0 / (rep.y_len * rep.y_len)),
        ];
        for (dv, c) in f {
            let s = syms.u(k, dv);
            subs[s] = sym_var(n, s).scale(c);
        }
    }
    subs[syms.x()] = sym_var(n, syms.x()).scale(rep.x_len).add_constant(rep.x_min);
    subs[syms.y()] = sym_var(n, syms.y()).scale(rep.y_len).add_constant(rep.y_min);
    let map_fn = move |f: &Sampler| -> Sampler {
        let f = f.clone();
        Arc::new(move |s, t| {
            let (x, y) = rep.to_original(s, t);
            f(x, y)
        })
    };
    map_equations(&mut q, &subs, |r| match r {
        Rhs::Const(c) => Rhs::Const(*c),
        Rhs::Func(f) => Rhs::Func(map_fn(f)),
    });
    for dy in &mut q.dynamics {
        dy.rhs = compose(&dy.rhs, &subs).scale(rep.x_len);
    }
    if let Objective::Integral(f) = &q.objective {
        q.objective = Objective::Integral(compose(f, &subs).scale(rep.x_len * if two_d { rep.y_len } else { 1.0 }));
    }
    for o in &mut q.overrides {
        let (a, c) = rep.to_unit(o.x_range.0, o.y_range.0);
        let (b, e) = rep.to_unit(o.x_range.1, o.y_range.1);
        o.x_range = (a, b);
        o.y_range = (c, e);
    }
    for r in q.reference.iter_mut() {
        if let Some(f) = r.take() {
            *r = Some(map_fn(&f));
        }
    }
    (q, rep)
}

/// The benchmark presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PresetName {
    LinearOde,
    LinearPde,
    EllipticBifur,
    ReactionDiffusion,
    ProdConsumption,
    DoubleIntegrator,
}

impl PresetName {
    pub const ALL: [PresetName; 6] = [
        PresetName::LinearOde,
        PresetName::LinearPde,
        PresetName::EllipticBifur,
        PresetName::ReactionDiffusion,
        PresetName::ProdConsumption,
        PresetName::DoubleIntegrator,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PresetName::LinearOde => "linear_ode",
            PresetName::LinearPde => "linear_pde",
            PresetName::EllipticBifur => "elliptic_bifur",
            PresetName::ReactionDiffusion => "reaction_diffusion",
            PresetName::ProdConsumption => "prod_consumption",
            PresetName::DoubleIntegrator => "double_integrator",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            PresetName::LinearOde => "u'' + 3u' + 2u = 0 on [0,1], Neumann data, F = -Σu",
            PresetName::LinearPde => "Δu = 2e^(x+y) on [0,1]², Dirichlet data e^(x+y), F = -Σu",
            PresetName::EllipticBifur => "Δu + 22u(1-u²) = 0 on [0,1]², u = 0 on the boundary, 0 ≤ u ≤ 1",
            PresetName::ReactionDiffusion => "two-species reaction-diffusion on [0,5], zero flux, F = -u(mid)",
            PresetName::ProdConsumption => "max ∫(1-u)x dt, x' = ux, x(0) = 0.25, 0 ≤ u ≤ 1, T = 4",
            PresetName::DoubleIntegrator => "min T, x1' = x2, x2' = u, |u| ≤ 1, x(0) = (0.8,-1), x(T) = 0",
        }
    }
}

impl std::str::FromStr for PresetName {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PresetName::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| CoreError::Lookup(format!("unknown preset `{s}`")))
    }
}

impl fmt::Display for PresetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

fn eq(syms: &SymbolTable, lhs: &str, rhs: Rhs) -> Equation {
    Equation { lhs: syms.parse(lhs).expect("preset equation parses"), rhs }
}

fn unknown(name: &str, lbd: f64, ubd: f64) -> Unknown {
    Unknown { name: name.into(), lbd, ubd }
}

/// Looks a preset up by name.
pub fn preset_by_name(name: &str) -> Result<DiffProblem, CoreError> {
    Ok(preset(name.parse()?))
}

pub fn preset(name: PresetName) -> DiffProblem {
    let e2 = std::f64::consts::E.powi(2);
    let syms1 = SymbolTable { unknowns: 1, scalars: vec![] };
    let syms2 = SymbolTable { unknowns: 2, scalars: vec![] };
    let base = |domain: Domain, unknowns: Vec<Unknown>, objective: Objective| DiffProblem {
        name: name.as_str().into(),
        domain,
        reference: vec![None; unknowns.len()],
        unknowns,
        scalars: vec![],
        interior: vec![],
        boundary: vec![],
        dynamics: vec![],
        scheme: OcpScheme::default(),
        overrides: vec![],
        objective,
    };
    match name {
        PresetName::LinearOde => {
            let mut p = base(Domain::interval(0.0, 1.0), vec![unknown("u", 0.0, 10.0)], Objective::NegSum(vec![0]));
            p.interior.push(eq(&syms1, "u0_xx + 3 u0_x + 2 u0", Rhs::Const(0.0)));
            p.boundary.push(BoundaryEq { face: Face::XMin, eq: eq(&syms1, "u0_x", Rhs::Const(-2.0 * e2)) });
            p.boundary.push(BoundaryEq { face: Face::XMax, eq: eq(&syms1, "u0_x", Rhs::Const(-2.0)) });
            p.reference[0] = Some(Arc::new(move |x, _| e2 * (-2.0 * x).exp()));
            p
        }
        PresetName::LinearPde => {
            let mut p = base(
                Domain::rectangle(0.0, 1.0, 0.0, 1.0),
                vec![unknown("u", 0.0, 10.0)],
                Objective::NegSum(vec![0]),
            );
            let exy: Sampler = Arc::new(|x: f64, y: f64| (x + y).exp());
            let forcing: Sampler = Arc::new(|x: f64, y: f64| 2.0 * (x + y).exp());
            p.interior.push(eq(&syms1, "u0_xx + u0_yy", Rhs::Func(forcing)));
            for face in [Face::XMin, Face::XMax, Face::YMin, Face::YMax] {
                p.boundary.push(BoundaryEq { face, eq: eq(&syms1, "u0", Rhs::Func(exy.clone())) });
            }
            p.reference[0] = Some(exy);
            p
        }
        PresetName::EllipticBifur => {
            let mut p = base(
                Domain::rectangle(0.0, 1.0, 0.0, 1.0),
                vec![unknown("u", 0.0, 1.0)],
                Objective::NegSum(vec![0]),
            );
            p.interior.push(eq(&syms1, "u0_xx + u0_yy + 22 u0 (1 - u0^2)", Rhs::Const(0.0)));
            for face in [Face::XMin, Face::XMax, Face::YMin, Face::YMax] {
                p.boundary.push(BoundaryEq { face, eq: eq(&syms1, "u0", Rhs::Const(0.0)) });
            }
            p
        }
        PresetName::ReactionDiffusion => {
            let mut p = base(
                Domain::interval(0.0, 5.0),
                vec![unknown("u", 0.0, 14.0), unknown("v", 0.0, 14.0)],
                Objective::Midpoint(0),
            );
            p.interior.push(eq(&syms2, "1/20 u0_xx + 1/9 (35 + 16 u0 - u0^2) u0 - u0 u1", Rhs::Const(0.0)));
            p.interior.push(eq(&syms2, "4 u1_xx - (1 + 2/5 u1) u1 + u0 u1", Rhs::Const(0.0)));
            for face in [Face::XMin, Face::XMax] {
                p.boundary.push(BoundaryEq { face, eq: eq(&syms2, "u0_x", Rhs::Const(0.0)) });
                p.boundary.push(BoundaryEq { face, eq: eq(&syms2, "u1_x", Rhs::Const(0.0)) });
            }
            p
        }
        PresetName::ProdConsumption => {
            let mut p = base(
                Domain::interval(0.0, 4.0),
                vec![unknown("x", 0.0, 10.0), unknown("u", 0.0, 1.0)],
                Objective::Integral(syms2.parse("-(1 - u1) u0").unwrap()),
            );
            p.dynamics.push(Dynamics { state: 0, rhs: syms2.parse("u1 u0").unwrap() });
            p.boundary.push(BoundaryEq { face: Face::XMin, eq: eq(&syms2, "u0", Rhs::Const(0.25)) });
            p.overrides.push(BoundOverride { unknown: 0, x_range: (0.0, 1.0), y_range: (0.0, 1.0), lbd: 0.0, ubd: 1.0 });
            p.reference[0] = Some(Arc::new(|t: f64, _| 0.25 * t.min(3.0).exp()));
            p.reference[1] = Some(Arc::new(|t: f64, _| if t <= 3.0 { 1.0 } else { 0.0 }));
            p
        }
        PresetName::DoubleIntegrator => {
            let syms = SymbolTable { unknowns: 3, scalars: vec!["T".into()] };
            let mut p = base(
                Domain::interval(0.0, 1.0),
                vec![unknown("x1", -1.0, 10.0), unknown("x2", -1.0, 10.0), unknown("u", -1.0, 1.0)],
                Objective::FreeTime(0),
            );
            p.scalars.push(ScalarVar { name: "T".into(), lbd: 0.1, ubd: 5.0 });
            p.dynamics.push(Dynamics { state: 0, rhs: syms.parse("T u1").unwrap() });
            p.dynamics.push(Dynamics { state: 1, rhs: syms.parse("T u2").unwrap() });
            p.boundary.push(BoundaryEq { face: Face::XMin, eq: eq(&syms, "u0", Rhs::Const(0.8)) });
            p.boundary.push(BoundaryEq { face: Face::XMin, eq: eq(&syms, "u1", Rhs::Const(-1.0)) });
            p.boundary.push(BoundaryEq { face: Face::XMax, eq: eq(&syms, "u0", Rhs::Const(0.0)) });
            p.boundary.push(BoundaryEq { face: Face::XMax, eq: eq(&syms, "u1", Rhs::Const(0.0)) });
            p
        }
    }
}
