//! Primal-dual interior-point method for [`SdpInstance`].
//!
//! Infeasible-start Mehrotra predictor-corrector with Nesterov–Todd scaling on
//! the PSD blocks. Each iteration assembles the Schur complement block by
//! block (dense per block) and solves the quasi-definite system
//! `[H Eᵀ; E 0]` with one sparse LDLᵀ factorization shared by predictor and
//! corrector.

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::instance::SdpInstance;
use crate::linsolve::{SymFactor, SymPattern};
use crate::rowreduce::independent_rows;
use crate::ConicError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    pub tol_feas: f64,
    pub tol_gap: f64,
    pub tol_psd: f64,
    pub max_iter: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self { tol_feas: 1e-7, tol_gap: 1e-7, tol_psd: 1e-8, max_iter: 100 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Optimal,
    NearOptimal,
    Infeasible,
    Unbounded,
    MaxIter,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Optimal => "optimal",
            Status::NearOptimal => "near_optimal",
            Status::Infeasible => "infeasible",
            Status::Unbounded => "unbounded",
            Status::MaxIter => "max_iter",
        }
    }

    pub fn is_usable(self) -> bool {
        matches!(self, Status::Optimal | Status::NearOptimal)
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Relative residuals.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Residuals {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterRecord {
    pub iter: usize,
    pub pobj: f64,
    pub dobj: f64,
    pub gap: f64,
    pub pres: f64,
    pub dres: f64,
    pub alpha_p: f64,
    pub alpha_d: f64,
}

impl fmt::Display for IterRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:3} {:+.8e} {:+.8e} {:.2e} {:.2e} {:.2e} {:.3} {:.3}",
            self.iter, self.pobj, self.dobj, self.gap, self.pres, self.dres, self.alpha_p, self.alpha_d
        )
    }
}

#[derive(Debug, Clone)]
pub struct ConicSolution {
    pub y: Vec<f64>,
    /// `F0_k + Σ y_i F_ik` per block.
    pub block_matrices: Vec<DMatrix<f64>>,
    /// Dual PSD blocks.
    pub multipliers: Vec<DMatrix<f64>>,
    pub lin_dual: Vec<f64>,
    pub eq_dual: Vec<f64>,
    pub objective_value: f64,
    pub dual_value: f64,
    pub status: Status,
    pub residuals: Residuals,
    pub iterations: usize,
    pub log: Vec<IterRecord>,
}

/// Anything that can solve an [`SdpInstance`].
pub trait ConicBackend {
    fn solve(&self, sdp: &SdpInstance, settings: &SolverSettings) -> Result<ConicSolution, ConicError>;
}

/// The built-in interior-point solver.
#[derive(Debug, Clone, Copy, Default)]
pub struct InteriorPoint;

impl ConicBackend for InteriorPoint {
    fn solve(&self, sdp: &SdpInstance, settings: &SolverSettings) -> Result<ConicSolution, ConicError> {
        solve(sdp, settings)
    }
}

struct Block {
    n: usize,
    vars: Vec<usize>,
    /// Full (both triangles) coefficient entries per local variable.
    mats: Vec<Vec<(usize, usize, f64)>>,
    f0: DMatrix<f64>,
    /// KKT value positions for local pairs (i <= j), row-major p×p.
    kkt: Vec<usize>,
}

impl Block {
    fn build(sdp: &SdpInstance, k: usize) -> Block {
        let b = &sdp.blocks[k];
        let n = b.dim;
        let mut vars: Vec<usize> = b.entries.iter().filter_map(|e| e.var).collect();
        vars.sort_unstable();
        vars.dedup();
        let mut mats = vec![Vec::new(); vars.len()];
        let mut f0 = DMatrix::zeros(n, n);
        for e in &b.entries {
            match e.var {
                None => {
                    f0[(e.i, e.j)] += e.val;
                    if e.i != e.j {
                        f0[(e.j, e.i)] += e.val;
                    }
                }
                Some(v) => {
                    let l = vars.binary_search(&v).unwrap();
                    mats[l].push((e.i, e.j, e.val));
                    if e.i != e.j {
                        mats[l].push((e.j, e.i, e.val));
                    }
                }
            }
        }
        Block { n, vars, mats, f0, kkt: Vec::new() }
    }

    fn apply(&self, y: &[f64], out: &mut DMatrix<f64>) {
        out.fill(0.0);
        for (l, m) in self.mats.iter().enumerate() {
            let yv = y[self.vars[l]];
            if yv != 0.0 {
                for &(a, b, f) in m {
                    out[(a, b)] += f * yv;
                }
            }
        }
    }

    fn adjoint(&self, z: &DMatrix<f64>, out: &mut [f64]) {
        for (l, m) in self.mats.iter().enumerate() {
            out[self.vars[l]] += m.iter().map(|&(a, b, f)| f * z[(a, b)]).sum::<f64>();
        }
    }
}

struct Scaling {
    g: DMatrix<f64>,
    w: DMatrix<f64>,
    lam: DVector<f64>,
    ls: DMatrix<f64>,
    lx: DMatrix<f64>,
}

fn nt_scaling(s: &DMatrix<f64>, x: &DMatrix<f64>) -> Option<Scaling> {
    let ls = s.clone().cholesky()?.l();
    let lx = x.clone().cholesky()?.l();
    let svd = (ls.transpose() * &lx).svd(false, true);
    let vt = svd.v_t?;
    let sig = svd.singular_values;
    if sig.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
        return None;
    }
    let mut g = &lx * vt.transpose();
    for (j, &sv) in sig.iter().enumerate() {
        let f = 1.0 / sv.sqrt();
        g.column_mut(j).scale_mut(f);
    }
    let w = &g * g.transpose();
    Some(Scaling { g, w, lam: sig, ls, lx })
}

/// Largest step in [0, ∞) keeping `L Lᵀ + α D` positive definite.
fn max_step_psd(l: &DMatrix<f64>, d: &DMatrix<f64>) -> f64 {
    let n = l.nrows();
    let Some(a) = l.solve_lower_triangular(d) else { return 0.0 };
    let Some(t) = l.solve_lower_triangular(&a.transpose()) else { return 0.0 };
    let t = (&t + t.transpose()) * 0.5;
    let ev = if n == 1 { t[(0, 0)] } else { t.symmetric_eigenvalues().min() };
    if ev < 0.0 {
        -1.0 / ev
    } else {
        f64::INFINITY
    }
}

fn max_step_lp(v: &[f64], d: &[f64]) -> f64 {
    v.iter().zip(d).filter(|(_, &di)| di < 0.0).map(|(&vi, &di)| -vi / di).fold(f64::INFINITY, f64::min)
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

fn mat_inf(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a, x| a.max(x.abs()))
}

fn inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// Equilibrated, regularized KKT factorization. The static regularization
/// starts small and is raised whenever the factorization breaks down or the
/// refined solve stays inaccurate.
struct Kkt<'a> {
    factor: &'a mut SymFactor,
    pattern: &'a SymPattern,
    svals: Vec<f64>,
    dscale: Vec<f64>,
    signs: &'a [i8],
    reg: f64,
}

const KKT_REG_MIN: f64 = 1e-12;
const KKT_REG_MAX: f64 = 1e-6;

impl<'a> Kkt<'a> {
    fn new(factor: &'a mut SymFactor, pattern: &'a SymPattern, vals: &[f64], signs: &'a [i8]) -> Self {
        let dscale = pattern.equilibrate(vals, 10);
        let svals = pattern.scale_values(vals, &dscale);
        Self { factor, pattern, svals, dscale, signs, reg: KKT_REG_MIN }
    }

    fn try_factor(&mut self) -> bool {
        let mut fvals = self.svals.clone();
        for (i, &sg) in self.signs.iter().enumerate() {
            fvals[self.pattern.diag_index(i)] += f64::from(sg) * self.reg;
        }
        self.factor.factor_ldlt(&fvals, self.signs, 2e-7, 1e-13).is_ok()
    }

    fn refactor(&mut self) -> bool {
        while self.reg <= KKT_REG_MAX {
            if self.try_factor() {
                return true;
            }
            self.reg *= 100.0;
        }
        false
    }

    fn solve(&mut self, rhs: &[f64]) -> Option<Vec<f64>> {
        let srhs: Vec<f64> = rhs.iter().zip(&self.dscale).map(|(b, d)| b * d).collect();
        let tol = 1e-8 * (1.0 + srhs.iter().map(|v| v * v).sum::<f64>().sqrt());
        let mut best: Option<(f64, Vec<f64>)> = None;
        loop {
            if let Ok((x, res)) = self.factor.solve_gmres(&self.svals, &srhs, 40, 3, 1e-6 * tol) {
                if best.as_ref().is_none_or(|b| res < b.0) {
                    best = Some((res, x));
                }
                if res <= tol {
                    break;
                }
            }
            self.reg *= 100.0;
            if !self.refactor() {
                break;
            }
        }
        best.map(|(_, x)| x.iter().zip(&self.dscale).map(|(v, d)| v * d).collect())
    }
}

struct Lp {
    rows: Vec<Vec<(usize, f64)>>,
    b: Vec<f64>,
    /// KKT positions for pairs within each row, row-major len×len.
    kkt: Vec<Vec<usize>>,
}

impl Lp {
    fn apply(&self, y: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|r| r.iter().map(|&(v, a)| a * y[v]).sum()).collect()
    }

    fn adjoint(&self, z: &[f64], out: &mut [f64]) {
        for (r, &zr) in self.rows.iter().zip(z) {
            for &(v, a) in r {
                out[v] += a * zr;
            }
        }
    }
}

struct State {
    y: Vec<f64>,
    s: Vec<DMatrix<f64>>,
    x: Vec<DMatrix<f64>>,
    sl: Vec<f64>,
    xl: Vec<f64>,
    lam: Vec<f64>,
}

struct Direction {
    dy: Vec<f64>,
    dlam: Vec<f64>,
    ds: Vec<DMatrix<f64>>,
    dx: Vec<DMatrix<f64>>,
    dsl: Vec<f64>,
    dxl: Vec<f64>,
}

pub fn solve(sdp: &SdpInstance, settings: &SolverSettings) -> Result<ConicSolution, ConicError> {
    sdp.validate()?;
    let n = sdp.nvars;
    let c_raw = sdp.objective_dense();
    let cscale = inf_norm(&c_raw).max(1.0);
    let c: Vec<f64> = c_raw.iter().map(|v| v / cscale).collect();

    let mut blocks: Vec<Block> = (0..sdp.blocks.len()).map(|k| Block::build(sdp, k)).collect();
    let mut lp = Lp {
        rows: sdp.lin.iter().map(|r| r.coefs.clone()).collect(),
        b: sdp.lin.iter().map(|r| r.constant).collect(),
        kkt: Vec::new(),
    };
    // dependent equality rows make the KKT system singular
    let eq_keep = independent_rows(&sdp.eq, 1e-9);
    let erows: Vec<Vec<(usize, f64)>> = eq_keep.iter().map(|&r| sdp.eq[r].coefs.clone()).collect();
    let e0: Vec<f64> = eq_keep.iter().map(|&r| sdp.eq[r].constant).collect();
    let m = erows.len();

    // KKT pattern
    let mut pairs = Vec::new();
    for b in &blocks {
        for (i, &vi) in b.vars.iter().enumerate() {
            for &vj in &b.vars[i..] {
                pairs.push((vi, vj));
            }
        }
    }
    for r in &lp.rows {
        for (i, &(vi, _)) in r.iter().enumerate() {
            for &(vj, _) in &r[i..] {
                pairs.push((vi, vj));
            }
        }
    }
    for (r, row) in erows.iter().enumerate() {
        for &(v, _) in row {
            pairs.push((v, n + r));
        }
    }
    let pattern = SymPattern::new(n + m, pairs);
    for b in &mut blocks {
        let p = b.vars.len();
        b.kkt = vec![usize::MAX; p * p];
        for i in 0..p {
            for j in i..p {
                b.kkt[i * p + j] = pattern.index(b.vars[i], b.vars[j]).unwrap();
            }
        }
    }
    lp.kkt = lp
        .rows
        .iter()
        .map(|r| {
            let q = r.len();
            let mut idx = vec![0; q * q];
            for i in 0..q {
                for j in 0..q {
                    idx[i * q + j] = pattern.index(r[i].0, r[j].0).unwrap();
                }
            }
            idx
        })
        .collect();
    let eq_kkt: Vec<Vec<usize>> =
        erows.iter().enumerate().map(|(r, row)| row.iter().map(|&(v, _)| pattern.index(v, n + r).unwrap()).collect()).collect();
    let mut factor = SymFactor::analyze(pattern.clone()).map_err(|e| ConicError::Numerical(e.to_string()))?;
    let signs: Vec<i8> = (0..n + m).map(|i| if i < n { 1 } else { -1 }).collect();

    let nu = blocks.iter().map(|b| b.n).sum::<usize>() + lp.rows.len();
    let nu_f = (nu as f64).max(1.0);
    let data_scale = 1.0
        + blocks.iter().map(|b| mat_inf(&b.f0)).fold(0.0, f64::max).max(inf_norm(&lp.b)).max(inf_norm(&e0));
    let c_norm = 1.0 + inf_norm(&c);

    let mut st = State {
        y: vec![0.0; n],
        s: blocks.iter().map(|b| DMatrix::identity(b.n, b.n)).collect(),
        x: blocks.iter().map(|b| DMatrix::identity(b.n, b.n)).collect(),
        sl: vec![1.0; lp.rows.len()],
        xl: vec![1.0; lp.rows.len()],
        lam: vec![0.0; m],
    };

    let mut log = Vec::new();
    let mut best: Option<(f64, State, Residuals, f64)> = None;
    let mut status = Status::MaxIter;
    let mut iterations = 0;
    let mut stall = 0;
    let mut tmp = DMatrix::zeros(0, 0);

    for it in 0..=settings.max_iter {
        iterations = it;
        // residuals
        let mut rp: Vec<DMatrix<f64>> = Vec::with_capacity(blocks.len());
        for (k, b) in blocks.iter().enumerate() {
            if tmp.nrows() != b.n {
                tmp = DMatrix::zeros(b.n, b.n);
            }
            b.apply(&st.y, &mut tmp);
            rp.push(&b.f0 + &tmp - &st.s[k]);
        }
        let aly = lp.apply(&st.y);
        let rpl: Vec<f64> = (0..lp.rows.len()).map(|r| lp.b[r] + aly[r] - st.sl[r]).collect();
        let re: Vec<f64> = erows
            .iter()
            .zip(&e0)
            .map(|(row, &f)| -(f + row.iter().map(|&(v, a)| a * st.y[v]).sum::<f64>()))
            .collect();
        let mut rd = c.clone();
        {
            let mut adj = vec![0.0; n];
            for (k, b) in blocks.iter().enumerate() {
                b.adjoint(&st.x[k], &mut adj);
            }
            lp.adjoint(&st.xl, &mut adj);
            for (row, &l) in erows.iter().zip(&st.lam) {
                for &(v, a) in row {
                    adj[v] += a * l;
                }
            }
            for (r, a) in rd.iter_mut().zip(&adj) {
                *r -= a;
            }
        }
        let comp: f64 = (0..blocks.len()).map(|k| inner(&st.x[k], &st.s[k])).sum::<f64>()
            + st.xl.iter().zip(&st.sl).map(|(a, b)| a * b).sum::<f64>();
        let mu = comp / nu_f;
        let pobj = c.iter().zip(&st.y).map(|(a, b)| a * b).sum::<f64>();
        let dobj = -(0..blocks.len()).map(|k| inner(&blocks[k].f0, &st.x[k])).sum::<f64>()
            - lp.b.iter().zip(&st.xl).map(|(a, b)| a * b).sum::<f64>()
            - e0.iter().zip(&st.lam).map(|(a, b)| a * b).sum::<f64>();
        let pres = rp.iter().map(mat_inf).fold(inf_norm(&rpl).max(inf_norm(&re)), f64::max) / data_scale;
        let dres = inf_norm(&rd) / c_norm;
        let gap = (pobj - dobj).abs().max(comp.max(0.0)) / (1.0 + pobj.abs() + dobj.abs());
        let res = Residuals { primal: pres, dual: dres, gap };
        let merit = pres.max(dres).max(gap);
        let is_better = best.as_ref().is_none_or(|b| merit < b.0);
        if is_better {
            best = Some((
                merit,
                State {
                    y: st.y.clone(),
                    s: st.s.clone(),
                    x: st.x.clone(),
                    sl: st.sl.clone(),
                    xl: st.xl.clone(),
                    lam: st.lam.clone(),
                },
                res,
                dobj,
            ));
        }
        if pres <= settings.tol_feas && dres <= settings.tol_feas && gap <= settings.tol_gap {
            status = Status::Optimal;
            log.push(IterRecord { iter: it, pobj: pobj * cscale, dobj: dobj * cscale, gap, pres, dres, alpha_p: 0.0, alpha_d: 0.0 });
            break;
        }
        let dual_size = st.x.iter().map(mat_inf).fold(inf_norm(&st.xl).max(inf_norm(&st.lam)), f64::max);
        if dual_size > 1e12 && dobj > 1e8 * (1.0 + pobj.abs()) && pres > settings.tol_feas {
            status = Status::Infeasible;
            break;
        }
        if inf_norm(&st.y) > 1e12 && pobj < -1e8 * (1.0 + dobj.abs()) && dres > settings.tol_feas {
            status = Status::Unbounded;
            break;
        }
        if it == settings.max_iter || stall >= 5 {
            break;
        }

        // scaling
        let mut scal = Vec::with_capacity(blocks.len());
        let mut ok = true;
        for k in 0..blocks.len() {
            match nt_scaling(&st.s[k], &st.x[k]) {
                Some(sc) => scal.push(sc),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            break;
        }
        let dl: Vec<f64> = st.xl.iter().zip(&st.sl).map(|(x, s)| x / s).collect();

        // assemble KKT
        let mut vals = vec![0.0; pattern.nnz()];
        for (k, b) in blocks.iter().enumerate() {
            let w = &scal[k].w;
            let p = b.vars.len();
            let mut t = vec![DMatrix::<f64>::zeros(b.n, b.n); p];
            for (j, mj) in b.mats.iter().enumerate() {
                let tj = &mut t[j];
                for &(cc, d, f) in mj {
                    // tj += f * w[:, cc] w[d, :]
                    for col in 0..b.n {
                        let wd = f * w[(d, col)];
                        if wd != 0.0 {
                            for row in 0..b.n {
                                tj[(row, col)] += w[(row, cc)] * wd;
                            }
                        }
                    }
                }
            }
            for i in 0..p {
                for j in i..p {
                    let v: f64 = b.mats[i].iter().map(|&(a, bb, f)| f * t[j][(a, bb)]).sum();
                    vals[b.kkt[i * p + j]] += v;
                }
            }
        }
        for (r, row) in lp.rows.iter().enumerate() {
            let q = row.len();
            for i in 0..q {
                for j in i..q {
                    let pos = lp.kkt[r][i * q + j];
                    let v = dl[r] * row[i].1 * row[j].1;
                    // pairs with equal variables map to one diagonal slot
                    if i == j || row[i].0 != row[j].0 {
                        vals[pos] += v;
                    } else {
                        vals[pos] += 2.0 * v;
                    }
                }
            }
        }
        for (r, row) in erows.iter().enumerate() {
            for (q, &(_, a)) in row.iter().enumerate() {
                vals[eq_kkt[r][q]] += a;
            }
        }
        let mut kkt = Kkt::new(&mut factor, &pattern, &vals, &signs);
        if !kkt.refactor() {
            break;
        }

        let mut solve_dir = |rc: &[DMatrix<f64>], rcl: &[f64]| -> Option<Direction> {
            let mut rhs = vec![0.0; n + m];
            for (k, b) in blocks.iter().enumerate() {
                let w = &scal[k].w;
                let z = &rc[k] - w * &rp[k] * w;
                b.adjoint(&z, &mut rhs[..n]);
            }
            let zl: Vec<f64> = (0..lp.rows.len()).map(|r| rcl[r] / st.sl[r] - dl[r] * rpl[r]).collect();
            lp.adjoint(&zl, &mut rhs[..n]);
            for i in 0..n {
                rhs[i] -= rd[i];
            }
            rhs[n..].copy_from_slice(&re);
            let sol = kkt.solve(&rhs)?;
            let dy = sol[..n].to_vec();
            let dlam: Vec<f64> = sol[n..].iter().map(|v| -v).collect();
            let mut ds = Vec::with_capacity(blocks.len());
            let mut dx = Vec::with_capacity(blocks.len());
            for (k, b) in blocks.iter().enumerate() {
                let mut a = DMatrix::zeros(b.n, b.n);
                b.apply(&dy, &mut a);
                let dsk = a + &rp[k];
                let w = &scal[k].w;
                let dxk = &rc[k] - w * &dsk * w;
                let dxk = (&dxk + dxk.transpose()) * 0.5;
                ds.push(dsk);
                dx.push(dxk);
            }
            let ady = lp.apply(&dy);
            let dsl: Vec<f64> = (0..lp.rows.len()).map(|r| ady[r] + rpl[r]).collect();
            let dxl: Vec<f64> = (0..lp.rows.len()).map(|r| rcl[r] / st.sl[r] - dl[r] * dsl[r]).collect();
            if dy.iter().chain(&dlam).any(|v| !v.is_finite()) {
                return None;
            }
            Some(Direction { dy, dlam, ds, dx, dsl, dxl })
        };

        let steps = |d: &Direction| -> (f64, f64) {
            let mut ap = max_step_lp(&st.sl, &d.dsl);
            let mut ad = max_step_lp(&st.xl, &d.dxl);
            for k in 0..blocks.len() {
                ap = ap.min(max_step_psd(&scal[k].ls, &d.ds[k]));
                ad = ad.min(max_step_psd(&scal[k].lx, &d.dx[k]));
            }
            (ap, ad)
        };

        // predictor
        let rc_aff: Vec<DMatrix<f64>> = st.x.iter().map(|x| -x).collect();
        let rcl_aff: Vec<f64> = st.xl.iter().zip(&st.sl).map(|(x, s)| -x * s).collect();
        let Some(aff) = solve_dir(&rc_aff, &rcl_aff) else { break };
        let (ap, ad) = steps(&aff);
        let (ap, ad) = (ap.min(1.0), ad.min(1.0));
        let mut comp_aff = 0.0;
        for k in 0..blocks.len() {
            comp_aff += inner(&(&st.x[k] + &aff.dx[k] * ad), &(&st.s[k] + &aff.ds[k] * ap));
        }
        for r in 0..lp.rows.len() {
            comp_aff += (st.xl[r] + ad * aff.dxl[r]) * (st.sl[r] + ap * aff.dsl[r]);
        }
        let mu_aff = comp_aff.max(0.0) / nu_f;
        let sigma = if mu > 0.0 { (mu_aff / mu).powi(3).clamp(0.0, 1.0) } else { 0.0 };

        // corrector
        let mut rc = Vec::with_capacity(blocks.len());
        for k in 0..blocks.len() {
            let sc = &scal[k];
            let nk = blocks[k].n;
            let dst = sc.g.transpose() * &aff.ds[k] * &sc.g;
            let mut dxt = -dst.clone();
            for i in 0..nk {
                dxt[(i, i)] -= sc.lam[i];
            }
            let prod = &dxt * &dst;
            let mut r = -(&prod + prod.transpose()) * 0.5;
            for i in 0..nk {
                r[(i, i)] += sigma * mu - sc.lam[i] * sc.lam[i];
            }
            let mut q = r;
            for i in 0..nk {
                for j in 0..nk {
                    q[(i, j)] *= 2.0 / (sc.lam[i] + sc.lam[j]);
                }
            }
            rc.push(&sc.g * q * sc.g.transpose());
        }
        let rcl: Vec<f64> = (0..lp.rows.len())
            .map(|r| sigma * mu - st.xl[r] * st.sl[r] - aff.dxl[r] * aff.dsl[r])
            .collect();
        let Some(dir) = solve_dir(&rc, &rcl) else { break };
        let (ap, ad) = steps(&dir);
        let gamma = 0.98;
        let ap = (gamma * ap).min(1.0);
        let ad = (gamma * ad).min(1.0);
        for i in 0..n {
            st.y[i] += ap * dir.dy[i];
        }
        for k in 0..blocks.len() {
            st.s[k] += &dir.ds[k] * ap;
            st.x[k] += &dir.dx[k] * ad;
            let s = (&st.s[k] + st.s[k].transpose()) * 0.5;
            st.s[k] = s;
            let x = (&st.x[k] + st.x[k].transpose()) * 0.5;
            st.x[k] = x;
        }
        for r in 0..lp.rows.len() {
            st.sl[r] += ap * dir.dsl[r];
            st.xl[r] += ad * dir.dxl[r];
        }
        for r in 0..m {
            st.lam[r] += ad * dir.dlam[r];
        }
        if ap.max(ad) < 1e-6 {
            stall += 1;
        } else {
            stall = 0;
        }
        log.push(IterRecord {
            iter: it,
            pobj: pobj * cscale,
            dobj: dobj * cscale,
            gap,
            pres,
            dres,
            alpha_p: ap,
            alpha_d: ad,
        });
    }

    let (_, final_state, residuals, dobj) = best.expect("at least one iterate is recorded");
    if status == Status::MaxIter {
        let loose = 1e3;
        let r = residuals;
        if r.primal <= loose * settings.tol_feas && r.dual <= loose * settings.tol_feas && r.gap <= loose * settings.tol_gap {
            status = Status::NearOptimal;
        }
    }

    let block_matrices = (0..blocks.len())
        .map(|k| {
            let mut a = DMatrix::zeros(blocks[k].n, blocks[k].n);
            blocks[k].apply(&final_state.y, &mut a);
            a + &blocks[k].f0
        })
        .collect();
    Ok(ConicSolution {
        objective_value: sdp.objective_value(&final_state.y),
        dual_value: dobj * cscale + sdp.objective_constant,
        y: final_state.y,
        block_matrices,
        multipliers: final_state.x.into_iter().map(|x| x * cscale).collect(),
        lin_dual: final_state.xl.iter().map(|v| v * cscale).collect(),
        eq_dual: {
            let mut d = vec![0.0; sdp.eq.len()];
            for (&r, v) in eq_keep.iter().zip(&final_state.lam) {
                d[r] = v * cscale;
            }
            d
        },
        status,
        residuals,
        iterations,
        log,
    })
}
