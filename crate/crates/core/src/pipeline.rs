//! End-to-end runs: discretize, relax, solve, refine (`run_sdpr`), then
//! maximum-entropy smoothing (`run_smooth`), and the output files.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use sdpsmooth_conic::SolverSettings;

use crate::discretize::{point_from_grid_function, residual, transcribe};
use crate::entropy::{
    discrete_moments, error_metrics, error_metrics_analytic, estimate_moments, evaluate_estimate, maxent_fit,
    EntropyEstimate, MaxentSettings, MomentRule, Quadrature,
};
use crate::problems::*;
use crate::refine::{refine, RefineSettings};
use crate::relaxation::{build_relaxation_with, csp_cliques_with, presolve, CliqueStrategy, RelaxOptions};
use crate::CoreError;

/// Where the problem comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSource {
    Preset(PresetName),
    File(PathBuf),
}

impl ProblemSource {
    pub fn load(&self) -> Result<DiffProblem, CoreError> {
        match self {
            ProblemSource::Preset(p) => Ok(preset(*p)),
            ProblemSource::File(path) => crate::load_problem_file(path),
        }
    }
}

impl std::str::FromStr for ProblemSource {
    type Err = CoreError;

    /// Preset names win over file paths.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.parse::<PresetName>() {
            Ok(p) => Ok(ProblemSource::Preset(p)),
            Err(_) if Path::new(s).exists() => Ok(ProblemSource::File(s.into())),
            Err(_) => Err(CoreError::Lookup(format!("`{s}` is neither a preset nor an existing problem file"))),
        }
    }
}

impl fmt::Display for ProblemSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProblemSource::Preset(p) => write!(f, "{p}"),
            ProblemSource::File(path) => write!(f, "{}", path.display()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub problem: ProblemSource,
    pub nx: usize,
    pub ny: usize,
    /// Relaxation order `w`.
    pub order: usize,
    /// Moment bound `M`.
    pub moments: usize,
    pub perturb: f64,
    pub seed: u64,
    pub cliques: CliqueStrategy,
    pub moment_rule: MomentRule,
    /// Quadrature points per axis for the entropy fit; `None` picks the default.
    pub quad_points: Option<usize>,
    pub solver: SolverSettings,
    pub refine: RefineSettings,
    pub maxent: MaxentSettings,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    /// Desk-scale defaults, or the larger benchmark grids with `full_scale`.
    pub fn preset(name: PresetName, full_scale: bool) -> Self {
        use PresetName::*;
        let (n, w, m, cliques) = match name {
            LinearOde => (2000, 1, 1, CliqueStrategy::Chordal),
            LinearPde => (50, 1, 2, CliqueStrategy::ConstraintSupports),
            EllipticBifur => (13, 2, 3, CliqueStrategy::ConstraintSupports),
            ReactionDiffusion => (40, 2, 10, CliqueStrategy::Chordal),
            ProdConsumption => (100, 1, 5, CliqueStrategy::Chordal),
            DoubleIntegrator => (30, 2, 5, CliqueStrategy::Chordal),
        };
        let (n, w) = match (full_scale, name) {
            (true, LinearPde) => (100, w),
            (true, EllipticBifur) => (49, w),
            (true, ReactionDiffusion) => (100, 3),
            (true, DoubleIntegrator) => (50, 3),
            _ => (n, w),
        };
        Self::with(ProblemSource::Preset(name), n, w, m, cliques)
    }

    /// Defaults for a user problem file.
    pub fn file(path: impl Into<PathBuf>) -> Self {
        Self::with(ProblemSource::File(path.into()), 21, 2, 2, CliqueStrategy::Chordal)
    }

    fn with(problem: ProblemSource, n: usize, order: usize, moments: usize, cliques: CliqueStrategy) -> Self {
        let opts = RelaxOptions::default();
        Self {
            problem,
            nx: n,
            ny: n,
            order,
            moments,
            perturb: opts.perturb,
            seed: opts.seed,
            cliques,
            moment_rule: MomentRule::default(),
            quad_points: None,
            solver: SolverSettings::default(),
            refine: RefineSettings::default(),
            maxent: MaxentSettings::default(),
            out: None,
        }
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        if self.order < 1 {
            return Err(CoreError::Parameter("relaxation order must be at least 1".into()));
        }
        if self.nx < 4 || self.ny < 4 {
            return Err(CoreError::Parameter(format!("grid {}×{} too small, need at least 4 per axis", self.nx, self.ny)));
        }
        if !(self.perturb >= 0.0 && self.perturb.is_finite()) {
            return Err(CoreError::Parameter("perturbation must be finite and nonnegative".into()));
        }
        if self.quad_points.is_some_and(|q| q < 3) {
            return Err(CoreError::Parameter("need at least 3 quadrature points".into()));
        }
        Ok(())
    }

    fn quadrature(&self, dims: usize) -> Quadrature {
        match self.quad_points {
            Some(n) => Quadrature { points_per_dim: n },
            None => Quadrature::default_for(dims),
        }
    }

    /// Applies the keys present in a TOML config file.
    pub fn apply_file(&mut self, text: &str) -> Result<(), CoreError> {
        let f: ConfigFile = toml::from_str(text).map_err(|e| CoreError::Format(e.to_string()))?;
        if let Some(p) = f.problem {
            self.problem = p.parse()?;
        }
        macro_rules! set {
            ($($src:expr => $dst:expr),* $(,)?) => { $( if let Some(v) = $src { $dst = v; } )* };
        }
        set!(f.nx => self.nx, f.ny => self.ny, f.order => self.order, f.moments => self.moments,
             f.perturb => self.perturb, f.seed => self.seed);
        if let Some(s) = f.cliques {
            self.cliques = s.parse()?;
        }
        if let Some(s) = f.moment_rule {
            self.moment_rule = s.parse()?;
        }
        if f.quad_points.is_some() {
            self.quad_points = f.quad_points;
        }
        if let Some(o) = f.out {
            self.out = Some(o);
        }
        if let Some(s) = f.solver {
            set!(s.tol_feas => self.solver.tol_feas, s.tol_gap => self.solver.tol_gap,
                 s.tol_psd => self.solver.tol_psd, s.max_iter => self.solver.max_iter);
        }
        if let Some(r) = f.refine {
            set!(r.tol_eq => self.refine.tol_eq, r.tol_step => self.refine.tol_step,
                 r.tol_opt => self.refine.tol_opt, r.max_iter => self.refine.max_iter);
        }
        if let Some(m) = f.maxent {
            set!(m.tol_grad => self.maxent.tol_grad, m.max_iter => self.maxent.max_iter,
                 m.exp_cap => self.maxent.exp_cap);
        }
        Ok(())
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    problem: Option<String>,
    nx: Option<usize>,
    ny: Option<usize>,
    order: Option<usize>,
    moments: Option<usize>,
    perturb: Option<f64>,
    seed: Option<u64>,
    cliques: Option<String>,
    moment_rule: Option<String>,
    quad_points: Option<usize>,
    out: Option<PathBuf>,
    solver: Option<SolverSection>,
    refine: Option<RefineSection>,
    maxent: Option<MaxentSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolverSection {
    tol_feas: Option<f64>,
    tol_gap: Option<f64>,
    tol_psd: Option<f64>,
    max_iter: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RefineSection {
    tol_eq: Option<f64>,
    tol_step: Option<f64>,
    tol_opt: Option<f64>,
    max_iter: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MaxentSection {
    tol_grad: Option<f64>,
    max_iter: Option<usize>,
    exp_cap: Option<f64>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SdpReport {
    pub status: String,
    pub iterations: usize,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub gap: f64,
    pub fixed_variables: usize,
    pub cliques: usize,
    pub max_clique: usize,
    pub blocks: usize,
    pub moments: usize,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct RefineReport {
    pub converged: bool,
    pub iterations: usize,
    pub max_eq_violation: f64,
    pub max_ineq_violation: f64,
    pub penalty: f64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct MomentEntry {
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ErrorSummary {
    pub avg_error: f64,
    pub max_error: f64,
    pub capped: usize,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SmoothReport {
    pub unknown: String,
    /// Subtracted from the solution before taking moments.
    pub shift: f64,
    pub moments: Vec<MomentEntry>,
    pub vstar: Vec<MomentEntry>,
    pub converged: bool,
    pub iterations: usize,
    /// Max-norm difference between the estimate's moments and the data.
    pub moment_residual: f64,
    pub vs_grid: ErrorSummary,
    pub vs_analytic: Option<ErrorSummary>,
}

#[derive(Debug, Clone, Default, Serialize, PartialEq)]
pub struct RunReport {
    pub problem: String,
    pub nx: usize,
    pub ny: usize,
    pub order: usize,
    pub moments: usize,
    pub perturb: f64,
    pub sdp: Option<SdpReport>,
    /// SDP lower bound on the POP minimum, original coordinates.
    pub lower_bound: Option<f64>,
    pub refined_objective: Option<f64>,
    pub refine: Option<RefineReport>,
    /// Largest violation of the discretized equations, original coordinates.
    pub discretization_residual: Option<f64>,
    /// Difference between the residual in original and in transformed coordinates.
    pub roundtrip_error: Option<f64>,
    /// Sup-norm distance of each unknown from its analytic solution.
    pub reference_error: Vec<Option<f64>>,
    pub scalars: BTreeMap<String, f64>,
    pub smooth: Vec<SmoothReport>,
    pub timings: BTreeMap<String, f64>,
    pub flags: Vec<String>,
}

impl RunReport {
    /// True when no stage raised a flag.
    pub fn converged(&self) -> bool {
        self.flags.is_empty()
    }

    /// Copy without timings, for reproducibility checks.
    pub fn without_timings(&self) -> Self {
        Self { timings: BTreeMap::new(), ..self.clone() }
    }

    fn header(cfg: &RunConfig, dims: usize) -> Self {
        Self {
            problem: cfg.problem.to_string(),
            nx: cfg.nx,
            ny: if dims == 2 { cfg.ny } else { 1 },
            order: cfg.order,
            moments: cfg.moments,
            perturb: cfg.perturb,
            ..Default::default()
        }
    }
}

fn at_stage<T, E: Into<CoreError>>(stage: &'static str, r: Result<T, E>) -> Result<T, CoreError> {
    r.map_err(|e| CoreError::Stage { stage, source: Box::new(e.into()) })
}

struct Timer(BTreeMap<String, f64>);

impl Timer {
    fn run<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let t = Instant::now();
        let out = f();
        *self.0.entry(stage.into()).or_default() += t.elapsed().as_secs_f64();
        out
    }
}

fn problem_grid(p: &DiffProblem, cfg: &RunConfig) -> Result<Grid, CoreError> {
    Grid::new(p.domain, cfg.nx, cfg.ny)
}

/// Method 1. Returns the refined grid solution in original coordinates.
pub fn run_sdpr(cfg: &RunConfig) -> Result<(GridFunction, RunReport), CoreError> {
    cfg.validate()?;
    let p = at_stage("load", cfg.problem.load())?;
    let dims = p.domain.dims;
    let mut rep = RunReport::header(cfg, dims);
    let mut timer = Timer(BTreeMap::new());

    let (q, shift) = shift_to_nonnegative(&p);
    let (q, _) = scale_domain_to_unit(&q);
    let grid = at_stage("transcribe", problem_grid(&p, cfg))?;
    let unit_grid = Grid { domain: q.domain, ..grid };
    let pop = at_stage("transcribe", timer.run("transcribe", || transcribe(&q, &unit_grid)))?;
    let ps = at_stage("presolve", timer.run("presolve", || presolve(&pop)))?;
    let cs = at_stage("cliques", timer.run("cliques", || csp_cliques_with(&ps.pop, cfg.cliques)))?;
    let opts = RelaxOptions { perturb: cfg.perturb, seed: cfg.seed, ..Default::default() };
    let relax = at_stage("relax", timer.run("relax", || build_relaxation_with(&ps.pop, &cs, cfg.order, &opts)))?;
    let sol = at_stage("solve", timer.run("solve", || sdpsmooth_conic::solve(&relax.sdp, &cfg.solver)))?;
    rep.sdp = Some(SdpReport {
        status: sol.status.to_string(),
        iterations: sol.iterations,
        primal_objective: sol.objective_value,
        dual_objective: sol.dual_value,
        primal_residual: sol.residuals.primal,
        dual_residual: sol.residuals.dual,
        gap: sol.residuals.gap,
        fixed_variables: ps.fixed_count(),
        cliques: cs.cliques.len(),
        max_clique: cs.max_size(),
        blocks: relax.sdp.blocks.len(),
        moments: relax.sdp.nvars,
    });
    if !sol.status.is_usable() {
        rep.flags.push(format!("sdp: solver status {}", sol.status));
    }
    let x0 = ps.expand(&relax.extract(&sol.y));
    let rr = at_stage("refine", timer.run("refine", || refine(&pop, &x0, &cfg.refine)))?;
    rep.refine = Some(RefineReport {
        converged: rr.converged,
        iterations: rr.iterations,
        max_eq_violation: rr.max_eq_violation,
        max_ineq_violation: rr.max_ineq_violation,
        penalty: rr.penalty,
    });
    if !rr.converged {
        rep.flags.push(format!("refine: not converged, max equality violation {:.3e}", rr.max_eq_violation));
    }

    // back to original coordinates
    let n = grid.len();
    let m = p.unknowns.len();
    let values: Vec<Vec<f64>> = (0..m).map(|k| rr.x[k * n..(k + 1) * n].iter().map(|v| v + shift[k]).collect()).collect();
    let scalars = rr.x[m * n..].to_vec();
    let u = at_stage("extract", GridFunction::new(grid, values, scalars))?;
    let orig_pop = at_stage("transcribe", transcribe(&p, &grid))?;
    let x_orig = point_from_grid_function(&u);
    let res = at_stage("residual", residual(&p, &grid, &u))?;
    rep.discretization_residual = Some(res);
    rep.roundtrip_error = Some((res - pop.max_eq_violation(&rr.x)).abs());
    let offset = orig_pop.objective_value(&x_orig) - pop.objective_value(&rr.x);
    let lb = relax.lower_bound(&sol) + offset;
    let obj = rr.objective + offset;
    rep.lower_bound = Some(lb);
    rep.refined_objective = Some(obj);
    if sol.status.is_usable() && lb > obj + 1e-6 {
        rep.flags.push(format!("sandwich: lower bound {lb} exceeds refined objective {obj}"));
    }
    rep.reference_error = p
        .reference
        .iter()
        .enumerate()
        .map(|(k, r)| {
            r.as_ref().map(|f| {
                (0..n).fold(0.0, |acc: f64, node| {
                    let (i, j) = grid.coords(node);
                    acc.max((u.values[k][node] - f(grid.x(i), grid.y(j))).abs())
                })
            })
        })
        .collect();
    rep.scalars = p.scalars.iter().map(|s| s.name.clone()).zip(u.scalars.iter().copied()).collect();
    rep.timings = timer.0;
    Ok((u, rep))
}

/// One estimate per unknown, with the shift that was subtracted first.
#[derive(Debug, Clone)]
pub struct Smoothed {
    pub estimate: EntropyEstimate,
    pub shift: f64,
}

/// Method 2 on a grid solution in original coordinates.
pub fn run_smooth(cfg: &RunConfig, u: &GridFunction) -> Result<(Vec<Smoothed>, RunReport), CoreError> {
    cfg.validate()?;
    let p = at_stage("load", cfg.problem.load())?;
    if u.values.len() != p.unknowns.len() || u.grid.domain != p.domain {
        return Err(CoreError::Stage {
            stage: "smooth",
            source: Box::new(CoreError::Precondition("grid solution does not match the problem".into())),
        });
    }
    let dims = p.domain.dims;
    let mut rep = RunReport::header(cfg, dims);
    rep.nx = u.grid.nx;
    rep.ny = u.grid.ny;
    let mut timer = Timer(BTreeMap::new());
    let (_, scale) = scale_domain_to_unit(&p);
    let unit_grid = Grid { domain: if dims == 2 { Domain::rectangle(0.0, 1.0, 0.0, 1.0) } else { Domain::interval(0.0, 1.0) }, ..u.grid };
    let quad = cfg.quadrature(dims);
    let mut out = Vec::new();
    for (k, unk) in p.unknowns.iter().enumerate() {
        let shift = unk.lbd.min(0.0);
        // round-off can leave values a hair below the bound
        let vals: Vec<f64> = u.values[k].iter().map(|v| (v - shift).max(0.0)).collect();
        let gf = GridFunction { grid: unit_grid, values: vec![vals], scalars: vec![] };
        let m = at_stage("moments", discrete_moments(&gf, 0, cfg.moments, cfg.moment_rule))?;
        let e = at_stage("maxent", timer.run("maxent", || maxent_fit(&m, &quad, &cfg.maxent)))?;
        let fitted = at_stage("maxent", estimate_moments(&e, cfg.moments, &quad))?;
        let moment_residual = fitted.values.iter().zip(&m.values).fold(0.0, |a: f64, (x, y)| a.max((x - y).abs()));
        let summary = |r: crate::entropy::ErrorReport| ErrorSummary { avg_error: r.avg_error, max_error: r.max_error, capped: r.capped };
        let vs_grid = summary(at_stage("metrics", error_metrics(&gf, 0, &e))?);
        let vs_analytic = match &p.reference[k] {
            Some(f) => {
                let f = f.clone();
                let g: Sampler = Arc::new(move |s, t| {
                    let (x, y) = scale.to_original(s, t);
                    f(x, y) - shift
                });
                Some(summary(at_stage("metrics", error_metrics_analytic(&g, &unit_grid, &e))?))
            }
            None => None,
        };
        if !e.converged {
            rep.flags.push(format!("maxent: {} not converged, gradient norm {:.3e}", unk.name, e.grad_norm));
        }
        let entries = |vals: &[f64]| {
            m.index.iter().zip(vals).map(|(&(i, j), &value)| MomentEntry { i, j, value }).collect::<Vec<_>>()
        };
        rep.smooth.push(SmoothReport {
            unknown: unk.name.clone(),
            shift,
            moments: entries(&m.values),
            vstar: entries(&e.v),
            converged: e.converged,
            iterations: e.iterations,
            moment_residual,
            vs_grid,
            vs_analytic,
        });
        out.push(Smoothed { estimate: e, shift });
    }
    rep.timings = timer.0;
    Ok((out, rep))
}

/// Everything a full run produces.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub problem: DiffProblem,
    pub solution: GridFunction,
    pub smoothed: Vec<Smoothed>,
    pub report: RunReport,
}

/// Method 1 followed by Method 2.
pub fn run_full(cfg: &RunConfig) -> Result<Outcome, CoreError> {
    let (u, mut rep) = run_sdpr(cfg)?;
    let (smoothed, srep) = run_smooth(cfg, &u)?;
    rep.smooth = srep.smooth;
    rep.flags.extend(srep.flags);
    rep.timings.extend(srep.timings);
    Ok(Outcome { problem: cfg.problem.load()?, solution: u, smoothed, report: rep })
}

fn suffix(m: usize, k: usize) -> String {
    if m > 1 {
        format!("_u{k}")
    } else {
        String::new()
    }
}

fn io_err(e: csv::Error) -> CoreError {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => CoreError::Io(e),
        other => CoreError::Format(format!("{other:?}")),
    }
}

/// Grid solution as `x,<names>` (1-D) or `x,y,<names>` (2-D), one row per node.
pub fn write_solution_csv(p: &DiffProblem, u: &GridFunction, path: &Path) -> Result<(), CoreError> {
    let mut w = csv::Writer::from_path(path).map_err(io_err)?;
    let dims = u.grid.domain.dims;
    let mut head: Vec<String> = if dims == 2 { vec!["x".into(), "y".into()] } else { vec!["x".into()] };
    head.extend(p.unknowns.iter().map(|k| k.name.clone()));
    w.write_record(&head).map_err(io_err)?;
    for node in 0..u.grid.len() {
        let (i, j) = u.grid.coords(node);
        let mut row = vec![u.grid.x(i).to_string()];
        if dims == 2 {
            row.push(u.grid.y(j).to_string());
        }
        row.extend(u.values.iter().map(|v| v[node].to_string()));
        w.write_record(&row).map_err(io_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a file written by [`write_solution_csv`]. Node counts are
/// inferred from the distinct coordinates.
pub fn read_solution_csv(p: &DiffProblem, path: &Path) -> Result<GridFunction, CoreError> {
    let mut r = csv::Reader::from_path(path).map_err(io_err)?;
    let dims = p.domain.dims;
    let m = p.unknowns.len();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(io_err)?;
        let vals: Vec<f64> = rec
            .iter()
            .map(|s| s.trim().parse::<f64>().map_err(|e| CoreError::Format(format!("{}: {e}", path.display()))))
            .collect::<Result<_, _>>()?;
        if vals.len() != dims + m {
            return Err(CoreError::Format(format!("{}: expected {} columns, found {}", path.display(), dims + m, vals.len())));
        }
        rows.push(vals);
    }
    let nx = rows.iter().take_while(|r| dims == 1 || r[1] == rows[0][1]).count();
    let ny = if nx == 0 { 0 } else { rows.len() / nx };
    let grid = Grid::new(p.domain, nx, ny)?;
    if grid.len() != rows.len() {
        return Err(CoreError::Format(format!("{}: rows do not form a grid", path.display())));
    }
    let values = (0..m).map(|k| rows.iter().map(|r| r[dims + k]).collect()).collect();
    GridFunction::new(grid, values, vec![])
}

/// Number of samples per axis in `estimate.csv`.
pub const ESTIMATE_SAMPLES: usize = 501;

/// Writes `solution.csv`, `moments.csv`, `vstar.csv`, `estimate.csv` and
/// `report.json` to `dir`. With several unknowns the per-unknown files get
/// `_u0`, `_u1`, ... suffixes. Returns the paths written.
pub fn emit_outputs(outcome: &Outcome, dir: &Path) -> Result<Vec<PathBuf>, CoreError> {
    std::fs::create_dir_all(dir)?;
    let p = &outcome.problem;
    let mut written = Vec::new();
    let path = dir.join("solution.csv");
    write_solution_csv(p, &outcome.solution, &path)?;
    written.push(path);

    let m = p.unknowns.len();
    let dims = p.domain.dims;
    let (_, scale) = scale_domain_to_unit(p);
    for (k, (sm, srep)) in outcome.smoothed.iter().zip(&outcome.report.smooth).enumerate() {
        let sfx = suffix(m, k);
        for (name, col, entries) in [("moments", "moment", &srep.moments), ("vstar", "v", &srep.vstar)] {
            let path = dir.join(format!("{name}{sfx}.csv"));
            let mut w = csv::Writer::from_path(&path).map_err(io_err)?;
            w.write_record(["i", "j", col]).map_err(io_err)?;
            for e in entries {
                w.write_record([e.i.to_string(), e.j.to_string(), e.value.to_string()]).map_err(io_err)?;
            }
            w.flush()?;
            written.push(path);
        }

        let path = dir.join(format!("estimate{sfx}.csv"));
        let mut w = csv::Writer::from_path(&path).map_err(io_err)?;
        w.write_record(if dims == 2 { vec!["x", "y", "estimate"] } else { vec!["x", "estimate"] }).map_err(io_err)?;
        let s = ESTIMATE_SAMPLES;
        let axis: Vec<f64> = (0..s).map(|i| i as f64 / (s - 1) as f64).collect();
        let pts: Vec<(f64, f64)> = if dims == 2 {
            axis.iter().flat_map(|&t| axis.iter().map(move |&x| (x, t))).collect()
        } else {
            axis.iter().map(|&x| (x, 0.0)).collect()
        };
        let ev = evaluate_estimate(&sm.estimate, &pts);
        for (&(a, b), v) in pts.iter().zip(&ev.values) {
            let (x, y) = scale.to_original(a, b);
            let val = (v + sm.shift).to_string();
            let row = if dims == 2 { vec![x.to_string(), y.to_string(), val] } else { vec![x.to_string(), val] };
            w.write_record(&row).map_err(io_err)?;
        }
        w.flush()?;
        written.push(path);
    }

    let path = dir.join("report.json");
    let json = serde_json::to_string_pretty(&outcome.report).map_err(|e| CoreError::Format(e.to_string()))?;
    std::fs::write(&path, json + "\n")?;
    written.push(path);
    Ok(written)
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "problem {}  grid {}x{}  order {}  moments {}", self.problem, self.nx, self.ny, self.order, self.moments)?;
        if let Some(s) = &self.sdp {
            writeln!(
                f,
                "sdp       {} after {} iterations, {} blocks (largest clique {}), {} moments",
                s.status, s.iterations, s.blocks, s.max_clique, s.moments
            )?;
        }
        if let (Some(lb), Some(obj)) = (self.lower_bound, self.refined_objective) {
            writeln!(f, "bound     {lb:.8}  refined objective {obj:.8}")?;
        }
        if let Some(r) = &self.refine {
            writeln!(
                f,
                "refine    converged {}  iterations {}  max violation {:.2e}",
                r.converged, r.iterations, r.max_eq_violation
            )?;
        }
        if let Some(r) = self.discretization_residual {
            writeln!(f, "residual  {r:.3e}")?;
        }
        for (name, v) in &self.scalars {
            writeln!(f, "scalar    {name} = {v:.8}")?;
        }
        for (k, e) in self.reference_error.iter().enumerate() {
            if let Some(e) = e {
                writeln!(f, "u{k} vs analytic solution: sup error {e:.3e}")?;
            }
        }
        for s in &self.smooth {
            let v: Vec<String> = s.vstar.iter().map(|e| format!("{:.4}", e.value)).collect();
            writeln!(f, "maxent    {}  converged {}  v* = ({})", s.unknown, s.converged, v.join(", "))?;
            writeln!(f, "          vs grid: avg {:.4e} max {:.4e}", s.vs_grid.avg_error, s.vs_grid.max_error)?;
            if let Some(a) = &s.vs_analytic {
                writeln!(f, "          vs analytic: avg {:.4e} max {:.4e}", a.avg_error, a.max_error)?;
            }
        }
        for flag in &self.flags {
            writeln!(f, "FLAG      {flag}")?;
        }
        Ok(())
    }
}
