use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sdpsmooth::checks::self_check;
use sdpsmooth::pipeline::*;
use sdpsmooth::{CoreError, PresetName};

#[derive(Parser)]
#[command(name = "sdpsmooth", version, about = "Moment-SDP solutions of polynomial differential equations with maximum-entropy smoothing")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Discretize, relax, solve and refine.
    Solve(RunArgs),
    /// Maximum-entropy estimate from a stored grid solution.
    Smooth {
        #[command(flatten)]
        run: RunArgs,
        /// solution.csv written by `solve`
        #[arg(long)]
        solution: PathBuf,
    },
    /// `solve` followed by `smooth`.
    Full(RunArgs),
    /// List the built-in problems with their default settings.
    Presets,
    /// Run the invariant suite on tiny instances.
    Check,
}

#[derive(Args)]
struct RunArgs {
    /// Preset name or TOML problem file.
    #[arg(long)]
    problem: Option<String>,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    ny: Option<usize>,
    /// Relaxation order w.
    #[arg(long)]
    order: Option<usize>,
    /// Moment bound M.
    #[arg(long)]
    moments: Option<usize>,
    #[arg(long)]
    perturb: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    quad_points: Option<usize>,
    /// chordal, supports or dense
    #[arg(long)]
    cliques: Option<String>,
    /// trapezoid or full_node
    #[arg(long)]
    moment_rule: Option<String>,
    /// Use the larger grids and orders of the original benchmarks.
    #[arg(long = "paper-scale")]
    full_scale: bool,
    /// TOML file with any of the above keys plus [solver], [refine] and [maxent] sections.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn config_problem(text: &str) -> Option<String> {
    text.lines()
        .map(str::trim)
        .find_map(|l| l.strip_prefix("problem").map(str::trim).and_then(|r| r.strip_prefix('=')))
        .map(|v| v.trim().trim_matches('"').to_string())
}

/// Defaults for the problem, then the config file, then flags.
fn build_config(a: &RunArgs) -> Result<RunConfig, CoreError> {
    let file_text = a.config.as_ref().map(std::fs::read_to_string).transpose()?;
    let problem = a
        .problem
        .clone()
        .or_else(|| file_text.as_deref().and_then(config_problem))
        .ok_or_else(|| CoreError::Parameter("no problem given; use --problem or a config file".into()))?;
    let mut cfg = match problem.parse::<ProblemSource>()? {
        ProblemSource::Preset(p) => RunConfig::preset(p, a.full_scale),
        ProblemSource::File(path) => RunConfig::file(path),
    };
    if let Some(t) = &file_text {
        cfg.apply_file(t)?;
    }
    if let Some(p) = &a.problem {
        cfg.problem = p.parse()?;
    }
    if let Some(n) = a.nx {
        cfg.nx = n;
        if a.ny.is_none() {
            cfg.ny = n;
        }
    }
    if let Some(n) = a.ny {
        cfg.ny = n;
    }
    if let Some(w) = a.order {
        cfg.order = w;
    }
    if let Some(m) = a.moments {
        cfg.moments = m;
    }
    if let Some(p) = a.perturb {
        cfg.perturb = p;
    }
    if let Some(q) = a.quad_points {
        cfg.quad_points = Some(q);
    }
    if let Some(s) = &a.cliques {
        cfg.cliques = s.parse()?;
    }
    if let Some(s) = &a.moment_rule {
        cfg.moment_rule = s.parse()?;
    }
    if let Some(o) = &a.out {
        cfg.out = Some(o.clone());
    }
    Ok(cfg)
}

fn out_dir(cfg: &RunConfig) -> PathBuf {
    cfg.out.clone().unwrap_or_else(|| {
        let stem = match &cfg.problem {
            ProblemSource::Preset(p) => p.to_string(),
            ProblemSource::File(f) => f.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "problem".into()),
        };
        PathBuf::from("out").join(stem)
    })
}

fn finish(outcome: &Outcome, cfg: &RunConfig) -> Result<bool, CoreError> {
    print!("{}", outcome.report);
    let dir = out_dir(cfg);
    for f in emit_outputs(outcome, &dir)? {
        println!("wrote     {}", f.display());
    }
    Ok(outcome.report.converged())
}

fn run(cli: Cli) -> Result<bool, CoreError> {
    match cli.verb {
        Verb::Presets => {
            for p in PresetName::ALL {
                let c = RunConfig::preset(p, false);
                let grid = if sdpsmooth::preset(p).domain.dims == 2 { format!("{}x{}", c.nx, c.ny) } else { c.nx.to_string() };
                println!("{:<20} grid {:<7} w {}  M {:<3} {}", p.as_str(), grid, c.order, c.moments, p.description());
            }
            Ok(true)
        }
        Verb::Check => {
            let results = self_check();
            for r in &results {
                println!("{} {:<20} {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
            }
            Ok(results.iter().all(|r| r.passed))
        }
        Verb::Solve(a) => {
            let cfg = build_config(&a)?;
            let (solution, report) = run_sdpr(&cfg)?;
            let outcome = Outcome { problem: cfg.problem.load()?, solution, smoothed: vec![], report };
            finish(&outcome, &cfg)
        }
        Verb::Smooth { run: a, solution } => {
            let cfg = build_config(&a)?;
            let problem = cfg.problem.load()?;
            let u = read_solution_csv(&problem, &solution)?;
            let (smoothed, report) = run_smooth(&cfg, &u)?;
            finish(&Outcome { problem, solution: u, smoothed, report }, &cfg)
        }
        Verb::Full(a) => {
            let cfg = build_config(&a)?;
            let outcome = run_full(&cfg)?;
            finish(&outcome, &cfg)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
