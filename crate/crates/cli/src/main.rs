mod config;
mod output;

use clap::{Parser, Subcommand};
use config::{ExperimentConfig, MapChoice, RepresentativeChoice};
use output::Artifacts;
use qclab::beltrami::{BeltramiField, SetModel};
use qclab::douady_earle::{circle_map_from_mu, sigma_polar, Extender, POLAR_CUTOFF};
use qclab::grid::ComplexGrid;
use qclab::jordan::{
    mu_continuity_probe, render_svg, theorem_c_report, ExtensionOptions, JordanCurve, Representative,
};
use qclab::lieb::{
    de_section, g_invariance_check, lieb_distance, project_tilde, scenario_field, scenario_grid, theorem_a_residual,
    two_disk_set,
};
use qclab::moebius::MoebiusTransform;
use qclab::motions::{continuity_probe, motion_holomorphy_probe, motion_injectivity_check, trace_map, wtmu_motion, WtmuFamily};
use qclab::solver::solve_normalized;
use qclab::verify::{run_suite, Suite, VerifyOptions};
use qclab::{Complex64, Error};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

const EXIT_VERIFY: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(name = "qclab", version, about = "Quasiconformal maps, barycentric extensions and holomorphic motions")]
struct Cli {
    /// JSON experiment configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "qclab-out")]
    out: PathBuf,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Grid resolution N (power of two).
    #[arg(long, global = true)]
    grid_n: Option<usize>,
    /// Grid half width L.
    #[arg(long, global = true)]
    grid_l: Option<f64>,
    /// Multiplies every tolerance.
    #[arg(long, global = true)]
    tol_scale: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the Beltrami equation for the configured coefficient.
    Solve,
    /// Barycentric extension of the boundary trace of the configured coefficient.
    DeExtend,
    /// Two-disk scenario experiments.
    Lieb {
        #[command(subcommand)]
        action: LiebAction,
    },
    /// Holomorphic motions of the configured points along the `t·μ₀` family.
    Motion {
        #[command(subcommand)]
        action: MotionAction,
    },
    /// Curve families carried by a motion.
    Jordan {
        #[command(subcommand)]
        action: JordanAction,
    },
    /// SVG overlay of the curves at the configured parameters.
    Render,
    /// Run an acceptance suite: solver, douady-earle, lieb, motions, jordan or all.
    Verify { suite: String },
}

#[derive(Subcommand, Clone, Copy)]
enum LiebAction {
    Project,
    Section,
    TheoremA,
    Invariance,
}

#[derive(Subcommand, Clone, Copy)]
enum MotionAction {
    Trace,
    Probe,
}

#[derive(Subcommand, Clone, Copy)]
enum JordanAction {
    Report,
}

/// How a run ended once the configuration was accepted.
enum Failure {
    Usage(String),
    Numerical(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e)
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

struct Run {
    command: String,
    grid: ComplexGrid,
    cfg: ExperimentConfig,
}

struct Outcome {
    summary: Value,
    pass: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(EXIT_USAGE);
    }
    let (cfg, grid) = match load_config(&cli) {
        Ok(v) => v,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let run = Run { command: command_name(&cli.command), grid, cfg };
    let start = Instant::now();
    let mut artifacts = Artifacts::default();
    let result = dispatch(&cli.command, &run, &mut artifacts);
    let elapsed = start.elapsed().as_secs_f64();
    match result {
        Ok(outcome) => {
            let summary = json!({
                "command": run.command,
                "version": env!("CARGO_PKG_VERSION"),
                "seed": run.cfg.seed,
                "grid": { "half_width": grid.half_width(), "n": grid.n() },
                "tol_scale": run.cfg.tol_scale,
                "pass": outcome.pass,
                "files": artifacts.names(),
                "results": outcome.summary,
            });
            artifacts.add_json("summary.json", &summary);
            artifacts.add_json("metadata.json", &metadata(&run, elapsed));
            if let Err(e) = artifacts.write_all(&cli.out) {
                eprintln!("error: writing {}: {e}", cli.out.display());
                return ExitCode::from(EXIT_USAGE);
            }
            println!("{}", serde_json::to_string_pretty(&summary).expect("json"));
            if outcome.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_VERIFY)
            }
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Numerical(e)) => {
            let diagnostic = json!({
                "command": run.command,
                "seed": run.cfg.seed,
                "grid": { "half_width": grid.half_width(), "n": grid.n() },
                "error": e.to_string(),
                "detail": format!("{e:?}"),
            });
            let mut diag = Artifacts::default();
            diag.add_json("diagnostic.json", &diagnostic);
            if let Err(io) = diag.write_all(&cli.out) {
                eprintln!("error: writing {}: {io}", cli.out.display());
            }
            println!("{}", serde_json::to_string_pretty(&diagnostic).expect("json"));
            ExitCode::from(EXIT_NUMERICAL)
        }
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(value) = std::env::var("QCLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = value.trim().parse().map_err(|_| format!("QCLAB_THREADS must be a positive integer, got {value:?}"))?;
    if n == 0 {
        return Err("QCLAB_THREADS must be at least 1".into());
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn load_config(cli: &Cli) -> Result<(ExperimentConfig, ComplexGrid), String> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(n) = cli.grid_n {
        cfg.grid.n = n;
    }
    if let Some(l) = cli.grid_l {
        cfg.grid.half_width = l;
    }
    if let Some(t) = cli.tol_scale {
        cfg.tol_scale = t;
    }
    let grid = cfg.validate()?;
    Ok((cfg, grid))
}

fn command_name(command: &Command) -> String {
    match command {
        Command::Solve => "solve".into(),
        Command::DeExtend => "de-extend".into(),
        Command::Lieb { action } => format!(
            "lieb {}",
            match action {
                LiebAction::Project => "project",
                LiebAction::Section => "section",
                LiebAction::TheoremA => "theorem-a",
                LiebAction::Invariance => "invariance",
            }
        ),
        Command::Motion { action: MotionAction::Trace } => "motion trace".into(),
        Command::Motion { action: MotionAction::Probe } => "motion probe".into(),
        Command::Jordan { action: JordanAction::Report } => "jordan report".into(),
        Command::Render => "render".into(),
        Command::Verify { suite } => format!("verify {suite}"),
    }
}

fn metadata(run: &Run, elapsed: f64) -> Value {
    let now = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    json!({
        "command": run.command,
        "unix_time": now,
        "elapsed_seconds": elapsed,
        "threads": rayon::current_num_threads(),
    })
}

fn dispatch(command: &Command, run: &Run, out: &mut Artifacts) -> Result<Outcome, Failure> {
    match command {
        Command::Solve => solve(run, out),
        Command::DeExtend => de_extend(run, out),
        Command::Lieb { action } => lieb(*action, run, out),
        Command::Motion { action } => motion(*action, run, out),
        Command::Jordan { action: JordanAction::Report } => jordan_report(run, out),
        Command::Render => render(run, out),
        Command::Verify { suite } => verify(suite, run, out),
    }
}

fn csv_bytes(write: impl FnOnce(&mut Vec<u8>) -> qclab::Result<()>) -> Result<Vec<u8>, Failure> {
    let mut bytes = Vec::new();
    write(&mut bytes)?;
    Ok(bytes)
}

fn solve(run: &Run, out: &mut Artifacts) -> Result<Outcome, Failure> {
    let mu = run.cfg.field.build(run.grid)?;
    let w = solve_normalized(&mu)?;
    let defects = w.orientation_defects().len();
    out.add("map.csv", csv_bytes(|b| w.write_csv(b))?);
    let summary = json!({ "report": w.report(), "normalization": w.normalization(), "orientation_defects": defects });
    Ok(Outcome { summary, pass: defects == 0 })
}

fn de_extend(run: &Run, out: &mut Artifacts) -> Result<Outcome, Failure> {
    let mu = run.cfg.field.build(run.grid)?;
    let phi = circle_map_from_mu(&mu)?;
    let ext = Extender::new(&phi);
    let (nr, na) = (32usize, 128usize);
    let mut table = String::from("r,theta,re,im\n");
    for i in 0..nr {
        let r = (i as f64 + 0.5) / nr as f64;
        for j in 0..na {
            let theta = std::f64::consts::TAU * j as f64 / na as f64;
            let v = ext.extend(Complex64::from_polar(r, theta))?;
            table.push_str(&format!("{r},{theta},{},{}\n", v.re, v.im));
        }
    }
    let sigma = sigma_polar(&phi, nr, na)?;
    let mut sigma_table = String::from("r,theta,re,im\n");
    for (k, v) in sigma.values.iter().enumerate() {
        sigma_table.push_str(&format!("{},{},{},{}\n", sigma.radii[k / na], sigma.angles[k % na], v.re, v.im));
    }
    out.add("trace.csv", csv_bytes(|b| phi.write_csv(b))?);
    out.add("extension.csv", table.into_bytes());
    out.add("sigma.csv", sigma_table.into_bytes());
    let norm = sigma.sup_norm_within(POLAR_CUTOFF);
    let summary = json!({ "boundary_samples": phi.len(), "sigma_sup_norm": norm, "polar_cutoff": POLAR_CUTOFF });
    Ok(Outcome { summary, pass: norm < 1.0 })
}

fn scenario_mu(run: &Run, set: &SetModel) -> Result<BeltramiField, Failure> {
    let mut rng = ChaCha8Rng::seed_from_u64(run.cfg.seed);
    let symmetries = if run.cfg.symmetric { vec![negation()?] } else { Vec::new() };
    Ok(scenario_field(&mut rng, scenario_grid(), set, run.cfg.norm, &symmetries)?)
}

fn negation() -> qclab::Result<MoebiusTransform> {
    MoebiusTransform::affine(Complex64::new(-1.0, 0.0), Complex64::new(0.0, 0.0))
}

fn lieb(action: LiebAction, run: &Run, out: &mut Artifacts) -> Result<Outcome, Failure> {
    let set = two_disk_set();
    let mu = scenario_mu(run, &set)?;
    let tol = 5e-3 * run.cfg.tol_scale;
    let grid = scenario_grid();
    let scenario = json!({ "disks": set.disks(), "grid": { "half_width": grid.half_width(), "n": grid.n() }, "norm": mu.sup_norm() });
    match action {
        LiebAction::Project => {
            let t = project_tilde(&mu, &set)?;
            for (i, phi) in t.components().iter().enumerate() {
                out.add(&format!("component_{i}.csv"), csv_bytes(|b| phi.write_csv(b))?);
            }
            let summary = json!({ "scenario": scenario, "components": t.components().len(), "mu_on_set_norm": t.mu_on_set().sup_norm() });
            Ok(Outcome { summary, pass: true })
        }
        LiebAction::Section => {
            let t = project_tilde(&mu, &set)?;
            let s = de_section(&t)?;
            let d = lieb_distance(&project_tilde(&s, &set)?, &t)?;
            out.add("section.csv", csv_bytes(|b| s.field().write_csv(b))?);
            let pass = d.max() < tol && s.sup_norm() < 1.0;
            Ok(Outcome { summary: json!({ "scenario": scenario, "section_norm": s.sup_norm(), "round_trip": d, "tolerance": tol }), pass })
        }
        LiebAction::TheoremA => {
            let g = match run.cfg.map {
                MapChoice::Negation => negation()?,
                MapChoice::Doubling => MoebiusTransform::affine(Complex64::new(2.0, 0.0), Complex64::new(0.0, 0.0))?,
            };
            let r = theorem_a_residual(&mu, &g, &set, tol)?;
            Ok(Outcome { pass: r.pass, summary: json!({ "scenario": scenario, "map": run.cfg.map, "report": r }) })
        }
        LiebAction::Invariance => {
            let group = [MoebiusTransform::identity(), negation()?];
            let r = g_invariance_check(&mu, &group, &set, tol)?;
            let pass = r.mu_invariant && r.teich_fixed && r.section_invariant;
            Ok(Outcome { pass, summary: json!({ "scenario": scenario, "symmetric": run.cfg.symmetric, "report": r }) })
        }
    }
}

fn family(run: &Run) -> Result<Arc<WtmuFamily>, Failure> {
    Ok(Arc::new(WtmuFamily::along(&run.cfg.direction.build(run.grid)?)?))
}

fn motion(action: MotionAction, run: &Run, out: &mut Artifacts) -> Result<Outcome, Failure> {
    let set = SetModel::finite_points(run.cfg.points.clone())?;
    let phi = wtmu_motion(family(run)?, set)?;
    let x = [run.cfg.x];
    match action {
        MotionAction::Trace => {
            let config = trace_map(&phi, &x)?;
            let injective = motion_injectivity_check(&phi, &x)?;
            out.add_json("configuration.json", &config);
            Ok(Outcome { pass: injective, summary: json!({ "x": run.cfg.x, "configuration": config, "injective": injective }) })
        }
        MotionAction::Probe => {
            let moving: Vec<_> = phi.set().points().iter().skip(3).copied().collect();
            let reports = moving
                .iter()
                .map(|&z| motion_holomorphy_probe(&phi, &x, 0, z, &run.cfg.steps))
                .collect::<qclab::Result<Vec<_>>>()?;
            let dir = if run.cfg.x.norm() > 0.0 { run.cfg.x / run.cfg.x.norm() } else { Complex64::new(1.0, 0.0) };
            let increments = continuity_probe(&phi, &x, &[dir], &run.cfg.steps)?;
            let orders_ok = reports.iter().all(|r| r.orders.iter().all(|&o| o >= 1.8));
            let continuous = increments.windows(2).all(|w| w[1] < w[0]);
            let summary = json!({ "x": run.cfg.x, "holomorphy": reports, "continuity": increments });
            Ok(Outcome { pass: orders_ok && continuous, summary })
        }
    }
}

fn representative(run: &Run) -> Result<Representative, Failure> {
    Ok(match run.cfg.representative {
        RepresentativeChoice::Bumps => Representative::Bumps { grid: run.grid, options: ExtensionOptions::default() },
        RepresentativeChoice::Solver => Representative::Solver(family(run)?),
    })
}

fn jordan_setup(run: &Run) -> Result<(qclab::motions::Motion, JordanCurve, Representative), Failure> {
    let set = SetModel::finite_points(run.cfg.points.clone())?;
    let phi = wtmu_motion(family(run)?, set)?;
    let gamma0 = JordanCurve::through(&run.cfg.curve, run.cfg.per_edge)?;
    Ok((phi, gamma0, representative(run)?))
}

fn jordan_report(run: &Run, out: &mut Artifacts) -> Result<Outcome, Failure> {
    let (phi, gamma0, rep) = jordan_setup(run)?;
    let r = theorem_c_report(&phi, &gamma0, run.cfg.x, &rep)?;
    let probe = mu_continuity_probe(&phi, run.cfg.x, &run.cfg.steps, &rep)?;
    out.add("curve0.csv", csv_bytes(|b| gamma0.write_csv(b))?);
    out.add("curve.csv", csv_bytes(|b| r.curve.write_csv(b))?);
    let continuous = probe.increments.windows(2).all(|w| w[1] < w[0]);
    let pass = r.pass && continuous;
    let summary = json!({
        "x": r.x,
        "representative": run.cfg.representative,
        "marked_residual": r.marked_residual,
        "mu_norm": r.mu_norm,
        "poincare_distance": r.poincare_distance,
        "bound": r.bound,
        "bound_asserted": r.bound_asserted,
        "bound_ok": r.bound_ok,
        "simple": r.simple,
        "steps": r.steps,
        "corrections": r.corrections,
        "continuity": probe,
        "pass": pass,
    });
    Ok(Outcome { summary, pass })
}

fn render(run: &Run, out: &mut Artifacts) -> Result<Outcome, Failure> {
    let (phi, gamma0, rep) = jordan_setup(run)?;
    let mut curves = Vec::new();
    let mut rows = Vec::new();
    for &t in &run.cfg.xs {
        let r = theorem_c_report(&phi, &gamma0, Complex64::new(t, 0.0), &rep)?;
        rows.push(json!({ "x": t, "simple": r.simple, "marked_residual": r.marked_residual }));
        curves.push((t, r.curve));
    }
    let all_simple = curves.iter().all(|(_, c)| qclab::jordan::jordan_check(c));
    out.add("family.svg", render_svg(&curves, run.grid.half_width()).into_bytes());
    Ok(Outcome { summary: json!({ "curves": rows }), pass: all_simple })
}

fn verify(suite: &str, run: &Run, out: &mut Artifacts) -> Result<Outcome, Failure> {
    let suite: Suite = suite.parse().map_err(|e: Error| Failure::Usage(e.to_string()))?;
    let opts = VerifyOptions { seed: run.cfg.seed, grid: run.grid, tol_scale: run.cfg.tol_scale };
    let results = run_suite(suite, &opts);
    for r in &results {
        eprintln!("{}", r.line());
    }
    if let Some(r) = results.iter().find(|r| r.error.is_some()) {
        return Err(Failure::Numerical(Error::Construction(format!(
            "criterion {} ({}): {}",
            r.id,
            r.name,
            r.error.as_deref().unwrap_or_default()
        ))));
    }
    out.add_json("results.json", &results);
    let pass = results.iter().all(|r| r.pass);
    Ok(Outcome { summary: json!({ "suite": suite, "passed": results.iter().filter(|r| r.pass).count(), "total": results.len() }), pass })
}
