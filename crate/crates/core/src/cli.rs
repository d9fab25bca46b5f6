//! The `gframe-lab` batch harness: `gen`, `verify`, `bench` and `multiplier`.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails, 2 on usage,
//! parse or dimension errors.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::controlled::Controller;
use crate::error::{Error, Result};
use crate::generate::{
    generate_controller, generate_frame, generate_instance, generate_partner, generate_rhs, generate_symbol,
    ControllerKind, ExperimentConfig,
};
use crate::gframe::GFrame;
use crate::multiplier::{
    controlled_multiplier, controlled_multiplier_norm_bound, controlled_multiplier_product, multiplier,
    multiplier_adjoint_check, multiplier_factored, multiplier_schatten, SchattenEstimate, Symbol,
};
use crate::random::derive_seed;
use crate::recon::{relative_residual, richardson, PreconditionedSystem};
use crate::suite::{run_instance, Check, Report};

pub const THREADS_ENV: &str = "GFRAME_LAB_THREADS";

#[derive(Debug, Parser)]
#[command(name = "gframe-lab", version, about = "Controlled g-frames, multipliers and preconditioned frame inversion")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a frame, controller and symbol from a config.
    Gen(CommonArgs),
    /// Run the invariant suite on files or generated instances.
    Verify(VerifyArgs),
    /// Compare plain and preconditioned frame algorithms for every controller kind.
    Bench(CommonArgs),
    /// Multiplier norms, Schatten norms and factorization defects.
    Multiplier(MultiplierArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Experiment config (JSON); built-in defaults otherwise.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output file (`gen`: output directory). Stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Frame file; instances are generated from the config when absent.
    #[arg(long)]
    pub frame: Option<PathBuf>,
    #[arg(long, requires = "frame")]
    pub controller: Option<PathBuf>,
    /// Symbol file (JSON array of [re, im] pairs).
    #[arg(long)]
    pub symbol: Option<PathBuf>,
    /// Number of generated instances (overrides the config).
    #[arg(long, conflicts_with = "frame")]
    pub instances: Option<usize>,
}

#[derive(Debug, Args)]
pub struct MultiplierArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Synthesis-side frame.
    #[arg(long)]
    pub frame: Option<PathBuf>,
    /// Analysis-side frame; the canonical dual of `--frame` when absent.
    #[arg(long)]
    pub partner: Option<PathBuf>,
    #[arg(long)]
    pub controller: Option<PathBuf>,
    #[arg(long)]
    pub symbol: Option<PathBuf>,
    /// Schatten exponents.
    #[arg(long = "p", value_delimiter = ',', default_values_t = vec![1.0, 2.0])]
    pub exponents: Vec<f64>,
}

impl CommonArgs {
    pub fn load_config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(tol) = self.tol {
            cfg.tol = tol;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Fixed 17-significant-digit rendering used in CSV output.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

fn thread_pool() -> rayon::ThreadPool {
    let threads = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&t| t > 0)
        .unwrap_or(0);
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool")
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("reports always serialize") + "\n"
}

/// Writes `frame.json`, `controller.json` and `symbol.json` into `dir`.
pub fn gen(cfg: &ExperimentConfig, dir: &Path) -> Result<()> {
    let inst = generate_instance(cfg)?;
    std::fs::create_dir_all(dir)?;
    inst.frame.save(dir.join("frame.json"))?;
    inst.controller.save(dir.join("controller.json"))?;
    inst.symbol.save(dir.join("symbol.json"))?;
    Ok(())
}

fn frame_checks(frame: &GFrame, partner: Option<GFrame>, c: &Controller, m: &Symbol, seed: u64) -> Result<Vec<Check>> {
    if !frame.is_g_frame(frame.default_tol()) {
        return Ok(vec![Check::new("is_g_frame", 1.0, 0.0)]);
    }
    let partner = match partner {
        Some(p) => p,
        None => frame.canonical_dual()?,
    };
    run_instance(frame, &partner, c, m, seed)
}

/// Invariant suite over `instances` generated configurations.
pub fn verify_generated(cfg: &ExperimentConfig, instances: usize) -> Result<Report> {
    let pool = thread_pool();
    let checks = pool.install(|| {
        (0..instances.max(1))
            .into_par_iter()
            .map(|i| {
                let icfg = if i == 0 { cfg.clone() } else { cfg.instance(i) };
                let inst = generate_instance(&icfg)?;
                frame_checks(
                    &inst.frame,
                    Some(inst.partner),
                    &inst.controller,
                    &inst.symbol,
                    derive_seed(icfg.seed, 7),
                )
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(Report::from_instances(checks))
}

/// Invariant suite on a stored frame and controller; the partner frame is the canonical dual.
pub fn verify_files(frame: &GFrame, controller: &Controller, symbol: &Symbol, seed: u64) -> Result<Report> {
    if controller.dim() != frame.dim_h() {
        return Err(Error::DimensionMismatch(format!(
            "controller of size {} for a frame on C^{}",
            controller.dim(),
            frame.dim_h()
        )));
    }
    if symbol.len() != frame.len() {
        return Err(Error::DimensionMismatch(format!(
            "symbol of length {} for {} blocks",
            symbol.len(),
            frame.len()
        )));
    }
    Ok(Report::from_instances(vec![frame_checks(frame, None, controller, symbol, derive_seed(seed, 7))?]))
}

fn report_csv(report: &Report) -> String {
    let mut s = String::from("check,passed,failures,runs,worst_measured,tolerance,min_slack\n");
    for c in &report.summary {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            c.name,
            c.passed,
            c.failures,
            c.runs,
            fmt_f64(c.worst_measured),
            fmt_f64(c.tolerance),
            fmt_f64(c.min_slack)
        );
    }
    s
}

/// One benchmark row per controller kind.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub kind: String,
    pub kappa_s: f64,
    pub kappa_l: f64,
    pub iterations_plain: usize,
    pub iterations_precond: usize,
    /// `||S f - g|| / ||g||` of the preconditioned solution.
    pub final_residual: f64,
    /// `ok`, `plain_not_converged`, `precond_not_converged` or `error: ...`.
    pub status: String,
}

pub fn bench(cfg: &ExperimentConfig) -> Result<Vec<BenchRow>> {
    let frame = generate_frame(cfg)?;
    let g = generate_rhs(cfg);
    let s = frame.frame_operator();
    let fb = frame.frame_bounds();
    let (_, plain) = richardson(&s, fb.lower, fb.upper, &g, cfg.tol, cfg.max_iter)?;

    let pool = thread_pool();
    let rows = pool.install(|| {
        ControllerKind::ALL
            .par_iter()
            .enumerate()
            .map(|(k, &kind)| {
                let mut row = BenchRow {
                    kind: kind.name().to_string(),
                    kappa_s: fb.ratio(),
                    kappa_l: f64::NAN,
                    iterations_plain: plain.iterations,
                    iterations_precond: 0,
                    final_residual: f64::NAN,
                    status: "ok".into(),
                };
                let solved = generate_controller(kind, &frame, derive_seed(cfg.seed, 100 + k as u64)).and_then(|c| {
                    let sys = PreconditionedSystem::new(&frame, &c, &c, cfg.tol)?;
                    let rhs = c.op().apply(&g)?;
                    let (h, rep) = richardson(&sys.operator, sys.lower, sys.upper, &rhs, sys.inner_tol, cfg.max_iter)?;
                    Ok((c.op().apply(&h)?, rep))
                });
                match solved {
                    Ok((f, rep)) => {
                        row.kappa_l = rep.condition_estimate;
                        row.iterations_precond = rep.iterations;
                        row.final_residual = relative_residual(&s, &f, &g);
                        if !plain.converged {
                            row.status = "plain_not_converged".into();
                        }
                        if !rep.converged {
                            row.status = "precond_not_converged".into();
                        }
                    }
                    Err(e) => row.status = format!("error: {e}"),
                }
                row
            })
            .collect::<Vec<_>>()
    });
    Ok(rows)
}

pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut s = String::from("kind,kappa_S,kappa_L,iterations_plain,iterations_precond,final_residual,status\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            r.kind,
            fmt_f64(r.kappa_s),
            fmt_f64(r.kappa_l),
            r.iterations_plain,
            r.iterations_precond,
            fmt_f64(r.final_residual),
            r.status.replace(',', ";")
        );
    }
    s
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MultiplierReport {
    pub blocks: usize,
    pub symbol_sup_norm: f64,
    pub multiplier_op_norm: f64,
    pub controlled_op_norm: f64,
    pub norm_bound: f64,
    pub synthesis_bessel: f64,
    pub analysis_bessel: f64,
    pub factorization_defect: f64,
    pub adjoint_defect: f64,
    pub controlled_factorization_defect: f64,
    pub schatten: Vec<SchattenEstimate>,
    pub passed: bool,
}

/// Multiplier diagnostics for `M = sum m_i C Theta_i^* Lambda_i C` with
/// `Theta = synth`, `Lambda = anal`.
pub fn multiplier_report(
    m: &Symbol,
    c: &Controller,
    synth: &GFrame,
    anal: &GFrame,
    exponents: &[f64],
) -> Result<MultiplierReport> {
    let plain = multiplier(m, synth, anal)?;
    let factorization_defect = plain.max_abs_diff(&multiplier_factored(m, synth, anal)?)?;
    let adjoint_defect = multiplier_adjoint_check(m, synth, anal)?;
    let cm = controlled_multiplier(m, c, synth, anal, c)?;
    let controlled_factorization_defect = cm.max_abs_diff(&controlled_multiplier_product(m, c, synth, anal, c)?)?;
    let nb = controlled_multiplier_norm_bound(m, c, synth, anal, c)?;
    let schatten = exponents
        .iter()
        .map(|&p| multiplier_schatten(m, c, synth, anal, c, p))
        .collect::<Result<Vec<_>>>()?;
    let scale = |x: f64| x.max(1.0);
    let passed = factorization_defect <= 1e-12 * scale(plain.max_abs_entry())
        && adjoint_defect <= 1e-12 * scale(plain.op_norm())
        && controlled_factorization_defect <= 1e-12 * scale(cm.max_abs_entry())
        && nb.norm <= nb.bound + 1e-9 * scale(nb.bound)
        && schatten.iter().all(|e| e.norm <= e.bound + 1e-9 * scale(e.bound));
    Ok(MultiplierReport {
        blocks: m.len(),
        symbol_sup_norm: m.sup_norm(),
        multiplier_op_norm: plain.op_norm(),
        controlled_op_norm: nb.norm,
        norm_bound: nb.bound,
        synthesis_bessel: nb.theta_bessel,
        analysis_bessel: nb.lambda_bessel,
        factorization_defect,
        adjoint_defect,
        controlled_factorization_defect,
        schatten,
        passed,
    })
}

fn multiplier_csv(r: &MultiplierReport) -> String {
    let mut s = String::from("quantity,value\n");
    let mut row = |k: &str, v: f64| {
        let _ = writeln!(s, "{k},{}", fmt_f64(v));
    };
    row("symbol_sup_norm", r.symbol_sup_norm);
    row("multiplier_op_norm", r.multiplier_op_norm);
    row("controlled_op_norm", r.controlled_op_norm);
    row("norm_bound", r.norm_bound);
    row("factorization_defect", r.factorization_defect);
    row("adjoint_defect", r.adjoint_defect);
    row("controlled_factorization_defect", r.controlled_factorization_defect);
    for e in &r.schatten {
        row(&format!("schatten_p{}", e.p), e.norm);
        row(&format!("schatten_bound_p{}", e.p), e.bound);
    }
    s
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Gen(args) => {
            let cfg = args.load_config()?;
            gen(&cfg, args.out.as_deref().unwrap_or(Path::new(".")))?;
            Ok(0)
        }
        Command::Verify(args) => {
            let cfg = args.common.load_config()?;
            let report = match &args.frame {
                Some(frame_path) => {
                    let frame = GFrame::load(frame_path)?;
                    let controller = match &args.controller {
                        Some(p) => Controller::load(p)?,
                        None => Controller::identity(frame.dim_h()),
                    };
                    let symbol = match &args.symbol {
                        Some(p) => Symbol::load(p)?,
                        None => generate_symbol(cfg.symbol_kind, frame.len(), cfg.seed)?,
                    };
                    verify_files(&frame, &controller, &symbol, cfg.seed)?
                }
                None => verify_generated(&cfg, args.instances.unwrap_or(cfg.instances))?,
            };
            let text = match args.common.format.unwrap_or(Format::Json) {
                Format::Json => to_json(&report),
                Format::Csv => report_csv(&report),
            };
            emit(&args.common.out, &text)?;
            Ok(if report.passed { 0 } else { 1 })
        }
        Command::Bench(args) => {
            let cfg = args.load_config()?;
            let rows = bench(&cfg)?;
            let text = match args.format.unwrap_or(Format::Csv) {
                Format::Csv => bench_csv(&rows),
                Format::Json => to_json(&rows),
            };
            emit(&args.out, &text)?;
            Ok(0)
        }
        Command::Multiplier(args) => {
            let cfg = args.common.load_config()?;
            let (frame, generated) = match &args.frame {
                Some(p) => (GFrame::load(p)?, false),
                None => (generate_frame(&cfg)?, true),
            };
            let partner = match (&args.partner, generated) {
                (Some(p), _) => GFrame::load(p)?,
                (None, true) => generate_partner(&cfg)?,
                (None, false) => frame.canonical_dual()?,
            };
            let controller = match &args.controller {
                Some(p) => Controller::load(p)?,
                None if generated => generate_controller(cfg.controller_kind, &frame, cfg.seed)?,
                None => Controller::identity(frame.dim_h()),
            };
            let symbol = match &args.symbol {
                Some(p) => Symbol::load(p)?,
                None => generate_symbol(cfg.symbol_kind, frame.len(), cfg.seed)?,
            };
            let report = multiplier_report(&symbol, &controller, &frame, &partner, &args.exponents)?;
            let text = match args.common.format.unwrap_or(Format::Json) {
                Format::Json => to_json(&report),
                Format::Csv => multiplier_csv(&report),
            };
            emit(&args.common.out, &text)?;
            Ok(if report.passed { 0 } else { 1 })
        }
    }
}

/// Entry point shared by the binary: parse, run, map errors to exit code 2.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
