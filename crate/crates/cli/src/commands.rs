use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use qst_core::gaussian::NoiseConvention;
use qst_core::params::steady_state;
use qst_core::phase_space::{read_csv, render_pgm, render_ppm, wigner_state, write_csv, WignerGrid};

use crate::config::{parse_config, parse_grid, RunConfig};
use crate::oracle::run_oracle_check;
use crate::pipeline::{prepare, requested_spec, run_transfer, stability};
use crate::sweep::{run_sweep, write_sweep_csv};
use crate::{Failure, EXIT_NUMERICAL};

#[derive(Debug, Parser)]
#[command(name = "qst", version, about = "Condensate side mode / mirror quantum state transfer simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Run configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides [output] dir).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for sweeps.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Grid nodes as NxM.
    #[arg(long, global = true)]
    pub grid: Option<String>,
    /// Grid half-extent: both axes span [-XMAX, XMAX].
    #[arg(long, global = true, value_name = "XMAX")]
    pub span: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Effective couplings and rates.
    Derive,
    /// Self-consistent classical steady state.
    Steady,
    /// Tune the [match] parameter until the shifted frequencies agree.
    Match,
    /// Transfer the configured state and score it.
    Transfer {
        /// Switch the added noise off.
        #[arg(long)]
        no_noise: bool,
    },
    /// Transfer over the [sweep] values.
    Sweep,
    /// Linearized spectrum of the full mean-field model.
    Spectrum,
    /// Cross-check the channel, phase-space and Fock-space routes.
    OracleCheck,
    /// PGM/PPM heat maps of Wigner CSV files, or of the configured state.
    Render { inputs: Vec<PathBuf> },
}

struct Context {
    cfg: Option<RunConfig>,
    out: PathBuf,
    jobs: usize,
}

impl Context {
    fn cfg(&self) -> Result<&RunConfig, Failure> {
        self.cfg.as_ref().ok_or_else(|| Failure::config("this subcommand needs --config"))
    }
}

fn load(cli: &Cli) -> Result<Context, Failure> {
    let cfg = match &cli.config {
        None => None,
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::config(format!("cannot read {}: {e}", path.display())))?;
            let mut cfg = parse_config(&text).map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
            if let Some(seed) = cli.seed {
                cfg.experiment.seed = seed;
            }
            if let Some(g) = &cli.grid {
                let (n_x, n_p) = parse_grid(g).map_err(|m| Failure::config(format!("--grid: {m}")))?;
                for choice in [&mut cfg.experiment.grid, &mut cfg.oracle.grid] {
                    choice.n_x = n_x;
                    choice.n_p = n_p;
                }
            }
            if let Some(span) = cli.span {
                if !(span > 0.0 && span.is_finite()) {
                    return Err(Failure::config(format!("--span must be positive, got {span}")));
                }
                cfg.experiment.grid.span = span;
                cfg.oracle.grid.span = span;
            }
            Some(cfg)
        }
    };
    let out = cli
        .out
        .clone()
        .or_else(|| cfg.as_ref().and_then(|c| c.output_dir.clone()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    let jobs = match cli.jobs {
        Some(0) => return Err(Failure::config("--jobs must be at least 1")),
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    Ok(Context { cfg, out, jobs })
}

fn io_fail(path: &Path, e: std::io::Error) -> Failure {
    Failure::numerical("io", format!("{}: {e}", path.display()))
}

fn create(dir: &Path, name: &str) -> Result<(PathBuf, BufWriter<File>), Failure> {
    fs::create_dir_all(dir).map_err(|e| io_fail(dir, e))?;
    let path = dir.join(name);
    let f = File::create(&path).map_err(|e| io_fail(&path, e))?;
    Ok((path, BufWriter::new(f)))
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf, Failure> {
    let (path, mut w) = create(dir, name)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Failure::numerical("io", e.to_string()))?;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| io_fail(&path, e))?;
    Ok(path)
}

fn write_grid(dir: &Path, stem: &str, grid: &WignerGrid) -> Result<(), Failure> {
    let (path, mut w) = create(dir, &format!("{stem}.csv"))?;
    write_csv(grid, &mut w).and_then(|_| w.flush()).map_err(|e| io_fail(&path, e))?;
    render(dir, stem, grid)
}

fn render(dir: &Path, stem: &str, grid: &WignerGrid) -> Result<(), Failure> {
    let (path, mut w) = create(dir, &format!("{stem}.pgm"))?;
    render_pgm(grid, &mut w).and_then(|_| w.flush()).map_err(|e| io_fail(&path, e))?;
    let (path, mut w) = create(dir, &format!("{stem}.ppm"))?;
    render_ppm(grid, &mut w).and_then(|_| w.flush()).map_err(|e| io_fail(&path, e))?;
    Ok(())
}

fn print(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("JSON values always serialize"));
}

pub fn execute(cli: &Cli) -> Result<(), Failure> {
    let ctx = load(cli)?;
    match &cli.command {
        Command::Derive => {
            let cfg = ctx.cfg()?;
            let prepared = prepare(cfg, cfg.physical_params())?;
            let path = write_json(&ctx.out, "derived.json", &prepared)?;
            print(&json!({ "derived": prepared.derived, "warnings": prepared.warnings, "file": path }));
        }
        Command::Steady => {
            let cfg = ctx.cfg()?;
            let prepared = prepare(cfg, cfg.physical_params())?;
            let ss = steady_state(&prepared.physical)?;
            let report = json!({
                "steady_state": ss,
                "first_order_phi_ss": prepared.derived.phi_ss,
                "delta_tilde": prepared.derived.delta_tilde,
                "physical": prepared.physical,
            });
            let path = write_json(&ctx.out, "steady.json", &report)?;
            print(&json!({ "steady_state": ss, "file": path }));
        }
        Command::Match => {
            let cfg = ctx.cfg()?;
            if cfg.matching.is_none() {
                return Err(Failure::config("match needs an enabled [match] table"));
            }
            let prepared = prepare(cfg, cfg.physical_params())?;
            let report = json!({ "matched": prepared.matched, "physical": prepared.physical, "derived": prepared.derived });
            let path = write_json(&ctx.out, "match.json", &report)?;
            print(&json!({ "matched": prepared.matched, "file": path }));
        }
        Command::Spectrum => {
            let cfg = ctx.cfg()?;
            let prepared = prepare(cfg, cfg.physical_params())?;
            let s = stability(&prepared.physical)?;
            let path = write_json(&ctx.out, "spectrum.json", &s.eigenvalues)?;
            print(&json!({
                "stable": s.stable,
                "max_real": s.max_real,
                "mechanical_splitting": s.mechanical_splitting().ok(),
                "two_abs_omega_st": 2.0 * prepared.derived.omega_st.abs(),
                "file": path,
            }));
        }
        Command::Transfer { no_noise } => {
            let mut cfg = ctx.cfg()?.clone();
            if *no_noise {
                cfg.experiment.noise = NoiseConvention::Off;
            }
            let outcome = run_transfer(&cfg, cfg.physical_params(), cfg.experiment.state, true)?;
            write_grid(&ctx.out, "W_in", &outcome.w_in)?;
            write_grid(&ctx.out, "W_out", &outcome.w_out)?;
            write_grid(&ctx.out, "W_ideal", &outcome.w_ideal)?;
            let path = write_json(&ctx.out, "fidelity.json", &outcome.report)?;
            let r = &outcome.report;
            print(&json!({
                "direction": r.direction,
                "metrics": r.metrics,
                "n22": r.n22,
                "warnings": r.warnings,
                "file": path,
            }));
        }
        Command::Sweep => {
            let cfg = ctx.cfg()?;
            let sweep = cfg.sweep.as_ref().ok_or_else(|| Failure::config("sweep needs a [sweep] table"))?;
            let rows = run_sweep(cfg, sweep, ctx.jobs)?;
            let (path, mut w) = create(&ctx.out, "sweep.csv")?;
            write_sweep_csv(&sweep.parameter, &rows, &mut w).and_then(|_| w.flush()).map_err(|e| io_fail(&path, e))?;
            let failed = rows.iter().filter(|r| r.outcome.is_err()).count();
            print(&json!({ "rows": rows.len(), "failed": failed, "file": path }));
            if failed == rows.len() {
                return Err(Failure::numerical("sweep", "every sweep point failed; see sweep.csv"));
            }
        }
        Command::OracleCheck => {
            let cfg = ctx.cfg()?;
            let prepared = prepare(cfg, cfg.physical_params())?;
            let report = run_oracle_check(cfg, &prepared.derived)?;
            let path = write_json(&ctx.out, "oracle_check.json", &report)?;
            print(&json!({ "passed": report.passed, "file": path }));
            if !report.passed {
                let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
                return Err(Failure::numerical("oracle", format!("failed checks: {}", failed.join(", "))));
            }
        }
        Command::Render { inputs } => {
            if inputs.is_empty() {
                let cfg = ctx.cfg()?;
                let grid = wigner_state(cfg.experiment.state, requested_spec(&cfg.experiment.grid))?;
                render(&ctx.out, "W_in", &grid)?;
            }
            for input in inputs {
                let f = File::open(input).map_err(|e| Failure::config(format!("{}: {e}", input.display())))?;
                let grid = read_csv(BufReader::new(f))?;
                let stem = input.file_stem().and_then(|s| s.to_str()).unwrap_or("grid");
                render(&ctx.out, stem, &grid)?;
            }
        }
    }
    Ok(())
}

/// Parses arguments, runs, reports failures as JSON on stderr (and in
/// `error.json` for numerical failures), and returns the exit code.
pub fn main_with_args<I, S>(args: I) -> u8
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { crate::EXIT_CONFIG } else { crate::EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => crate::EXIT_OK,
        Err(f) => {
            let report = json!({ "error": f.kind, "message": f.message, "exit_code": f.code });
            eprintln!("{}", serde_json::to_string_pretty(&report).expect("JSON values always serialize"));
            if let (EXIT_NUMERICAL, Some(dir)) = (f.code, &cli.out) {
                let _ = write_json(dir, "error.json", &report);
            }
            f.code
        }
    }
}
