//! One transfer per parameter value, evaluated concurrently, tabulated in
//! sweep order.

use std::io::Write;

use rayon::prelude::*;

use qst_core::phase_space::StateKind;
use qst_core::Error;

use crate::config::{ConfigError, RunConfig, SweepBlock};
use crate::pipeline::{run_transfer, TransferReport};

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub value: f64,
    pub refined: bool,
    pub outcome: Result<TransferReport, String>,
}

impl SweepRow {
    pub fn fidelity(&self) -> Option<f64> {
        self.outcome.as_ref().ok().map(|r| r.fidelity).filter(|f| f.is_finite())
    }
}

/// Resolves the swept value into a parameter set and initial state.
fn point(cfg: &RunConfig, sweep: &SweepBlock, value: f64) -> Result<(qst_core::PhysicalParams, StateKind), ConfigError> {
    if sweep.parameter == "alpha" {
        let state = match cfg.experiment.state {
            StateKind::Cat { .. } => StateKind::Cat { alpha: value },
            StateKind::Coherent { .. } => StateKind::Coherent { alpha: value },
            _ => return Err(ConfigError { line: None, message: "sweeping alpha needs a cat or coherent state".into() }),
        };
        return Ok((cfg.physical_params(), state));
    }
    let physical = cfg.physical.with_override(&sweep.parameter, value)?.resolve();
    Ok((physical, cfg.experiment.state))
}

fn evaluate(cfg: &RunConfig, sweep: &SweepBlock, value: f64, refined: bool) -> SweepRow {
    let outcome = point(cfg, sweep, value)
        .map_err(|e| e.to_string())
        .and_then(|(p, s)| run_transfer(cfg, p, s, false).map(|o| o.report).map_err(|e: Error| e.to_string()));
    SweepRow { value, refined, outcome }
}

/// Golden-section search for the fidelity maximum between the neighbours
/// of the best grid point. The returned row is never worse than that point.
fn refine(cfg: &RunConfig, sweep: &SweepBlock, values: &[f64], rows: &[SweepRow]) -> Option<SweepRow> {
    let (best, best_f) = rows
        .iter()
        .enumerate()
        .filter_map(|(i, r)| r.fidelity().map(|f| (i, f)))
        .max_by(|a, b| a.1.total_cmp(&b.1))?;
    let mut a = values[best.saturating_sub(1)];
    let mut b = values[(best + 1).min(values.len() - 1)];
    if a == b {
        return None;
    }
    let mut incumbent = rows[best].clone();
    let mut incumbent_f = best_f;
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let width = (b - a).abs();
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let mut rc = evaluate(cfg, sweep, c, true);
    let mut rd = evaluate(cfg, sweep, d, true);
    for _ in 0..40 {
        let (fc, fd) = (rc.fidelity().unwrap_or(f64::NEG_INFINITY), rd.fidelity().unwrap_or(f64::NEG_INFINITY));
        for (r, f) in [(&rc, fc), (&rd, fd)] {
            if f > incumbent_f {
                incumbent = r.clone();
                incumbent_f = f;
            }
        }
        if (b - a).abs() <= 1e-4 * width {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            rd = rc;
            c = b - ratio * (b - a);
            rc = evaluate(cfg, sweep, c, true);
        } else {
            a = c;
            c = d;
            rc = rd;
            d = a + ratio * (b - a);
            rd = evaluate(cfg, sweep, d, true);
        }
    }
    incumbent.refined = true;
    Some(incumbent)
}

pub fn run_sweep(cfg: &RunConfig, sweep: &SweepBlock, jobs: usize) -> Result<Vec<SweepRow>, Error> {
    let values = sweep.values.values();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Input(format!("thread pool: {e}")))?;
    pool.install(|| {
        let mut rows: Vec<SweepRow> = values.par_iter().map(|&v| evaluate(cfg, sweep, v, false)).collect();
        if sweep.optimize {
            if let Some(r) = refine(cfg, sweep, &values, &rows) {
                rows.push(r);
            }
        }
        Ok(rows)
    })
}

pub const COLUMNS: [&str; 26] = [
    "index",
    "parameter",
    "value",
    "kind",
    "status",
    "omega_st",
    "xi_2",
    "xi_m",
    "omega_2",
    "delta_tilde",
    "n_cav",
    "d_chi",
    "d_eff",
    "t_transfer",
    "omega_m_shift",
    "omega_2_shift",
    "g",
    "theta",
    "n22_xx",
    "n22_xp",
    "n22_pp",
    "vs_input_trace_overlap",
    "vs_input_normalized_overlap",
    "vs_ideal_trace_overlap",
    "vs_ideal_normalized_overlap",
    "fidelity",
];

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Floats use Rust's shortest round-trip formatting.
pub fn write_sweep_csv<W: Write>(parameter: &str, rows: &[SweepRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{},warnings", COLUMNS.join(","))?;
    for (i, row) in rows.iter().enumerate() {
        let kind = if row.refined { "refined" } else { "grid" };
        match &row.outcome {
            Ok(r) => {
                let d = &r.derived;
                let nums = [
                    d.omega_st,
                    d.xi_2,
                    d.xi_m,
                    d.omega_2,
                    d.delta_tilde,
                    d.n_cav,
                    d.d_chi,
                    r.d_eff,
                    d.t_transfer,
                    d.omega_m_shift,
                    d.omega_2_shift,
                    r.physical.g,
                    r.theta,
                    r.n22[0][0],
                    r.n22[0][1],
                    r.n22[1][1],
                    r.metrics.vs_input.trace_overlap,
                    r.metrics.vs_input.normalized_overlap,
                    r.metrics.vs_ideal.trace_overlap,
                    r.metrics.vs_ideal.normalized_overlap,
                    r.fidelity,
                ];
                let nums: Vec<String> = nums.iter().map(|x| x.to_string()).collect();
                writeln!(
                    w,
                    "{i},{},{},{kind},ok,{},{}",
                    quote(parameter),
                    row.value,
                    nums.join(","),
                    quote(&r.warnings.join("; "))
                )?;
            }
            Err(e) => {
                let blanks = vec![""; COLUMNS.len() - 5].join(",");
                writeln!(w, "{i},{},{},{kind},{},{blanks},", quote(parameter), row.value, quote(&format!("error: {e}")))?;
            }
        }
    }
    Ok(())
}
