//! derive → steady state → (match) → channel → grids → overlaps.

use serde::Serialize;

use qst_core::full_model::{linearized_spectrum, Spectrum};
use qst_core::gaussian::{GaussianChannel, NoiseConvention, TransferDirection};
use qst_core::linalg::Mat2;
use qst_core::params::{derive, match_frequencies, steady_state, FreeParameter};
use qst_core::phase_space::{apply_channel_wigner, overlap_fidelity, wigner_state, GridSpec, Overlap, StateKind, WignerGrid};
use qst_core::{DerivedParams, Error, ModelParams, PhysicalParams, SteadyState};

use crate::config::{GridChoice, RunConfig};

/// Frequency mismatch above this fraction of |Ω_ST| is reported.
pub const MISMATCH_WARN_FRACTION: f64 = 0.01;

/// Upper bound on nodes per axis after widening.
pub const MAX_WIDENED_NODES: usize = 2049;

#[derive(Debug, Clone, Serialize)]
pub struct MatchReport {
    pub free: FreeParameter,
    pub value: f64,
    /// Ω′_m − Ω′_2 after matching, rad/s.
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Prepared {
    pub physical: PhysicalParams,
    pub derived: DerivedParams,
    pub matched: Option<MatchReport>,
    pub warnings: Vec<String>,
}

/// Applies the optional frequency match and derives the effective model.
pub fn prepare(cfg: &RunConfig, physical: PhysicalParams) -> Result<Prepared, Error> {
    let (physical, matched) = match &cfg.matching {
        None => (physical, None),
        Some(m) => {
            let kappa = physical.kappa;
            let bracket = (m.lo.unit.to_si(m.lo.value, kappa), m.hi.unit.to_si(m.hi.value, kappa));
            let p = match_frequencies(&physical, m.free, bracket)?;
            let value = match m.free {
                FreeParameter::G => p.g,
                FreeParameter::DeltaA => p.delta_a,
                FreeParameter::OmegaM => p.omega_m,
            };
            let residual = derive(&p)?.frequency_mismatch();
            (p, Some(MatchReport { free: m.free, value, residual }))
        }
    };
    let derived = derive(&physical)?;
    let mut warnings = Vec::new();
    let mismatch = derived.frequency_mismatch();
    if mismatch.abs() > MISMATCH_WARN_FRACTION * derived.omega_st.abs() {
        warnings.push(format!(
            "frequency mismatch: Omega'_m - Omega'_2 = {mismatch:e} rad/s exceeds {MISMATCH_WARN_FRACTION} of |Omega_ST| = {:e} rad/s",
            derived.omega_st.abs()
        ));
    }
    Ok(Prepared { physical, derived, matched, warnings })
}

pub fn stability(p: &PhysicalParams) -> Result<Spectrum, Error> {
    linearized_spectrum(&ModelParams::from_physical(p)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metrics {
    /// Output against the untransferred input state.
    pub vs_input: Overlap,
    /// Output against the noiselessly transferred state.
    pub vs_ideal: Overlap,
}

impl Metrics {
    /// `Tr ρ_out ρ_ideal`; the Uhlmann fidelity when the ideal state is pure.
    pub fn fidelity(&self) -> f64 {
        self.vs_ideal.trace_overlap
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonRow {
    pub convention: NoiseConvention,
    pub d_eff: f64,
    pub baseline: &'static str,
    pub trace_overlap: f64,
    pub normalized_overlap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GridReport {
    pub requested: GridSpec,
    pub used: GridSpec,
    pub widened: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TransferReport {
    pub direction: TransferDirection,
    /// Ω_ST·t_transfer, rad.
    pub theta: f64,
    pub t_transfer: f64,
    pub noise_convention: NoiseConvention,
    pub d_eff: f64,
    /// Added-noise covariance on the side mode, `[[xx, xp], [px, pp]]`.
    pub n22: Mat2<f64>,
    pub momentum_stretch: f64,
    /// `(ξ_2/ξ_m)²`.
    pub expected_stretch: f64,
    pub metrics: Metrics,
    pub fidelity: f64,
    /// Every convention × baseline combination; empty in sweeps.
    pub comparison: Vec<ComparisonRow>,
    pub initial_state: StateKind,
    pub physical: PhysicalParams,
    pub derived: DerivedParams,
    pub matched: Option<MatchReport>,
    pub steady_state: SteadyState,
    pub stability: Option<Spectrum>,
    pub grid: GridReport,
    pub seed: u64,
    pub warnings: Vec<String>,
}

pub struct TransferOutcome {
    pub w_in: WignerGrid,
    pub w_out: WignerGrid,
    pub w_ideal: WignerGrid,
    pub report: TransferReport,
}

pub fn requested_spec(g: &GridChoice) -> GridSpec {
    GridSpec { x_min: -g.span, x_max: g.span, n_x: g.n_x, p_min: -g.span, p_max: g.span, n_p: g.n_p }
}

/// Quadrature displacement and standard deviation of the initial state.
fn state_extent(kind: &StateKind) -> (f64, f64) {
    match *kind {
        StateKind::Vacuum => (0.0, 1.0),
        StateKind::Coherent { alpha } | StateKind::Cat { alpha } => (2.0 * alpha.abs(), 1.0),
        StateKind::Thermal { n_bar } => (0.0, (2.0 * n_bar + 1.0).sqrt()),
    }
}

/// Grows the grid at fixed spacing so that the noise-broadened output keeps
/// the same margin, in standard deviations, as the input had on the
/// requested grid.
pub fn widened_spec(requested: GridSpec, kind: &StateKind, n22: &Mat2<f64>, warnings: &mut Vec<String>) -> GridSpec {
    let tr = n22[0][0] + n22[1][1];
    let det = n22[0][0] * n22[1][1] - n22[0][1] * n22[1][0];
    let lambda = (0.5 * tr + (0.25 * tr * tr - det).max(0.0).sqrt()).max(0.0);
    if lambda == 0.0 {
        return requested;
    }
    let (shift, sd) = state_extent(kind);
    let span = requested.x_max.min(-requested.x_min).min(requested.p_max).min(-requested.p_min);
    let margin = ((span - shift) / sd).max(3.0);
    let needed = (shift + margin * (sd * sd + lambda).sqrt()).max(3.0 * lambda.sqrt() * (1.0 + 1e-9));
    if needed <= span {
        return requested;
    }
    let grow = |lo: f64, hi: f64, n: usize| -> (f64, f64, usize) {
        let h = (hi - lo) / (n - 1) as f64;
        let steps_half = ((needed / h).ceil() as usize).max((n - 1) / 2);
        let m = 2 * steps_half + if (n - 1) % 2 == 1 { 1 } else { 0 };
        if m + 1 > MAX_WIDENED_NODES {
            let m = MAX_WIDENED_NODES - 1;
            let hw = needed;
            (-hw, hw, m + 1)
        } else {
            let half = h * m as f64 / 2.0;
            (-half, half, m + 1)
        }
    };
    let (x_min, x_max, n_x) = grow(requested.x_min, requested.x_max, requested.n_x);
    let (p_min, p_max, n_p) = grow(requested.p_min, requested.p_max, requested.n_p);
    let used = GridSpec { x_min, x_max, n_x, p_min, p_max, n_p };
    warnings.push(format!(
        "grid widened from [{:.3}, {:.3}] ({}x{}) to [{:.3}, {:.3}] ({}x{}) to hold the noise-broadened output",
        requested.x_min, requested.x_max, requested.n_x, requested.n_p, x_min, x_max, n_x, n_p
    ));
    if n_x == MAX_WIDENED_NODES || n_p == MAX_WIDENED_NODES {
        warnings.push(format!("widened grid capped at {MAX_WIDENED_NODES} nodes per axis; spacing coarsened"));
    }
    used
}

fn channel_metrics(
    w_in: &WignerGrid,
    w_ideal: &WignerGrid,
    theta: f64,
    n22: &Mat2<f64>,
) -> Result<(WignerGrid, Metrics), Error> {
    let w_out = apply_channel_wigner(w_in, theta, n22)?;
    let metrics = Metrics { vs_input: overlap_fidelity(&w_out, w_in)?, vs_ideal: overlap_fidelity(&w_out, w_ideal)? };
    Ok((w_out, metrics))
}

/// Runs the transfer for an already resolved parameter set.
pub fn run_transfer(
    cfg: &RunConfig,
    physical: PhysicalParams,
    state: StateKind,
    with_table: bool,
) -> Result<TransferOutcome, Error> {
    let prepared = prepare(cfg, physical)?;
    let mut warnings = prepared.warnings.clone();
    let d = prepared.derived;
    let steady = steady_state(&prepared.physical)?;
    if !steady.phase_shift_negligible {
        warnings.push(format!(
            "steady phase shift Phi = {:e} rad/s is not small against Delta_tilde = {:e} rad/s",
            steady.phi_ss, d.delta_tilde
        ));
    }
    let spectrum = match stability(&prepared.physical) {
        Ok(s) => {
            if !s.stable {
                let unstable = Error::Unstable { max_real: s.max_real };
                if cfg.experiment.require_stable {
                    return Err(unstable);
                }
                warnings.push(unstable.to_string());
            }
            Some(s)
        }
        Err(e) => {
            warnings.push(format!("stability analysis skipped: {e}"));
            None
        }
    };

    let noise = cfg.experiment.noise;
    let channel = GaussianChannel::transfer(&d, noise)?;
    let n22 = channel.side_mode_noise();
    let theta = channel.theta;

    let requested = requested_spec(&cfg.experiment.grid);
    let used = if cfg.experiment.auto_widen {
        // sized for the noisiest convention in the comparison table, so that
        // a transfer and a sweep point share one grid
        let mut widest = n22;
        let raw = GaussianChannel::transfer(&d, NoiseConvention::Raw)?.side_mode_noise();
        if raw[0][0] + raw[1][1] > widest[0][0] + widest[1][1] {
            widest = raw;
        }
        widened_spec(requested, &state, &widest, &mut warnings)
    } else {
        requested
    };

    let w_in = wigner_state(state, used)?;
    let w_ideal = apply_channel_wigner(&w_in, theta, &[[0.0; 2]; 2])?;
    let (w_out, metrics) = channel_metrics(&w_in, &w_ideal, theta, &n22)?;
    for w in [&w_in, &w_ideal, &w_out] {
        for msg in &w.warnings {
            if !warnings.contains(msg) {
                warnings.push(msg.clone());
            }
        }
    }

    let mut comparison = Vec::new();
    if with_table {
        for conv in [NoiseConvention::Symmetrized, NoiseConvention::Raw] {
            let m = if conv == noise {
                metrics
            } else {
                let n = GaussianChannel::transfer(&d, conv)?.side_mode_noise();
                channel_metrics(&w_in, &w_ideal, theta, &n)?.1
            };
            for (baseline, o) in [("input", m.vs_input), ("ideal", m.vs_ideal)] {
                comparison.push(ComparisonRow {
                    convention: conv,
                    d_eff: conv.d_eff(&d),
                    baseline,
                    trace_overlap: o.trace_overlap,
                    normalized_overlap: o.normalized_overlap,
                });
            }
        }
    }

    let report = TransferReport {
        direction: TransferDirection::of(d.omega_st),
        theta,
        t_transfer: d.t_transfer,
        noise_convention: noise,
        d_eff: noise.d_eff(&d),
        n22,
        momentum_stretch: channel.momentum_stretch(),
        expected_stretch: (d.xi_2 / d.xi_m).powi(2),
        metrics,
        fidelity: metrics.fidelity(),
        comparison,
        initial_state: state,
        physical: prepared.physical,
        derived: d,
        matched: prepared.matched,
        steady_state: steady,
        stability: spectrum,
        grid: GridReport { requested, used, widened: used != requested },
        seed: cfg.experiment.seed,
        warnings,
    };
    Ok(TransferOutcome { w_in, w_out, w_ideal, report })
}
