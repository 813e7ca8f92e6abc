//! Cross-module consistency checks at configurable sizes.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use qst_core::fock::{
    apply_gaussian_noise, cat_state_fock, evolve_beamsplitter, number_state, squeezed_coherent_fock, wigner_from_fock,
    FockDensityMatrix, DEFAULT_QUADRATURE_ORDER, SIDE,
};
use qst_core::gaussian::{apply_channel_moments, noise_covariance, propagator, GaussianChannel};
use qst_core::linalg::{self, Mat4};
use qst_core::phase_space::{apply_channel_wigner, overlap_fidelity, wigner_state, StateKind, WignerGrid};
use qst_core::sde::{sde_trajectory, SdeOptions};
use qst_core::{DerivedParams, Error};

use crate::config::RunConfig;
use crate::pipeline::requested_spec;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed deviation.
    pub value: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub passed: bool,
    pub dim: usize,
    pub grid: qst_core::GridSpec,
    pub sde_paths: usize,
    pub cases: usize,
    pub seed: u64,
    pub tolerance_scale: f64,
    pub checks: Vec<Check>,
}

/// Even cat Wigner function at `(x, p)`.
pub fn cat_wigner(alpha: f64, x: f64, p: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let norm = 2.0 * (1.0 + (-2.0 * alpha * alpha).exp());
    let g = |u: f64| (-(u * u + p * p) / 2.0).exp();
    (g(x - 2.0 * alpha) + g(x + 2.0 * alpha) + 2.0 * g(x) * (2.0 * alpha * p).cos()) / (two_pi * norm)
}

fn rel_diff(a: &Mat4<f64>, b: &Mat4<f64>) -> f64 {
    linalg::max_abs_diff(a, b) / linalg::max_abs(a).max(linalg::max_abs(b)).max(1.0)
}

/// Side-mode state after the Fock beamsplitter at quadrature angle `theta`,
/// mirror prepared in `mirror`, side mode in vacuum.
pub fn mirror_to_side(mirror: &[Complex<f64>], theta: f64) -> Result<FockDensityMatrix, Error> {
    let vac = number_state(0, mirror.len())?;
    let rho = FockDensityMatrix::pure_product(&vac, mirror)?;
    // the Fock generator runs the quadrature channel backwards in time
    evolve_beamsplitter(&rho, -theta)?.partial_trace(SIDE)
}

pub fn run_oracle_check(cfg: &RunConfig, derived: &DerivedParams) -> Result<OracleReport, Error> {
    let o = &cfg.oracle;
    let scale = o.tolerance_scale;
    let seed = cfg.experiment.seed;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();
    let mut check = |name, value: f64, tol: f64| {
        let tolerance = tol * scale;
        checks.push(Check { name, passed: value <= tolerance, value, tolerance });
    };

    let (mut symp, mut group, mut comp, mut rank) = (0.0f64, 0.0f64, 0.0f64, 0usize);
    let j = linalg::symplectic_form::<f64>();
    for _ in 0..o.cases {
        let w = rng.random_range(-5.0..5.0);
        let (t1, t2) = (rng.random_range(0.0..5.0), rng.random_range(0.0..5.0));
        let (xi_2, xi_m, d) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0), rng.random_range(0.0..2.0));
        let s = propagator(w, t1);
        symp = symp.max(linalg::max_abs_diff(&linalg::congruence(&s, &j), &j));
        group = group.max(linalg::max_abs_diff(&linalg::matmul(&s, &propagator(w, t2)), &propagator(w, t1 + t2)));
        let n1 = noise_covariance(w, xi_2, xi_m, d, t1);
        let n12 = noise_covariance(w, xi_2, xi_m, d, t1 + t2);
        let carried = linalg::add(&linalg::congruence(&propagator(w, t2), &n1), &noise_covariance(w, xi_2, xi_m, d, t2));
        comp = comp.max(rel_diff(&n12, &carried));
        rank = rank.max(linalg::symmetric_rank(&n12, 1e-10));
    }
    check("symplectic_form_preserved", symp, 1e-10);
    check("propagator_group_law", group, 1e-10);
    check("noise_semigroup_law", comp, 1e-10);
    check("noise_rank_at_most_two", rank as f64, 2.0);

    let ch = GaussianChannel::transfer(derived, cfg.experiment.noise)?;
    let expected = (derived.xi_2 / derived.xi_m).powi(2);
    let stretch = if ch.n[0][0] == 0.0 { expected } else { ch.momentum_stretch() };
    check("momentum_stretch_ratio", ((stretch - expected) / expected).abs(), 1e-9);

    let spec = requested_spec(&o.grid);
    let alpha = 2.0;
    let w_in = wigner_state(StateKind::Cat { alpha }, spec)?;
    let quarter = std::f64::consts::FRAC_PI_2;
    let clean = apply_channel_wigner(&w_in, quarter, &[[0.0; 2]; 2])?;
    // W_out(x, p) = W_in(R(−π/2)(x, p)) = W_in(p, −x)
    let analytic = WignerGrid::from_fn(spec, |x, p| cat_wigner(alpha, p, -x))?;
    let ov = overlap_fidelity(&clean, &analytic)?;
    check("noiseless_cat_transfer_overlap", (ov.trace_overlap - 1.0).abs(), 1e-3);

    let mirror = cat_state_fock(alpha, o.dim)?;
    let side = mirror_to_side(&mirror, quarter)?;
    let fock = wigner_from_fock(&side, spec)?;
    check("fock_vs_phase_space_noiseless", clean.max_abs_diff(&fock)?, 1e-3);

    let n22 = [[0.3, 0.0], [0.0, 0.3 * expected]];
    let noisy = apply_channel_wigner(&w_in, quarter, &n22)?;
    let fock_noisy = wigner_from_fock(&apply_gaussian_noise(&side, &n22, DEFAULT_QUADRATURE_ORDER)?, spec)?;
    check("fock_vs_phase_space_noisy", noisy.max_abs_diff(&fock_noisy)?, 1e-3);

    let mut moments: f64 = 0.0;
    for _ in 0..o.cases.min(20) {
        let mut mode = || -> Result<Vec<Complex<f64>>, Error> {
            let beta = Complex::new(rng.random_range(-0.7..0.7), rng.random_range(-0.7..0.7));
            squeezed_coherent_fock(beta, rng.random_range(0.0..0.35), rng.random_range(-3.0..3.0), o.dim)
        };
        let (a, b) = (mode()?, mode()?);
        let theta: f64 = rng.random_range(-3.0..3.0);
        let rho = FockDensityMatrix::pure_product(&a, &b)?;
        let before = rho.two_mode_moments()?;
        let after = evolve_beamsplitter(&rho, -theta)?.two_mode_moments()?;
        let predicted = apply_channel_moments(&before, &GaussianChannel::beamsplitter(1.0, 1.0, 1.0, 0.0, theta)?)?;
        for i in 0..4 {
            moments = moments.max((predicted.mean[i] - after.mean[i]).abs());
            for k in 0..4 {
                moments = moments.max((predicted.cov[i][k] - after.cov[i][k]).abs());
            }
        }
    }
    check("fock_vs_gaussian_moments", moments, 1e-8);

    let vac = wigner_state(StateKind::Vacuum, spec)?;
    let theta = rng.random_range(-10.0..10.0);
    let rotated = apply_channel_wigner(&vac, theta, &[[0.0; 2]; 2])?;
    check("vacuum_rotation_fixed_point", rotated.max_abs_diff(&vac)?, 1e-8);
    let blurred = apply_channel_wigner(&vac, theta, &[[0.5, 0.1], [0.1, 0.4]])?;
    check("convolution_normalization", (blurred.integral() - vac.integral()).abs(), 1e-6);

    if o.sde_paths > 0 && derived.omega_st != 0.0 {
        let d_eff = cfg.experiment.noise.d_eff(derived);
        let dt = 0.005 / derived.omega_st.abs();
        let ens = sde_trajectory(derived, &SdeOptions::new(seed, dt, derived.t_transfer, o.sde_paths, d_eff))?;
        let t_end = *ens.times.last().expect("at least one sample");
        let exact = noise_covariance(derived.omega_st, derived.xi_2, derived.xi_m, d_eff, t_end);
        check("sde_ensemble_covariance", worst_significant(&ens.cov[ens.cov.len() - 1], &exact), 0.05);
    }

    Ok(OracleReport {
        passed: checks.iter().all(|c| c.passed),
        dim: o.dim,
        grid: spec,
        sde_paths: o.sde_paths,
        cases: o.cases,
        seed,
        tolerance_scale: scale,
        checks,
    })
}

/// Largest relative error over elements above 1% of the largest.
pub fn worst_significant(sample: &Mat4<f64>, exact: &Mat4<f64>) -> f64 {
    let top = linalg::max_abs(exact);
    let mut worst: f64 = 0.0;
    for i in 0..4 {
        for k in 0..4 {
            if exact[i][k].abs() > 0.01 * top {
                worst = worst.max((sample[i][k] - exact[i][k]).abs() / exact[i][k].abs());
            }
        }
    }
    worst
}
