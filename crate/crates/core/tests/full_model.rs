//! Full three-mode mean-field model against the effective exchange picture.

use std::f64::consts::PI;

use qst_core::full_model::{
    compare_first_moments, compare_first_moments_at, exchange_beat, linearized_spectrum, stability_boundary,
    ModelParams,
};
use qst_core::params::{derive, match_frequencies, FreeParameter, PhysicalParams};

/// Paper defaults at weak pump, mirror frequency matched to the side mode.
fn weak_pump() -> PhysicalParams {
    let base = PhysicalParams { eta: 3e6, g: 3.8e7, ..PhysicalParams::paper_defaults() };
    match_frequencies(&base, FreeParameter::OmegaM, (2.0 * PI * 1e4, 2.0 * PI * 2e4)).unwrap()
}

/// Identical oscillators and couplings: matched by construction, with
/// `Ω_ST = 100 rad/s` and a static phase shift of 0.2 % of `Δ̃`.
fn symmetric_probe() -> ModelParams {
    let (omega, kappa, xi) = (1e5, 2.6e7, 1e5);
    let delta: f64 = kappa / 2.0;
    let denom = delta * delta + kappa * kappa / 4.0;
    let photons = 100.0 * denom / (4.0 * delta * xi * xi);
    ModelParams {
        kappa,
        delta_tilde: delta,
        eta: (photons * denom).sqrt(),
        omega_m: omega,
        omega_2: omega,
        xi_m: xi,
        xi_2: xi,
    }
}

fn paper_matched() -> PhysicalParams {
    match_frequencies(&PhysicalParams::paper_defaults(), FreeParameter::G, (1e6, 1e9)).unwrap()
}

#[test]
fn weak_pump_set_meets_the_preconditions() {
    let p = weak_pump();
    let d = derive(&p).unwrap();
    assert!(d.frequency_mismatch().abs() <= 1e-9 * p.omega_m);
    assert!(p.kappa >= 100.0 * d.omega_st.abs());
    let ss = ModelParams::from_physical(&p).unwrap().fixed_point().unwrap();
    assert!(ss.phi_ss.abs() < 0.02 * d.delta_tilde);
}

#[test]
fn linearized_splitting_is_twice_omega_st() {
    let p = weak_pump();
    let d = derive(&p).unwrap();
    let split = linearized_spectrum(&ModelParams::from_physical(&p).unwrap()).unwrap().mechanical_splitting().unwrap();
    let ratio = split / (2.0 * d.omega_st.abs());
    assert!((ratio - 1.0).abs() <= 0.02, "splitting / 2|Omega_ST| = {ratio}");
}

#[test]
fn beat_agrees_with_linearized_splitting() {
    let m = ModelParams::from_physical(&weak_pump()).unwrap();
    let split = linearized_spectrum(&m).unwrap().mechanical_splitting().unwrap();
    let beat = exchange_beat(&m, 0.1, 1e-9).unwrap();
    assert!((beat / split - 1.0).abs() < 0.02, "beat / splitting = {}", beat / split);
}

#[test]
fn first_moments_follow_the_effective_channel() {
    let m = symmetric_probe();
    let cmp = compare_first_moments(&m, 0.1, 1e-9).unwrap();
    assert!(cmp.rms_relative <= 0.05, "RMS deviation {:.3} of the displacement", cmp.rms_relative);
}

#[test]
fn first_moments_follow_the_mean_field_rates() {
    // half the spring shift, exchange at −Ω_ST/2
    let m = symmetric_probe();
    let cmp = compare_first_moments_at(&m, 0.1, 1e-9, &m.mean_field_rates()).unwrap();
    assert!(cmp.rms_relative <= 0.02, "RMS deviation {:.4}", cmp.rms_relative);
    let split = linearized_spectrum(&m).unwrap().mechanical_splitting().unwrap();
    assert!((split / m.effective().omega_st.abs() - 1.0).abs() < 0.01);
}

#[test]
fn paper_defaults_sit_past_the_stability_boundary() {
    // the static phase shift overturns the detuning: Δ̃ + Φ < 0
    let m = ModelParams::from_physical(&paper_matched()).unwrap();
    let ss = m.fixed_point().unwrap();
    assert!(m.delta_tilde + ss.phi_ss < 0.0);
    let s = linearized_spectrum(&m).unwrap();
    assert!(!s.stable && s.max_real > 0.0);
}

#[test]
fn sign_flipped_detuning_is_flagged_unstable() {
    let m = ModelParams::from_physical(&paper_matched()).unwrap();
    let flipped = ModelParams { delta_tilde: -m.delta_tilde, ..m };
    let s = linearized_spectrum(&flipped).unwrap();
    assert!(!s.stable && s.max_real > 0.0);
}

#[test]
fn stability_boundary_regression() {
    let m = ModelParams::from_physical(&paper_matched()).unwrap();
    let eta = stability_boundary(&m, 1e6, 1e8, 1e-9).unwrap();
    assert!((eta / 3.022_284_874e7 - 1.0).abs() < 1e-6, "{eta:e}");
    // the boundary is where the effective detuning changes sign
    let ss = ModelParams { eta, ..m }.fixed_point().unwrap();
    assert!(((m.delta_tilde + ss.phi_ss) / m.delta_tilde).abs() < 1e-3);
    assert!(stability_boundary(&m, 1e6, 2e6, 1e-6).is_err());
}

#[test]
fn spectrum_comes_in_conjugate_pairs() {
    let s = linearized_spectrum(&ModelParams::from_physical(&paper_matched()).unwrap()).unwrap();
    for e in &s.eigenvalues {
        let partner = s.eigenvalues.iter().any(|f| (f.re - e.re).abs() <= 1e-9 * e.re.abs().max(1.0) && (f.im + e.im).abs() <= 1e-9 * e.im.abs().max(1.0));
        assert!(partner, "{e:?}");
    }
}
