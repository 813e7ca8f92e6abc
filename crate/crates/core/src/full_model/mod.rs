//! Mean-field model before the cavity is eliminated.
//!
//! State: `(Re a, Im a, x_2, p_2, x_m, p_m)`, with
//!
//! ```text
//! da/dt   = −(i(Δ̃ + Φ) + κ/2)·a + η,   Φ = −ξ_m·x_m + ξ_2·x_2
//! dx_j/dt = Ω_j·p_j
//! dp_m/dt = −Ω_m·x_m + 2ξ_m|a|²
//! dp_2/dt = −Ω_2·x_2 − 2ξ_2|a|²
//! ```
//!
//! `⟨a†a⟩` is closed as `|⟨a⟩|²`; fluctuations live only in the effective
//! Gaussian model.

mod analysis;
mod integrate;
mod spectrum;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{derive, solve_fixed_point, FixedPointInputs, PhysicalParams, SteadyState, SteadyStateOptions};
use crate::scalar::Real;

pub use analysis::{beat_frequency, compare_first_moments, compare_first_moments_at, demodulate, exchange_beat, moving_average, MomentComparison};
pub use integrate::{integrate, integrate_at, write_trajectory_csv, IntegrateOptions, Trajectory};
pub use spectrum::{jacobian, linearized_spectrum, spectrum_at, stability_boundary, Eigenvalue, Spectrum};

pub const RE_A: usize = 0;
pub const IM_A: usize = 1;
pub const X2: usize = 2;
pub const P2: usize = 3;
pub const XM: usize = 4;
pub const PM: usize = 5;

/// Rates (rad/s) and couplings of the three-mode model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams<T = f64> {
    pub kappa: T,
    pub delta_tilde: T,
    pub eta: T,
    pub omega_m: T,
    pub omega_2: T,
    pub xi_m: T,
    pub xi_2: T,
}

/// Shifted frequencies and exchange rate predicted by the effective model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveRates<T = f64> {
    pub omega_m_shift: T,
    pub omega_2_shift: T,
    pub omega_st: T,
}

impl<T: Real> ModelParams<T> {
    pub fn from_physical(p: &PhysicalParams<T>) -> Result<Self> {
        let d = derive(p)?;
        Ok(ModelParams {
            kappa: p.kappa,
            delta_tilde: d.delta_tilde,
            eta: p.eta,
            omega_m: p.omega_m,
            omega_2: d.omega_2,
            xi_m: d.xi_m,
            xi_2: d.xi_2,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.kappa, self.delta_tilde, self.eta, self.omega_m, self.omega_2, self.xi_m, self.xi_2];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("model parameters must be finite"));
        }
        if !(self.kappa > T::zero() && self.omega_m > T::zero() && self.omega_2 > T::zero()) {
            return Err(Error::input("kappa, omega_m and omega_2 must be positive"));
        }
        Ok(())
    }

    /// Same closed forms as [`derive`], from the model rates directly.
    pub fn effective(&self) -> EffectiveRates<T> {
        let denom = self.delta_tilde * self.delta_tilde + self.kappa * self.kappa / T::of(4.0);
        let eta2 = self.eta * self.eta;
        let spring = T::of(4.0) * eta2 * self.delta_tilde / (denom * denom);
        EffectiveRates {
            omega_m_shift: self.omega_m - spring * self.xi_m * self.xi_m,
            omega_2_shift: self.omega_2 - spring * self.xi_2 * self.xi_2,
            omega_st: spring * self.xi_2 * self.xi_m,
        }
    }

    /// Rates of the linearized mean-field dynamics at weak coupling: half
    /// the spring shifts and an exchange at `−Ω_ST/2`.
    pub fn mean_field_rates(&self) -> EffectiveRates<T> {
        let e = self.effective();
        let half = T::of(0.5);
        EffectiveRates {
            omega_m_shift: half * (self.omega_m + e.omega_m_shift),
            omega_2_shift: half * (self.omega_2 + e.omega_2_shift),
            omega_st: -half * e.omega_st,
        }
    }

    pub fn fixed_point(&self) -> Result<SteadyState<T>> {
        self.fixed_point_with(&SteadyStateOptions::default())
    }

    pub fn fixed_point_with(&self, opts: &SteadyStateOptions) -> Result<SteadyState<T>> {
        self.validate()?;
        solve_fixed_point(
            &FixedPointInputs {
                eta: self.eta,
                kappa: self.kappa,
                delta_tilde: self.delta_tilde,
                xi_m: self.xi_m,
                xi_2: self.xi_2,
                omega_m: self.omega_m,
                omega_2: self.omega_2,
            },
            opts,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FullState<T = f64>(pub [T; 6]);

impl<T: Real> FullState<T> {
    pub fn zero() -> Self {
        FullState([T::zero(); 6])
    }

    /// The classical fixed point, oscillator momenta zero.
    pub fn at_rest(ss: &SteadyState<T>) -> Self {
        let mut v = [T::zero(); 6];
        v[RE_A] = ss.a_s.re;
        v[IM_A] = ss.a_s.im;
        v[X2] = ss.x_2;
        v[XM] = ss.x_m;
        FullState(v)
    }

    pub fn photons(&self) -> T {
        self.0[RE_A] * self.0[RE_A] + self.0[IM_A] * self.0[IM_A]
    }

    pub fn phase_shift(&self, p: &ModelParams<T>) -> T {
        -p.xi_m * self.0[XM] + p.xi_2 * self.0[X2]
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

pub fn rhs<T: Real>(s: &FullState<T>, p: &ModelParams<T>) -> [T; 6] {
    let v = &s.0;
    let two = T::of(2.0);
    let detuning = p.delta_tilde + s.phase_shift(p);
    let half_kappa = p.kappa / two;
    let n = s.photons();
    [
        -half_kappa * v[RE_A] + detuning * v[IM_A] + p.eta,
        -half_kappa * v[IM_A] - detuning * v[RE_A],
        p.omega_2 * v[P2],
        -p.omega_2 * v[X2] - two * p.xi_2 * n,
        p.omega_m * v[PM],
        -p.omega_m * v[XM] + two * p.xi_m * n,
    ]
}
