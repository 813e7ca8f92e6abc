//! The effective beamsplitter channel between the side mode and the mirror.
//!
//! Quadratures are ordered `(x_2, p_2, x_m, p_m)` with `x = c + c†`,
//! `p = i(c† − c)`, so the vacuum covariance is the identity. The noiseless
//! dynamics is generated by `Ω_ST·M` with
//!
//! ```text
//!     [ 0  0  0 -1 ]
//! M = [ 0  0  1  0 ]      M² = −I
//!     [ 0 -1  0  0 ]
//!     [ 1  0  0  0 ]
//! ```
//!
//! and a single scalar white-noise force drives `v = (0, −ξ_2, 0, ξ_m)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Mat2, Mat4, Vec4};
use crate::params::DerivedParams;
use crate::scalar::{sinc, Real};

pub const X2: usize = 0;
pub const P2: usize = 1;
pub const XM: usize = 2;
pub const PM: usize = 3;

/// The exchange generator `M`.
pub fn generator<T: Real>() -> Mat4<T> {
    let (o, l) = (T::zero(), T::one());
    [[o, o, o, -l], [o, o, l, o], [o, -l, o, o], [l, o, o, o]]
}

/// Noise drive direction `(0, −ξ_2, 0, ξ_m)`.
pub fn noise_vector<T: Real>(xi_2: T, xi_m: T) -> Vec4<T> {
    [T::zero(), -xi_2, T::zero(), xi_m]
}

/// `S(t) = cos(Ω_ST t)·I + sin(Ω_ST t)·M`.
pub fn propagator<T: Real>(omega_st: T, t: T) -> Mat4<T> {
    let phase = omega_st * t;
    linalg::add(
        &linalg::scale(&linalg::identity(), phase.cos()),
        &linalg::scale(&generator(), phase.sin()),
    )
}

/// `N(t) = D ∫₀ᵗ S(s) v vᵀ S(s)ᵀ ds`, in closed form.
///
/// With `S(s)v = cos(Ωs)·v + sin(Ωs)·Mv` the integral only needs
/// `∫cos²`, `∫sin²` and `∫sin·cos`, written through `sinc` so that
/// `Ω_ST → 0` is regular.
pub fn noise_covariance<T: Real>(omega_st: T, xi_2: T, xi_m: T, d_eff: T, t: T) -> Mat4<T> {
    let half = T::of(0.5);
    let v = noise_vector(xi_2, xi_m);
    let mv = linalg::matvec(&generator(), &v);
    let phase = omega_st * t;
    // ∫₀ᵗ cos(2Ωs) ds = t·sinc(2Ωt);  ∫₀ᵗ sin(Ωs)cos(Ωs) ds = Ω t²/2 · sinc²(Ωt)
    let c2 = t * sinc(T::of(2.0) * phase);
    let i_cc = half * (t + c2);
    let i_ss = half * (t - c2);
    let s = sinc(phase);
    let i_sc = half * omega_st * t * t * s * s;

    let vv = linalg::outer(&v, &v);
    let ww = linalg::outer(&mv, &mv);
    let vw = linalg::outer(&v, &mv);
    let cross = linalg::add(&vw, &linalg::transpose(&vw));
    let n = linalg::add(
        &linalg::add(&linalg::scale(&vv, i_cc), &linalg::scale(&ww, i_ss)),
        &linalg::scale(&cross, i_sc),
    );
    linalg::scale(&n, d_eff)
}

/// Which classical diffusion strength stands in for the eliminated cavity
/// noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseConvention {
    /// `D_chi/2`: symmetrized correlator.
    #[default]
    Symmetrized,
    /// `D_chi` as it comes out of the one-sided operator correlator.
    Raw,
    /// No noise.
    Off,
}

impl NoiseConvention {
    pub fn d_eff<T: Real>(self, d: &DerivedParams<T>) -> T {
        match self {
            NoiseConvention::Symmetrized => d.d_symmetrized(),
            NoiseConvention::Raw => d.d_chi,
            NoiseConvention::Off => T::zero(),
        }
    }
}

impl std::str::FromStr for NoiseConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "symmetrized" => Ok(NoiseConvention::Symmetrized),
            "raw" => Ok(NoiseConvention::Raw),
            "off" => Ok(NoiseConvention::Off),
            other => Err(Error::input(format!(
                "unknown noise convention `{other}` (symmetrized, raw, off)"
            ))),
        }
    }
}

/// First and second moments in the four-dimensional quadrature space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureState<T = f64> {
    pub mean: Vec4<T>,
    pub cov: Mat4<T>,
}

impl<T: Real> QuadratureState<T> {
    pub fn new(mean: Vec4<T>, cov: Mat4<T>) -> Result<Self> {
        let state = QuadratureState { mean, cov };
        state.validate()?;
        Ok(state)
    }

    pub fn vacuum() -> Self {
        QuadratureState { mean: [T::zero(); 4], cov: linalg::identity() }
    }

    pub fn validate(&self) -> Result<()> {
        let scale = T::one().max(linalg::max_abs(&self.cov));
        if linalg::asymmetry(&self.cov) > T::of(1e-12) * scale {
            return Err(Error::input("covariance is not symmetric"));
        }
        let min = linalg::symmetric_eigenvalues(&self.cov)[0];
        if min < -T::of(1e-10) * scale {
            return Err(Error::NotPsd { min_eigenvalue: min.as_f64() });
        }
        Ok(())
    }

    /// The 2×2 covariance block of mode 2 (`x_2`, `p_2`).
    pub fn side_mode_cov(&self) -> Mat2<T> {
        [[self.cov[X2][X2], self.cov[X2][P2]], [self.cov[P2][X2], self.cov[P2][P2]]]
    }
}

/// Sense of the quarter-period exchange.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransferDirection {
    /// `Ω_ST > 0`: the map is `M`, `(x_2, p_2) ← (−p_m, x_m)`.
    Forward,
    /// `Ω_ST < 0`: the map is `Mᵀ`, `(x_2, p_2) ← (p_m, −x_m)`.
    Reversed,
    /// `Ω_ST = 0`: nothing is exchanged.
    None,
}

impl TransferDirection {
    pub fn of<T: Real>(omega_st: T) -> Self {
        if omega_st > T::zero() {
            TransferDirection::Forward
        } else if omega_st < T::zero() {
            TransferDirection::Reversed
        } else {
            TransferDirection::None
        }
    }
}

/// `mean → S·mean`, `cov → S·cov·Sᵀ + N` over a fixed duration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianChannel<T = f64> {
    pub s: Mat4<T>,
    pub n: Mat4<T>,
    /// Duration, s.
    pub t: T,
    /// Accumulated exchange angle `Ω_ST·t`, rad.
    pub theta: T,
}

impl<T: Real> GaussianChannel<T> {
    pub fn beamsplitter(omega_st: T, xi_2: T, xi_m: T, d_eff: T, t: T) -> Result<Self> {
        if !(d_eff >= T::zero()) {
            return Err(Error::input(format!("diffusion strength must be >= 0, got {d_eff}")));
        }
        Ok(GaussianChannel {
            s: propagator(omega_st, t),
            n: noise_covariance(omega_st, xi_2, xi_m, d_eff, t),
            t,
            theta: omega_st * t,
        })
    }

    pub fn from_derived(d: &DerivedParams<T>, noise: NoiseConvention, t: T) -> Result<Self> {
        Self::beamsplitter(d.omega_st, d.xi_2, d.xi_m, noise.d_eff(d), t)
    }

    /// The channel at the quarter exchange period `π/(2|Ω_ST|)`.
    pub fn transfer(d: &DerivedParams<T>, noise: NoiseConvention) -> Result<Self> {
        if d.omega_st == T::zero() {
            return Err(Error::input("Omega_ST = 0: no exchange, transfer time is infinite"));
        }
        Self::from_derived(d, noise, d.t_transfer)
    }

    pub fn identity() -> Self {
        GaussianChannel {
            s: linalg::identity(),
            n: linalg::zeros(),
            t: T::zero(),
            theta: T::zero(),
        }
    }

    /// Added-noise block on the side mode.
    pub fn side_mode_noise(&self) -> Mat2<T> {
        [[self.n[X2][X2], self.n[X2][P2]], [self.n[P2][X2], self.n[P2][P2]]]
    }

    /// `N[p_2,p_2]/N[x_2,x_2]`.
    pub fn momentum_stretch(&self) -> T {
        self.n[P2][P2] / self.n[X2][X2]
    }

    /// Runs `self` then `later`.
    pub fn then(&self, later: &Self) -> Self {
        GaussianChannel {
            s: linalg::matmul(&later.s, &self.s),
            n: linalg::add(&linalg::congruence(&later.s, &self.n), &later.n),
            t: self.t + later.t,
            theta: self.theta + later.theta,
        }
    }
}

pub fn apply_channel_moments<T: Real>(
    state: &QuadratureState<T>,
    ch: &GaussianChannel<T>,
) -> Result<QuadratureState<T>> {
    state.validate()?;
    Ok(QuadratureState {
        mean: linalg::matvec(&ch.s, &state.mean),
        cov: linalg::add(&linalg::congruence(&ch.s, &state.cov), &ch.n),
    })
}
