use nalgebra::Matrix6;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::SteadyState;
use crate::scalar::Real;

use super::{FullState, ModelParams, IM_A, P2, PM, RE_A, X2, XM};

/// `∂ rhs / ∂ state` at `s`.
pub fn jacobian<T: Real>(s: &FullState<T>, p: &ModelParams<T>) -> [[T; 6]; 6] {
    let v = &s.0;
    let two = T::of(2.0);
    let four = T::of(4.0);
    let detuning = p.delta_tilde + s.phase_shift(p);
    let half_kappa = p.kappa / two;
    let mut j = [[T::zero(); 6]; 6];

    j[RE_A][RE_A] = -half_kappa;
    j[RE_A][IM_A] = detuning;
    j[RE_A][X2] = p.xi_2 * v[IM_A];
    j[RE_A][XM] = -p.xi_m * v[IM_A];

    j[IM_A][RE_A] = -detuning;
    j[IM_A][IM_A] = -half_kappa;
    j[IM_A][X2] = -p.xi_2 * v[RE_A];
    j[IM_A][XM] = p.xi_m * v[RE_A];

    j[X2][P2] = p.omega_2;
    j[P2][X2] = -p.omega_2;
    j[P2][RE_A] = -four * p.xi_2 * v[RE_A];
    j[P2][IM_A] = -four * p.xi_2 * v[IM_A];

    j[XM][PM] = p.omega_m;
    j[PM][XM] = -p.omega_m;
    j[PM][RE_A] = four * p.xi_m * v[RE_A];
    j[PM][IM_A] = four * p.xi_m * v[IM_A];
    j
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eigenvalue {
    pub re: f64,
    pub im: f64,
}

/// Jacobian eigenvalues at the fixed point, in double precision regardless
/// of the model's scalar type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    /// Sorted by imaginary part, then real part.
    pub eigenvalues: Vec<Eigenvalue>,
    /// Every real part is ≤ 64·ε times the largest Jacobian entry.
    pub stable: bool,
    pub max_real: f64,
}

impl Spectrum {
    /// The four eigenvalues left after removing the two most strongly
    /// damped ones (the cavity pair when κ dominates).
    fn slow(&self) -> Vec<Eigenvalue> {
        let mut by_damping = self.eigenvalues.clone();
        by_damping.sort_by(|a, b| a.re.total_cmp(&b.re));
        by_damping.drain(2..).collect()
    }

    /// Frequency gap between the two slow modes with positive frequency.
    pub fn mechanical_splitting(&self) -> Result<f64> {
        let mut pos: Vec<f64> = self.slow().iter().filter(|e| e.im > 0.0).map(|e| e.im).collect();
        if pos.len() != 2 {
            return Err(Error::input(format!(
                "expected two positive-frequency slow modes, found {}",
                pos.len()
            )));
        }
        pos.sort_by(f64::total_cmp);
        Ok(pos[1] - pos[0])
    }

    /// Mean of the two positive slow frequencies.
    pub fn mechanical_centre(&self) -> Result<f64> {
        let pos: Vec<f64> = self.slow().iter().filter(|e| e.im > 0.0).map(|e| e.im).collect();
        if pos.len() != 2 {
            return Err(Error::input("expected two positive-frequency slow modes"));
        }
        Ok(0.5 * (pos[0] + pos[1]))
    }
}

pub fn spectrum_at<T: Real>(p: &ModelParams<T>, ss: &SteadyState<T>) -> Spectrum {
    let j = jacobian(&FullState::at_rest(ss), p);
    let m = Matrix6::<f64>::from_fn(|r, c| j[r][c].as_f64());
    let mut eigenvalues: Vec<Eigenvalue> =
        m.complex_eigenvalues().iter().map(|z| Eigenvalue { re: z.re, im: z.im }).collect();
    eigenvalues.sort_by(|a, b| a.im.total_cmp(&b.im).then(a.re.total_cmp(&b.re)));
    let max_real = eigenvalues.iter().map(|e| e.re).fold(f64::NEG_INFINITY, f64::max);
    let scale = m.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    Spectrum { eigenvalues, stable: max_real <= 64.0 * f64::EPSILON * scale, max_real }
}

/// Spectrum of the linearization around the converged fixed point.
pub fn linearized_spectrum<T: Real>(p: &ModelParams<T>) -> Result<Spectrum> {
    let ss = p.fixed_point()?;
    Ok(spectrum_at(p, &ss))
}

/// Pump amplitude `η` in `[lo, hi]` at which the fixed point loses
/// stability, by bisection to `rel_tol`. The ends must straddle the
/// boundary.
pub fn stability_boundary<T: Real>(p: &ModelParams<T>, lo: T, hi: T, rel_tol: T) -> Result<T> {
    let stable_at = |eta: T| linearized_spectrum(&ModelParams { eta, ..*p }).map(|s| s.stable);
    let (mut a, mut b) = (lo, hi);
    let (sa, sb) = (stable_at(a)?, stable_at(b)?);
    if sa == sb {
        return Err(Error::input(format!(
            "stability does not change on [{lo}, {hi}] (stable at both ends: {sa})"
        )));
    }
    while (b - a).abs() > rel_tol * a.abs().max(b.abs()) {
        let mid = (a + b) / T::of(2.0);
        if stable_at(mid)? == sa {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok((a + b) / T::of(2.0))
}
