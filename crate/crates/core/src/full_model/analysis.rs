use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::propagator;
use crate::linalg::{self, Vec4};
use crate::scalar::Real;

use super::{integrate, EffectiveRates, FullState, IntegrateOptions, ModelParams, P2, X2, XM};

/// Centred moving average over `window` samples, shrinking at the ends.
pub fn moving_average<T: Real>(signal: &[T], window: usize) -> Vec<T> {
    let half = window / 2;
    let mut prefix = Vec::with_capacity(signal.len() + 1);
    prefix.push(T::zero());
    for v in signal {
        let last = *prefix.last().unwrap();
        prefix.push(last + *v);
    }
    (0..signal.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(signal.len());
            (prefix[hi] - prefix[lo]) / T::of_usize(hi - lo)
        })
        .collect()
}

/// Angular frequency of a slow oscillation from its zero crossings.
///
/// The signal is centred on its mid-range, crossings are located by linear
/// interpolation, and a straight line through crossing time vs index gives
/// the half period.
pub fn beat_frequency<T: Real>(times: &[T], signal: &[T]) -> Result<T> {
    if times.len() != signal.len() || times.len() < 3 {
        return Err(Error::input("need matching time and signal arrays"));
    }
    let lo = signal.iter().fold(T::infinity(), |m, v| m.min(*v));
    let hi = signal.iter().fold(T::neg_infinity(), |m, v| m.max(*v));
    let mid = (lo + hi) / T::of(2.0);
    let mut crossings = Vec::new();
    for k in 1..signal.len() {
        let (a, b) = (signal[k - 1] - mid, signal[k] - mid);
        if a == T::zero() {
            crossings.push(times[k - 1]);
        } else if a * b < T::zero() {
            crossings.push(times[k - 1] + (times[k] - times[k - 1]) * a / (a - b));
        }
    }
    if crossings.len() < 3 {
        return Err(Error::input(format!("only {} zero crossings; record too short", crossings.len())));
    }
    let n = T::of_usize(crossings.len());
    let mean_k = (n - T::one()) / T::of(2.0);
    let mean_t = crossings.iter().copied().sum::<T>() / n;
    let (mut sxy, mut sxx) = (T::zero(), T::zero());
    for (k, t) in crossings.iter().enumerate() {
        let dk = T::of_usize(k) - mean_k;
        sxy += dk * (*t - mean_t);
        sxx += dk * dk;
    }
    Ok(T::PI() / (sxy / sxx))
}

/// Slow quadratures `(x̃, p̃)` of `signal ≈ x̃·cos ωt + p̃·sin ωt + offset`,
/// least-squares fitted over `|t − t_c| ≤ half_window` for each centre.
pub fn demodulate<T: Real>(times: &[T], signal: &[T], omega: T, centres: &[T], half_window: T) -> Result<Vec<[T; 2]>> {
    centres
        .iter()
        .map(|&tc| {
            let mut g = [[T::zero(); 3]; 3];
            let mut rhs = [T::zero(); 3];
            for (t, y) in times.iter().zip(signal) {
                if (*t - tc).abs() > half_window {
                    continue;
                }
                let basis = [(omega * *t).cos(), (omega * *t).sin(), T::one()];
                for r in 0..3 {
                    rhs[r] += basis[r] * *y;
                    for c in 0..3 {
                        g[r][c] += basis[r] * basis[c];
                    }
                }
            }
            let det = linalg::det(&g);
            if !(det.abs() > T::zero()) {
                return Err(Error::input(format!("demodulation window at t = {tc} is empty or degenerate")));
            }
            // Cramer's rule for the two quadratures
            let solve = |col: usize| {
                let mut m = g;
                for r in 0..3 {
                    m[r][col] = rhs[r];
                }
                linalg::det(&m) / det
            };
            Ok([solve(0), solve(1)])
        })
        .collect()
}

/// Energy-exchange beat after displacing the mirror by `displacement`.
///
/// Runs for three periods of `2π/|Ω_ST|`, smooths the side-mode energy
/// `δx_2² + δp_2²` over one mechanical period and reads its oscillation
/// frequency from the zero crossings.
pub fn exchange_beat<T: Real>(p: &ModelParams<T>, displacement: T, tol: T) -> Result<T> {
    let rates = p.effective();
    if rates.omega_st == T::zero() {
        return Err(Error::input("no exchange: Omega_ST = 0"));
    }
    let ss = p.fixed_point()?;
    let rest = FullState::at_rest(&ss);
    let mut s0 = rest;
    s0.0[XM] += displacement;
    let two_pi = T::of(2.0) * T::PI();
    let t_end = T::of(3.0) * two_pi / rates.omega_st.abs();
    let period = two_pi / p.omega_m.max(p.omega_2);
    let per_period = 16;
    let n = (t_end / period).ceil().to_usize().unwrap_or(1).max(1) * per_period + 1;
    let traj = integrate(&s0, p, t_end, n, &IntegrateOptions::new(tol))?;
    let energy: Vec<T> = traj
        .states
        .iter()
        .map(|s| {
            let (x, q) = (s.0[X2] - rest.0[X2], s.0[P2] - rest.0[P2]);
            x * x + q * q
        })
        .collect();
    beat_frequency(&traj.times, &moving_average(&energy, per_period))
}

/// Effective-model and full-model mean trajectories in the rotating frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentComparison<T = f64> {
    pub times: Vec<T>,
    /// `(x_2, p_2, x_m, p_m)` relative to the fixed point.
    pub effective: Vec<Vec4<T>>,
    pub full: Vec<Vec4<T>>,
    /// RMS of the difference over all times and components, in units of
    /// the initial displacement.
    pub rms_relative: T,
}

/// Displaces the mirror by `displacement` from the fixed point, integrates
/// the full model over one transfer period and compares its demodulated
/// slow quadratures with the noiseless effective channel.
///
/// Demodulation uses windows of ten mechanical periods at the shifted
/// frequencies, so comparisons start half a window into the run.
pub fn compare_first_moments<T: Real>(p: &ModelParams<T>, displacement: T, tol: T) -> Result<MomentComparison<T>> {
    compare_first_moments_at(p, displacement, tol, &p.effective())
}

/// [`compare_first_moments`] against caller-supplied demodulation
/// frequencies and exchange rate.
pub fn compare_first_moments_at<T: Real>(
    p: &ModelParams<T>,
    displacement: T,
    tol: T,
    rates: &EffectiveRates<T>,
) -> Result<MomentComparison<T>> {
    if rates.omega_st == T::zero() {
        return Err(Error::input("no exchange: Omega_ST = 0"));
    }
    if !(rates.omega_m_shift > T::zero() && rates.omega_2_shift > T::zero()) {
        return Err(Error::input("shifted mechanical frequencies must be positive"));
    }
    let two_pi = T::of(2.0) * T::PI();
    let t_transfer = T::PI() / (T::of(2.0) * rates.omega_st.abs());
    let period = two_pi / rates.omega_m_shift.min(rates.omega_2_shift);
    let half_window = T::of(5.0) * period;
    if t_transfer <= half_window {
        return Err(Error::input(format!(
            "transfer period {t_transfer} s is shorter than half the demodulation window {half_window} s"
        )));
    }
    let ss = p.fixed_point()?;
    let rest = FullState::at_rest(&ss);
    let mut s0 = rest;
    s0.0[XM] += displacement;

    let t_end = t_transfer + half_window;
    let per_period = 32.0;
    let n = (t_end / period * T::of(per_period)).ceil().to_usize().unwrap_or(2).max(2) + 1;
    let traj = integrate(&s0, p, t_end, n, &IntegrateOptions::new(tol))?;

    let n_eval = 64;
    let centres: Vec<T> = (0..n_eval)
        .map(|k| half_window + (t_transfer - half_window) * T::of_usize(k) / T::of_usize(n_eval - 1))
        .collect();
    let deviation = |k: usize| -> Vec<T> { traj.states.iter().map(|s| s.0[k] - rest.0[k]).collect() };
    let side = demodulate(&traj.times, &deviation(X2), rates.omega_2_shift, &centres, half_window)?;
    let mirror = demodulate(&traj.times, &deviation(XM), rates.omega_m_shift, &centres, half_window)?;

    let initial = [T::zero(), T::zero(), displacement, T::zero()];
    let mut sq = T::zero();
    let mut effective = Vec::with_capacity(n_eval);
    let mut full = Vec::with_capacity(n_eval);
    for (k, &t) in centres.iter().enumerate() {
        let e = linalg::matvec(&propagator(rates.omega_st, t), &initial);
        let f = [side[k][0], side[k][1], mirror[k][0], mirror[k][1]];
        for i in 0..4 {
            sq += (e[i] - f[i]) * (e[i] - f[i]);
        }
        effective.push(e);
        full.push(f);
    }
    let rms_relative = (sq / T::of_usize(4 * n_eval)).sqrt() / displacement.abs();
    Ok(MomentComparison { times: centres, effective, full, rms_relative })
}
