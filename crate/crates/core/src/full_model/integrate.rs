use std::io::Write;

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::{rhs, FullState, ModelParams};

/// Amplitude beyond which a run counts as diverged.
const BLOW_UP: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrateOptions<T = f64> {
    /// Relative and absolute tolerance, within `[1e-12, 1e-4]`.
    pub tol: T,
    /// First trial step; defaults to a hundredth of the fastest rate's period.
    pub initial_step: Option<T>,
    pub max_steps: usize,
}

impl<T: Real> IntegrateOptions<T> {
    pub fn new(tol: T) -> Self {
        IntegrateOptions { tol, initial_step: None, max_steps: 100_000_000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T = f64> {
    pub times: Vec<T>,
    pub states: Vec<FullState<T>>,
    pub accepted: usize,
    pub rejected: usize,
}

impl<T: Real> Trajectory<T> {
    /// One component over time.
    pub fn component(&self, k: usize) -> Vec<T> {
        self.states.iter().map(|s| s.0[k]).collect()
    }
}

// Dormand–Prince 5(4) tableau; the system is autonomous, so the nodes are unused
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order weights minus fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Samples at `n_samples` evenly spaced times in `[0, t_end]`.
pub fn integrate<T: Real>(
    s0: &FullState<T>,
    p: &ModelParams<T>,
    t_end: T,
    n_samples: usize,
    opts: &IntegrateOptions<T>,
) -> Result<Trajectory<T>> {
    if n_samples < 2 {
        return Err(Error::input("need at least two samples"));
    }
    let times: Vec<T> = (0..n_samples)
        .map(|k| if k + 1 == n_samples { t_end } else { t_end * T::of_usize(k) / T::of_usize(n_samples - 1) })
        .collect();
    integrate_at(s0, p, &times, opts)
}

/// Adaptive Dormand–Prince integration, reporting the state at each of
/// `times` (non-decreasing, starting at or after 0). Steps are shortened to
/// land exactly on sample times.
pub fn integrate_at<T: Real>(
    s0: &FullState<T>,
    p: &ModelParams<T>,
    times: &[T],
    opts: &IntegrateOptions<T>,
) -> Result<Trajectory<T>> {
    p.validate()?;
    let tol = opts.tol;
    if !(tol >= T::of(1e-12) && tol <= T::of(1e-4)) {
        return Err(Error::input(format!("tolerance {tol} outside [1e-12, 1e-4]")));
    }
    if !s0.is_finite() {
        return Err(Error::input("initial state must be finite"));
    }
    if times.is_empty() || times[0] < T::zero() || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::input("sample times must be non-empty, non-negative and sorted"));
    }

    let fastest = [p.kappa, p.delta_tilde.abs(), p.omega_m, p.omega_2].iter().fold(T::zero(), |m, v| m.max(*v));
    let mut h = opts.initial_step.unwrap_or(T::of(0.01) / fastest);
    let mut t = T::zero();
    let mut y = s0.0;
    let mut k0 = rhs(s0, p);
    let mut out = Trajectory { times: Vec::with_capacity(times.len()), states: Vec::with_capacity(times.len()), accepted: 0, rejected: 0 };
    let safety = T::of(0.9);

    for &target in times {
        while t < target {
            if out.accepted + out.rejected >= opts.max_steps {
                return Err(Error::StepUnderflow { t: t.as_f64() });
            }
            let remaining = target - t;
            let landing = h >= remaining;
            let step = if landing { remaining } else { h };
            if step <= T::of(1e-14) * t.abs().max(target.abs()) {
                return Err(Error::StepUnderflow { t: t.as_f64() });
            }

            let mut k = [[T::zero(); 6]; 7];
            k[0] = k0;
            for stage in 1..7 {
                let mut ys = y;
                for (i, slot) in ys.iter_mut().enumerate() {
                    let mut acc = T::zero();
                    for (j, kj) in k.iter().enumerate().take(stage) {
                        acc += T::of(A[stage][j]) * kj[i];
                    }
                    *slot += step * acc;
                }
                k[stage] = rhs(&FullState(ys), p);
            }
            let mut y_new = y;
            for (i, slot) in y_new.iter_mut().enumerate() {
                let mut acc = T::zero();
                for (j, kj) in k.iter().enumerate().take(6) {
                    acc += T::of(A[6][j]) * kj[i];
                }
                *slot += step * acc;
            }
            let mut err = T::zero();
            for i in 0..6 {
                let e = step * (0..7).map(|j| T::of(E[j]) * k[j][i]).sum::<T>();
                let scale = tol * (T::one() + y[i].abs().max(y_new[i].abs()));
                err = err.max((e / scale).abs());
            }

            if err <= T::one() {
                t = if landing { target } else { t + step };
                y = y_new;
                // FSAL: the last stage is the derivative at the new point
                k0 = k[6];
                out.accepted += 1;
                let amp = (y[0] * y[0] + y[1] * y[1]).sqrt();
                if !amp.is_finite() || amp > T::of(BLOW_UP) || !FullState(y).is_finite() {
                    return Err(Error::BlowUp { t: t.as_f64(), amplitude: amp.as_f64() });
                }
            } else {
                out.rejected += 1;
            }
            let factor = if err == T::zero() { T::of(5.0) } else { safety * err.powf(T::of(-0.2)) };
            let factor = factor.max(T::of(0.2)).min(T::of(5.0));
            // a short landing step says nothing about the natural step size
            if !(landing && err <= T::one()) || factor < T::one() {
                h = step * factor;
            }
        }
        out.times.push(target);
        out.states.push(FullState(y));
    }
    Ok(out)
}

/// CSV with header `t,re_a,im_a,x_2,p_2,x_m,p_m`.
pub fn write_trajectory_csv<T: Real, W: Write>(traj: &Trajectory<T>, mut w: W) -> std::io::Result<()> {
    writeln!(w, "t,re_a,im_a,x_2,p_2,x_m,p_m")?;
    for (t, s) in traj.times.iter().zip(&traj.states) {
        write!(w, "{:.16e}", t.as_f64())?;
        for v in s.0 {
            write!(w, ",{:.16e}", v.as_f64())?;
        }
        writeln!(w)?;
    }
    Ok(())
}
