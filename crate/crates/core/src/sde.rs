//! Seeded stochastic trajectories of the effective quadrature dynamics
//!
//! ```text
//! d(state) = Ω_ST·M·state dt + v·√D dW
//! ```
//!
//! with one scalar Wiener increment per step shared by both momenta. Each
//! path draws from its own ChaCha stream keyed by `(seed, path index)`, and
//! ensemble moments are reduced in path order, so output does not depend on
//! how many threads ran the paths.

use std::io::{BufRead, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gaussian::{generator, noise_vector};
use crate::linalg::{self, Mat4, Vec4};
use crate::params::DerivedParams;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdeOptions<T = f64> {
    pub seed: u64,
    /// Requested step, s. The actual step is `t_end/ceil(t_end/dt)`.
    pub dt: T,
    pub t_end: T,
    pub n_paths: usize,
    /// Diffusion strength of the scalar force, rad/s.
    pub d_eff: T,
    pub initial: Vec4<T>,
    /// Keep every path's time series (memory: `n_paths × steps × 4`).
    pub record_paths: bool,
}

impl<T: Real> SdeOptions<T> {
    pub fn new(seed: u64, dt: T, t_end: T, n_paths: usize, d_eff: T) -> Self {
        SdeOptions {
            seed,
            dt,
            t_end,
            n_paths,
            d_eff,
            initial: [T::zero(); 4],
            record_paths: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble<T = f64> {
    pub times: Vec<T>,
    pub mean: Vec<Vec4<T>>,
    /// Sample covariance (unbiased; zero for a single path).
    pub cov: Vec<Mat4<T>>,
    /// `paths[k][i]` is path `k` at `times[i]`; empty unless recorded.
    pub paths: Vec<Vec<Vec4<T>>>,
}

const CHUNK: usize = 512;

pub fn sde_trajectory<T: Real>(dp: &DerivedParams<T>, opts: &SdeOptions<T>) -> Result<Ensemble<T>> {
    if opts.n_paths == 0 {
        return Err(Error::input("n_paths must be at least 1"));
    }
    if !(opts.dt > T::zero()) || !(opts.t_end >= T::zero()) {
        return Err(Error::input("dt must be positive and t_end non-negative"));
    }
    if !(opts.d_eff >= T::zero()) {
        return Err(Error::input("diffusion strength must be non-negative"));
    }
    if dp.omega_st != T::zero() {
        let limit = T::of(0.01) / dp.omega_st.abs();
        if opts.dt > limit {
            return Err(Error::StepTooLarge { dt: opts.dt.as_f64(), limit: limit.as_f64() });
        }
    }

    let steps = (opts.t_end / opts.dt).ceil().to_usize().unwrap_or(0);
    let h = if steps == 0 { T::zero() } else { opts.t_end / T::of_usize(steps) };
    let times: Vec<T> = (0..=steps).map(|i| T::of_usize(i) * h).collect();

    let drift = linalg::scale(&generator(), dp.omega_st);
    let kick = noise_vector(dp.xi_2, dp.xi_m).map(|c| c * opts.d_eff.sqrt());
    let sqrt_h = h.sqrt();
    let half_h = h / T::of(2.0);

    let run_path = |path: usize| -> Vec<Vec4<T>> {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(path as u64);
        let mut y = opts.initial;
        let mut out = Vec::with_capacity(steps + 1);
        out.push(y);
        for _ in 0..steps {
            let z: f64 = StandardNormal.sample(&mut rng);
            let dw = T::of(z) * sqrt_h;
            // Heun predictor/corrector on the drift; additive noise needs
            // no correction
            let f0 = linalg::matvec(&drift, &y);
            let mut pred = y;
            for i in 0..4 {
                pred[i] += h * f0[i] + kick[i] * dw;
            }
            let f1 = linalg::matvec(&drift, &pred);
            for i in 0..4 {
                y[i] += half_h * (f0[i] + f1[i]) + kick[i] * dw;
            }
            out.push(y);
        }
        out
    };

    let n_t = steps + 1;
    let mut mean = vec![[T::zero(); 4]; n_t];
    let mut comoment = vec![linalg::zeros::<T, 4>(); n_t];
    let mut paths = Vec::new();
    let mut seen = 0usize;
    for start in (0..opts.n_paths).step_by(CHUNK) {
        let end = (start + CHUNK).min(opts.n_paths);
        let batch: Vec<Vec<Vec4<T>>> = (start..end).into_par_iter().map(run_path).collect();
        // Welford update in path order
        for traj in batch {
            seen += 1;
            let w = T::one() / T::of_usize(seen);
            for (i, y) in traj.iter().enumerate() {
                let mut delta = [T::zero(); 4];
                for a in 0..4 {
                    delta[a] = y[a] - mean[i][a];
                    mean[i][a] += delta[a] * w;
                }
                for a in 0..4 {
                    for b in 0..4 {
                        comoment[i][a][b] += delta[a] * (y[b] - mean[i][b]);
                    }
                }
            }
            if opts.record_paths {
                paths.push(traj);
            }
        }
    }
    let denom = if seen > 1 { T::of_usize(seen - 1) } else { T::one() };
    let cov = comoment
        .iter()
        .map(|m| {
            let mut c = linalg::scale(m, if seen > 1 { T::one() / denom } else { T::zero() });
            // symmetrize the rounding of the two triangle updates
            for a in 0..4 {
                for b in a + 1..4 {
                    let s = (c[a][b] + c[b][a]) / T::of(2.0);
                    c[a][b] = s;
                    c[b][a] = s;
                }
            }
            c
        })
        .collect();

    Ok(Ensemble { times, mean, cov, paths })
}

const LABELS: [&str; 4] = ["x2", "p2", "xm", "pm"];

fn header() -> Vec<String> {
    let mut cols = vec!["t".to_string()];
    cols.extend(LABELS.iter().map(|l| format!("mean_{l}")));
    for a in 0..4 {
        for b in a..4 {
            cols.push(format!("cov_{}_{}", LABELS[a], LABELS[b]));
        }
    }
    cols
}

/// Writes `t`, the four means and the ten upper-triangle covariances per
/// sample, 17 significant digits.
pub fn write_ensemble_csv<T: Real, W: Write>(ens: &Ensemble<T>, mut w: W) -> std::io::Result<()> {
    writeln!(w, "{}", header().join(","))?;
    for i in 0..ens.times.len() {
        let mut row = vec![ens.times[i].as_f64()];
        row.extend(ens.mean[i].iter().map(|v| v.as_f64()));
        for a in 0..4 {
            for b in a..4 {
                row.push(ens.cov[i][a][b].as_f64());
            }
        }
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

/// Reads the output of [`write_ensemble_csv`] (paths are not stored).
pub fn read_ensemble_csv<R: BufRead>(r: R) -> Result<Ensemble<f64>> {
    let mut lines = r.lines();
    let head = lines
        .next()
        .ok_or_else(|| Error::input("empty ensemble CSV"))?
        .map_err(|e| Error::input(e.to_string()))?;
    if head.trim() != header().join(",") {
        return Err(Error::input("unexpected ensemble CSV header"));
    }
    let mut ens = Ensemble { times: vec![], mean: vec![], cov: vec![], paths: vec![] };
    for (n, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::input(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let v: Vec<f64> = line
            .split(',')
            .map(|c| c.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::input(format!("row {}: {e}", n + 2)))?;
        if v.len() != 15 {
            return Err(Error::input(format!("row {}: expected 15 columns", n + 2)));
        }
        ens.times.push(v[0]);
        ens.mean.push([v[1], v[2], v[3], v[4]]);
        let mut c = [[0.0; 4]; 4];
        let mut k = 5;
        for a in 0..4 {
            for b in a..4 {
                c[a][b] = v[k];
                c[b][a] = v[k];
                k += 1;
            }
        }
        ens.cov.push(c);
    }
    Ok(ens)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::propagator;
    use std::f64::consts::PI;

    fn toy() -> DerivedParams {
        let mut p = crate::params::PhysicalParams::paper_defaults();
        p.g = 3.8e7;
        crate::params::derive(&p).unwrap()
    }

    #[test]
    fn noiseless_path_follows_propagator_to_second_order() {
        let d = toy();
        let t_end = d.t_transfer;
        let err = |dt: f64| {
            let mut o = SdeOptions::new(1, dt, t_end, 1, 0.0);
            o.initial = [1.0, 0.0, 0.0, 0.0];
            let ens = sde_trajectory(&d, &o).unwrap();
            let exact = linalg::matvec(&propagator(d.omega_st, t_end), &o.initial);
            let last = ens.mean.last().unwrap();
            (0..4).map(|i| (last[i] - exact[i]).abs()).fold(0.0, f64::max)
        };
        let dt = 0.01 / d.omega_st.abs();
        let (e1, e2) = (err(dt), err(dt / 2.0));
        assert!(e1 < 1e-4, "{e1}");
        // halving the step quarters the error
        assert!((e1 / e2 - 4.0).abs() < 0.3, "{}", e1 / e2);
    }

    #[test]
    fn same_seed_same_bits() {
        let d = toy();
        let dt = 0.01 / d.omega_st.abs();
        let mut o = SdeOptions::new(42, dt, d.t_transfer, 700, d.d_symmetrized());
        o.record_paths = true;
        let a = sde_trajectory(&d, &o).unwrap();
        let b = sde_trajectory(&d, &o).unwrap();
        assert_eq!(a, b);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let c = pool.install(|| sde_trajectory(&d, &o).unwrap());
        assert_eq!(a, c);
        o.seed = 43;
        assert_ne!(a.cov, sde_trajectory(&d, &o).unwrap().cov);
    }

    #[test]
    fn rejects_bad_inputs() {
        let d = toy();
        let big = 0.02 / d.omega_st.abs();
        let o = SdeOptions::new(0, big, d.t_transfer, 1, 0.0);
        assert!(matches!(sde_trajectory(&d, &o), Err(Error::StepTooLarge { .. })));
        let o = SdeOptions::new(0, big / 4.0, d.t_transfer, 0, 0.0);
        assert!(matches!(sde_trajectory(&d, &o), Err(Error::Input(_))));
    }

    #[test]
    fn csv_round_trip() {
        let d = toy();
        let o = SdeOptions::new(3, 0.01 / d.omega_st.abs(), PI / (4.0 * d.omega_st.abs()), 20, d.d_chi);
        let ens = sde_trajectory(&d, &o).unwrap();
        let mut buf = Vec::new();
        write_ensemble_csv(&ens, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,mean_x2,mean_p2,mean_xm,mean_pm,cov_x2_x2,cov_x2_p2"));
        let back = read_ensemble_csv(&buf[..]).unwrap();
        assert_eq!(back.times, ens.times);
        assert_eq!(back.mean, ens.mean);
        assert_eq!(back.cov, ens.cov);
    }
}
