use num_complex::Complex;
use rustfft::{FftNum, FftPlanner};

use crate::error::{Error, Result};
use crate::linalg::{self, Mat2};
use crate::scalar::Real;

use super::grid::WignerGrid;

/// Grids with fewer nodes than this use a direct DFT instead of the FFT.
const DIRECT_DFT_BELOW: usize = 64 * 64;

/// `W_out(z) = W_in(R(−θ)·z)`, a phase-space rotation by `θ`.
///
/// At `θ = π/2` this is `(x, p) ← (p, −x)` in the argument, i.e. the output
/// mode inherits `(x_2, p_2) = (−p_m, x_m)`. On a centred square grid whole
/// quarter turns are exact index permutations; any remaining angle is done
/// as three Fourier shears (x, p, x), each a sub-sample shift of every line
/// by phase multiplication on a 2×-padded spectrum.
pub fn rotate<T: Real + FftNum>(w: &WignerGrid<T>, theta: T) -> WignerGrid<T> {
    let quarter = T::FRAC_PI_2();
    let mut rest = theta;
    let mut out = w.clone();
    if w.spec.is_symmetric_square() {
        let k = (theta / quarter).round();
        out = quarter_turns(w, k.to_i64().unwrap_or(0).rem_euclid(4));
        rest = theta - k * quarter;
    } else {
        let two_pi = T::of(2.0) * T::PI();
        rest = rest - two_pi * (rest / two_pi).round();
    }
    if rest.abs() <= T::of(1e-12) * T::one().max(theta.abs()) {
        return out;
    }
    let pieces = (rest.abs() / (quarter / T::of(2.0))).ceil().max(T::one());
    let step = rest / pieces;
    let mut planner = FftPlanner::<T>::new();
    for _ in 0..pieces.to_usize().unwrap_or(1) {
        shear_rotate(&mut out, step, &mut planner);
    }
    out
}

fn quarter_turns<T: Real>(w: &WignerGrid<T>, turns: i64) -> WignerGrid<T> {
    let n = w.spec.n_x;
    let mut values = Vec::with_capacity(w.values.len());
    for i in 0..n {
        for j in 0..n {
            values.push(match turns {
                0 => w.at(i, j),
                1 => w.at(j, n - 1 - i),
                2 => w.at(n - 1 - i, n - 1 - j),
                _ => w.at(n - 1 - j, i),
            });
        }
    }
    WignerGrid { spec: w.spec, values, warnings: w.warnings.clone() }
}

/// `g(z) = f(R(−θ)·z)` via `R(−θ) = U·L·U`, `U = [[1, tan(θ/2)], [0, 1]]`,
/// `L = [[1, 0], [−sin θ, 1]]`.
fn shear_rotate<T: Real + FftNum>(w: &mut WignerGrid<T>, theta: T, planner: &mut FftPlanner<T>) {
    let t = (theta / T::of(2.0)).tan();
    let s = theta.sin();
    let spec = w.spec;
    let (nx, np) = (spec.n_x, spec.n_p);
    let along_x = |w: &mut WignerGrid<T>, planner: &mut FftPlanner<T>| {
        let mut line = vec![T::zero(); nx];
        for j in 0..np {
            for (i, v) in line.iter_mut().enumerate() {
                *v = w.values[i * np + j];
            }
            shift_line(&mut line, spec.dx(), t * spec.p(j), planner);
            for (i, v) in line.iter().enumerate() {
                w.values[i * np + j] = *v;
            }
        }
    };
    along_x(w, planner);
    for i in 0..nx {
        let row = &mut w.values[i * np..(i + 1) * np];
        shift_line(row, spec.dp(), -s * spec.x(i), planner);
    }
    along_x(w, planner);
}

/// `v(u_k) ← v(u_k + delta)` for samples spaced `h`, zero outside.
fn shift_line<T: Real + FftNum>(v: &mut [T], h: T, delta: T, planner: &mut FftPlanner<T>) {
    let n = v.len();
    let m = 2 * n;
    let mut buf = vec![Complex::new(T::zero(), T::zero()); m];
    for (b, x) in buf.iter_mut().zip(v.iter()) {
        b.re = *x;
    }
    planner.plan_fft_forward(m).process(&mut buf);
    let two_pi = T::of(2.0) * T::PI();
    for (q, b) in buf.iter_mut().enumerate() {
        let phase = two_pi * signed_frequency::<T>(q, m) * delta / (T::of_usize(m) * h);
        *b = if 2 * q == m {
            // Nyquist bin: keep the result real
            *b * phase.cos()
        } else {
            *b * Complex::new(phase.cos(), phase.sin())
        };
    }
    planner.plan_fft_inverse(m).process(&mut buf);
    let norm = T::one() / T::of_usize(m);
    for (x, b) in v.iter_mut().zip(&buf) {
        *x = b.re * norm;
    }
}

/// Checks `n22` and returns its largest eigenvalue.
fn check_noise<T: Real>(n22: &Mat2<T>) -> Result<T> {
    let scale = T::one().max(linalg::max_abs(n22));
    if linalg::asymmetry(n22) > T::of(1e-12) * scale {
        return Err(Error::input("noise block is not symmetric"));
    }
    let ev = linalg::symmetric_eigenvalues(n22);
    if ev[0] < -T::of(1e-12) * scale || !ev[1].is_finite() {
        return Err(Error::NotPsd { min_eigenvalue: ev[0].as_f64() });
    }
    Ok(ev[1].max(T::zero()))
}

/// Single-mode Gaussian channel on a grid: rotate by `theta`, then convolve
/// with the zero-mean Gaussian of covariance `n22`.
///
/// The convolution multiplies the zero-padded (2× per axis) spectrum by the
/// kernel's characteristic function `exp(−kᵀ·N·k/2)`, which stays exact for
/// singular `n22`.
pub fn apply_channel_wigner<T: Real + FftNum>(
    w_in: &WignerGrid<T>,
    theta: T,
    n22: &Mat2<T>,
) -> Result<WignerGrid<T>> {
    w_in.spec.validate()?;
    let lambda_max = check_noise(n22)?;
    let rotated = rotate(w_in, theta);
    if lambda_max == T::zero() {
        return Ok(rotated);
    }
    let sigma = lambda_max.sqrt();
    let half_extent = w_in.spec.half_extent();
    if T::of(3.0) * sigma > half_extent {
        return Err(Error::KernelTooWide { sigma: sigma.as_f64(), half_extent: half_extent.as_f64() });
    }
    let before = rotated.integral();
    let mut out = convolve(&rotated, n22);
    let after = out.integral();
    let drift = normalization_drift(before, after);
    if drift > T::of(1e-6) {
        out.warnings.push(format!("normalization drift {drift} exceeds 1e-6: output leaks past the grid"));
    }
    Ok(out)
}

fn normalization_drift<T: Real>(before: T, after: T) -> T {
    (after - before).abs() / T::one().max(before.abs())
}

fn convolve<T: Real + FftNum>(w: &WignerGrid<T>, n22: &Mat2<T>) -> WignerGrid<T> {
    let spec = w.spec;
    let (nx, np) = (spec.n_x, spec.n_p);
    let (mx, mp) = (2 * nx, 2 * np);
    let mut buf = vec![Complex::new(T::zero(), T::zero()); mx * mp];
    for i in 0..nx {
        for j in 0..np {
            buf[i * mp + j] = Complex::new(w.at(i, j), T::zero());
        }
    }

    let direct = nx * np < DIRECT_DFT_BELOW;
    transform_2d(&mut buf, mx, mp, false, direct);

    let two_pi = T::of(2.0) * T::PI();
    let kx: Vec<T> = signed_frequencies(mx).map(|m| two_pi * m / (T::of_usize(mx) * spec.dx())).collect();
    let kp: Vec<T> = signed_frequencies(mp).map(|m| two_pi * m / (T::of_usize(mp) * spec.dp())).collect();
    let half = T::of(0.5);
    for (a, &u) in kx.iter().enumerate() {
        for (b, &v) in kp.iter().enumerate() {
            let q = n22[0][0] * u * u + T::of(2.0) * n22[0][1] * u * v + n22[1][1] * v * v;
            buf[a * mp + b] *= (-half * q).exp();
        }
    }

    transform_2d(&mut buf, mx, mp, true, direct);
    let norm = T::one() / T::of_usize(mx * mp);
    let mut values = Vec::with_capacity(nx * np);
    for i in 0..nx {
        for j in 0..np {
            values.push(buf[i * mp + j].re * norm);
        }
    }
    WignerGrid { spec, values, warnings: w.warnings.clone() }
}

fn signed_frequency<T: Real>(m: usize, n: usize) -> T {
    if m <= n / 2 {
        T::of_usize(m)
    } else {
        -T::of_usize(n - m)
    }
}

fn signed_frequencies<T: Real>(n: usize) -> impl Iterator<Item = T> {
    (0..n).map(move |m| signed_frequency(m, n))
}

/// Unnormalized 2-D DFT of a row-major `rows × cols` buffer.
fn transform_2d<T: Real + FftNum>(buf: &mut [Complex<T>], rows: usize, cols: usize, inverse: bool, direct: bool) {
    let mut column = vec![Complex::new(T::zero(), T::zero()); rows];
    if direct {
        for r in 0..rows {
            dft_direct(&mut buf[r * cols..(r + 1) * cols], inverse);
        }
        for c in 0..cols {
            for r in 0..rows {
                column[r] = buf[r * cols + c];
            }
            dft_direct(&mut column, inverse);
            for r in 0..rows {
                buf[r * cols + c] = column[r];
            }
        }
        return;
    }
    let mut planner = FftPlanner::<T>::new();
    let (row_fft, col_fft) = if inverse {
        (planner.plan_fft_inverse(cols), planner.plan_fft_inverse(rows))
    } else {
        (planner.plan_fft_forward(cols), planner.plan_fft_forward(rows))
    };
    row_fft.process(buf);
    for c in 0..cols {
        for r in 0..rows {
            column[r] = buf[r * cols + c];
        }
        col_fft.process(&mut column);
        for r in 0..rows {
            buf[r * cols + c] = column[r];
        }
    }
}

fn dft_direct<T: Real>(data: &mut [Complex<T>], inverse: bool) {
    let n = data.len();
    let sign = if inverse { T::one() } else { -T::one() };
    let step = sign * T::of(2.0) * T::PI() / T::of_usize(n);
    let out: Vec<Complex<T>> = (0..n)
        .map(|k| {
            data.iter()
                .enumerate()
                .map(|(j, v)| {
                    let phase = step * T::of_usize((j * k) % n);
                    *v * Complex::new(phase.cos(), phase.sin())
                })
                .fold(Complex::new(T::zero(), T::zero()), |a, b| a + b)
        })
        .collect();
    data.copy_from_slice(&out);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::{gaussian_wigner, wigner_state, GridSpec, StateKind};
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn identity_channel_is_exact() {
        let w = wigner_state(StateKind::Cat { alpha: 2.0 }, GridSpec::default_grid()).unwrap();
        let out = apply_channel_wigner(&w, 0.0, &[[0.0; 2]; 2]).unwrap();
        assert_eq!(out, w);
    }

    #[test]
    fn quarter_turn_moves_lobes_to_momentum_axis() {
        let spec = GridSpec::square(8.0, 161);
        let w = wigner_state(StateKind::Cat { alpha: 2.0 }, spec).unwrap();
        let out = apply_channel_wigner(&w, FRAC_PI_2, &[[0.0; 2]; 2]).unwrap();
        // the rotated grid is the analytic cat with x and p exchanged
        let expect = WignerGrid::from_fn(spec, |x, p| {
            let n = 2.0 * (1.0 + (-8.0f64).exp());
            let lobes = (-(x * x + (p - 4.0).powi(2)) / 2.0).exp() + (-(x * x + (p + 4.0).powi(2)) / 2.0).exp();
            (lobes + 2.0 * (-(x * x + p * p) / 2.0).exp() * (4.0 * x).cos()) / (2.0 * std::f64::consts::PI * n)
        })
        .unwrap();
        assert!(out.max_abs_diff(&expect).unwrap() < 1e-15);
        // lobe at (0, ±4)
        assert!((out.at(80, 120) - expect.at(80, 120)).abs() < 1e-15 && out.at(80, 120) > 0.07);
    }

    #[test]
    fn vacuum_is_fixed_under_any_rotation() {
        let w = wigner_state(StateKind::Vacuum, GridSpec::default_grid()).unwrap();
        for theta in [0.37, -1.2, 2.9, 7.0] {
            let err = rotate(&w, theta).max_abs_diff(&w).unwrap();
            assert!(err < 1e-8, "{theta}: {err}");
        }
    }

    #[test]
    fn shear_rotation_matches_analytic_coherent_state() {
        // off-centre and on a non-square grid, so the shear path does all the work
        let spec = GridSpec { x_min: -8.0, x_max: 8.0, n_x: 200, p_min: -7.0, p_max: 9.0, n_p: 180 };
        let w = gaussian_wigner(spec, [1.0, 0.2], [[1.0, 0.0], [0.0, 1.0]]).unwrap();
        let theta: f64 = 0.8;
        let out = rotate(&w, theta);
        // W_out(z) = W_in(R(−θ)z): the mean moves to R(θ)·(1, 0.2)
        let (c, s) = (theta.cos(), theta.sin());
        let mean = [c - s * 0.2, s + c * 0.2];
        let expect = gaussian_wigner(spec, mean, [[1.0, 0.0], [0.0, 1.0]]).unwrap();
        let err = out.max_abs_diff(&expect).unwrap();
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn convolution_adds_covariance() {
        let spec = GridSpec::square(9.0_f64, 128);
        let cov_in = [[1.3, 0.2], [0.2, 0.8]];
        let n22 = [[0.5, -0.1], [-0.1, 0.9]];
        let w = gaussian_wigner(spec, [0.5, -0.3], cov_in).unwrap();
        let out = apply_channel_wigner(&w, 0.0, &n22).unwrap();
        let sum = [[1.8, 0.1], [0.1, 1.7]];
        let expect = gaussian_wigner(spec, [0.5, -0.3], sum).unwrap();
        assert!(out.max_abs_diff(&expect).unwrap() < 1e-12);
        assert!((out.integral() - w.integral()).abs() < 1e-6);
    }

    #[test]
    fn singular_noise_is_a_line_blur() {
        let spec = GridSpec::square(8.0, 128);
        let w = wigner_state(StateKind::Vacuum, spec).unwrap();
        let out = apply_channel_wigner(&w, 0.0, &[[0.0, 0.0], [0.0, 1.5]]).unwrap();
        let expect = gaussian_wigner(spec, [0.0, 0.0], [[1.0, 0.0], [0.0, 2.5]]).unwrap();
        assert!(out.max_abs_diff(&expect).unwrap() < 1e-12);
    }

    #[test]
    fn direct_and_fast_transforms_agree() {
        let spec = GridSpec::square(8.0, 63);
        let n22 = [[0.7, 0.3], [0.3, 0.4]];
        let w = wigner_state(StateKind::Cat { alpha: 1.0 }, spec).unwrap();
        let slow = apply_channel_wigner(&w, 0.0, &n22).unwrap();
        let fast = convolve_fast_for_test(&w, &n22);
        assert!(slow.max_abs_diff(&fast).unwrap() < 1e-14);
    }

    fn convolve_fast_for_test(w: &WignerGrid<f64>, n22: &Mat2<f64>) -> WignerGrid<f64> {
        let (mx, mp) = (2 * w.spec.n_x, 2 * w.spec.n_p);
        let mut a = vec![Complex::new(0.0, 0.0); mx * mp];
        for i in 0..w.spec.n_x {
            for j in 0..w.spec.n_p {
                a[i * mp + j].re = w.at(i, j);
            }
        }
        let mut b = a.clone();
        transform_2d(&mut a, mx, mp, false, true);
        transform_2d(&mut b, mx, mp, false, false);
        let diff = a.iter().zip(&b).map(|(u, v)| (u - v).norm()).fold(0.0, f64::max);
        assert!(diff < 1e-11, "{diff}");
        convolve(w, n22)
    }

    #[test]
    fn rejects_bad_noise() {
        let w = wigner_state(StateKind::Vacuum, GridSpec::square(8.0, 32)).unwrap();
        assert!(matches!(
            apply_channel_wigner(&w, 0.0, &[[1.0, 0.0], [0.0, -1.0]]),
            Err(Error::NotPsd { .. })
        ));
        assert!(matches!(
            apply_channel_wigner(&w, 0.0, &[[16.0, 0.0], [0.0, 1.0]]),
            Err(Error::KernelTooWide { .. })
        ));
    }
}
