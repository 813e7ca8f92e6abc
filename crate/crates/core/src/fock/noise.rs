use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{self, Mat2};
use crate::scalar::Real;

use super::states::displacement_matrix;
use super::FockDensityMatrix;

/// Nodes per principal axis of the noise kernel.
pub const DEFAULT_QUADRATURE_ORDER: usize = 40;

/// Largest weight allowed to leak above the truncation.
const MAX_TRACE_LOSS: f64 = 1e-6;

/// Gauss–Hermite nodes and weights for `∫ f(z) e^{−z²} dz` (Golub–Welsch).
pub fn gauss_hermite(order: usize) -> (Vec<f64>, Vec<f64>) {
    let jacobi = DMatrix::from_fn(order, order, |r, c| {
        if r + 1 == c || c + 1 == r {
            (r.max(c) as f64 / 2.0).sqrt()
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> = (0..order)
        .map(|k| (eig.eigenvalues[k], std::f64::consts::PI.sqrt() * eig.eigenvectors[(0, k)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Principal axes of a 2×2 PSD matrix: `(variance, unit vector)` pairs.
fn principal_axes<T: Real>(n22: &Mat2<T>) -> [(T, [T; 2]); 2] {
    let ev = linalg::symmetric_eigenvalues(n22);
    let (a, b, c) = (n22[0][0], n22[0][1], n22[1][1]);
    let axis = |lam: T| -> [T; 2] {
        // pick the better-conditioned row of (N − λI)·v = 0
        let v = if (a - lam).abs() + b.abs() >= (c - lam).abs() + b.abs() { [b, lam - a] } else { [lam - c, b] };
        let len = (v[0] * v[0] + v[1] * v[1]).sqrt();
        if len > T::zero() {
            [v[0] / len, v[1] / len]
        } else {
            [T::one(), T::zero()]
        }
    };
    let first = axis(ev[0]);
    [(ev[0].max(T::zero()), first), (ev[1].max(T::zero()), [-first[1], first[0]])]
}

/// Additive Gaussian noise `ρ ↦ ∫ G_N(w)·D(w)·ρ·D(w)† dw` on a one-mode
/// state, with `w` a quadrature displacement (covariance gains `N`).
///
/// The integral is a tensor Gauss–Hermite rule along the principal axes of
/// `n22`. Fails with a truncation error if more than 1e-6 of the weight
/// leaves the basis.
pub fn apply_gaussian_noise<T: Real>(
    rho: &FockDensityMatrix<T>,
    n22: &Mat2<T>,
    order: usize,
) -> Result<FockDensityMatrix<T>> {
    if rho.n_modes() != 1 {
        return Err(Error::input("noise channel acts on one mode"));
    }
    if order == 0 {
        return Err(Error::input("quadrature order must be positive"));
    }
    let scale = T::one().max(linalg::max_abs(n22));
    if linalg::asymmetry(n22) > T::of(1e-12) * scale {
        return Err(Error::input("noise block is not symmetric"));
    }
    let ev = linalg::symmetric_eigenvalues(n22);
    if ev[0] < -T::of(1e-12) * scale {
        return Err(Error::NotPsd { min_eigenvalue: ev[0].as_f64() });
    }
    let (nodes, weights) = gauss_hermite(order);
    let rule = |var: T| -> Vec<(T, T)> {
        if var == T::zero() {
            vec![(T::zero(), T::one())]
        } else {
            let s = (T::of(2.0) * var).sqrt();
            nodes.iter().zip(&weights).map(|(z, w)| (s * T::of(*z), T::of(*w / std::f64::consts::PI.sqrt()))).collect()
        }
    };
    let [(var_a, ax_a), (var_b, ax_b)] = principal_axes(n22);
    let (rule_a, rule_b) = (rule(var_a), rule(var_b));
    let points: Vec<(T, T, T)> = rule_a
        .iter()
        .flat_map(|&(u, wu)| {
            rule_b.iter().map(move |&(v, wv)| (u * ax_a[0] + v * ax_b[0], u * ax_a[1] + v * ax_b[1], wu * wv))
        })
        .collect();

    let dim = rho.dim();
    let zero = Complex::new(T::zero(), T::zero());
    let half = T::of(0.5);
    let terms: Vec<Vec<Complex<T>>> = points
        .par_iter()
        .map(|&(wx, wp, weight)| {
            // a quadrature shift by (wx, wp) is D(β) with β = (wx + i wp)/2
            let d = displacement_matrix(Complex::new(half * wx, half * wp), dim);
            let mut left = vec![zero; dim * dim];
            for r in 0..dim {
                for k in 0..dim {
                    let x = d[r * dim + k];
                    for c in 0..dim {
                        left[r * dim + c] += x * rho.at(k, c);
                    }
                }
            }
            let mut out = vec![zero; dim * dim];
            for r in 0..dim {
                for c in 0..dim {
                    let mut acc = zero;
                    for k in 0..dim {
                        acc += left[r * dim + k] * d[c * dim + k].conj();
                    }
                    out[r * dim + c] = acc * weight;
                }
            }
            out
        })
        .collect();
    let mut total = vec![zero; dim * dim];
    for t in &terms {
        for (a, b) in total.iter_mut().zip(t) {
            *a += *b;
        }
    }
    let out = FockDensityMatrix::new(1, dim, total)?;
    let loss = (rho.trace().re - out.trace().re).as_f64();
    if loss > MAX_TRACE_LOSS {
        return Err(Error::Truncation(format!("noise pushed {loss:e} of the weight above dim = {dim}")));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{cat_state_fock, number_state, squeezed_coherent_fock};

    #[test]
    fn hermite_rule_integrates_moments() {
        let (z, w) = gauss_hermite(20);
        let m0: f64 = w.iter().sum();
        let m2: f64 = z.iter().zip(&w).map(|(z, w)| z * z * w).sum();
        let m4: f64 = z.iter().zip(&w).map(|(z, w)| z.powi(4) * w).sum();
        let rp = std::f64::consts::PI.sqrt();
        assert!((m0 - rp).abs() < 1e-13 && (m2 - rp / 2.0).abs() < 1e-13 && (m4 - 3.0 * rp / 4.0).abs() < 1e-12);
    }

    #[test]
    fn noise_adds_to_covariance() {
        let ket = squeezed_coherent_fock(Complex::new(0.3_f64, -0.2), 0.3, 0.8, 40).unwrap();
        let rho = FockDensityMatrix::pure(&ket).unwrap();
        let n22 = [[0.4, 0.1], [0.1, 0.25]];
        let out = apply_gaussian_noise(&rho, &n22, 30).unwrap();
        let (m0, c0) = rho.single_mode_moments().unwrap();
        let (m1, c1) = out.single_mode_moments().unwrap();
        for a in 0..2 {
            assert!((m1[a] - m0[a]).abs() < 1e-9);
            for b in 0..2 {
                assert!((c1[a][b] - c0[a][b] - n22[a][b]).abs() < 1e-9, "{a}{b}");
            }
        }
        assert!(out.validate().is_ok());
    }

    #[test]
    fn degenerate_and_zero_noise() {
        let rho = FockDensityMatrix::pure(&cat_state_fock(1.0_f64, 25).unwrap()).unwrap();
        let same = apply_gaussian_noise(&rho, &[[0.0; 2]; 2], 10).unwrap();
        for (a, b) in same.entries().iter().zip(rho.entries()) {
            assert!((a - b).norm() < 1e-15);
        }
        let line = apply_gaussian_noise(&rho, &[[0.0, 0.0], [0.0, 0.5]], 30).unwrap();
        let (_, c0) = rho.single_mode_moments().unwrap();
        let (_, c1) = line.single_mode_moments().unwrap();
        assert!((c1[0][0] - c0[0][0]).abs() < 1e-10 && (c1[1][1] - c0[1][1] - 0.5).abs() < 1e-10);
    }

    #[test]
    fn leaking_noise_is_refused() {
        let rho = FockDensityMatrix::pure(&number_state(0, 6).unwrap()).unwrap();
        assert!(matches!(apply_gaussian_noise(&rho, &[[4.0, 0.0], [0.0, 4.0]], 20), Err(Error::Truncation(_))));
        assert!(matches!(apply_gaussian_noise(&rho, &[[1.0, 0.0], [0.0, -1.0]], 20), Err(Error::NotPsd { .. })));
    }
}
