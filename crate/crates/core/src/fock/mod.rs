//! Truncated number-basis oracle.
//!
//! Everything here is brute force on purpose: states are explicit density
//! matrices, the beamsplitter is a matrix exponential of its generator, and
//! Wigner functions are summed term by term. Two-mode bases are ordered
//! `|n_side, n_mirror⟩ ↦ n_side·dim + n_mirror`, matching the quadrature
//! order `(x_2, p_2, x_m, p_m)`.

mod evolve;
mod noise;
mod states;
mod wigner;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::gaussian::QuadratureState;
use crate::linalg::{Mat2, Mat4};
use crate::scalar::Real;

pub use evolve::{beamsplitter_unitary, evolve_beamsplitter, evolve_beamsplitter_with, BlockUnitary, DEFAULT_MAX_DIM};
pub use noise::{apply_gaussian_noise, gauss_hermite, DEFAULT_QUADRATURE_ORDER};
pub use states::{cat_state_fock, coherent_state_fock, displacement_matrix, number_state, squeezed_coherent_fock};
pub use wigner::wigner_from_fock;

/// Index of the condensate side mode in a two-mode matrix.
pub const SIDE: usize = 0;
/// Index of the mirror mode in a two-mode matrix.
pub const MIRROR: usize = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct FockDensityMatrix<T = f64> {
    n_modes: usize,
    dim: usize,
    /// Row-major `size × size`, `size = dim^n_modes`.
    entries: Vec<Complex<T>>,
}

impl<T: Real> FockDensityMatrix<T> {
    pub fn new(n_modes: usize, dim: usize, entries: Vec<Complex<T>>) -> Result<Self> {
        if !(1..=2).contains(&n_modes) {
            return Err(Error::input(format!("n_modes must be 1 or 2, got {n_modes}")));
        }
        if dim == 0 {
            return Err(Error::input("dim must be positive"));
        }
        let size = dim.pow(n_modes as u32);
        if entries.len() != size * size {
            return Err(Error::input(format!("expected {} entries, got {}", size * size, entries.len())));
        }
        Ok(FockDensityMatrix { n_modes, dim, entries })
    }

    /// `|ψ⟩⟨ψ|` for a one-mode ket.
    pub fn pure(ket: &[Complex<T>]) -> Result<Self> {
        Self::new(1, ket.len(), outer(ket))
    }

    /// `|side⟩|mirror⟩` as a two-mode density matrix.
    pub fn pure_product(side: &[Complex<T>], mirror: &[Complex<T>]) -> Result<Self> {
        if side.len() != mirror.len() {
            return Err(Error::input("both modes need the same truncation"));
        }
        let ket: Vec<Complex<T>> = side.iter().flat_map(|a| mirror.iter().map(move |b| *a * *b)).collect();
        Self::new(2, side.len(), outer(&ket))
    }

    /// Two-mode pure state from a joint ket in the `n_side·dim + n_mirror` order.
    pub fn pure_two_mode(dim: usize, ket: &[Complex<T>]) -> Result<Self> {
        Self::new(2, dim, outer(ket))
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn size(&self) -> usize {
        self.dim.pow(self.n_modes as u32)
    }

    pub fn entries(&self) -> &[Complex<T>] {
        &self.entries
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> Complex<T> {
        self.entries[r * self.size() + c]
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.size()).map(|i| self.at(i, i)).fold(Complex::new(T::zero(), T::zero()), |a, b| a + b)
    }

    /// Occupation numbers of basis index `i`, one per mode.
    fn occupations(&self, i: usize) -> [usize; 2] {
        if self.n_modes == 1 {
            [i, 0]
        } else {
            [i / self.dim, i % self.dim]
        }
    }

    fn index(&self, n: [usize; 2]) -> usize {
        if self.n_modes == 1 {
            n[0]
        } else {
            n[0] * self.dim + n[1]
        }
    }

    /// Hermitian to 1e-12, unit trace to 1e-10, eigenvalues ≥ −1e-10.
    pub fn validate(&self) -> Result<()> {
        let n = self.size();
        let mut herm = T::zero();
        for r in 0..n {
            for c in r..n {
                herm = herm.max((self.at(r, c) - self.at(c, r).conj()).norm());
            }
        }
        if herm.as_f64() > 1e-12 {
            return Err(Error::input(format!("density matrix is not Hermitian (deviation {:e})", herm.as_f64())));
        }
        let tr = self.trace();
        if (tr.re.as_f64() - 1.0).abs() > 1e-10 || tr.im.as_f64().abs() > 1e-10 {
            return Err(Error::input(format!("trace {} + {}i is not 1", tr.re, tr.im)));
        }
        let m = nalgebra::DMatrix::from_fn(n, n, |r, c| {
            let z = self.at(r, c);
            Complex::new(z.re.as_f64(), z.im.as_f64())
        });
        let min = m.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min);
        if min < -1e-10 {
            return Err(Error::NotPsd { min_eigenvalue: min });
        }
        Ok(())
    }

    /// `⟨n⟩` of one mode.
    pub fn mean_occupation(&self, mode: usize) -> Result<T> {
        self.check_mode(mode)?;
        Ok((0..self.size()).map(|i| T::of_usize(self.occupations(i)[mode]) * self.at(i, i).re).sum())
    }

    /// `P(N)` for the total photon number `N = Σ n_j`, `N < n_modes·dim`.
    pub fn total_number_distribution(&self) -> Vec<T> {
        let mut p = vec![T::zero(); self.n_modes * (self.dim - 1) + 1];
        for i in 0..self.size() {
            let n = self.occupations(i);
            p[n[0] + n[1]] += self.at(i, i).re;
        }
        p
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.n_modes {
            return Err(Error::input(format!("mode {mode} out of range for {} mode(s)", self.n_modes)));
        }
        Ok(())
    }

    /// Reduced state of mode `keep`.
    pub fn partial_trace(&self, keep: usize) -> Result<Self> {
        if self.n_modes != 2 {
            return Err(Error::input("partial trace needs a two-mode state"));
        }
        self.check_mode(keep)?;
        let d = self.dim;
        let mut out = vec![Complex::new(T::zero(), T::zero()); d * d];
        for a in 0..d {
            for b in 0..d {
                let mut acc = Complex::new(T::zero(), T::zero());
                for c in 0..d {
                    let (r, s) = if keep == SIDE { ([a, c], [b, c]) } else { ([c, a], [c, b]) };
                    acc += self.at(self.index(r), self.index(s));
                }
                out[a * d + b] = acc;
            }
        }
        Self::new(1, d, out)
    }

    /// `Tr(ρ·L_1⋯L_k)` for ladder operators given as `(mode, raising)`,
    /// applied right to left. Truncation is hard: raising the top level gives 0.
    pub fn expect_ladder(&self, ops: &[(usize, bool)]) -> Result<Complex<T>> {
        for &(mode, _) in ops {
            self.check_mode(mode)?;
        }
        let mut acc = Complex::new(T::zero(), T::zero());
        'basis: for c in 0..self.size() {
            let mut n = self.occupations(c);
            let mut coeff = T::one();
            for &(mode, raise) in ops.iter().rev() {
                if raise {
                    if n[mode] + 1 >= self.dim {
                        continue 'basis;
                    }
                    n[mode] += 1;
                    coeff *= T::of_usize(n[mode]).sqrt();
                } else {
                    if n[mode] == 0 {
                        continue 'basis;
                    }
                    coeff *= T::of_usize(n[mode]).sqrt();
                    n[mode] -= 1;
                }
            }
            acc += self.at(c, self.index(n)) * coeff;
        }
        Ok(acc)
    }

    /// Quadrature means and symmetrized covariance, `2·n_modes` components
    /// in the order `(x, p)` per mode.
    fn moments_dyn(&self) -> Result<(Vec<T>, Vec<Vec<T>>)> {
        let q = 2 * self.n_modes;
        let i = Complex::new(T::zero(), T::one());
        let one = Complex::new(T::one(), T::zero());
        // quadrature k = Σ_l coeffs[k][l]·L_l with L = (c_0, c_0†, c_1, c_1†)
        let mut coeffs = vec![vec![Complex::new(T::zero(), T::zero()); q]; q];
        for j in 0..self.n_modes {
            coeffs[2 * j][2 * j] = one;
            coeffs[2 * j][2 * j + 1] = one;
            coeffs[2 * j + 1][2 * j] = -i;
            coeffs[2 * j + 1][2 * j + 1] = i;
        }
        let ladder = |l: usize| (l / 2, l % 2 == 1);
        let first: Vec<Complex<T>> = (0..q).map(|l| self.expect_ladder(&[ladder(l)])).collect::<Result<_>>()?;
        let mut second = vec![vec![Complex::new(T::zero(), T::zero()); q]; q];
        for (l, row) in second.iter_mut().enumerate() {
            for (k, v) in row.iter_mut().enumerate() {
                *v = self.expect_ladder(&[ladder(l), ladder(k)])?;
            }
        }
        let mean: Vec<T> = (0..q)
            .map(|a| (0..q).fold(Complex::new(T::zero(), T::zero()), |s, l| s + coeffs[a][l] * first[l]).re)
            .collect();
        let mut cov = vec![vec![T::zero(); q]; q];
        for a in 0..q {
            for b in 0..q {
                let mut ab = Complex::new(T::zero(), T::zero());
                for l in 0..q {
                    for k in 0..q {
                        ab += coeffs[a][l] * coeffs[b][k] * (second[l][k] + second[k][l]);
                    }
                }
                cov[a][b] = ab.re / T::of(2.0) - mean[a] * mean[b];
            }
        }
        Ok((mean, cov))
    }

    pub fn single_mode_moments(&self) -> Result<([T; 2], Mat2<T>)> {
        if self.n_modes != 1 {
            return Err(Error::input("expected a one-mode state"));
        }
        let (m, c) = self.moments_dyn()?;
        Ok(([m[0], m[1]], [[c[0][0], c[0][1]], [c[1][0], c[1][1]]]))
    }

    /// Moments in the `(x_2, p_2, x_m, p_m)` order.
    pub fn two_mode_moments(&self) -> Result<QuadratureState<T>> {
        if self.n_modes != 2 {
            return Err(Error::input("expected a two-mode state"));
        }
        let (m, c) = self.moments_dyn()?;
        let mut cov: Mat4<T> = [[T::zero(); 4]; 4];
        for (a, row) in cov.iter_mut().enumerate() {
            for (b, v) in row.iter_mut().enumerate() {
                *v = c[a][b];
            }
        }
        QuadratureState::new([m[0], m[1], m[2], m[3]], cov)
    }
}

fn outer<T: Real>(ket: &[Complex<T>]) -> Vec<Complex<T>> {
    ket.iter().flat_map(|a| ket.iter().map(move |b| *a * b.conj())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex<f64> {
        Complex::new(re, 0.0)
    }

    #[test]
    fn product_state_traces_to_its_factors() {
        let side = coherent_state_fock(Complex::new(0.4, -0.2), 20).unwrap();
        let mirror = cat_state_fock(1.0, 20).unwrap();
        let rho = FockDensityMatrix::pure_product(&side, &mirror).unwrap();
        let s = rho.partial_trace(SIDE).unwrap();
        let m = rho.partial_trace(MIRROR).unwrap();
        let s_ref = FockDensityMatrix::pure(&side).unwrap();
        let m_ref = FockDensityMatrix::pure(&mirror).unwrap();
        let norm_s: f64 = side.iter().map(|z| z.norm_sqr()).sum();
        let norm_m: f64 = mirror.iter().map(|z| z.norm_sqr()).sum();
        for (a, b) in s.entries().iter().zip(s_ref.entries()) {
            assert!((a - b * norm_m).norm() < 1e-15);
        }
        for (a, b) in m.entries().iter().zip(m_ref.entries()) {
            assert!((a - b * norm_s).norm() < 1e-15);
        }
        assert!((s.trace() - rho.trace()).norm() < 1e-12);
    }

    #[test]
    fn correlated_state_reduces_to_diagonal() {
        // Σ_n λ^n |n, n⟩ (normalized): ⟨n⟩ = λ²/(1−λ²) up to truncation
        let (dim, lam) = (30, 0.5f64);
        let mut ket = vec![c(0.0); dim * dim];
        let norm: f64 = (0..dim).map(|n| lam.powi(2 * n as i32)).sum::<f64>().sqrt();
        for n in 0..dim {
            ket[n * dim + n] = c(lam.powi(n as i32) / norm);
        }
        let rho = FockDensityMatrix::pure_two_mode(dim, &ket).unwrap();
        let red = rho.partial_trace(MIRROR).unwrap();
        for a in 0..dim {
            for b in 0..dim {
                let expect = if a == b { lam.powi(2 * a as i32) / (norm * norm) } else { 0.0 };
                assert!((red.at(a, b) - c(expect)).norm() < 1e-15);
            }
        }
        let n_bar = lam * lam / (1.0 - lam * lam);
        assert!((red.mean_occupation(0).unwrap() - n_bar).abs() < 1e-12);
        assert!((red.trace().re - 1.0).abs() < 1e-12);
        assert!(rho.partial_trace(2).is_err());
        assert!(red.partial_trace(0).is_err());
    }

    #[test]
    fn validation_catches_bad_matrices() {
        let rho = FockDensityMatrix::pure(&number_state(2, 5).unwrap()).unwrap();
        assert!(rho.validate().is_ok());
        let mut bad = rho.entries().to_vec();
        bad[0] = c(-0.5);
        bad[2 * 5 + 2] = c(1.5);
        assert!(matches!(FockDensityMatrix::new(1, 5, bad).unwrap().validate(), Err(Error::NotPsd { .. })));
        let mut skew = rho.entries().to_vec();
        skew[1] = Complex::new(0.0, 0.1);
        assert!(FockDensityMatrix::new(1, 5, skew).unwrap().validate().is_err());
        assert!(FockDensityMatrix::<f64>::new(3, 2, vec![]).is_err());
    }

    #[test]
    fn coherent_moments() {
        let ket = coherent_state_fock(Complex::new(0.7_f64, -0.3), 30).unwrap();
        let (mean, cov) = FockDensityMatrix::pure(&ket).unwrap().single_mode_moments().unwrap();
        assert!((mean[0] - 1.4).abs() < 1e-12 && (mean[1] + 0.6).abs() < 1e-12);
        assert!((cov[0][0] - 1.0).abs() < 1e-12 && (cov[1][1] - 1.0).abs() < 1e-12 && cov[0][1].abs() < 1e-12);
    }
}
