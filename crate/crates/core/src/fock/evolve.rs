use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::FockDensityMatrix;

/// Largest per-mode truncation accepted by default.
pub const DEFAULT_MAX_DIM: usize = 40;

/// A unitary stored as dense diagonal blocks over a partition of the basis.
#[derive(Debug, Clone)]
pub struct BlockUnitary<T = f64> {
    size: usize,
    /// Basis indices of each block, ascending.
    blocks: Vec<Vec<usize>>,
    /// Row-major `k × k` matrix per block.
    matrices: Vec<Vec<Complex<T>>>,
}

impl<T: Real> BlockUnitary<T> {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn dense(&self) -> Vec<Complex<T>> {
        let n = self.size;
        let mut u = vec![Complex::new(T::zero(), T::zero()); n * n];
        for (idx, m) in self.blocks.iter().zip(&self.matrices) {
            let k = idx.len();
            for (a, &r) in idx.iter().enumerate() {
                for (b, &c) in idx.iter().enumerate() {
                    u[r * n + c] = m[a * k + b];
                }
            }
        }
        u
    }

    /// `max |U·U† − I|`.
    pub fn unitarity_error(&self) -> T {
        let mut worst = T::zero();
        for m in &self.matrices {
            let k = (m.len() as f64).sqrt() as usize;
            for a in 0..k {
                for b in 0..k {
                    let dot = (0..k).fold(Complex::new(T::zero(), T::zero()), |s, c| s + m[a * k + c] * m[b * k + c].conj());
                    let target = if a == b { T::one() } else { T::zero() };
                    worst = worst.max((dot - Complex::new(target, T::zero())).norm());
                }
            }
        }
        worst
    }

    /// `U·ρ·U†` for a dense row-major `size × size` matrix.
    fn conjugate(&self, rho: &[Complex<T>]) -> Vec<Complex<T>> {
        let n = self.size;
        let zero = Complex::new(T::zero(), T::zero());
        let mut left = vec![zero; n * n];
        for (idx, m) in self.blocks.iter().zip(&self.matrices) {
            let k = idx.len();
            for (a, &r) in idx.iter().enumerate() {
                for (b, &c) in idx.iter().enumerate() {
                    let u = m[a * k + b];
                    if u == zero {
                        continue;
                    }
                    for col in 0..n {
                        left[r * n + col] += u * rho[c * n + col];
                    }
                }
            }
        }
        let mut out = vec![zero; n * n];
        for (idx, m) in self.blocks.iter().zip(&self.matrices) {
            let k = idx.len();
            for (a, &r) in idx.iter().enumerate() {
                for (b, &c) in idx.iter().enumerate() {
                    let u = m[a * k + b].conj();
                    if u == zero {
                        continue;
                    }
                    for row in 0..n {
                        out[row * n + r] += left[row * n + c] * u;
                    }
                }
            }
        }
        out
    }
}

/// Dense generator `c_m†c_2 + c_2†c_m` on the two-mode truncated basis.
fn generator<T: Real>(dim: usize) -> Vec<T> {
    let n = dim * dim;
    let mut h = vec![T::zero(); n * n];
    for side in 0..dim {
        for mirror in 0..dim {
            // c_m†c_2: one quantum from side to mirror
            if side > 0 && mirror + 1 < dim {
                let from = side * dim + mirror;
                let to = (side - 1) * dim + mirror + 1;
                let v = (T::of_usize(side) * T::of_usize(mirror + 1)).sqrt();
                h[to * n + from] = v;
                h[from * n + to] = v;
            }
        }
    }
    h
}

/// Connected components of the nonzero pattern of a symmetric matrix.
fn components<T: Real>(h: &[T], n: usize) -> Vec<Vec<usize>> {
    let mut label = vec![usize::MAX; n];
    let mut out = Vec::new();
    for start in 0..n {
        if label[start] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut members = vec![start];
        label[start] = id;
        let mut head = 0;
        while head < members.len() {
            let r = members[head];
            head += 1;
            for c in 0..n {
                if h[r * n + c] != T::zero() && label[c] == usize::MAX {
                    label[c] = id;
                    members.push(c);
                }
            }
        }
        members.sort_unstable();
        out.push(members);
    }
    out
}

fn matmul<T: Real>(a: &[Complex<T>], b: &[Complex<T>], k: usize) -> Vec<Complex<T>> {
    let mut out = vec![Complex::new(T::zero(), T::zero()); k * k];
    for i in 0..k {
        for l in 0..k {
            let x = a[i * k + l];
            for j in 0..k {
                out[i * k + j] += x * b[l * k + j];
            }
        }
    }
    out
}

/// `exp(A)` by scaling and squaring with a Taylor series.
fn expm<T: Real>(a: &[Complex<T>], k: usize) -> Vec<Complex<T>> {
    let norm = (0..k)
        .map(|c| (0..k).map(|r| a[r * k + c].norm()).sum::<T>())
        .fold(T::zero(), T::max);
    let mut squarings = 0;
    let mut scale = T::one();
    while norm * scale > T::of(0.5) {
        scale /= T::of(2.0);
        squarings += 1;
    }
    let b: Vec<Complex<T>> = a.iter().map(|z| *z * scale).collect();
    let mut result = vec![Complex::new(T::zero(), T::zero()); k * k];
    for i in 0..k {
        result[i * k + i] = Complex::new(T::one(), T::zero());
    }
    let mut term = result.clone();
    for order in 1..=30 {
        term = matmul(&term, &b, k);
        let inv = T::one() / T::of_usize(order);
        let mut size = T::zero();
        for (r, t) in result.iter_mut().zip(term.iter_mut()) {
            *t *= inv;
            *r += *t;
            size = size.max(t.norm());
        }
        if size <= T::eps() * T::of(1e-2) {
            break;
        }
    }
    for _ in 0..squarings {
        result = matmul(&result, &result, k);
    }
    result
}

/// `exp(−iθ(c_m†c_2 + c_2†c_m))` on `dim` levels per mode.
pub fn beamsplitter_unitary<T: Real>(dim: usize, theta: T, max_dim: usize) -> Result<BlockUnitary<T>> {
    if dim > max_dim {
        return Err(Error::Size { requested: dim, cap: max_dim });
    }
    if !theta.is_finite() {
        return Err(Error::input("theta must be finite"));
    }
    let n = dim * dim;
    let h = generator::<T>(dim);
    let blocks = components(&h, n);
    let minus_i_theta = Complex::new(T::zero(), -theta);
    let matrices = blocks
        .iter()
        .map(|idx| {
            let k = idx.len();
            let mut a = vec![Complex::new(T::zero(), T::zero()); k * k];
            for (r, &i) in idx.iter().enumerate() {
                for (c, &j) in idx.iter().enumerate() {
                    a[r * k + c] = minus_i_theta * h[i * n + j];
                }
            }
            expm(&a, k)
        })
        .collect();
    Ok(BlockUnitary { size: n, blocks, matrices })
}

pub fn evolve_beamsplitter<T: Real>(rho: &FockDensityMatrix<T>, theta: T) -> Result<FockDensityMatrix<T>> {
    evolve_beamsplitter_with(rho, theta, DEFAULT_MAX_DIM)
}

/// `ρ′ = U·ρ·U†` with `U = exp(−iθ(c_m†c_2 + c_2†c_m))`.
///
/// In quadrature language this is the noiseless channel at `Ω_ST·t = −θ`.
pub fn evolve_beamsplitter_with<T: Real>(
    rho: &FockDensityMatrix<T>,
    theta: T,
    max_dim: usize,
) -> Result<FockDensityMatrix<T>> {
    if rho.n_modes() != 2 {
        return Err(Error::input("beamsplitter needs a two-mode state"));
    }
    let u = beamsplitter_unitary(rho.dim(), theta, max_dim)?;
    FockDensityMatrix::new(2, rho.dim(), u.conjugate(rho.entries()))
}
