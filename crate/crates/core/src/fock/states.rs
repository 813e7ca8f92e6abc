use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// `|n⟩` in a `dim`-level truncation.
pub fn number_state<T: Real>(n: usize, dim: usize) -> Result<Vec<Complex<T>>> {
    if n >= dim {
        return Err(Error::Truncation(format!("|{n}⟩ needs dim > {n}, got {dim}")));
    }
    let mut ket = vec![Complex::new(T::zero(), T::zero()); dim];
    ket[n] = Complex::new(T::one(), T::zero());
    Ok(ket)
}

/// Even cat `(|α⟩ + |−α⟩)/√N`, renormalized after truncation.
///
/// Requires `dim ≥ α² + 7α + 10`, which keeps the discarded tail below 1e-10.
pub fn cat_state_fock<T: Real>(alpha: T, dim: usize) -> Result<Vec<Complex<T>>> {
    let a = alpha.abs();
    let bound = (a * a + T::of(7.0) * a + T::of(10.0)).ceil();
    if !(T::of_usize(dim) >= bound) {
        return Err(Error::Truncation(format!("cat with alpha = {alpha} needs dim >= {bound}, got {dim}")));
    }
    let mut amp = vec![T::zero(); dim];
    // α^n/√n!, built iteratively
    let mut term = T::one();
    for (n, slot) in amp.iter_mut().enumerate() {
        if n > 0 {
            term = term * alpha / T::of_usize(n).sqrt();
        }
        if n % 2 == 0 {
            *slot = term;
        }
    }
    let norm = amp.iter().map(|v| *v * *v).sum::<T>().sqrt();
    Ok(amp.into_iter().map(|v| Complex::new(v / norm, T::zero())).collect())
}

/// Coherent state `|α⟩`, not renormalized (the truncated norm is the
/// caller's diagnostic).
pub fn coherent_state_fock<T: Real>(alpha: Complex<T>, dim: usize) -> Result<Vec<Complex<T>>> {
    if dim == 0 {
        return Err(Error::input("dim must be positive"));
    }
    let mut ket = Vec::with_capacity(dim);
    let mut term = Complex::new((-alpha.norm_sqr() / T::of(2.0)).exp(), T::zero());
    for n in 0..dim {
        if n > 0 {
            term = term * alpha / T::of_usize(n).sqrt();
        }
        ket.push(term);
    }
    Ok(ket)
}

/// `⟨n|D(γ)|m⟩` for `n, m < dim`, from the closed form with associated
/// Laguerre polynomials. Entries are exact, not a truncated exponential.
pub fn displacement_matrix<T: Real>(gamma: Complex<T>, dim: usize) -> Vec<Complex<T>> {
    let r = gamma.norm_sqr();
    let envelope = (-r / T::of(2.0)).exp();
    let mut out = vec![Complex::new(T::zero(), T::zero()); dim * dim];
    let minus_conj = -gamma.conj();
    // γ^d/√d! and (−γ*)^d/√d!
    let mut up = Complex::new(T::one(), T::zero());
    let mut down = Complex::new(T::one(), T::zero());
    for d in 0..dim {
        if d > 0 {
            let s = T::of_usize(d).sqrt();
            up = up * gamma / s;
            down = down * minus_conj / s;
        }
        let mut lag_prev = T::zero();
        let mut lag = T::one();
        // √(k!·d!/(k+d)!)
        let mut ratio = T::one();
        for k in 0..dim - d {
            if k > 0 {
                let next = ((T::of_usize(2 * k - 1 + d) - r) * lag - T::of_usize(k - 1 + d) * lag_prev) / T::of_usize(k);
                lag_prev = lag;
                lag = next;
                ratio *= (T::of_usize(k) / T::of_usize(k + d)).sqrt();
            }
            let base = envelope * ratio * lag;
            out[(k + d) * dim + k] = up * base;
            if d > 0 {
                out[k * dim + k + d] = down * base;
            }
        }
    }
    out
}

/// `D(β)·S(ζ)|0⟩` with `ζ = r·e^{iφ}`, truncated to `dim` levels.
///
/// Squeezed-vacuum amplitudes are computed on an internal basis twice as
/// large, then displaced with exact matrix elements.
pub fn squeezed_coherent_fock<T: Real>(beta: Complex<T>, r: T, phi: T, dim: usize) -> Result<Vec<Complex<T>>> {
    if dim == 0 {
        return Err(Error::input("dim must be positive"));
    }
    let big = 2 * dim;
    let t = r.tanh();
    let lead = Complex::new(T::one() / r.cosh().sqrt(), T::zero());
    let step = Complex::from_polar(-t, phi);
    let mut sq = vec![Complex::new(T::zero(), T::zero()); big];
    // c_{2k} = lead·step^k·√((2k)!)/(2^k k!)
    let mut c = lead;
    for k in 0..big.div_ceil(2) {
        if k > 0 {
            let kk = T::of_usize(k);
            c = c * step * ((T::of(2.0) * kk - T::one()) * T::of(2.0) * kk).sqrt() / (T::of(2.0) * kk);
        }
        sq[2 * k] = c;
    }
    let d = displacement_matrix(beta, big);
    Ok((0..dim)
        .map(|n| (0..big).fold(Complex::new(T::zero(), T::zero()), |acc, m| acc + d[n * big + m] * sq[m]))
        .collect())
}
