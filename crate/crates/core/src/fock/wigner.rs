use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::phase_space::{GridSpec, WignerGrid};
use crate::scalar::Real;

use super::states::displacement_matrix;
use super::FockDensityMatrix;

/// `W(x, p) = Tr[ρ·D(γ)·Π]/(2π)` with `γ = x + ip` and `Π` the parity.
///
/// This is the displaced-parity form of the Wigner function in the
/// vacuum-variance-1 convention; the matrix elements of `D` are the
/// closed-form Laguerre expressions.
pub fn wigner_from_fock<T: Real>(rho: &FockDensityMatrix<T>, spec: GridSpec<T>) -> Result<WignerGrid<T>> {
    if rho.n_modes() != 1 {
        return Err(Error::input("Wigner reconstruction needs a one-mode state"));
    }
    spec.validate()?;
    let dim = rho.dim();
    let two_pi = T::of(2.0) * T::PI();
    let ps = spec.ps();
    let rows: Vec<Vec<T>> = spec
        .xs()
        .into_par_iter()
        .map(|x| {
            ps.iter()
                .map(|&p| {
                    let d = displacement_matrix(Complex::new(x, p), dim);
                    let mut acc = Complex::new(T::zero(), T::zero());
                    for m in 0..dim {
                        let mut col = Complex::new(T::zero(), T::zero());
                        for n in 0..dim {
                            col += rho.at(m, n) * d[n * dim + m];
                        }
                        acc = if m % 2 == 0 { acc + col } else { acc - col };
                    }
                    acc.re / two_pi
                })
                .collect()
        })
        .collect();
    let mut grid = WignerGrid { spec, values: rows.concat(), warnings: Vec::new() };
    let extent = (spec.x_max - spec.x_min).min(spec.p_max - spec.p_min);
    let needed = T::of(2.0) * T::of_usize(dim).sqrt();
    if extent < needed {
        grid.warnings.push(format!(
            "grid extent {extent} is below 2*sqrt(dim) = {needed}: truncated levels may alias"
        ));
    }
    Ok(grid)
}
