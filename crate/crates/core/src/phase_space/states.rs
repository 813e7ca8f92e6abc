use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Mat2;
use crate::scalar::Real;

use super::grid::{GridSpec, WignerGrid};

/// Closed-form single-mode states. Amplitudes are real.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StateKind<T = f64> {
    Vacuum,
    Coherent { alpha: T },
    Thermal { n_bar: T },
    /// Even cat `(|α⟩ + |−α⟩)/√N`.
    Cat { alpha: T },
}

/// Wigner function of a Gaussian state with the given mean and covariance.
pub fn gaussian_wigner<T: Real>(spec: GridSpec<T>, mean: [T; 2], cov: Mat2<T>) -> Result<WignerGrid<T>> {
    let det = cov[0][0] * cov[1][1] - cov[0][1] * cov[1][0];
    if !(det > T::zero()) || !(cov[0][0] > T::zero()) {
        return Err(Error::input("Gaussian covariance must be positive definite"));
    }
    let norm = T::one() / (T::of(2.0) * T::PI() * det.sqrt());
    let (a, b, c) = (cov[1][1] / det, -cov[0][1] / det, cov[0][0] / det);
    WignerGrid::from_fn(spec, |x, p| {
        let (u, v) = (x - mean[0], p - mean[1]);
        norm * (-(a * u * u + T::of(2.0) * b * u * v + c * v * v) / T::of(2.0)).exp()
    })
}

pub fn wigner_state<T: Real>(kind: StateKind<T>, spec: GridSpec<T>) -> Result<WignerGrid<T>> {
    spec.validate()?;
    let two = T::of(2.0);
    let two_pi = two * T::PI();
    let mut grid = match kind {
        StateKind::Vacuum => WignerGrid::from_fn(spec, |x, p| (-(x * x + p * p) / two).exp() / two_pi)?,
        StateKind::Coherent { alpha } => WignerGrid::from_fn(spec, |x, p| {
            let u = x - two * alpha;
            (-(u * u + p * p) / two).exp() / two_pi
        })?,
        StateKind::Thermal { n_bar } => {
            if !(n_bar >= T::zero()) {
                return Err(Error::input("thermal occupation must be non-negative"));
            }
            let var = two * n_bar + T::one();
            WignerGrid::from_fn(spec, |x, p| (-(x * x + p * p) / (two * var)).exp() / (two_pi * var))?
        }
        StateKind::Cat { alpha } => {
            let n = two * (T::one() + (-two * alpha * alpha).exp());
            let a2 = two * alpha;
            WignerGrid::from_fn(spec, |x, p| {
                let lobes = (-((x - a2) * (x - a2) + p * p) / two).exp()
                    + (-((x + a2) * (x + a2) + p * p) / two).exp();
                let fringe = two * (-(x * x + p * p) / two).exp() * (a2 * p).cos();
                (lobes + fringe) / (two_pi * n)
            })?
        }
    };
    if let StateKind::Cat { alpha } = kind {
        if alpha != T::zero() {
            let limit = T::PI() / (T::of(4.0) * alpha.abs());
            if spec.dx() > limit || spec.dp() > limit {
                grid.warnings.push(format!(
                    "grid spacing ({}, {}) exceeds pi/(4 alpha) = {}: fringes under-resolved",
                    spec.dx(),
                    spec.dp(),
                    limit
                ));
            }
        }
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn wide() -> GridSpec {
        GridSpec::square(10.0, 256)
    }

    #[test]
    fn cat_zero_is_vacuum() {
        let g = GridSpec::default_grid();
        let cat = wigner_state(StateKind::Cat { alpha: 0.0 }, g).unwrap();
        let vac = wigner_state(StateKind::Vacuum, g).unwrap();
        assert!(cat.max_abs_diff(&vac).unwrap() < 1e-16);
        // 256 nodes never hit the origin; evaluate it directly
        let origin = GridSpec { x_min: -1.0, x_max: 1.0, n_x: 3, p_min: -1.0, p_max: 1.0, n_p: 3 };
        let w = wigner_state(StateKind::Cat { alpha: 0.0 }, origin).unwrap();
        assert!((w.at(1, 1) - 1.0 / (2.0 * PI)).abs() < 1e-16);
    }

    #[test]
    fn cat_origin_equals_vacuum_peak() {
        let origin = GridSpec { x_min: -1.0, x_max: 1.0, n_x: 3, p_min: -1.0, p_max: 1.0, n_p: 3 };
        let w = wigner_state(StateKind::Cat { alpha: 2.0 }, origin).unwrap();
        // (2e^{-8} + 2)/(2π·2(1+e^{-8})) = 1/(2π)
        assert!((w.at(1, 1) - 1.0 / (2.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn cat_lobes_sit_at_plus_minus_two_alpha() {
        let spec = GridSpec { x_min: -8.0_f64, x_max: 8.0, n_x: 161, p_min: -1.0, p_max: 1.0, n_p: 21 };
        let w = wigner_state(StateKind::Cat { alpha: 2.0 }, spec).unwrap();
        let j0 = 10;
        let argmax = |range: std::ops::Range<usize>| {
            range.max_by(|&a, &b| w.at(a, j0).partial_cmp(&w.at(b, j0)).unwrap()).unwrap()
        };
        assert!((spec.x(argmax(0..60)) + 4.0).abs() < 1e-12);
        assert!((spec.x(argmax(100..161)) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn every_kind_is_normalized() {
        for kind in [
            StateKind::Vacuum,
            StateKind::Coherent { alpha: 1.5 },
            StateKind::Thermal { n_bar: 0.7 },
            StateKind::Cat { alpha: 2.0 },
            StateKind::Cat { alpha: 0.3 },
        ] {
            let w = wigner_state(kind, wide()).unwrap();
            assert!((w.integral() - 1.0).abs() < 1e-6, "{kind:?}: {}", w.integral());
        }
    }

    #[test]
    fn coarse_grid_is_flagged() {
        let w = wigner_state(StateKind::Cat { alpha: 4.0 }, GridSpec::square(8.0, 32)).unwrap();
        assert_eq!(w.warnings.len(), 1);
        let w = wigner_state(StateKind::Cat { alpha: 2.0 }, GridSpec::default_grid()).unwrap();
        assert!(w.warnings.is_empty());
    }

    #[test]
    fn gaussian_matches_thermal() {
        let spec = GridSpec::square(6.0, 64);
        let var = 2.0 * 0.4 + 1.0;
        let g = gaussian_wigner(spec, [0.0, 0.0], [[var, 0.0], [0.0, var]]).unwrap();
        let t = wigner_state(StateKind::Thermal { n_bar: 0.4 }, spec).unwrap();
        assert!(g.max_abs_diff(&t).unwrap() < 1e-16);
    }
}
