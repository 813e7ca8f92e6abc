use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{trapezoid_weights, Real};

pub const CONVENTION: &str = "x=c+c^dagger, p=i(c^dagger-c), vacuum variance 1, integral W dx dp = 1";

/// Rectangular node lattice; both axes include their end points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec<T = f64> {
    pub x_min: T,
    pub x_max: T,
    pub n_x: usize,
    pub p_min: T,
    pub p_max: T,
    pub n_p: usize,
}

impl<T: Real> GridSpec<T> {
    /// `n × n` nodes over `[−span, span]²`.
    pub fn square(span: T, n: usize) -> Self {
        GridSpec { x_min: -span, x_max: span, n_x: n, p_min: -span, p_max: span, n_p: n }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_x < 2 || self.n_p < 2 {
            return Err(Error::input("grid needs at least two nodes per axis"));
        }
        if !(self.x_max > self.x_min) || !(self.p_max > self.p_min) {
            return Err(Error::input("grid bounds must be strictly increasing"));
        }
        if !(self.x_min.is_finite() && self.x_max.is_finite() && self.p_min.is_finite() && self.p_max.is_finite()) {
            return Err(Error::input("grid bounds must be finite"));
        }
        Ok(())
    }

    pub fn dx(&self) -> T {
        (self.x_max - self.x_min) / T::of_usize(self.n_x - 1)
    }

    pub fn dp(&self) -> T {
        (self.p_max - self.p_min) / T::of_usize(self.n_p - 1)
    }

    pub fn x(&self, i: usize) -> T {
        if i + 1 == self.n_x {
            self.x_max
        } else {
            self.x_min + T::of_usize(i) * self.dx()
        }
    }

    pub fn p(&self, j: usize) -> T {
        if j + 1 == self.n_p {
            self.p_max
        } else {
            self.p_min + T::of_usize(j) * self.dp()
        }
    }

    pub fn xs(&self) -> Vec<T> {
        (0..self.n_x).map(|i| self.x(i)).collect()
    }

    pub fn ps(&self) -> Vec<T> {
        (0..self.n_p).map(|j| self.p(j)).collect()
    }

    pub fn len(&self) -> usize {
        self.n_x * self.n_p
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Square, centred, same node count on both axes: quarter turns are
    /// exact index permutations.
    pub fn is_symmetric_square(&self) -> bool {
        self.n_x == self.n_p
            && self.x_min == -self.x_max
            && self.p_min == -self.p_max
            && self.x_max == self.p_max
    }

    /// Smallest distance from the origin to the grid boundary.
    pub fn half_extent(&self) -> T {
        (-self.x_min).min(self.x_max).min(-self.p_min).min(self.p_max)
    }
}

impl GridSpec<f64> {
    /// 256 × 256 over `[−8, 8]²`.
    pub fn default_grid() -> Self {
        GridSpec::square(8.0, 256)
    }
}

/// Sampled Wigner function. `values[i * n_p + j]` is `W(x_i, p_j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WignerGrid<T = f64> {
    pub spec: GridSpec<T>,
    pub values: Vec<T>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl<T: Real> WignerGrid<T> {
    pub fn from_fn(spec: GridSpec<T>, f: impl Fn(T, T) -> T) -> Result<Self> {
        spec.validate()?;
        let xs = spec.xs();
        let ps = spec.ps();
        let mut values = Vec::with_capacity(spec.len());
        for &x in &xs {
            for &p in &ps {
                values.push(f(x, p));
            }
        }
        Ok(WignerGrid { spec, values, warnings: Vec::new() })
    }

    pub fn zeros(spec: GridSpec<T>) -> Result<Self> {
        spec.validate()?;
        Ok(WignerGrid { spec, values: vec![T::zero(); spec.len()], warnings: Vec::new() })
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> T {
        self.values[i * self.spec.n_p + j]
    }

    /// Trapezoidal weights for the two axes.
    pub fn weights(&self) -> (Vec<T>, Vec<T>) {
        (
            trapezoid_weights(self.spec.n_x, self.spec.dx()),
            trapezoid_weights(self.spec.n_p, self.spec.dp()),
        )
    }

    /// `∬ f(W) dx dp` by the trapezoidal rule.
    pub fn integrate_with(&self, f: impl Fn(T) -> T) -> T {
        let (wx, wp) = self.weights();
        let mut total = T::zero();
        for (i, wxi) in wx.iter().enumerate() {
            let row: T = wp.iter().enumerate().map(|(j, wpj)| *wpj * f(self.at(i, j))).sum();
            total += *wxi * row;
        }
        total
    }

    pub fn integral(&self) -> T {
        self.integrate_with(|w| w)
    }

    pub fn min_value(&self) -> T {
        self.values.iter().fold(T::infinity(), |m, v| m.min(*v))
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        self.check_same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs())))
    }

    pub fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.spec != other.spec {
            return Err(Error::GridMismatch(format!("{:?} vs {:?}", self.spec, other.spec)));
        }
        if self.values.len() != self.spec.len() || other.values.len() != other.spec.len() {
            return Err(Error::GridMismatch("value count does not match grid".into()));
        }
        Ok(())
    }

    /// `a·self + b·other` on a shared grid.
    pub fn combine(&self, a: T, other: &Self, b: T) -> Result<Self> {
        self.check_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(u, v)| a * *u + b * *v).collect();
        Ok(WignerGrid { spec: self.spec, values, warnings: Vec::new() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_hit_both_ends() {
        let g = GridSpec::square(8.0_f64, 256);
        assert_eq!(g.x(0), -8.0);
        assert_eq!(g.x(255), 8.0);
        assert!(g.is_symmetric_square());
        // mirror nodes are exact negatives, which the quarter-turn path needs
        for i in 0..256 {
            assert!((g.x(i) + g.x(255 - i)).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_degenerate_grids() {
        assert!(GridSpec::square(8.0, 1).validate().is_err());
        let mut g = GridSpec::square(8.0, 4);
        g.x_max = g.x_min;
        assert!(g.validate().is_err());
    }
}
