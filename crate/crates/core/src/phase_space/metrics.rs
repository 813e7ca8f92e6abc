use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::scalar::{trapezoid_weights, Real};

use super::grid::WignerGrid;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Overlap<T = f64> {
    /// `4π∬W₁W₂ = Tr ρ₁ρ₂`.
    pub trace_overlap: T,
    /// `∬W₁W₂ / √(∬W₁²·∬W₂²)`.
    pub normalized_overlap: T,
}

pub fn overlap_fidelity<T: Real>(w1: &WignerGrid<T>, w2: &WignerGrid<T>) -> Result<Overlap<T>> {
    w1.check_same_grid(w2)?;
    let (wx, wp) = w1.weights();
    let (mut cross, mut s1, mut s2) = (T::zero(), T::zero(), T::zero());
    for (i, wxi) in wx.iter().enumerate() {
        let (mut c, mut a, mut b) = (T::zero(), T::zero(), T::zero());
        for (j, wpj) in wp.iter().enumerate() {
            let (u, v) = (w1.at(i, j), w2.at(i, j));
            c += *wpj * u * v;
            a += *wpj * u * u;
            b += *wpj * v * v;
        }
        cross += *wxi * c;
        s1 += *wxi * a;
        s2 += *wxi * b;
    }
    Ok(Overlap {
        trace_overlap: T::of(4.0) * T::PI() * cross,
        normalized_overlap: cross / (s1 * s2).sqrt(),
    })
}

/// Quadrature distributions `P(x) = ∫W dp` and `P(p) = ∫W dx`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Marginals<T = f64> {
    pub x: Vec<T>,
    pub px: Vec<T>,
    pub p: Vec<T>,
    pub pp: Vec<T>,
}

impl<T: Real> Marginals<T> {
    pub fn total_x(&self) -> T {
        let h = self.x[1] - self.x[0];
        trapezoid_weights(self.x.len(), h).iter().zip(&self.px).map(|(w, v)| *w * *v).sum()
    }

    pub fn total_p(&self) -> T {
        let h = self.p[1] - self.p[0];
        trapezoid_weights(self.p.len(), h).iter().zip(&self.pp).map(|(w, v)| *w * *v).sum()
    }
}

pub fn marginals<T: Real>(w: &WignerGrid<T>) -> Marginals<T> {
    let (wx, wp) = w.weights();
    let (nx, np) = (w.spec.n_x, w.spec.n_p);
    let px = (0..nx).map(|i| (0..np).map(|j| wp[j] * w.at(i, j)).sum()).collect();
    let pp = (0..np).map(|j| (0..nx).map(|i| wx[i] * w.at(i, j)).sum()).collect();
    Marginals { x: w.spec.xs(), px, p: w.spec.ps(), pp }
}
