//! Single-mode phase space: Wigner grids, the Gaussian channel acting on
//! them, and overlap metrics.
//!
//! Quadratures are `x = c + c†`, `p = i(c† − c)` (so `[x, p] = 2i` and the
//! vacuum has unit variance), and grids are normalized to `∬W dx dp = 1`.
//! With this convention `Tr ρ₁ρ₂ = 4π ∬W₁W₂`: the usual `2πħ` prefactor
//! becomes `2π·2` because the phase-space cell is `[x, p]/i = 2`.

mod channel;
mod grid;
mod io;
mod metrics;
mod states;

pub use channel::{apply_channel_wigner, rotate};
pub use grid::{GridSpec, WignerGrid, CONVENTION};
pub use io::{read_csv, read_json, render_pgm, render_ppm, write_csv, write_json};
pub use metrics::{marginals, overlap_fidelity, Marginals, Overlap};
pub use states::{gaussian_wigner, wigner_state, StateKind};
