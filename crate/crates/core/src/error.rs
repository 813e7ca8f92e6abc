use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("steady state did not converge after {iterations} iterations (last phase shift {last_phi:e} rad/s, last step {last_step:e} rad/s)")]
    SteadyState {
        iterations: usize,
        last_phi: f64,
        last_step: f64,
    },

    #[error("residual has no sign change on [{lo:e}, {hi:e}]: r(lo) = {r_lo:e}, r(hi) = {r_hi:e}")]
    Bracketing { lo: f64, hi: f64, r_lo: f64, r_hi: f64 },

    #[error("time step {dt:e} s exceeds stability limit {limit:e} s (0.01/|Omega_ST|)")]
    StepTooLarge { dt: f64, limit: f64 },

    #[error("covariance is not positive semidefinite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("grids differ: {0}")]
    GridMismatch(String),

    #[error("noise kernel (sigma {sigma:.3}) too wide for grid half-extent {half_extent:.3}; enlarge the grid")]
    KernelTooWide { sigma: f64, half_extent: f64 },

    #[error("Fock truncation too small: {0}")]
    Truncation(String),

    #[error("size {requested} exceeds cap {cap}")]
    Size { requested: usize, cap: usize },

    #[error("integration diverged at t = {t:e} s (|a| = {amplitude:e})")]
    BlowUp { t: f64, amplitude: f64 },

    #[error("mean-field fixed point is dynamically unstable (max Re lambda = {max_real:e} 1/s)")]
    Unstable { max_real: f64 },

    #[error("integrator step size underflow at t = {t:e} s")]
    StepUnderflow { t: f64 },
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }
}
