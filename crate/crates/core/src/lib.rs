//! Dephasing of qubits by classical telegraph and 1/f^α noise, and the
//! trace-distance (BLP) and quantum-capacity (BCM) measures of its
//! non-Markovianity.
//!
//! * [`kernels`]: dephasing factors `G(τ, γ)` and `Λ(τ, α, N_f)`.
//! * [`channel`]: the dephasing map on one and two qubits, trace distance,
//!   optimal initial pairs.
//! * [`measures`]: capacity, flux, BLP/BCM measures and the telegraph closed forms.
//! * [`mc_oracle`]: Monte Carlo trajectories used as an independent check.
//! * [`cli`]: the `nmdephasing` command-line front end.

pub mod channel;
pub mod cli;
pub mod error;
pub mod kernels;
pub mod mc_oracle;
pub mod measures;
pub mod quadrature;

pub use error::{Error, Result};
pub use kernels::{
    colored_dephasing, dephasing_trace, rtn_dephasing, switching_rate_pdf, uniform_grid, ColoredParams, Dephasing,
    DephasingTrace, NoiseModel, RateWindow, RtnParams,
};
pub use measures::{estimate_measures, MeasureReport, MeasureSettings};
