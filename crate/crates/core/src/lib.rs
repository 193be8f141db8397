//! Linearized two-mode optomechanics with a correlated-emission atomic gain
//! medium: steady states, stability, Gaussian covariance, entanglement
//! criteria and output squeezing spectra.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod covariance;
pub mod dynamics;
pub mod entanglement;
pub mod error;
pub mod model;
pub mod spectra;
pub mod steady_state;
pub mod sweep;

pub use covariance::{solve_lyapunov, CovarianceMatrix, Subsystem, TwoModeCM};
pub use dynamics::{LinearModel, StabilityReport};
pub use entanglement::{analyze, EntanglementReport};
pub use error::{Error, Result};
pub use model::{AtomicInjection, Config, SystemParams};
pub use spectra::{squeezing_spectrum, SpectrumSeries};
pub use steady_state::{solve_steady_state, SteadyState};
pub use sweep::{run_sweep, SweepRow, SweepSpec};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
