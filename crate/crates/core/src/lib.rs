//! Scale-mixture martingale model of financial index returns.
//!
//! The crate implements a non-Markovian, heteroskedastic martingale for daily
//! log-returns built from a Gaussian scale mixture and an anomalous-scaling
//! law, together with everything needed to study it at desk scale:
//!
//! - [`mixture`]: the scaling function as a finite Gaussian scale mixture,
//!   its density and characteristic function, and a Student-t style preset.
//! - [`schedule`]: inhomogeneity coefficients, interval widths and the
//!   time-inhomogeneous return density.
//! - [`otimes`]: the spherical product of characteristic functions that
//!   defines the joint law of successive returns.
//! - [`oracle`]: brute-force characteristic-function inversion by quadrature,
//!   used to cross-check every closed form against an independent route.
//! - [`process`]: closed-form joint/conditional densities, the autoregressive
//!   sampler with a sliding conditioning window, and the epoch restart
//!   mechanism that makes the process non-stationary.
//! - [`empirics`]: sliding-interval estimators (return PDFs, scaling
//!   collapse, volatility autocorrelation, moment scaling, effective
//!   dimension) for real or simulated series.
//! - [`calibration`]: mixture fitting by EM on collapsed returns and the
//!   grid scan selecting the ensemble exponent from the volatility
//!   autocorrelation decay.
//!
//! All density and estimator functions are pure; simulation is deterministic
//! given `(config, seed)`.

pub mod calibration;
pub mod empirics;
mod error;
pub mod mixture;
pub mod oracle;
pub mod otimes;
pub mod process;
pub mod schedule;

pub use error::{Error, IngestProblem, Result};
pub use mixture::VolatilityMixture;
pub use otimes::ScaleVector;
pub use process::{ProcessConfig, RestartPolicy, SimulatedHistory};
pub use schedule::InhomogeneitySchedule;
