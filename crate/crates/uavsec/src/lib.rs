//! Secrecy transmission analysis for large-scale UAV networks.
//!
//! UAV transmitters hover at altitude `H` above a Poisson field of ground
//! receivers and eavesdroppers. A ground node sees a line-of-sight (LoS)
//! link when its horizontal distance to the UAV is below `K = H·cot θc`,
//! and a Rayleigh-faded non-line-of-sight (NLoS) link otherwise.
//!
//! The crate is layered bottom-up:
//!
//! * [`mathkit`] – Lambert W, hypoexponential CDF, bisection, adaptive quadrature.
//! * [`model`] – parameters, point-process sampling, link gains and SIRs.
//! * [`analytic`] – closed-form and semi-analytic connection/outage evaluators.
//! * [`montecarlo`] – the simulation ground truth.
//! * [`optimizer`] – wiretap-code rates, altitude and guard-zone search.

pub mod analytic;
pub mod error;
pub mod mathkit;
pub mod model;
pub mod montecarlo;
pub mod optimizer;

pub use analytic::{Method, MetricEstimate};
pub use error::{Error, Result};
pub use model::{FadingModel, GuardZone, NetworkParams, WiretapCode};
pub use montecarlo::SimConfig;
pub use optimizer::OptimumReport;



