//! Simulation and estimation toolkit for light-matter quantum interferometry.
//!
//! A thermal matter mode is coupled to coherent light on beam-splitter
//! interfaces, modified by an unknown Gaussian process and read out through
//! the light alone. The crate covers the Gaussian forward model
//! ([`interferometer`]), quadrature sampling ([`measurement`]), the parameter
//! estimators ([`estimators`]), Fisher information and Cramér-Rao bounds
//! ([`fisher`]) and Monte-Carlo benchmarking ([`harness`]).

pub mod angle;
pub mod error;
pub mod estimators;
pub mod fisher;
pub mod gaussian;
pub mod harness;
pub mod interferometer;
pub mod measurement;
pub mod optimize;

pub use error::{Diagnostics, Error, Result};
pub use estimators::{EstimateReport, EstimatorSpec, Method};
pub use fisher::{FisherMethod, FisherResult, Parameter};
pub use gaussian::{GaussianState, ProcessParams, SymplecticOp};
pub use harness::{MonteCarloConfig, MseReport, SweepAxis, SweepTable};
pub use interferometer::{NoiseParams, SetupConfig, Topology};
pub use measurement::{MeasurementPlan, MeasurementScheme};
