//! Deterministic, seedable simulator of a device-independent QKD pipeline:
//! entangled-outcome statistics under noise, CHSH estimation, sifting,
//! multi-pass Cascade reconciliation and privacy amplification, plus the
//! experiment drivers behind the `diqkd` command-line tool.
//!
//! Analytic routines are generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the `f64` instantiation used by the experiment harness.

pub mod bits;
pub mod cascade;
pub mod error;
pub mod harness;
pub mod postprocessing;
pub mod protocol;
pub mod rng;
pub mod scalar;
pub mod statistics;

pub use bits::BitString;
pub use error::{Error, Result};
pub use scalar::{binary_entropy, Scalar};

pub type Real = f64;
pub type NoiseModel = statistics::NoiseModel<Real>;
pub type NoiseModel32 = statistics::NoiseModel<f32>;
pub type AngleMap = statistics::AngleMap<Real>;
pub type MeasurementSetting = statistics::MeasurementSetting<Real>;
pub type ProtocolConfig = protocol::ProtocolConfig<Real>;
pub type ChshEstimate = protocol::ChshEstimate<Real>;
pub type KeyRateReport = postprocessing::KeyRateReport<Real>;
