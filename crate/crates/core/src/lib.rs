//! MIMO detection with probabilistic (p-bit, p-dit) and oscillator Ising
//! machines, classical baselines (ZF, MMSE, exact ML) and a seeded BER harness.

pub mod baselines;
pub mod channel;
pub mod constellation;
pub mod detection;
pub mod error;
pub mod harness;
pub mod ising_map;
pub mod solvers;

pub use constellation::Constellation;
pub use detection::{detect, DetectionResult, Detector, DetectorOptions};
pub use error::{Error, Result};
