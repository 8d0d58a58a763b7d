//! Simulation and analysis of randomized benchmarking and gate-set
//! tomography under temporally correlated detuning noise.
//!
//! The operator algebra, noise trajectories and Pauli walks are generic over
//! [`Real`]; the root aliases fix them to `f64` (and `f32` where useful).
//! RB statistics and GST estimation are `f64` only.

pub mod error;
pub mod gst;
pub mod noise;
pub mod optim;
pub mod qubit;
pub mod rb;
pub mod rng;
pub mod scalar;
pub mod stats;
pub mod walk;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Unitary2 = qubit::Unitary<f64>;
pub type Unitary2f32 = qubit::Unitary<f32>;
pub type Ptm4 = qubit::Ptm<f64>;
pub type CliffordGroup64 = qubit::CliffordGroup<f64>;
pub type CliffordGroup32 = qubit::CliffordGroup<f32>;
pub type Realization = noise::NoiseRealization<f64>;
pub type Ensemble = noise::NoiseEnsemble<f64>;
