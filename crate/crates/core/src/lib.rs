//! Simulation and analysis of idle information leakage in qubit arrays.
//!
//! A target qubit is prepared in `|0⟩` or `|1⟩`, the device idles for a
//! readout time, and full Pauli tomography is run on the target together with
//! a complementary set of qubits (its nearest-neighbour plaquette, or random
//! non-neighbours). The gap between the Holevo quantity of the joint register
//! and that of the target alone, `Δχ`, measures how much of the target's bit
//! has leaked into the complementary set. The statistics layer separates
//! genuine leakage from shot noise across many samples.
//!
//! Numerical types are generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the double-precision instantiations used by the campaign
//! pipeline.

pub mod device;
pub mod error;
pub mod protocol;
pub mod qstate;
pub mod scalar;
pub mod stats;
pub mod tomography;

pub use error::{Error, Result};
pub use scalar::Real;

pub type DensityMatrix64 = qstate::DensityMatrix<f64>;
pub type DensityMatrix32 = qstate::DensityMatrix<f32>;
pub type Statevector64 = qstate::Statevector<f64>;
pub type Statevector32 = qstate::Statevector<f32>;
pub type HamiltonianSpec64 = device::HamiltonianSpec<f64>;
pub type Tomogram64 = tomography::Tomogram<f64>;
pub type Tomogram32 = tomography::Tomogram<f32>;
pub type Alphabet64 = protocol::Alphabet<f64>;
pub type ProtocolConfig64 = protocol::ProtocolConfig<f64>;
pub type FilterSpec64 = stats::FilterSpec<f64>;
