//! Three-qubit bit-flip repetition code run between a hot reservoir that
//! flips qubits and a cold reservoir that resets the ancillas.
//!
//! * [`qstate`]: state vectors, density matrices, partial traces, entropy.
//! * [`compiler`]: CNOT, Toffoli and full rounds as schedules of control fields.
//! * [`dynamics`]: quantum-trajectory Monte Carlo and a master-equation reference.
//! * [`ratemodel`]: cooling rate equations and the round-to-round data chain.
//! * [`metrics`]: fidelities and entropies of ensemble states.
//!
//! Everything numeric is generic over [`Real`] (`f64` or `f32`).

pub mod compiler;
pub mod dynamics;
pub mod error;
pub mod metrics;
pub mod qstate;
pub mod ratemodel;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

pub type StateVector64 = qstate::StateVector<f64>;
pub type StateVector32 = qstate::StateVector<f32>;
pub type DensityMatrix64 = qstate::DensityMatrix<f64>;
pub type DensityMatrix32 = qstate::DensityMatrix<f32>;
pub type GateSchedule64 = compiler::GateSchedule<f64>;
pub type GateSchedule32 = compiler::GateSchedule<f32>;
pub type NoiseParams64 = dynamics::NoiseParams<f64>;
pub type NoiseParams32 = dynamics::NoiseParams<f32>;
pub type Simulation64 = dynamics::Simulation<f64>;
pub type Simulation32 = dynamics::Simulation<f32>;
pub type EnsembleAccumulator64 = dynamics::EnsembleAccumulator<f64>;
pub type RoundMetrics64 = metrics::RoundMetrics<f64>;
pub type FlowMatrix64 = ratemodel::FlowMatrix<f64>;
