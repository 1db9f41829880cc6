//! Complex state-vector and density-matrix algebra for small registers.

mod density;
pub mod linalg;
mod ops;
pub(crate) mod register;
mod state;

pub use density::DensityMatrix;
pub use ops::Mat2;
pub use register::{QubitIndex, Register, Role};
pub use state::{Outcome, StateVector, MAX_QUBITS};
