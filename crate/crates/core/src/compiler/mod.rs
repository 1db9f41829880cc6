//! Gate schedules built from the elementary control fields.

mod gates;
mod rounds;
mod schedule;
mod term;
mod verify;

pub use gates::{
    canonical_cnot, canonical_toffoli, compile_cnot, compile_controlled_phase_x, compile_controlled_v,
    compile_toffoli, compile_x,
};
pub use rounds::{
    build_measured_round, build_measurement_free_round, measured_correction, measured_syndrome_block,
    transversal_cnot_block, Protocol, MEASURED_ROUND_STEPS, MEASUREMENT_FREE_ROUND_STEPS,
};
pub use schedule::{CompiledUnitary, Correction, GateSchedule, Measurement, Step};
pub use term::{ControlKind, ControlTerm};
pub(crate) use term::LocalGenerator;
pub use verify::{verify_gates, GateCheck, GATE_TOLERANCE};
