//! Trajectory Monte Carlo and the master-equation reference.

mod ensemble;
mod master;
mod noise;
mod trajectory;

pub use ensemble::{
    run_ensemble, run_ensemble_with_reference, EnsembleAccumulator, SamplePlan, SamplePoint, SampleStats, BLOCK_SIZE,
};
pub use master::{evolve_master_equation, MasterEquation};
pub use noise::{Jump, JumpKind, NoiseParams, SimConfig};
pub use trajectory::{trajectory_rng, trajectory_substep, Simulation, TrajectoryRecord, TrajectoryState};
