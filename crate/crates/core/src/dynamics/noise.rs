use crate::error::{Error, Result};
use crate::scalar::Real;

/// Reservoir couplings, all in units of 1/τ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseParams<T> {
    /// σ_x flip rate on every qubit.
    pub gamma_h: T,
    /// Cold-reservoir rate on the ancillas.
    pub gamma_c: T,
    /// Thermal occupancy of the cold reservoir.
    pub n_c: T,
    /// Master switch for the cooling gate `p(t)`. When false the schedule's
    /// cooling windows are ignored.
    pub cooling_gate: bool,
}

impl<T: Real> NoiseParams<T> {
    pub fn new(gamma_h: T, gamma_c: T, n_c: T) -> Result<Self> {
        let p = NoiseParams {
            gamma_h,
            gamma_c,
            n_c,
            cooling_gate: true,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn noiseless() -> Self {
        NoiseParams {
            gamma_h: T::zero(),
            gamma_c: T::zero(),
            n_c: T::zero(),
            cooling_gate: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("gamma_h", self.gamma_h), ("Gamma_c", self.gamma_c), ("n_c", self.n_c)] {
            if !v.is_finite() || v < T::zero() {
                return Err(Error::InvalidParameter(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }

    /// Decay rate `A = Γ_c(n_c + 1)`.
    pub fn decay_rate(&self) -> T {
        self.gamma_c * (self.n_c + T::one())
    }

    /// Excitation rate `B = Γ_c n_c`.
    pub fn excitation_rate(&self) -> T {
        self.gamma_c * self.n_c
    }

    /// Whether the cold dissipator acts during a step whose schedule marker
    /// is `window`.
    pub fn cooling_active(&self, window: bool) -> bool {
        window && self.cooling_gate && self.gamma_c > T::zero()
    }
}

/// Numerical settings for the trajectory engine and the oracle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SimConfig {
    /// Trajectory sub-steps per protocol step.
    pub n_sub: usize,
    /// RK4 steps per protocol step in the master-equation oracle.
    pub oracle_steps: usize,
    /// Keep every jump in the trajectory record.
    pub record_jumps: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n_sub: 20,
            oracle_steps: 200,
            record_jumps: false,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_sub == 0 || self.oracle_steps == 0 {
            return Err(Error::InvalidParameter("n_sub and oracle_steps must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum JumpKind {
    BitFlip,
    /// σ₋ from the cold reservoir.
    Cool,
    /// σ₊ from the cold reservoir.
    Heat,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jump<T> {
    pub time: T,
    pub qubit: usize,
    pub kind: JumpKind,
}
