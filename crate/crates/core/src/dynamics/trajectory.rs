use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::noise::{Jump, JumpKind, NoiseParams, SimConfig};
use crate::compiler::{ControlTerm, GateSchedule, Protocol, Step};
use crate::error::{Error, Result};
use crate::qstate::{QubitIndex, Register, StateVector};
use crate::scalar::{Real, C};

/// Per-trajectory random stream: ChaCha8 keyed by the master seed, with the
/// trajectory index as the stream id. Streams are independent and the
/// sequence is identical on every platform.
pub fn trajectory_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// Pure state of one trajectory plus the classical record it carries.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryState<T> {
    pub psi: StateVector<T>,
    /// Elapsed time in units of τ.
    pub time: T,
    last_measurement: Option<(Vec<QubitIndex>, usize)>,
}

impl<T: Real> TrajectoryState<T> {
    pub fn new(psi: StateVector<T>) -> Self {
        TrajectoryState {
            psi,
            time: T::zero(),
            last_measurement: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRecord<T> {
    pub master_seed: u64,
    pub index: u64,
    /// Jump events, kept only when `SimConfig::record_jumps` is set.
    pub jumps: Vec<Jump<T>>,
    pub jump_count: usize,
    /// Raw measurement outcomes, one per measurement marker.
    pub outcomes: Vec<usize>,
}

impl<T> TrajectoryRecord<T> {
    pub fn new(master_seed: u64, index: u64) -> Self {
        TrajectoryRecord {
            master_seed,
            index,
            jumps: Vec::new(),
            jump_count: 0,
            outcomes: Vec::new(),
        }
    }
}

/// One sub-step of length `dt` (in units of τ) of the unravelled dynamics.
///
/// The control unitary for `dt` is applied first. A single uniform draw
/// then decides between a jump and the no-jump branch, whose probability is
/// the exact squared norm under the damping `exp(−½Σ L†L dt)`; a second
/// draw picks the channel in proportion to its rate. Hot flips act on every
/// qubit at rate `γ_h`; when `cooling_on`, each ancilla decays at
/// `A⟨n⟩` and is excited at `B⟨1−n⟩`.
#[allow(clippy::too_many_arguments)]
pub fn trajectory_substep<T: Real, R: Rng + ?Sized>(
    psi: &mut StateVector<T>,
    terms: &[ControlTerm<T>],
    dt: T,
    noise: &NoiseParams<T>,
    ancillas: &[QubitIndex],
    cooling_on: bool,
    rng: &mut R,
) -> Result<Option<(usize, JumpKind)>> {
    for t in terms {
        t.apply(psi, dt);
    }
    let n = psi.n_qubits();
    let hot = noise.gamma_h * T::lit(n as f64);
    let (a, b) = if cooling_on {
        (noise.decay_rate(), noise.excitation_rate())
    } else {
        (T::zero(), T::zero())
    };

    let norm0 = psi.norm_sqr();
    let mut weights: Vec<(usize, JumpKind, T)> = Vec::with_capacity(n + 2 * ancillas.len());
    for q in 0..n {
        weights.push((q, JumpKind::BitFlip, noise.gamma_h));
    }
    let masks: Vec<usize> = ancillas.iter().map(|q| q.mask(n)).collect();
    if cooling_on {
        for q in ancillas {
            let p1 = psi.excited_probability(*q) / norm0;
            weights.push((q.0, JumpKind::Cool, a * p1));
            weights.push((q.0, JumpKind::Heat, b * (T::one() - p1)));
        }
    }
    let total: T = weights.iter().map(|w| w.2).sum();
    if total * dt >= T::one() {
        return Err(Error::StepTooLarge((total * dt).as_f64()));
    }

    // squared norm after the no-jump damping, relative to the current norm
    let half = T::lit(0.5) * dt;
    let factor = |idx: usize| -> T {
        masks.iter().fold(T::zero(), |acc, &m| {
            acc + if idx & m != 0 { a } else { b }
        })
    };
    let mut kept = T::zero();
    if cooling_on {
        for (idx, amp) in psi.amplitudes().iter().enumerate() {
            kept += amp.norm_sqr() * (-T::lit(2.0) * half * factor(idx)).exp();
        }
        kept /= norm0;
    } else {
        kept = T::one();
    }
    kept *= (-hot * dt).exp();
    let dp = T::one() - kept;

    let r = T::lit(rng.gen::<f64>());
    if r < dp {
        let (q, kind) = pick_channel(&weights, total, rng);
        apply_jump(psi, QubitIndex(q), kind);
        psi.normalize()?;
        Ok(Some((q, kind)))
    } else {
        if cooling_on {
            for (idx, amp) in psi.amplitudes_mut().iter_mut().enumerate() {
                *amp = *amp * (-half * factor(idx)).exp();
            }
        }
        psi.normalize()?;
        Ok(None)
    }
}

fn pick_channel<T: Real, R: Rng + ?Sized>(weights: &[(usize, JumpKind, T)], total: T, rng: &mut R) -> (usize, JumpKind) {
    let u = T::lit(rng.gen::<f64>()) * total;
    let mut acc = T::zero();
    let mut last = None;
    for &(q, kind, w) in weights {
        if w <= T::zero() {
            continue;
        }
        acc += w;
        last = Some((q, kind));
        if u < acc {
            return (q, kind);
        }
    }
    last.expect("a jump was drawn, so some channel has positive weight")
}

fn apply_jump<T: Real>(psi: &mut StateVector<T>, q: QubitIndex, kind: JumpKind) {
    let m = q.mask(psi.n_qubits());
    let zero = C::new(T::zero(), T::zero());
    match kind {
        JumpKind::BitFlip => psi.apply_x(q),
        JumpKind::Cool => {
            let amps = psi.amplitudes_mut();
            for idx in 0..amps.len() {
                if idx & m == 0 {
                    amps[idx] = amps[idx | m];
                    amps[idx | m] = zero;
                }
            }
        }
        JumpKind::Heat => {
            let amps = psi.amplitudes_mut();
            for idx in 0..amps.len() {
                if idx & m == 0 {
                    amps[idx | m] = amps[idx];
                    amps[idx] = zero;
                }
            }
        }
    }
}

/// A schedule bound to a register, reservoir parameters and numerics.
#[derive(Clone, Debug)]
pub struct Simulation<T> {
    pub schedule: GateSchedule<T>,
    pub register: Register,
    pub noise: NoiseParams<T>,
    pub config: SimConfig,
}

impl<T: Real> Simulation<T> {
    pub fn new(schedule: GateSchedule<T>, register: Register, noise: NoiseParams<T>, config: SimConfig) -> Result<Self> {
        noise.validate()?;
        config.validate()?;
        let need = schedule.min_qubits();
        if need > register.n_qubits() {
            return Err(Error::DimensionMismatch {
                expected: register.n_qubits(),
                got: need,
            });
        }
        Ok(Simulation {
            schedule,
            register,
            noise,
            config,
        })
    }

    pub fn for_protocol(protocol: Protocol, noise: NoiseParams<T>, config: SimConfig) -> Result<Self> {
        Self::new(protocol.build()?, protocol.register(), noise, config)
    }

    pub fn steps_per_round(&self) -> usize {
        self.schedule.len()
    }

    /// `|0…0⟩` on the full register.
    pub fn ground_state(&self) -> Result<StateVector<T>> {
        StateVector::zero(self.register.n_qubits())
    }

    /// Executes one protocol step, including its markers.
    pub fn run_step<R: Rng + ?Sized>(
        &self,
        state: &mut TrajectoryState<T>,
        step: &Step<T>,
        rng: &mut R,
        record: &mut TrajectoryRecord<T>,
    ) -> Result<()> {
        if let Some(corr) = &step.correction {
            let (measured, bits) = state
                .last_measurement
                .as_ref()
                .ok_or_else(|| Error::InvalidParameter("correction marker before any measurement".into()))?;
            let k = measured.len();
            let mut pattern = 0;
            for q in &corr.syndrome {
                let pos = measured
                    .iter()
                    .position(|m| m == q)
                    .ok_or_else(|| Error::InvalidParameter(format!("syndrome qubit {q} was not measured")))?;
                pattern = (pattern << 1) | ((bits >> (k - 1 - pos)) & 1);
            }
            for &q in corr.flips_for(pattern) {
                state.psi.apply_x(q);
            }
        }

        let n_sub = self.config.n_sub;
        let dt = T::one() / T::lit(n_sub as f64);
        let t0 = state.time;
        let ancillas = self.register.ancillas();
        if self.noise.cooling_active(step.cooling) {
            for k in 0..n_sub {
                let jump = trajectory_substep(&mut state.psi, &step.terms, dt, &self.noise, &ancillas, true, rng)?;
                if let Some((qubit, kind)) = jump {
                    self.log_jump(record, t0 + dt * T::lit((k + 1) as f64), qubit, kind);
                }
            }
        } else {
            self.hot_only_step(state, step, rng, record)?;
        }
        state.time = t0 + T::one();

        if let Some(m) = &step.measurement {
            let outcome = state.psi.measure_qubits_projective(&m.qubits, rng)?;
            record.outcomes.push(outcome.bits);
            state.last_measurement = Some((m.qubits.clone(), outcome.bits));
        }
        Ok(())
    }

    /// Without cooling the no-jump branch leaves the state unchanged, so the
    /// controls between jumps are applied in one piece.
    fn hot_only_step<R: Rng + ?Sized>(
        &self,
        state: &mut TrajectoryState<T>,
        step: &Step<T>,
        rng: &mut R,
        record: &mut TrajectoryRecord<T>,
    ) -> Result<()> {
        let n_sub = self.config.n_sub;
        let n = state.psi.n_qubits();
        let frac = |k: usize| T::lit(k as f64) / T::lit(n_sub as f64);
        if self.noise.gamma_h == T::zero() {
            step.apply_controls(&mut state.psi, T::one());
            return Ok(());
        }
        let rate = self.noise.gamma_h * T::lit(n as f64);
        let dt = frac(1);
        if rate * dt >= T::one() {
            return Err(Error::StepTooLarge((rate * dt).as_f64()));
        }
        let dp = T::one() - (-rate * dt).exp();
        let mut done = 0;
        for k in 0..n_sub {
            if T::lit(rng.gen::<f64>()) < dp {
                step.apply_controls(&mut state.psi, frac(k + 1 - done));
                done = k + 1;
                let q = ((rng.gen::<f64>() * n as f64) as usize).min(n - 1);
                state.psi.apply_x(QubitIndex(q));
                self.log_jump(record, state.time + frac(k + 1), q, JumpKind::BitFlip);
            }
        }
        if done < n_sub {
            step.apply_controls(&mut state.psi, frac(n_sub - done));
        }
        state.psi.normalize()
    }

    fn log_jump(&self, record: &mut TrajectoryRecord<T>, time: T, qubit: usize, kind: JumpKind) {
        record.jump_count += 1;
        if self.config.record_jumps {
            record.jumps.push(Jump { time, qubit, kind });
        }
    }

    /// Runs every step of one round; `observer(step, psi)` sees the state at
    /// the end of each step.
    pub fn run_round<R: Rng + ?Sized>(
        &self,
        state: &mut TrajectoryState<T>,
        rng: &mut R,
        record: &mut TrajectoryRecord<T>,
        observer: &mut dyn FnMut(usize, &StateVector<T>),
    ) -> Result<()> {
        for (i, step) in self.schedule.steps().iter().enumerate() {
            self.run_step(state, step, rng, record)?;
            observer(i, &state.psi);
        }
        Ok(())
    }

    /// Runs trajectory `index` of the stream family `master_seed` for
    /// `rounds` rounds. `observer(round, step, psi)` sees every step end.
    pub fn run_trajectory(
        &self,
        initial: &StateVector<T>,
        rounds: usize,
        master_seed: u64,
        index: u64,
        observer: &mut dyn FnMut(usize, usize, &StateVector<T>),
    ) -> Result<(TrajectoryState<T>, TrajectoryRecord<T>)> {
        if initial.n_qubits() != self.register.n_qubits() {
            return Err(Error::DimensionMismatch {
                expected: self.register.n_qubits(),
                got: initial.n_qubits(),
            });
        }
        let mut rng = trajectory_rng(master_seed, index);
        let mut state = TrajectoryState::new(initial.clone());
        let mut record = TrajectoryRecord::new(master_seed, index);
        for round in 0..rounds {
            self.run_round(&mut state, &mut rng, &mut record, &mut |step, psi| observer(round, step, psi))?;
        }
        Ok((state, record))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::Step;

    fn idle_sim(n_ancilla: usize, steps: usize, cooling: bool, noise: NoiseParams<f64>) -> Simulation<f64> {
        let mut s = GateSchedule::new();
        for _ in 0..steps {
            s.push(Step { cooling, ..Step::idle("idle") }).unwrap();
        }
        let reg = Register {
            n_data: 1 - n_ancilla.min(1),
            n_ancilla,
        };
        Simulation::new(s, reg, noise, SimConfig::default()).unwrap()
    }

    #[test]
    fn closed_system_keeps_norm() {
        let sim = Simulation::for_protocol(Protocol::MeasurementFree, NoiseParams::noiseless(), SimConfig::default())
            .unwrap();
        let mut psi = sim.ground_state().unwrap();
        psi.apply_x(QubitIndex(1));
        let (end, rec) = sim
            .run_trajectory(&psi, 2, 1, 0, &mut |_, _, p: &StateVector<f64>| assert!((p.norm_sqr() - 1.0).abs() < 1e-12))
            .unwrap();
        assert_eq!(rec.jump_count, 0);
        assert!((end.psi.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn substep_rejects_oversized_dt() {
        let noise = NoiseParams::new(0.3, 0.0, 0.0).unwrap();
        let mut psi = StateVector::<f64>::zero(4).unwrap();
        let mut rng = trajectory_rng(0, 0);
        let err = trajectory_substep(&mut psi, &[], 1.0, &noise, &[], false, &mut rng).unwrap_err();
        assert!(matches!(err, Error::StepTooLarge(_)));
    }

    #[test]
    fn same_seed_same_record() {
        let noise = NoiseParams::new(0.01, 3.0, 0.1).unwrap();
        let cfg = SimConfig {
            record_jumps: true,
            ..SimConfig::default()
        };
        let sim = Simulation::for_protocol(Protocol::Measured, noise, cfg).unwrap();
        let psi = sim.ground_state().unwrap();
        let a = sim.run_trajectory(&psi, 4, 9, 3, &mut |_, _, _| {}).unwrap();
        let b = sim.run_trajectory(&psi, 4, 9, 3, &mut |_, _, _| {}).unwrap();
        assert_eq!(a, b);
        assert!(a.1.jumps.windows(2).all(|w| w[0].time <= w[1].time));
        let c = sim.run_trajectory(&psi, 4, 9, 4, &mut |_, _, _| {}).unwrap();
        assert_ne!(a.1, c.1);
    }

    #[test]
    fn cooling_gate_off_matches_zero_cold_rate() {
        let base = NoiseParams::new(0.01, 3.0, 0.1).unwrap();
        let off = NoiseParams {
            cooling_gate: false,
            ..base
        };
        let zero = NoiseParams { gamma_c: 0.0, ..base };
        let run = |noise| {
            let sim = Simulation::for_protocol(Protocol::Measured, noise, SimConfig::default()).unwrap();
            let mut psi = sim.ground_state().unwrap();
            psi.apply_x(QubitIndex(4));
            (0..20)
                .map(|i| sim.run_trajectory(&psi, 3, 5, i, &mut |_, _, _| {}).unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(run(off), run(zero));
    }

    #[test]
    fn excited_ancilla_decays_exponentially() {
        // P(still excited after one step) = e^{-3}
        let noise = NoiseParams::new(0.0, 3.0, 0.0).unwrap();
        let sim = idle_sim(1, 1, true, noise);
        let psi = StateVector::basis(1, 1).unwrap();
        let n = 4000;
        let mut excited = 0;
        for i in 0..n {
            let (end, _) = sim.run_trajectory(&psi, 1, 11, i, &mut |_, _, _| {}).unwrap();
            if end.psi.excited_probability(QubitIndex(0)) > 0.5 {
                excited += 1;
            }
        }
        let p = (-3.0f64).exp();
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        let est = excited as f64 / n as f64;
        assert!((est - p).abs() < 3.0 * sigma, "{est} vs {p}");
    }
}
