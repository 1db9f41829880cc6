use std::ops::Range;

use rayon::prelude::*;

use super::trajectory::Simulation;
use crate::error::{Error, Result};
use crate::qstate::{DensityMatrix, Register, StateVector};
use crate::scalar::{Real, C};

/// Trajectories per work item. Results depend on this constant but not on
/// the number of worker threads.
pub const BLOCK_SIZE: u64 = 32;

/// End of step `step` (0-based) in round `round` (0-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SamplePoint {
    pub round: usize,
    pub step: usize,
}

/// Which step ends to record, and whether to keep the full register state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SamplePlan {
    rounds: usize,
    steps_per_round: usize,
    points: Vec<SamplePoint>,
    slot: Vec<Option<usize>>,
    pub full_state: bool,
}

impl SamplePlan {
    pub fn from_points(rounds: usize, steps_per_round: usize, mut points: Vec<SamplePoint>) -> Result<Self> {
        points.sort();
        points.dedup();
        let mut slot = vec![None; rounds * steps_per_round];
        for (k, p) in points.iter().enumerate() {
            if p.round >= rounds || p.step >= steps_per_round {
                return Err(Error::InvalidParameter(format!(
                    "sample point {p:?} outside {rounds} rounds of {steps_per_round} steps"
                )));
            }
            slot[p.round * steps_per_round + p.step] = Some(k);
        }
        Ok(SamplePlan {
            rounds,
            steps_per_round,
            points,
            slot,
            full_state: true,
        })
    }

    pub fn every_step(rounds: usize, steps_per_round: usize) -> Self {
        Self::at_steps(rounds, steps_per_round, &(0..steps_per_round).collect::<Vec<_>>())
    }

    /// The given steps of every round.
    pub fn at_steps(rounds: usize, steps_per_round: usize, steps: &[usize]) -> Self {
        let pts = (0..rounds)
            .flat_map(|round| steps.iter().map(move |&step| SamplePoint { round, step }))
            .filter(|p| p.step < steps_per_round)
            .collect();
        Self::from_points(rounds, steps_per_round, pts).expect("points are in range by construction")
    }

    pub fn round_ends(rounds: usize, steps_per_round: usize) -> Self {
        Self::at_steps(rounds, steps_per_round, &[steps_per_round - 1])
    }

    pub fn with_full_state(mut self, full: bool) -> Self {
        self.full_state = full;
        self
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn steps_per_round(&self) -> usize {
        self.steps_per_round
    }

    pub fn points(&self) -> &[SamplePoint] {
        &self.points
    }

    pub fn slot(&self, round: usize, step: usize) -> Option<usize> {
        self.slot.get(round * self.steps_per_round + step).copied().flatten()
    }
}

/// Mean and standard error of a per-trajectory scalar.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleStats<T> {
    pub mean: T,
    pub std_err: T,
}

#[derive(Clone, Debug, PartialEq)]
struct Slot<T> {
    data: Vec<C<T>>,
    ancilla: Vec<C<T>>,
    total: Option<Vec<C<T>>>,
    f2_data: [T; 2],
    f2_ancilla: [T; 2],
}

/// Running sums of reduced and full projectors over trajectories.
#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleAccumulator<T> {
    register: Register,
    plan: SamplePlan,
    data_reference: StateVector<T>,
    count: u64,
    slots: Vec<Slot<T>>,
}

impl<T: Real> EnsembleAccumulator<T> {
    /// Empty accumulator. The per-trajectory data fidelity is taken against
    /// `|0…0⟩` on the data qubits.
    pub fn new(register: Register, plan: SamplePlan) -> Result<Self> {
        Self::with_reference(register, plan, StateVector::zero(register.n_data)?)
    }

    pub fn with_reference(register: Register, plan: SamplePlan, data_reference: StateVector<T>) -> Result<Self> {
        if data_reference.n_qubits() != register.n_data {
            return Err(Error::DimensionMismatch {
                expected: register.n_data,
                got: data_reference.n_qubits(),
            });
        }
        let zeros = |k: usize| vec![C::new(T::zero(), T::zero()); 1 << (2 * k)];
        let slots = plan
            .points()
            .iter()
            .map(|_| Slot {
                data: zeros(register.n_data),
                ancilla: zeros(register.n_ancilla),
                total: plan.full_state.then(|| zeros(register.n_qubits())),
                f2_data: [T::zero(); 2],
                f2_ancilla: [T::zero(); 2],
            })
            .collect();
        Ok(EnsembleAccumulator {
            register,
            plan,
            data_reference,
            count: 0,
            slots,
        })
    }

    pub fn register(&self) -> Register {
        self.register
    }

    pub fn plan(&self) -> &SamplePlan {
        &self.plan
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn data_reference(&self) -> &StateVector<T> {
        &self.data_reference
    }

    /// Adds a trajectory's state at `(round, step)` if the plan samples it.
    pub fn observe(&mut self, round: usize, step: usize, psi: &StateVector<T>) {
        let Some(k) = self.plan.slot(round, step) else { return };
        let reg = self.register;
        let slot = &mut self.slots[k];
        psi.accumulate_reduced(&reg.data(), T::one(), &mut slot.data);
        psi.accumulate_reduced(&reg.ancillas(), T::one(), &mut slot.ancilla);
        if let Some(total) = &mut slot.total {
            let a = psi.amplitudes();
            let d = a.len();
            for r in 0..d {
                if a[r].norm_sqr() == T::zero() {
                    continue;
                }
                for c in 0..d {
                    total[r * d + c] += a[r] * a[c].conj();
                }
            }
        }
        let f_d = data_overlap(psi, reg, &self.data_reference);
        let f_a: T = psi
            .amplitudes()
            .iter()
            .enumerate()
            .filter(|(i, _)| i & ((1 << reg.n_ancilla) - 1) == 0)
            .map(|(_, a)| a.norm_sqr())
            .sum();
        slot.f2_data[0] += f_d;
        slot.f2_data[1] += f_d * f_d;
        slot.f2_ancilla[0] += f_a;
        slot.f2_ancilla[1] += f_a * f_a;
    }

    /// Closes one trajectory.
    pub fn finish_trajectory(&mut self) {
        self.count += 1;
    }

    /// Adds `other`'s sums into `self`.
    pub fn merge(&mut self, other: &Self) -> Result<()> {
        if self.register != other.register || self.plan != other.plan || self.data_reference != other.data_reference {
            return Err(Error::InvalidParameter("accumulators have different layouts".into()));
        }
        self.count += other.count;
        for (a, b) in self.slots.iter_mut().zip(&other.slots) {
            add_into(&mut a.data, &b.data);
            add_into(&mut a.ancilla, &b.ancilla);
            if let (Some(x), Some(y)) = (&mut a.total, &b.total) {
                add_into(x, y);
            }
            for i in 0..2 {
                a.f2_data[i] += b.f2_data[i];
                a.f2_ancilla[i] += b.f2_ancilla[i];
            }
        }
        Ok(())
    }

    fn normalized(&self, n_qubits: usize, sum: &[C<T>]) -> Result<DensityMatrix<T>> {
        if self.count == 0 {
            return Err(Error::EmptyAccumulator);
        }
        let w = T::one() / T::lit(self.count as f64);
        Ok(DensityMatrix::from_raw(n_qubits, sum.iter().map(|z| *z * w).collect()))
    }

    pub fn data_density(&self, slot: usize) -> Result<DensityMatrix<T>> {
        self.normalized(self.register.n_data, &self.slots[slot].data)
    }

    pub fn ancilla_density(&self, slot: usize) -> Result<DensityMatrix<T>> {
        self.normalized(self.register.n_ancilla, &self.slots[slot].ancilla)
    }

    /// Full-register ensemble state; `None` when the plan does not keep it.
    pub fn total_density(&self, slot: usize) -> Result<Option<DensityMatrix<T>>> {
        match &self.slots[slot].total {
            Some(t) => self.normalized(self.register.n_qubits(), t).map(Some),
            None if self.count == 0 => Err(Error::EmptyAccumulator),
            None => Ok(None),
        }
    }

    fn stats(&self, sums: [T; 2]) -> Result<SampleStats<T>> {
        if self.count == 0 {
            return Err(Error::EmptyAccumulator);
        }
        let n = T::lit(self.count as f64);
        let mean = sums[0] / n;
        let var = if self.count > 1 {
            ((sums[1] - n * mean * mean) / (n - T::one())).max(T::zero())
        } else {
            T::zero()
        };
        Ok(SampleStats {
            mean,
            std_err: (var / n).sqrt(),
        })
    }

    /// Per-trajectory overlap with the data reference.
    pub fn f2_data_stats(&self, slot: usize) -> Result<SampleStats<T>> {
        self.stats(self.slots[slot].f2_data)
    }

    /// Per-trajectory probability of the all-ground ancilla pattern.
    pub fn f2_ancilla_stats(&self, slot: usize) -> Result<SampleStats<T>> {
        self.stats(self.slots[slot].f2_ancilla)
    }
}

fn add_into<T: Real>(a: &mut [C<T>], b: &[C<T>]) {
    for (x, y) in a.iter_mut().zip(b) {
        *x += *y;
    }
}

/// `⟨ref|tr_anc|ψ⟩⟨ψ||ref⟩`, with data qubits leading the register.
fn data_overlap<T: Real>(psi: &StateVector<T>, reg: Register, reference: &StateVector<T>) -> T {
    let na = reg.n_ancilla;
    let amps = psi.amplitudes();
    let r = reference.amplitudes();
    (0..(1usize << na))
        .map(|env| {
            r.iter()
                .enumerate()
                .fold(C::new(T::zero(), T::zero()), |acc, (d, rd)| acc + rd.conj() * amps[(d << na) | env])
                .norm_sqr()
        })
        .sum()
}

/// Runs trajectories `indices` of the stream family `master_seed`.
///
/// Trajectories are grouped into fixed blocks that run in parallel; block
/// sums are merged in index order, so the result is identical for any
/// thread count.
pub fn run_ensemble<T: Real>(
    sim: &Simulation<T>,
    initial: &StateVector<T>,
    plan: &SamplePlan,
    master_seed: u64,
    indices: Range<u64>,
) -> Result<EnsembleAccumulator<T>> {
    run_ensemble_with_reference(sim, initial, plan, master_seed, indices, StateVector::zero(sim.register.n_data)?)
}

pub fn run_ensemble_with_reference<T: Real>(
    sim: &Simulation<T>,
    initial: &StateVector<T>,
    plan: &SamplePlan,
    master_seed: u64,
    indices: Range<u64>,
    data_reference: StateVector<T>,
) -> Result<EnsembleAccumulator<T>> {
    if plan.steps_per_round() != sim.steps_per_round() {
        return Err(Error::InvalidParameter(format!(
            "plan has {} steps per round, schedule has {}",
            plan.steps_per_round(),
            sim.steps_per_round()
        )));
    }
    if indices.is_empty() {
        return Err(Error::InvalidParameter("need at least one trajectory".into()));
    }
    let empty = EnsembleAccumulator::with_reference(sim.register, plan.clone(), data_reference)?;
    let blocks: Vec<Range<u64>> = (indices.start..indices.end)
        .step_by(BLOCK_SIZE as usize)
        .map(|s| s..(s + BLOCK_SIZE).min(indices.end))
        .collect();
    let wave = rayon::current_num_threads().max(1);
    let mut total = empty.clone();
    for chunk in blocks.chunks(wave) {
        let parts: Vec<Result<EnsembleAccumulator<T>>> = chunk
            .par_iter()
            .map(|block| {
                let mut acc = empty.clone();
                for index in block.clone() {
                    sim.run_trajectory(initial, plan.rounds(), master_seed, index, &mut |round, step, psi| {
                        acc.observe(round, step, psi)
                    })?;
                    acc.finish_trajectory();
                }
                Ok(acc)
            })
            .collect();
        for part in parts {
            total.merge(&part?)?;
        }
    }
    Ok(total)
}
