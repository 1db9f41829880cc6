use super::gates::{compile_cnot, compile_toffoli, compile_x};
use super::schedule::{Correction, GateSchedule, Measurement, Step};
use crate::error::Result;
use crate::qstate::{QubitIndex, Register};
use crate::scalar::Real;

pub const MEASURED_ROUND_STEPS: usize = 16;
pub const MEASUREMENT_FREE_ROUND_STEPS: usize = 68;

const MEASURED_PREP_STEPS: usize = 7;
const MEASUREMENT_FREE_PREP_STEPS: usize = 6;

/// Which error-correction round to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Protocol {
    /// Three ancillas, projective syndrome measurement, classical correction.
    Measured,
    /// Two ancillas, coherent correction with three Toffoli gates.
    MeasurementFree,
}

impl Protocol {
    pub fn register(self) -> Register {
        match self {
            Protocol::Measured => Register::MEASURED,
            Protocol::MeasurementFree => Register::MEASUREMENT_FREE,
        }
    }

    pub fn build<T: Real>(self) -> Result<GateSchedule<T>> {
        match self {
            Protocol::Measured => build_measured_round(),
            Protocol::MeasurementFree => build_measurement_free_round(),
        }
    }

    pub fn steps_per_round(self) -> usize {
        match self {
            Protocol::Measured => MEASURED_ROUND_STEPS,
            Protocol::MeasurementFree => MEASUREMENT_FREE_ROUND_STEPS,
        }
    }
}

fn cooling_step<T: Real>() -> Step<T> {
    Step {
        cooling: true,
        ..Step::idle("cool")
    }
}

fn idle_steps<T: Real>(s: &mut GateSchedule<T>, n: usize, label: &'static str) -> Result<()> {
    for _ in 0..n {
        s.push(Step::idle(label))?;
    }
    Ok(())
}

/// `CNOT(d_i → a_i)` on all three pairs in parallel (3 steps).
pub fn transversal_cnot_block<T: Real>(reg: Register) -> Result<GateSchedule<T>> {
    let frags = (0..reg.n_data)
        .map(|k| compile_cnot::<T>(reg.data_qubit(k), reg.ancilla(k)))
        .collect::<Result<Vec<_>>>()?;
    let mut out = GateSchedule::new();
    for i in 0..frags[0].len() {
        let terms = frags.iter().flat_map(|f| f.steps()[i].terms.iter().copied()).collect();
        out.push(Step::with_terms("syndrome", terms))?;
    }
    Ok(out)
}

/// Transversal copy followed by the decoding CNOTs `a1 → a2`, `a1 → a3`,
/// compacted into 7 steps.
pub fn measured_syndrome_block<T: Real>(reg: Register) -> Result<GateSchedule<T>> {
    let mut raw = transversal_cnot_block(reg)?;
    raw.extend(compile_cnot(reg.ancilla(0), reg.ancilla(1))?);
    raw.extend(compile_cnot(reg.ancilla(0), reg.ancilla(2))?);
    let mut out = raw.compacted()?;
    for step in out.steps_mut() {
        step.label = "syndrome";
    }
    Ok(out)
}

/// Lookup on the decoded pair `(m2, m3)`; `m1` is not used.
pub fn measured_correction(reg: Register) -> Correction {
    Correction {
        syndrome: vec![reg.ancilla(1), reg.ancilla(2)],
        flips: vec![
            vec![],
            vec![reg.data_qubit(2)],
            vec![reg.data_qubit(1)],
            vec![reg.data_qubit(0)],
        ],
    }
}

/// Sixteen-step measured round on three data and three ancilla qubits:
/// cooling, ancilla preparation, syndrome extraction and decoding,
/// measurement at the end of step 14 and the correction in step 15.
pub fn build_measured_round<T: Real>() -> Result<GateSchedule<T>> {
    let reg = Register::MEASURED;
    let mut s = GateSchedule::new();
    s.push(cooling_step())?;
    idle_steps(&mut s, MEASURED_PREP_STEPS, "prepare")?;
    let mut block = measured_syndrome_block(reg)?;
    let last = block.len() - 1;
    block.steps_mut()[last].measurement = Some(Measurement {
        qubits: reg.ancillas(),
    });
    s.extend(block);
    s.push(Step {
        correction: Some(measured_correction(reg)),
        ..Step::idle("correct")
    })?;
    debug_assert_eq!(s.len(), MEASURED_ROUND_STEPS);
    Ok(s)
}

/// Sixty-eight-step coherent round on three data and two ancilla qubits.
///
/// The syndrome is `a1 = d1⊕d2`, `a2 = d2⊕d3`. Patterns `(1,0)`, `(1,1)` and
/// `(0,1)` steer Toffolis onto `d1`, `d2` and `d3`; zero-controls are made
/// by conjugating with `σ_x`. The ancillas are left for the next cooling.
pub fn build_measurement_free_round<T: Real>() -> Result<GateSchedule<T>> {
    let reg = Register::MEASUREMENT_FREE;
    let (d1, d2, d3) = (reg.data_qubit(0), reg.data_qubit(1), reg.data_qubit(2));
    let (a1, a2) = (reg.ancilla(0), reg.ancilla(1));
    let mut s = GateSchedule::new();
    s.push(cooling_step())?;
    idle_steps(&mut s, MEASUREMENT_FREE_PREP_STEPS, "prepare")?;
    for (c, t) in [(d1, a1), (d2, a1), (d2, a2), (d3, a2)] {
        s.extend(compile_cnot(c, t)?);
    }
    let flip = |q: QubitIndex| compile_x::<T>(q);
    s.push(flip(a2))?;
    s.extend(compile_toffoli(a1, a2, d1)?);
    s.push(flip(a2))?;
    s.extend(compile_toffoli(a1, a2, d2)?);
    s.push(flip(a1))?;
    s.extend(compile_toffoli(a1, a2, d3)?);
    s.push(flip(a1))?;
    debug_assert_eq!(s.len(), MEASUREMENT_FREE_ROUND_STEPS);
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::gates::{canonical_cnot, canonical_toffoli};
    use crate::compiler::schedule::CompiledUnitary;

    #[test]
    fn step_counts() {
        assert_eq!(build_measured_round::<f64>().unwrap().len(), 16);
        assert_eq!(build_measurement_free_round::<f64>().unwrap().len(), 68);
        assert_eq!(measured_syndrome_block::<f64>(Register::MEASURED).unwrap().len(), 7);
    }

    #[test]
    fn cooling_only_in_first_step() {
        for p in [Protocol::Measured, Protocol::MeasurementFree] {
            let s = p.build::<f64>().unwrap();
            let cooled: Vec<usize> = (0..s.len()).filter(|&i| s.steps()[i].cooling).collect();
            assert_eq!(cooled, vec![0]);
        }
    }

    #[test]
    fn measured_markers() {
        let s = build_measured_round::<f64>().unwrap();
        let meas: Vec<usize> = (0..16).filter(|&i| s.steps()[i].measurement.is_some()).collect();
        let corr: Vec<usize> = (0..16).filter(|&i| s.steps()[i].correction.is_some()).collect();
        assert_eq!(meas, vec![14]);
        assert_eq!(corr, vec![15]);
        assert_eq!(s.unitary_prefix_len(), 15);
    }

    #[test]
    fn transversal_block_is_three_cnots() {
        let reg = Register::MEASURED;
        let u = transversal_cnot_block::<f64>(reg).unwrap().full_unitary(6).unwrap();
        let mut want = CompiledUnitary::identity(6);
        for k in 0..3 {
            want = canonical_cnot(6, reg.data_qubit(k), reg.ancilla(k)).compose(&want).unwrap();
        }
        assert!(u.phase_aligned_distance(&want).unwrap() < 1e-9);
    }

    #[test]
    fn compacted_syndrome_block_keeps_its_unitary() {
        let reg = Register::MEASURED;
        let u = measured_syndrome_block::<f64>(reg).unwrap().full_unitary(6).unwrap();
        let mut want = transversal_cnot_block::<f64>(reg).unwrap().full_unitary(6).unwrap();
        want = canonical_cnot(6, reg.ancilla(0), reg.ancilla(1)).compose(&want).unwrap();
        want = canonical_cnot(6, reg.ancilla(0), reg.ancilla(2)).compose(&want).unwrap();
        assert!(u.phase_aligned_distance(&want).unwrap() < 1e-9);
    }

    #[test]
    fn measurement_free_round_unitary() {
        let reg = Register::MEASUREMENT_FREE;
        let (d, a) = ([0, 1, 2].map(|k| reg.data_qubit(k)), [reg.ancilla(0), reg.ancilla(1)]);
        let s = build_measurement_free_round::<f64>().unwrap();
        let u = s.full_unitary(5).unwrap();
        let mut want = CompiledUnitary::identity(5);
        for (c, t) in [(d[0], a[0]), (d[1], a[0]), (d[1], a[1]), (d[2], a[1])] {
            want = canonical_cnot(5, c, t).compose(&want).unwrap();
        }
        let flip = |q: QubitIndex| CompiledUnitary::permutation(5, move |i| i ^ q.mask(5));
        let seq = [
            flip(a[1]),
            canonical_toffoli(5, a[0], a[1], d[0]),
            flip(a[1]),
            canonical_toffoli(5, a[0], a[1], d[1]),
            flip(a[0]),
            canonical_toffoli(5, a[0], a[1], d[2]),
            flip(a[0]),
        ];
        for g in &seq {
            want = g.compose(&want).unwrap();
        }
        assert!(u.phase_aligned_distance(&want).unwrap() < 1e-9);
    }

    #[test]
    fn schedules_are_deterministic() {
        assert_eq!(build_measured_round::<f64>().unwrap(), build_measured_round::<f64>().unwrap());
        assert_eq!(
            build_measurement_free_round::<f64>().unwrap().to_string(),
            build_measurement_free_round::<f64>().unwrap().to_string()
        );
    }
}
