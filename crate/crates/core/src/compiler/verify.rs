use super::gates::{canonical_cnot, canonical_toffoli, compile_cnot, compile_toffoli};
use super::rounds::{build_measured_round, build_measurement_free_round, transversal_cnot_block};
use super::schedule::{CompiledUnitary, GateSchedule};
use crate::error::Result;
use crate::qstate::{QubitIndex, Register};
use crate::scalar::Real;

/// Largest phase-aligned distance accepted by [`verify_gates`].
pub const GATE_TOLERANCE: f64 = 1e-9;

/// Compiled-vs-canonical comparison of one construction.
#[derive(Clone, Debug, PartialEq)]
pub struct GateCheck<T> {
    pub name: &'static str,
    pub n_qubits: usize,
    pub steps: usize,
    pub distance: T,
}

impl<T: Real> GateCheck<T> {
    pub fn passed(&self) -> bool {
        self.distance.as_f64() < GATE_TOLERANCE
    }
}

fn x_gate<T: Real>(n: usize, q: QubitIndex) -> CompiledUnitary<T> {
    let mask = q.mask(n);
    CompiledUnitary::permutation(n, move |i| i ^ mask)
}

/// Product `g_k ⋯ g_1` of gates listed in time order.
fn in_order<T: Real>(n: usize, gates: &[CompiledUnitary<T>]) -> Result<CompiledUnitary<T>> {
    gates.iter().try_fold(CompiledUnitary::identity(n), |acc, g| g.compose(&acc))
}

fn check<T: Real>(
    name: &'static str,
    schedule: &GateSchedule<T>,
    n: usize,
    unitary_steps: usize,
    expected: &CompiledUnitary<T>,
    offset: T,
) -> Result<GateCheck<T>> {
    let u = schedule.with_angle_offset(offset).net_unitary(n, 0..unitary_steps)?;
    Ok(GateCheck {
        name,
        n_qubits: n,
        steps: schedule.len(),
        distance: u.phase_aligned_distance(expected)?,
    })
}

/// Noiseless comparison of the compiled CNOT, Toffoli, transversal block and
/// both full rounds against their canonical unitaries. `angle_offset` is
/// added to every control angle before the comparison.
///
/// The measured round is compared over its unitary prefix, up to the
/// syndrome measurement.
pub fn verify_gates<T: Real>(angle_offset: T) -> Result<Vec<GateCheck<T>>> {
    let q = QubitIndex;
    let mut out = Vec::new();

    let cnot = compile_cnot(q(0), q(1))?;
    out.push(check("cnot", &cnot, 2, cnot.len(), &canonical_cnot(2, q(0), q(1)), angle_offset)?);

    let tof = compile_toffoli(q(0), q(1), q(2))?;
    let expected = canonical_toffoli(3, q(0), q(1), q(2));
    out.push(check("toffoli", &tof, 3, tof.len(), &expected, angle_offset)?);

    let reg = Register::MEASURED;
    let n = reg.n_qubits();
    let mut copy: Vec<_> = (0..3).map(|k| canonical_cnot(n, reg.data_qubit(k), reg.ancilla(k))).collect();
    let block = transversal_cnot_block(reg)?;
    out.push(check("transversal_cnot", &block, n, block.len(), &in_order(n, &copy)?, angle_offset)?);

    let round = build_measured_round()?;
    copy.push(canonical_cnot(n, reg.ancilla(0), reg.ancilla(1)));
    copy.push(canonical_cnot(n, reg.ancilla(0), reg.ancilla(2)));
    let prefix = round.unitary_prefix_len();
    out.push(check("measured_round", &round, n, prefix, &in_order(n, &copy)?, angle_offset)?);

    let reg = Register::MEASUREMENT_FREE;
    let n = reg.n_qubits();
    let (d, a) = (|k| reg.data_qubit(k), |k| reg.ancilla(k));
    let expected = in_order(
        n,
        &[
            canonical_cnot(n, d(0), a(0)),
            canonical_cnot(n, d(1), a(0)),
            canonical_cnot(n, d(1), a(1)),
            canonical_cnot(n, d(2), a(1)),
            x_gate(n, a(1)),
            canonical_toffoli(n, a(0), a(1), d(0)),
            x_gate(n, a(1)),
            canonical_toffoli(n, a(0), a(1), d(1)),
            x_gate(n, a(0)),
            canonical_toffoli(n, a(0), a(1), d(2)),
            x_gate(n, a(0)),
        ],
    )?;
    let round = build_measurement_free_round()?;
    out.push(check("measurement_free_round", &round, n, round.len(), &expected, angle_offset)?);
    Ok(out)
}
