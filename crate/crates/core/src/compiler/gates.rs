use super::schedule::{CompiledUnitary, GateSchedule, Step};
use super::term::ControlTerm;
use crate::error::Result;
use crate::qstate::register::check_distinct;
use crate::qstate::{QubitIndex, MAX_QUBITS};
use crate::scalar::Real;

/// Phase-pushing offset used on the control-on branch; it is cancelled by a
/// σ_z rotation on the control in the last step of each fragment.
fn push_offset<T: Real>() -> T {
    T::FRAC_PI_2()
}

/// Full-strength single-qubit flip: `exp(−i(π/2)σ_x) = −iσ_x`.
pub fn compile_x<T: Real>(qubit: QubitIndex) -> Step<T> {
    Step::with_terms("x", vec![ControlTerm::x(qubit, T::FRAC_PI_2())])
}

/// Three-step fragment for the controlled `H·diag(1, e^{iφ})·H` gate.
///
/// The middle pushing gate has `α = (0, 0, x, x − φ)`, so `θ_t = 0` and the
/// control-on branch picks up `e^{−ix}·diag(1, e^{iφ})` on the target.
pub fn compile_controlled_phase_x<T: Real>(
    control: QubitIndex,
    target: QubitIndex,
    phi: T,
    label: &'static str,
) -> Result<GateSchedule<T>> {
    check_distinct(&[control, target], MAX_QUBITS)?;
    let x = push_offset::<T>();
    let h = T::FRAC_PI_2();
    let mut s = GateSchedule::new();
    s.push(Step::with_terms(label, vec![ControlTerm::hadamard(target, h)]))?;
    s.push(Step::with_terms(
        label,
        vec![ControlTerm::pushing(control, target, [T::zero(), T::zero(), x, x - phi])],
    ))?;
    s.push(Step::with_terms(
        label,
        vec![
            ControlTerm::hadamard(target, h),
            ControlTerm::z(control, x / T::lit(2.0)),
        ],
    ))?;
    Ok(s)
}

pub fn compile_cnot<T: Real>(control: QubitIndex, target: QubitIndex) -> Result<GateSchedule<T>> {
    compile_controlled_phase_x(control, target, T::PI(), "cnot")
}

/// Controlled `V` with `V² = σ_x`; `dagger` selects `V†`.
pub fn compile_controlled_v<T: Real>(
    control: QubitIndex,
    target: QubitIndex,
    dagger: bool,
) -> Result<GateSchedule<T>> {
    let phi = if dagger { -T::FRAC_PI_2() } else { T::FRAC_PI_2() };
    compile_controlled_phase_x(control, target, phi, "toffoli")
}

/// Toffoli from two controlled-V, one controlled-V† and two CNOTs (15 steps).
pub fn compile_toffoli<T: Real>(c1: QubitIndex, c2: QubitIndex, target: QubitIndex) -> Result<GateSchedule<T>> {
    check_distinct(&[c1, c2, target], MAX_QUBITS)?;
    let mut s = GateSchedule::new();
    s.extend(compile_controlled_v(c2, target, false)?);
    s.extend(relabel(compile_cnot(c1, c2)?, "toffoli"));
    s.extend(compile_controlled_v(c2, target, true)?);
    s.extend(relabel(compile_cnot(c1, c2)?, "toffoli"));
    s.extend(compile_controlled_v(c1, target, false)?);
    Ok(s)
}

fn relabel<T: Real>(mut s: GateSchedule<T>, label: &'static str) -> GateSchedule<T> {
    for step in s.steps_mut() {
        step.label = label;
    }
    s
}

/// Canonical CNOT on an `n`-qubit register.
pub fn canonical_cnot<T: Real>(n_qubits: usize, control: QubitIndex, target: QubitIndex) -> CompiledUnitary<T> {
    let (mc, mt) = (control.mask(n_qubits), target.mask(n_qubits));
    CompiledUnitary::permutation(n_qubits, |i| if i & mc != 0 { i ^ mt } else { i })
}

/// Canonical Toffoli on an `n`-qubit register.
pub fn canonical_toffoli<T: Real>(
    n_qubits: usize,
    c1: QubitIndex,
    c2: QubitIndex,
    target: QubitIndex,
) -> CompiledUnitary<T> {
    let mc = c1.mask(n_qubits) | c2.mask(n_qubits);
    let mt = target.mask(n_qubits);
    CompiledUnitary::permutation(n_qubits, |i| if i & mc == mc { i ^ mt } else { i })
}
