use std::fmt;

use crate::qstate::{Mat2, QubitIndex, StateVector};
use crate::scalar::{phase_factor, Real};

/// Which field of the control Hamiltonian a term switches on.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ControlKind<T> {
    /// `σ_x` on one qubit.
    XRotation,
    /// `σ_z` on one qubit.
    ZRotation,
    /// The Hadamard operator on one qubit (involutory, so it can be exponentiated directly).
    Hadamard,
    /// Diagonal two-qubit phase `diag(α₀₀, α₀₁, α₁₀, α₁₁)`.
    Pushing { alphas: [T; 4] },
}

/// One active control term during a step of duration τ = 1.
///
/// Over a full step the term contributes `exp(−i·strength·G)`, where `G` is
/// the generator picked by `kind`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ControlTerm<T> {
    pub kind: ControlKind<T>,
    pub qubit: QubitIndex,
    /// Second qubit of a pushing gate.
    pub partner: Option<QubitIndex>,
    pub strength: T,
}

/// Hamiltonian of a term, in a form the dense integrator can apply locally.
#[derive(Clone, Copy, Debug)]
pub(crate) enum LocalGenerator<T> {
    Single(QubitIndex, Mat2<T>),
    Diagonal(QubitIndex, QubitIndex, [T; 4]),
}

impl<T: Real> ControlTerm<T> {
    pub fn x(qubit: QubitIndex, strength: T) -> Self {
        Self::single(ControlKind::XRotation, qubit, strength)
    }

    pub fn z(qubit: QubitIndex, strength: T) -> Self {
        Self::single(ControlKind::ZRotation, qubit, strength)
    }

    pub fn hadamard(qubit: QubitIndex, strength: T) -> Self {
        Self::single(ControlKind::Hadamard, qubit, strength)
    }

    /// Pushing gate whose full-step action is `exp(−i·α_ab)` on `|ab⟩`.
    pub fn pushing(i: QubitIndex, j: QubitIndex, alphas: [T; 4]) -> Self {
        ControlTerm {
            kind: ControlKind::Pushing { alphas },
            qubit: i,
            partner: Some(j),
            strength: T::one(),
        }
    }

    fn single(kind: ControlKind<T>, qubit: QubitIndex, strength: T) -> Self {
        ControlTerm {
            kind,
            qubit,
            partner: None,
            strength,
        }
    }

    pub fn qubits(&self) -> impl Iterator<Item = QubitIndex> {
        std::iter::once(self.qubit).chain(self.partner)
    }

    /// The term's Hamiltonian (angular rate, τ = 1).
    pub(crate) fn generator(&self) -> LocalGenerator<T> {
        let s = self.strength;
        match self.kind {
            ControlKind::XRotation => LocalGenerator::Single(self.qubit, scale(Mat2::pauli_x(), s)),
            ControlKind::ZRotation => LocalGenerator::Single(self.qubit, scale(Mat2::pauli_z(), s)),
            ControlKind::Hadamard => LocalGenerator::Single(self.qubit, scale(Mat2::hadamard(), s)),
            ControlKind::Pushing { alphas } => LocalGenerator::Diagonal(
                self.qubit,
                self.partner.expect("pushing gate has two qubits"),
                alphas.map(|a| a * s),
            ),
        }
    }

    /// Applies the term's evolution for `fraction` of a step.
    pub fn apply(&self, state: &mut StateVector<T>, fraction: T) {
        let angle = self.strength * fraction;
        match self.kind {
            ControlKind::XRotation => {
                state.apply_single_qubit(self.qubit, &Mat2::exp_involutory(&Mat2::pauli_x(), angle))
            }
            ControlKind::ZRotation => {
                state.apply_single_qubit(self.qubit, &Mat2::exp_involutory(&Mat2::pauli_z(), angle))
            }
            ControlKind::Hadamard => {
                state.apply_single_qubit(self.qubit, &Mat2::exp_involutory(&Mat2::hadamard(), angle))
            }
            ControlKind::Pushing { alphas } => {
                let factors = alphas.map(|a| phase_factor(a * angle));
                let partner = self.partner.expect("pushing gate has two qubits");
                state.apply_two_qubit_diagonal(self.qubit, partner, &factors);
            }
        }
    }

    pub(crate) fn shifted(&self, delta: T) -> Self {
        let mut t = *self;
        match &mut t.kind {
            ControlKind::Pushing { alphas } => {
                alphas[3] += delta;
            }
            _ => t.strength += delta,
        }
        t
    }
}

fn scale<T: Real>(m: Mat2<T>, s: T) -> Mat2<T> {
    Mat2(m.0.map(|row| row.map(|z| z * s)))
}

impl<T: Real> fmt::Display for ControlTerm<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ControlKind::XRotation => write!(f, "X{}({:.4})", self.qubit, self.strength),
            ControlKind::ZRotation => write!(f, "Z{}({:.4})", self.qubit, self.strength),
            ControlKind::Hadamard => write!(f, "H{}({:.4})", self.qubit, self.strength),
            ControlKind::Pushing { alphas } => write!(
                f,
                "P[{},{}]({:.4},{:.4},{:.4},{:.4})",
                self.qubit,
                self.partner.expect("pushing gate has two qubits"),
                alphas[0] * self.strength,
                alphas[1] * self.strength,
                alphas[2] * self.strength,
                alphas[3] * self.strength
            ),
        }
    }
}
