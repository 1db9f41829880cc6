use std::fmt;

use crate::error::{Error, Result};

/// Position of a qubit in the register.
///
/// Qubit 0 is the most significant bit of a basis-state index, so in a
/// six-qubit register `|100000⟩` has index 32.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QubitIndex(pub usize);

impl QubitIndex {
    #[inline]
    pub fn mask(self, n_qubits: usize) -> usize {
        1 << (n_qubits - 1 - self.0)
    }
}

impl From<usize> for QubitIndex {
    fn from(v: usize) -> Self {
        QubitIndex(v)
    }
}

impl fmt::Display for QubitIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    Data,
    Ancilla,
}

/// Data qubits occupy the low indices, ancillas the rest.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Register {
    pub n_data: usize,
    pub n_ancilla: usize,
}

impl Register {
    /// Three data qubits and three ancillas.
    pub const MEASURED: Register = Register { n_data: 3, n_ancilla: 3 };
    /// Three data qubits and two ancillas.
    pub const MEASUREMENT_FREE: Register = Register { n_data: 3, n_ancilla: 2 };

    pub fn n_qubits(&self) -> usize {
        self.n_data + self.n_ancilla
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits()
    }

    pub fn data(&self) -> Vec<QubitIndex> {
        (0..self.n_data).map(QubitIndex).collect()
    }

    pub fn ancillas(&self) -> Vec<QubitIndex> {
        (self.n_data..self.n_qubits()).map(QubitIndex).collect()
    }

    pub fn data_qubit(&self, k: usize) -> QubitIndex {
        assert!(k < self.n_data);
        QubitIndex(k)
    }

    pub fn ancilla(&self, k: usize) -> QubitIndex {
        assert!(k < self.n_ancilla);
        QubitIndex(self.n_data + k)
    }

    pub fn role(&self, q: QubitIndex) -> Result<Role> {
        check_qubit(q, self.n_qubits())?;
        Ok(if q.0 < self.n_data {
            Role::Data
        } else {
            Role::Ancilla
        })
    }
}

pub(crate) fn check_qubit(q: QubitIndex, n_qubits: usize) -> Result<()> {
    if q.0 >= n_qubits {
        return Err(Error::QubitOutOfRange {
            index: q.0,
            n_qubits,
        });
    }
    Ok(())
}

pub(crate) fn check_distinct(qubits: &[QubitIndex], n_qubits: usize) -> Result<()> {
    if qubits.is_empty() {
        return Err(Error::EmptySelection);
    }
    let mut seen = 0usize;
    for &q in qubits {
        check_qubit(q, n_qubits)?;
        let bit = 1 << q.0;
        if seen & bit != 0 {
            return Err(Error::RepeatedQubit(q.0));
        }
        seen |= bit;
    }
    Ok(())
}
