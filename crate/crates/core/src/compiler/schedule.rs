use std::fmt;
use std::ops::Range;

use super::term::{ControlKind, ControlTerm};
use crate::error::{Error, Result};
use crate::qstate::register::check_qubit;
use crate::qstate::{QubitIndex, StateVector, MAX_QUBITS};
use crate::scalar::{Real, C};

/// Projective measurement performed at the end of a step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Measurement {
    pub qubits: Vec<QubitIndex>,
}

/// Classically controlled bit flips applied at the start of a step.
///
/// `flips[m]` lists the qubits flipped when the most recent measurement
/// returned the pattern `m` (first measured qubit as the most significant
/// bit). Because the measured qubits sit in a basis state at that point,
/// the rule is equivalent to the permutation `Σ_m Π_m ⊗ X^{flips[m]}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Correction {
    pub syndrome: Vec<QubitIndex>,
    pub flips: Vec<Vec<QubitIndex>>,
}

impl Correction {
    pub fn flips_for(&self, outcome: usize) -> &[QubitIndex] {
        &self.flips[outcome]
    }

    /// Permutation of basis indices realizing the rule on an `n`-qubit register.
    pub fn permute_index(&self, index: usize, n_qubits: usize) -> usize {
        let pattern = self.syndrome.iter().fold(0, |acc, q| {
            (acc << 1) | usize::from(index & q.mask(n_qubits) != 0)
        });
        self.flips[pattern]
            .iter()
            .fold(index, |acc, q| acc ^ q.mask(n_qubits))
    }
}

/// One time step of duration τ.
#[derive(Clone, Debug, PartialEq)]
pub struct Step<T> {
    pub terms: Vec<ControlTerm<T>>,
    /// Cold-reservoir coupling `p(t) = 1` during this step.
    pub cooling: bool,
    pub correction: Option<Correction>,
    pub measurement: Option<Measurement>,
    pub label: &'static str,
}

impl<T: Real> Step<T> {
    pub fn idle(label: &'static str) -> Self {
        Step {
            terms: Vec::new(),
            cooling: false,
            correction: None,
            measurement: None,
            label,
        }
    }

    pub fn with_terms(label: &'static str, terms: Vec<ControlTerm<T>>) -> Self {
        Step {
            terms,
            ..Self::idle(label)
        }
    }

    fn check_disjoint(&self, index: usize) -> Result<()> {
        let mut seen = 0usize;
        for term in &self.terms {
            for q in term.qubits() {
                check_qubit(q, MAX_QUBITS)?;
                let bit = 1usize << q.0;
                if seen & bit != 0 {
                    return Err(Error::OverlappingTerms { step: index, qubit: q.0 });
                }
                seen |= bit;
            }
        }
        Ok(())
    }

    /// Applies every control term for `fraction` of the step. Terms act on
    /// disjoint qubits, so their order is irrelevant.
    pub fn apply_controls(&self, state: &mut StateVector<T>, fraction: T) {
        for term in &self.terms {
            term.apply(state, fraction);
        }
    }

    pub fn is_unitary_only(&self) -> bool {
        self.correction.is_none() && self.measurement.is_none()
    }
}

/// Ordered list of steps.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GateSchedule<T> {
    steps: Vec<Step<T>>,
}

impl<T: Real> GateSchedule<T> {
    pub fn new() -> Self {
        GateSchedule { steps: Vec::new() }
    }

    pub fn push(&mut self, step: Step<T>) -> Result<()> {
        step.check_disjoint(self.steps.len())?;
        self.steps.push(step);
        Ok(())
    }

    pub fn extend(&mut self, other: GateSchedule<T>) {
        self.steps.extend(other.steps);
    }

    pub fn steps(&self) -> &[Step<T>] {
        &self.steps
    }

    pub(crate) fn steps_mut(&mut self) -> &mut [Step<T>] {
        &mut self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Smallest register that contains every qubit the schedule touches.
    pub fn min_qubits(&self) -> usize {
        let mut top = 0;
        for step in &self.steps {
            for t in &step.terms {
                for q in t.qubits() {
                    top = top.max(q.0 + 1);
                }
            }
            if let Some(m) = &step.measurement {
                top = m.qubits.iter().fold(top, |a, q| a.max(q.0 + 1));
            }
            if let Some(c) = &step.correction {
                top = c.syndrome.iter().chain(c.flips.iter().flatten()).fold(top, |a, q| a.max(q.0 + 1));
            }
        }
        top
    }

    /// Index of the first step after the unitary prefix: the step following
    /// the first measurement, or the first step carrying a correction.
    pub fn unitary_prefix_len(&self) -> usize {
        for (i, s) in self.steps.iter().enumerate() {
            if s.correction.is_some() {
                return i;
            }
            if s.measurement.is_some() {
                return i + 1;
            }
        }
        self.steps.len()
    }

    /// Product of the step unitaries over `range`. A measurement is allowed
    /// only at the end of the last step of the range.
    pub fn net_unitary(&self, n_qubits: usize, range: Range<usize>) -> Result<CompiledUnitary<T>> {
        if range.end > self.steps.len() || range.start > range.end {
            return Err(Error::InvalidParameter(format!(
                "step range {range:?} outside a {}-step schedule",
                self.steps.len()
            )));
        }
        for i in range.clone() {
            let s = &self.steps[i];
            if s.correction.is_some() || (s.measurement.is_some() && i + 1 != range.end) {
                return Err(Error::MeasurementInUnitaryRange(i));
            }
        }
        let dim = 1usize << n_qubits;
        let mut data = vec![C::new(T::zero(), T::zero()); dim * dim];
        for col in 0..dim {
            let mut psi = StateVector::basis(n_qubits, col)?;
            for s in &self.steps[range.clone()] {
                s.apply_controls(&mut psi, T::one());
            }
            for (row, a) in psi.amplitudes().iter().enumerate() {
                data[row * dim + col] = *a;
            }
        }
        Ok(CompiledUnitary { n_qubits, data })
    }

    /// Net unitary of the whole schedule.
    pub fn full_unitary(&self, n_qubits: usize) -> Result<CompiledUnitary<T>> {
        self.net_unitary(n_qubits, 0..self.steps.len())
    }

    /// Copy with every control angle offset by `delta` (fault injection).
    pub fn with_angle_offset(&self, delta: T) -> Self {
        let mut out = self.clone();
        for s in &mut out.steps {
            for t in &mut s.terms {
                *t = t.shifted(delta);
            }
        }
        out
    }

    /// Reschedules a marker-free fragment as soon as possible.
    ///
    /// Consecutive full-strength Hadamard pulses on the same qubit are
    /// removed first (their product is `−I`), then every term is placed in
    /// the earliest step after the previous term on any of its qubits.
    /// Per-qubit order is preserved, so the net unitary is unchanged up to
    /// a global phase.
    pub fn compacted(&self) -> Result<Self> {
        if let Some(i) = self.steps.iter().position(|s| !s.is_unitary_only() || s.cooling) {
            return Err(Error::MeasurementInUnitaryRange(i));
        }
        let mut terms: Vec<Option<ControlTerm<T>>> =
            self.steps.iter().flat_map(|s| s.terms.iter().copied().map(Some)).collect();

        let half_pi = T::FRAC_PI_2();
        let is_full_h = |t: &ControlTerm<T>| {
            matches!(t.kind, ControlKind::Hadamard) && (t.strength - half_pi).abs() < T::tol(1e-14)
        };
        // last surviving term index per qubit
        let mut last: Vec<Option<usize>> = vec![None; MAX_QUBITS];
        for i in 0..terms.len() {
            let Some(t) = terms[i] else { continue };
            if is_full_h(&t) {
                if let Some(prev) = last[t.qubit.0] {
                    if terms[prev].as_ref().is_some_and(is_full_h) {
                        terms[prev] = None;
                        terms[i] = None;
                        // the qubit's previous survivor is unknown now; rescan
                        last[t.qubit.0] = (0..prev)
                            .rev()
                            .find(|&k| terms[k].is_some_and(|u| u.qubits().any(|q| q == t.qubit)));
                        continue;
                    }
                }
            }
            for q in t.qubits() {
                last[q.0] = Some(i);
            }
        }

        let mut busy_until: Vec<usize> = vec![0; MAX_QUBITS];
        let mut placed: Vec<Vec<ControlTerm<T>>> = Vec::new();
        for t in terms.into_iter().flatten() {
            let slot = t.qubits().map(|q| busy_until[q.0]).max().unwrap_or(0);
            if placed.len() <= slot {
                placed.resize_with(slot + 1, Vec::new);
            }
            placed[slot].push(t);
            for q in t.qubits() {
                busy_until[q.0] = slot + 1;
            }
        }
        let mut out = GateSchedule::new();
        for terms in placed {
            out.push(Step::with_terms("compacted", terms))?;
        }
        Ok(out)
    }
}

impl<T: Real> fmt::Display for GateSchedule<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.steps.iter().enumerate() {
            write!(f, "step {i:3} | {:<12} |", s.label)?;
            if s.cooling {
                write!(f, " cool")?;
            }
            if let Some(c) = &s.correction {
                let syn: Vec<String> = c.syndrome.iter().map(|q| q.to_string()).collect();
                write!(f, " correct[{}]", syn.join(","))?;
            }
            for t in &s.terms {
                write!(f, " {t}")?;
            }
            if let Some(m) = &s.measurement {
                let qs: Vec<String> = m.qubits.iter().map(|q| q.to_string()).collect();
                write!(f, " measure[{}]", qs.join(","))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Dense unitary over a full register, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CompiledUnitary<T> {
    n_qubits: usize,
    data: Vec<C<T>>,
}

impl<T: Real> CompiledUnitary<T> {
    pub fn identity(n_qubits: usize) -> Self {
        Self::permutation(n_qubits, |i| i)
    }

    /// Permutation matrix sending `|i⟩` to `|map(i)⟩`.
    pub fn permutation(n_qubits: usize, map: impl Fn(usize) -> usize) -> Self {
        let dim = 1usize << n_qubits;
        let mut data = vec![C::new(T::zero(), T::zero()); dim * dim];
        for col in 0..dim {
            data[map(col) * dim + col] = C::new(T::one(), T::zero());
        }
        CompiledUnitary { n_qubits, data }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn get(&self, r: usize, c: usize) -> C<T> {
        self.data[r * self.dim() + c]
    }

    /// `self · other` (apply `other` first).
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        let d = self.dim();
        let mut data = vec![C::new(T::zero(), T::zero()); d * d];
        for r in 0..d {
            for k in 0..d {
                let a = self.data[r * d + k];
                if a.norm_sqr() == T::zero() {
                    continue;
                }
                for c in 0..d {
                    data[r * d + c] += a * other.data[k * d + c];
                }
            }
        }
        Ok(CompiledUnitary {
            n_qubits: self.n_qubits,
            data,
        })
    }

    /// Frobenius norm of `U†U − I`.
    pub fn unitarity_deviation(&self) -> T {
        let d = self.dim();
        let mut acc = T::zero();
        for r in 0..d {
            for c in 0..d {
                let mut z = C::new(T::zero(), T::zero());
                for k in 0..d {
                    z += self.data[k * d + r].conj() * self.data[k * d + c];
                }
                if r == c {
                    z -= C::new(T::one(), T::zero());
                }
                acc += z.norm_sqr();
            }
        }
        acc.sqrt()
    }

    /// `min_φ ‖self − e^{iφ}·other‖_F`.
    pub fn phase_aligned_distance(&self, other: &Self) -> Result<T> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        let overlap = self
            .data
            .iter()
            .zip(&other.data)
            .fold(C::new(T::zero(), T::zero()), |acc, (a, b)| acc + b.conj() * a);
        // evaluate the residual directly; the closed form cancels catastrophically
        let phase = if overlap.norm() > T::zero() {
            overlap / overlap.norm()
        } else {
            C::new(T::one(), T::zero())
        };
        let sq: T = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (*a - phase * b).norm_sqr())
            .sum();
        Ok(sq.sqrt())
    }

    pub fn apply(&self, state: &StateVector<T>) -> Result<StateVector<T>> {
        if state.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: state.dim(),
            });
        }
        let d = self.dim();
        let a = state.amplitudes();
        let out = (0..d)
            .map(|r| (0..d).fold(C::new(T::zero(), T::zero()), |acc, c| acc + self.data[r * d + c] * a[c]))
            .collect();
        StateVector::from_unnormalized(self.n_qubits, out)
    }
}
