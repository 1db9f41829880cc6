use rand::Rng;

use super::density::DensityMatrix;
use super::ops::Mat2;
use super::register::{check_distinct, check_qubit, QubitIndex};
use crate::error::{Error, Result};
use crate::scalar::{phase_factor, Real, C};

/// Largest register this crate simulates.
pub const MAX_QUBITS: usize = 7;

/// Normalized pure state of an `n`-qubit register.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector<T> {
    n_qubits: usize,
    amps: Vec<C<T>>,
}

/// Result of a projective measurement of a subset of qubits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Outcome<T> {
    /// Measured bits, first requested qubit as the most significant bit.
    pub bits: usize,
    /// Born probability of `bits` before collapse.
    pub probability: T,
}

fn check_register(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(Error::InvalidParameter(format!(
            "register of {n_qubits} qubits (supported: 1..={MAX_QUBITS})"
        )));
    }
    Ok(())
}

impl<T: Real> StateVector<T> {
    /// Computational basis state `|index⟩`.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        check_register(n_qubits)?;
        let dim = 1 << n_qubits;
        if index >= dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: index,
            });
        }
        let mut amps = vec![C::new(T::zero(), T::zero()); dim];
        amps[index] = C::new(T::one(), T::zero());
        Ok(StateVector { n_qubits, amps })
    }

    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0)
    }

    /// Wraps amplitudes that must already be normalized.
    pub fn from_amplitudes(n_qubits: usize, amps: Vec<C<T>>) -> Result<Self> {
        check_register(n_qubits)?;
        if amps.len() != 1 << n_qubits {
            return Err(Error::DimensionMismatch {
                expected: 1 << n_qubits,
                got: amps.len(),
            });
        }
        let s = StateVector { n_qubits, amps };
        let n2 = s.norm_sqr();
        if (n2 - T::one()).abs() > T::tol(1e-12) {
            return Err(Error::NotNormalized(n2.as_f64()));
        }
        Ok(s)
    }

    /// Normalizes arbitrary nonzero amplitudes.
    pub fn from_unnormalized(n_qubits: usize, amps: Vec<C<T>>) -> Result<Self> {
        check_register(n_qubits)?;
        if amps.len() != 1 << n_qubits {
            return Err(Error::DimensionMismatch {
                expected: 1 << n_qubits,
                got: amps.len(),
            });
        }
        let mut s = StateVector { n_qubits, amps };
        s.normalize()?;
        Ok(s)
    }

    #[inline]
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    #[inline]
    pub fn amplitudes(&self) -> &[C<T>] {
        &self.amps
    }

    #[inline]
    pub(crate) fn amplitudes_mut(&mut self) -> &mut [C<T>] {
        &mut self.amps
    }

    pub fn norm_sqr(&self) -> T {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n2 = self.norm_sqr();
        if !(n2 > T::min_positive_value()) || !n2.is_finite() {
            return Err(Error::VanishingState(n2.as_f64()));
        }
        let inv = T::one() / n2.sqrt();
        for a in &mut self.amps {
            *a = *a * inv;
        }
        Ok(())
    }

    /// Applies `I⊗…⊗u⊗…⊗I` with `u` on qubit `q`, after checking unitarity.
    pub fn apply_single_qubit_unitary(&mut self, q: QubitIndex, u: &Mat2<T>) -> Result<()> {
        check_qubit(q, self.n_qubits)?;
        let dev = u.unitarity_deviation();
        if dev > T::tol(1e-12) {
            return Err(Error::NotUnitary(dev.as_f64()));
        }
        self.apply_single_qubit(q, u);
        Ok(())
    }

    /// Applies any 2×2 operator on `q` without checks; the result is not
    /// renormalized.
    pub(crate) fn apply_single_qubit(&mut self, q: QubitIndex, u: &Mat2<T>) {
        let mask = q.mask(self.n_qubits);
        let m = &u.0;
        for i0 in 0..self.amps.len() {
            if i0 & mask != 0 {
                continue;
            }
            let i1 = i0 | mask;
            let a0 = self.amps[i0];
            let a1 = self.amps[i1];
            self.amps[i0] = m[0][0] * a0 + m[0][1] * a1;
            self.amps[i1] = m[1][0] * a0 + m[1][1] * a1;
        }
    }

    /// Bit flip on `q`.
    pub fn apply_x(&mut self, q: QubitIndex) {
        let mask = q.mask(self.n_qubits);
        for i0 in 0..self.amps.len() {
            if i0 & mask == 0 {
                self.amps.swap(i0, i0 | mask);
            }
        }
    }

    /// Multiplies every amplitude by `exp(-i·α_ab)`, where `a`, `b` are the
    /// bits of qubits `i` and `j`.
    pub fn apply_two_qubit_phase(&mut self, i: QubitIndex, j: QubitIndex, alphas: [T; 4]) -> Result<()> {
        check_distinct(&[i, j], self.n_qubits)?;
        let factors = alphas.map(phase_factor);
        self.apply_two_qubit_diagonal(i, j, &factors);
        Ok(())
    }

    pub(crate) fn apply_two_qubit_diagonal(&mut self, i: QubitIndex, j: QubitIndex, factors: &[C<T>; 4]) {
        let mi = i.mask(self.n_qubits);
        let mj = j.mask(self.n_qubits);
        for (idx, a) in self.amps.iter_mut().enumerate() {
            let k = (usize::from(idx & mi != 0) << 1) | usize::from(idx & mj != 0);
            *a = *a * factors[k];
        }
    }

    /// Probability that qubit `q` reads 1.
    pub fn excited_probability(&self, q: QubitIndex) -> T {
        let mask = q.mask(self.n_qubits);
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    fn pattern(&self, index: usize, qubits: &[QubitIndex]) -> usize {
        qubits.iter().fold(0, |acc, q| {
            (acc << 1) | usize::from(index & q.mask(self.n_qubits) != 0)
        })
    }

    /// Born probabilities of every bit pattern of `qubits`.
    pub fn outcome_probabilities(&self, qubits: &[QubitIndex]) -> Result<Vec<T>> {
        check_distinct(qubits, self.n_qubits)?;
        let mut p = vec![T::zero(); 1 << qubits.len()];
        for (idx, a) in self.amps.iter().enumerate() {
            p[self.pattern(idx, qubits)] += a.norm_sqr();
        }
        Ok(p)
    }

    /// Samples a projective measurement of `qubits` and collapses the state.
    pub fn measure_qubits_projective<R: Rng + ?Sized>(
        &mut self,
        qubits: &[QubitIndex],
        rng: &mut R,
    ) -> Result<Outcome<T>> {
        let probs = self.outcome_probabilities(qubits)?;
        let total: T = probs.iter().copied().sum();
        if total < T::lit(1e-14) {
            return Err(Error::VanishingState(total.as_f64()));
        }
        let u = T::lit(rng.gen::<f64>()) * total;
        let mut acc = T::zero();
        let mut bits = probs.len() - 1;
        for (k, &p) in probs.iter().enumerate() {
            acc += p;
            if u < acc && p > T::zero() {
                bits = k;
                break;
            }
        }
        // guard against landing on a zero-weight tail through rounding
        while probs[bits] <= T::zero() {
            bits -= 1;
        }
        self.project(qubits, bits)?;
        Ok(Outcome {
            bits,
            probability: probs[bits] / total,
        })
    }

    /// Projects onto a fixed outcome and renormalizes.
    pub fn project(&mut self, qubits: &[QubitIndex], bits: usize) -> Result<()> {
        check_distinct(qubits, self.n_qubits)?;
        for idx in 0..self.amps.len() {
            if self.pattern(idx, qubits) != bits {
                self.amps[idx] = C::new(T::zero(), T::zero());
            }
        }
        self.normalize()
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &Self) -> Result<C<T>> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .fold(C::new(T::zero(), T::zero()), |acc, (a, b)| acc + a.conj() * b))
    }

    /// `|⟨self|other⟩|²`
    pub fn overlap_sqr(&self, other: &Self) -> Result<T> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Tensor product, `self` on the leading (more significant) qubits.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let n = self.n_qubits + other.n_qubits;
        check_register(n)?;
        let mut amps = Vec::with_capacity(1 << n);
        for a in &self.amps {
            for b in &other.amps {
                amps.push(*a * *b);
            }
        }
        Ok(StateVector { n_qubits: n, amps })
    }

    pub fn to_density(&self) -> DensityMatrix<T> {
        DensityMatrix::from_pure(self)
    }

    /// Reduced density matrix of `keep` (in the given order), computed
    /// directly from the amplitudes.
    pub fn reduced_density(&self, keep: &[QubitIndex]) -> Result<DensityMatrix<T>> {
        check_distinct(keep, self.n_qubits)?;
        let k = keep.len();
        let dk = 1 << k;
        let mut out = vec![C::new(T::zero(), T::zero()); dk * dk];
        self.accumulate_reduced(keep, T::one(), &mut out);
        Ok(DensityMatrix::from_raw(k, out))
    }

    /// Adds `weight·tr_rest |ψ⟩⟨ψ|` into a row-major buffer over `keep`.
    pub(crate) fn accumulate_reduced(&self, keep: &[QubitIndex], weight: T, out: &mut [C<T>]) {
        let n = self.n_qubits;
        let dk = 1usize << keep.len();
        let keep_mask: usize = keep.iter().map(|q| q.mask(n)).sum();
        let rest: Vec<usize> = (0..n)
            .map(|q| QubitIndex(q).mask(n))
            .filter(|m| keep_mask & m == 0)
            .collect();
        // basis index of each kept pattern with the traced qubits at zero
        let base: Vec<usize> = (0..dk)
            .map(|p| {
                keep.iter().enumerate().fold(0, |acc, (pos, q)| {
                    if p & (1 << (keep.len() - 1 - pos)) != 0 {
                        acc | q.mask(n)
                    } else {
                        acc
                    }
                })
            })
            .collect();
        for env in 0..(1usize << rest.len()) {
            let off = rest.iter().enumerate().fold(0, |acc, (pos, m)| {
                if env & (1 << pos) != 0 {
                    acc | m
                } else {
                    acc
                }
            });
            for r in 0..dk {
                let ar = self.amps[base[r] | off];
                if ar.norm_sqr() == T::zero() {
                    continue;
                }
                let ar = ar * weight;
                for c in 0..dk {
                    out[r * dk + c] += ar * self.amps[base[c] | off].conj();
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

    fn c(re: f64, im: f64) -> C<f64> {
        C::new(re, im)
    }

    fn bell() -> StateVector<f64> {
        StateVector::from_amplitudes(2, vec![c(FRAC_1_SQRT_2, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(FRAC_1_SQRT_2, 0.0)])
            .unwrap()
    }

    #[test]
    fn identity_leaves_state_unchanged() {
        let mut s = bell();
        let before = s.clone();
        s.apply_single_qubit_unitary(QubitIndex(1), &Mat2::identity()).unwrap();
        assert_eq!(s, before);
    }

    #[test]
    fn x_on_qubit_zero_sets_the_leading_bit() {
        let mut s = StateVector::<f64>::zero(6).unwrap();
        s.apply_single_qubit_unitary(QubitIndex(0), &Mat2::pauli_x()).unwrap();
        assert_eq!(s.amplitudes()[0b100000], c(1.0, 0.0));
    }

    #[test]
    fn hadamard_on_zero() {
        let mut s = StateVector::<f64>::zero(1).unwrap();
        s.apply_single_qubit_unitary(QubitIndex(0), &Mat2::hadamard()).unwrap();
        for a in s.amplitudes() {
            assert!((a - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn non_unitary_and_out_of_range_rejected() {
        let mut s = StateVector::<f64>::zero(2).unwrap();
        assert!(matches!(
            s.apply_single_qubit_unitary(QubitIndex(0), &Mat2::lowering()),
            Err(Error::NotUnitary(_))
        ));
        assert!(matches!(
            s.apply_single_qubit_unitary(QubitIndex(2), &Mat2::pauli_x()),
            Err(Error::QubitOutOfRange { .. })
        ));
        assert!(StateVector::<f64>::from_amplitudes(2, vec![c(1.0, 0.0); 3]).is_err());
    }

    #[test]
    fn phase_gate_cases() {
        let mut s = bell();
        let before = s.clone();
        s.apply_two_qubit_phase(QubitIndex(0), QubitIndex(1), [0.0; 4]).unwrap();
        assert_eq!(s, before);

        s.apply_two_qubit_phase(QubitIndex(0), QubitIndex(1), [0.0, 0.0, 0.0, PI]).unwrap();
        assert!((s.amplitudes()[3] - c(-FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        assert!((s.amplitudes()[0] - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);

        let mut g = bell();
        g.apply_two_qubit_phase(QubitIndex(0), QubitIndex(1), [FRAC_PI_2; 4]).unwrap();
        // a uniform phase of π/2 is the global factor -i
        assert!((g.amplitudes()[0] - c(0.0, -FRAC_1_SQRT_2)).norm() < 1e-15);
        assert!((g.overlap_sqr(&before).unwrap() - 1.0).abs() < 1e-15);

        assert!(matches!(
            g.apply_two_qubit_phase(QubitIndex(1), QubitIndex(1), [0.0; 4]),
            Err(Error::RepeatedQubit(1))
        ));
    }

    #[test]
    fn measuring_an_eigenstate_is_certain() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut s = StateVector::<f64>::basis(3, 0b011).unwrap();
        let out = s.measure_qubits_projective(&[QubitIndex(0)], &mut rng).unwrap();
        assert_eq!(out.bits, 0);
        assert_eq!(out.probability, 1.0);
    }

    #[test]
    fn bell_statistics() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let trials = 4000;
        let mut counts = [0usize; 4];
        for _ in 0..trials {
            let mut s = bell();
            let out = s
                .measure_qubits_projective(&[QubitIndex(0), QubitIndex(1)], &mut rng)
                .unwrap();
            assert!((out.probability - 0.5).abs() < 1e-12);
            counts[out.bits] += 1;
        }
        assert_eq!(counts[1] + counts[2], 0);
        // χ² with one degree of freedom, 99.9% quantile 10.83
        let e = trials as f64 / 2.0;
        let chi2 = (counts[0] as f64 - e).powi(2) / e + (counts[3] as f64 - e).powi(2) / e;
        assert!(chi2 < 10.83, "chi2 = {chi2}");
    }

    #[test]
    fn ancilla_frequencies_follow_born_weights() {
        // six qubits; amplitude table spread over ancilla patterns
        let weights = [0.30, 0.05, 0.10, 0.15, 0.02, 0.08, 0.20, 0.10];
        let mut amps = vec![c(0.0, 0.0); 64];
        for (pat, w) in weights.iter().enumerate() {
            // split each ancilla pattern's weight over two data configurations
            amps[pat] = c((w * 0.25_f64).sqrt(), 0.0);
            amps[(0b101 << 3) | pat] = c(0.0, (w * 0.75_f64).sqrt());
        }
        let state = StateVector::from_amplitudes(6, amps).unwrap();
        let anc = [QubitIndex(3), QubitIndex(4), QubitIndex(5)];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 20000;
        let mut counts = [0usize; 8];
        for _ in 0..n {
            let mut s = state.clone();
            let o = s.measure_qubits_projective(&anc, &mut rng).unwrap();
            assert!((o.probability - weights[o.bits]).abs() < 1e-12);
            assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
            counts[o.bits] += 1;
        }
        for (k, w) in weights.iter().enumerate() {
            let f = counts[k] as f64 / n as f64;
            let sigma = (w * (1.0 - w) / n as f64).sqrt();
            assert!((f - w).abs() < 3.0 * sigma + 1e-12, "pattern {k}: {f} vs {w}");
        }
    }

    #[test]
    fn reduced_density_of_bell_is_maximally_mixed() {
        let r = bell().reduced_density(&[QubitIndex(0)]).unwrap();
        assert!((r.get(0, 0).re - 0.5).abs() < 1e-15);
        assert!((r.get(1, 1).re - 0.5).abs() < 1e-15);
        assert!(r.get(0, 1).norm() < 1e-15);
    }
}
