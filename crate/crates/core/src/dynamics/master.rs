use super::trajectory::Simulation;
use crate::compiler::{Correction, LocalGenerator, Step};
use crate::error::{Error, Result};
use crate::qstate::{DensityMatrix, QubitIndex};
use crate::scalar::{Real, C};

/// Most negative eigenvalue accepted at the end of a round.
const POSITIVITY_TOL: f64 = 1e-6;
/// Largest accepted trace drift at the end of a round.
const TRACE_TOL: f64 = 1e-8;

/// Deterministic Liouville evolution of a density matrix through a schedule.
///
/// Each step is integrated with classical RK4 at `τ / oracle_steps`. The
/// hot dissipator is `γ_h Σ_q (X_q ρ X_q − ρ)`; during cooling windows each
/// ancilla also sees `A D[σ₋] + B D[σ₊]`. A measurement marker dephases in
/// the measured basis at the end of its step and a correction marker
/// applies the conditional flips as a permutation at the start of its step.
pub struct MasterEquation<'a, T> {
    sim: &'a Simulation<T>,
    dim: usize,
    ancilla_masks: Vec<usize>,
    scratch: [Vec<C<T>>; 5],
}

impl<'a, T: Real> MasterEquation<'a, T> {
    pub fn new(sim: &'a Simulation<T>) -> Self {
        let n = sim.register.n_qubits();
        let dim = 1usize << n;
        let z = vec![C::new(T::zero(), T::zero()); dim * dim];
        MasterEquation {
            sim,
            dim,
            ancilla_masks: sim.register.ancillas().iter().map(|q| q.mask(n)).collect(),
            scratch: [z.clone(), z.clone(), z.clone(), z.clone(), z],
        }
    }

    fn check(&self, rho: &DensityMatrix<T>) -> Result<()> {
        if rho.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: rho.dim(),
            });
        }
        Ok(())
    }

    /// Evolves `rho` through `rounds` rounds; `observer(round, step, ρ)`
    /// sees the state after every step.
    pub fn evolve(
        &mut self,
        rho: &DensityMatrix<T>,
        rounds: usize,
        observer: &mut dyn FnMut(usize, usize, &DensityMatrix<T>),
    ) -> Result<DensityMatrix<T>> {
        self.check(rho)?;
        let n = self.sim.register.n_qubits();
        let mut x = rho.elements().to_vec();
        for round in 0..rounds {
            for (i, step) in self.sim.schedule.steps().iter().enumerate() {
                self.step(&mut x, step)?;
                observer(round, i, &DensityMatrix::from_raw(n, x.clone()));
            }
            let out = DensityMatrix::from_raw(n, x.clone());
            let drift = (out.trace().re - T::one()).abs();
            if drift > T::tol(TRACE_TOL) {
                return Err(Error::NotNormalized(drift.as_f64()));
            }
            let min = out.eigenvalues()?[0];
            if min < -T::lit(POSITIVITY_TOL) {
                return Err(Error::NegativeEigenvalue(min.as_f64()));
            }
        }
        Ok(DensityMatrix::from_raw(n, x))
    }

    /// One protocol step applied in place to a row-major buffer.
    pub fn step(&mut self, x: &mut Vec<C<T>>, step: &Step<T>) -> Result<()> {
        if let Some(corr) = &step.correction {
            self.permute(x, corr);
        }
        let cooling = self.sim.noise.cooling_active(step.cooling);
        let gens: Vec<LocalGenerator<T>> = step.terms.iter().map(|t| t.generator()).collect();
        let m = self.sim.config.oracle_steps;
        let h = T::one() / T::lit(m as f64);
        for _ in 0..m {
            self.rk4(x, &gens, cooling, h);
        }
        if let Some(meas) = &step.measurement {
            self.dephase(x, &meas.qubits);
        }
        Ok(())
    }

    fn rk4(&mut self, x: &mut [C<T>], gens: &[LocalGenerator<T>], cooling: bool, h: T) {
        let [k1, k2, k3, k4, tmp] = &mut self.scratch;
        let half = h * T::lit(0.5);
        let sixth = h / T::lit(6.0);
        rhs(self.sim, self.dim, &self.ancilla_masks, gens, cooling, x, k1);
        axpy(tmp, x, half, k1);
        rhs(self.sim, self.dim, &self.ancilla_masks, gens, cooling, tmp, k2);
        axpy(tmp, x, half, k2);
        rhs(self.sim, self.dim, &self.ancilla_masks, gens, cooling, tmp, k3);
        axpy(tmp, x, h, k3);
        rhs(self.sim, self.dim, &self.ancilla_masks, gens, cooling, tmp, k4);
        let two = T::lit(2.0);
        for i in 0..x.len() {
            x[i] += (k1[i] + k2[i] * two + k3[i] * two + k4[i]) * sixth;
        }
    }

    fn dephase(&self, x: &mut [C<T>], qubits: &[QubitIndex]) {
        let n = self.sim.register.n_qubits();
        let mask: usize = qubits.iter().map(|q| q.mask(n)).sum();
        let d = self.dim;
        for r in 0..d {
            for c in 0..d {
                if (r ^ c) & mask != 0 {
                    x[r * d + c] = C::new(T::zero(), T::zero());
                }
            }
        }
    }

    fn permute(&mut self, x: &mut Vec<C<T>>, corr: &Correction) {
        let n = self.sim.register.n_qubits();
        let d = self.dim;
        let p: Vec<usize> = (0..d).map(|i| corr.permute_index(i, n)).collect();
        let out = &mut self.scratch[4];
        for r in 0..d {
            for c in 0..d {
                out[p[r] * d + p[c]] = x[r * d + c];
            }
        }
        std::mem::swap(x, out);
    }
}

/// `out = x + a·k`
fn axpy<T: Real>(out: &mut [C<T>], x: &[C<T>], a: T, k: &[C<T>]) {
    for i in 0..out.len() {
        out[i] = x[i] + k[i] * a;
    }
}

fn rhs<T: Real>(
    sim: &Simulation<T>,
    d: usize,
    ancilla_masks: &[usize],
    gens: &[LocalGenerator<T>],
    cooling: bool,
    x: &[C<T>],
    out: &mut [C<T>],
) {
    let n = sim.register.n_qubits();
    let zero = C::new(T::zero(), T::zero());
    let mi = C::new(T::zero(), -T::one());
    out.iter_mut().for_each(|z| *z = zero);

    for g in gens {
        match g {
            LocalGenerator::Single(q, m) => {
                let b = q.mask(n);
                let g = m.0;
                for r0 in (0..d).filter(|r| r & b == 0) {
                    let r1 = r0 | b;
                    for c in 0..d {
                        let (x0, x1) = (x[r0 * d + c], x[r1 * d + c]);
                        out[r0 * d + c] += mi * (g[0][0] * x0 + g[0][1] * x1);
                        out[r1 * d + c] += mi * (g[1][0] * x0 + g[1][1] * x1);
                    }
                }
                for r in 0..d {
                    for c0 in (0..d).filter(|c| c & b == 0) {
                        let c1 = c0 | b;
                        let (x0, x1) = (x[r * d + c0], x[r * d + c1]);
                        out[r * d + c0] -= mi * (x0 * g[0][0] + x1 * g[1][0]);
                        out[r * d + c1] -= mi * (x0 * g[0][1] + x1 * g[1][1]);
                    }
                }
            }
            LocalGenerator::Diagonal(i, j, alphas) => {
                let (bi, bj) = (i.mask(n), j.mask(n));
                let h = |k: usize| alphas[(usize::from(k & bi != 0) << 1) | usize::from(k & bj != 0)];
                for r in 0..d {
                    let hr = h(r);
                    for c in 0..d {
                        out[r * d + c] += mi * x[r * d + c] * (hr - h(c));
                    }
                }
            }
        }
    }

    let gh = sim.noise.gamma_h;
    if gh > T::zero() {
        for q in 0..n {
            let b = QubitIndex(q).mask(n);
            for r in 0..d {
                for c in 0..d {
                    out[r * d + c] += (x[(r ^ b) * d + (c ^ b)] - x[r * d + c]) * gh;
                }
            }
        }
    }

    if cooling {
        let a = sim.noise.decay_rate();
        let bb = sim.noise.excitation_rate();
        let half = T::lit(0.5);
        for &m in ancilla_masks {
            for r in 0..d {
                let nr = r & m != 0;
                for c in 0..d {
                    let nc = c & m != 0;
                    let k = r * d + c;
                    let mut v = zero;
                    match (nr, nc) {
                        (false, false) => v += x[(r | m) * d + (c | m)] * a,
                        (true, true) => v += x[(r ^ m) * d + (c ^ m)] * bb,
                        _ => {}
                    }
                    let occ = T::lit(f64::from(u8::from(nr) + u8::from(nc)));
                    let emp = T::lit(2.0) - occ;
                    v -= x[k] * (half * (a * occ + bb * emp));
                    out[k] += v;
                }
            }
        }
    }
}

/// Convenience wrapper returning the state after every step.
pub fn evolve_master_equation<T: Real>(
    sim: &Simulation<T>,
    rho: &DensityMatrix<T>,
    rounds: usize,
) -> Result<Vec<DensityMatrix<T>>> {
    let mut series = Vec::with_capacity(rounds * sim.steps_per_round());
    MasterEquation::new(sim).evolve(rho, rounds, &mut |_, _, r| series.push(r.clone()))?;
    Ok(series)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::{GateSchedule, Protocol};
    use crate::dynamics::{NoiseParams, SimConfig};
    use crate::qstate::{Register, StateVector};

    fn idle(steps: usize, cooling: bool, reg: Register, noise: NoiseParams<f64>) -> Simulation<f64> {
        let mut s = GateSchedule::new();
        for _ in 0..steps {
            s.push(Step { cooling, ..Step::idle("idle") }).unwrap();
        }
        Simulation::new(s, reg, noise, SimConfig::default()).unwrap()
    }

    // τ/200 leaves a few 1e-8 of RK4 error over a gate block; τ/400 cuts it 16-fold
    fn fine_oracle() -> SimConfig {
        SimConfig {
            oracle_steps: 400,
            ..SimConfig::default()
        }
    }

    #[test]
    fn rk4_error_is_fourth_order() {
        let reg = Register::MEASURED;
        let block = crate::compiler::measured_syndrome_block::<f64>(reg).unwrap();
        let gap = |m| {
            let cfg = SimConfig {
                oracle_steps: m,
                ..SimConfig::default()
            };
            unitary_gap(&Simulation::new(block.clone(), reg, NoiseParams::noiseless(), cfg).unwrap())
        };
        let ratio = gap(100) / gap(200);
        assert!((ratio - 16.0).abs() < 2.0, "{ratio}");
    }

    fn unitary_gap(sim: &Simulation<f64>) -> f64 {
        let n = sim.register.n_qubits();
        let mut psi = StateVector::<f64>::zero(n).unwrap();
        psi.apply_single_qubit_unitary(QubitIndex(0), &crate::qstate::Mat2::hadamard()).unwrap();
        psi.apply_x(QubitIndex(2));
        let out = MasterEquation::new(sim)
            .evolve(&psi.to_density(), 1, &mut |_, _, _| {})
            .unwrap();
        let want = sim.schedule.full_unitary(n).unwrap().apply(&psi).unwrap().to_density();
        out.trace_distance(&want).unwrap()
    }

    #[test]
    fn unitary_limit_of_measured_prefix() {
        let full = Protocol::Measured.build::<f64>().unwrap();
        let mut prefix = GateSchedule::new();
        for step in &full.steps()[..full.unitary_prefix_len()] {
            prefix.push(Step { measurement: None, ..step.clone() }).unwrap();
        }
        let sim = Simulation::new(prefix, Register::MEASURED, NoiseParams::noiseless(), fine_oracle()).unwrap();
        let gap = unitary_gap(&sim);
        assert!(gap < 1e-8, "{gap}");
    }

    #[test]
    fn unitary_limit_of_measurement_free_round() {
        let sim =
            Simulation::for_protocol(Protocol::MeasurementFree, NoiseParams::noiseless(), fine_oracle()).unwrap();
        let gap = unitary_gap(&sim);
        assert!(gap < 1e-8, "{gap}");
    }

    #[test]
    fn bit_flip_channel_relaxes_at_twice_the_rate() {
        let g = 0.05;
        let reg = Register { n_data: 1, n_ancilla: 0 };
        let sim = idle(10, false, reg, NoiseParams::new(g, 0.0, 0.0).unwrap());
        let plus = StateVector::from_amplitudes(
            1,
            vec![C::new(0.6, 0.0), C::new(0.0, 0.8)],
        )
        .unwrap();
        let series = evolve_master_equation(&sim, &plus.to_density(), 1).unwrap();
        for (k, rho) in series.iter().enumerate() {
            let t = (k + 1) as f64;
            let decay = (-2.0 * g * t).exp();
            let p1 = 0.5 + 0.5 * (0.64 - 0.36) * decay;
            assert!((rho.population(1) - p1).abs() < 1e-12);
            // the real part of ρ01 is preserved by σ_x; the imaginary part decays
            let c = rho.get(0, 1);
            assert!((c.im - (-0.48) * decay).abs() < 1e-12, "{c}");
            assert!(c.re.abs() < 1e-12);
        }
    }

    #[test]
    fn cooling_reaches_detailed_balance() {
        let nc = 0.2;
        let reg = Register { n_data: 0, n_ancilla: 1 };
        let sim = idle(6, true, reg, NoiseParams::new(0.0, 3.0, nc).unwrap());
        let series = evolve_master_equation(&sim, &DensityMatrix::maximally_mixed(1), 1).unwrap();
        let last = series.last().unwrap();
        assert!((last.population(1) - nc / (2.0 * nc + 1.0)).abs() < 1e-10);
    }

    #[test]
    fn measured_round_preserves_trace_and_hermiticity() {
        let noise = NoiseParams::new(1e-2, 3.0, 1e-2).unwrap();
        let sim = Simulation::for_protocol(Protocol::Measured, noise, SimConfig::default()).unwrap();
        let rho = sim.ground_state().unwrap().to_density();
        let out = MasterEquation::new(&sim).evolve(&rho, 1, &mut |_, _, r: &DensityMatrix<f64>| {
            assert!((r.trace().re - 1.0).abs() < 1e-8);
            assert!(r.hermiticity_deviation() < 1e-12);
        });
        assert!(out.is_ok());
    }
}
