//! Per-step fidelities and entropies of an ensemble.

use crate::dynamics::EnsembleAccumulator;
use crate::error::{Error, Result};
use crate::qstate::{DensityMatrix, StateVector};
use crate::scalar::Real;

pub const CSV_HEADER: [&str; 9] = [
    "round", "step", "time", "f2_data", "f2_ancilla", "s_total", "s_data", "s_anc", "n_traj",
];

/// Metrics at the end of one step. `round` and `step` count from 1; `time`
/// is the elapsed time in units of τ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RoundMetrics<T> {
    pub round: usize,
    pub step: usize,
    pub time: T,
    pub f2_data: T,
    pub f2_ancilla: T,
    /// Entropy of the whole register, when the accumulator kept it.
    pub s_total: Option<T>,
    pub s_data: T,
    pub s_ancilla: T,
    pub n_traj: u64,
    /// Monte Carlo standard errors of the two fidelities.
    pub f2_data_err: T,
    pub f2_ancilla_err: T,
}

impl<T: Real> RoundMetrics<T> {
    /// Row in [`CSV_HEADER`] order, reals to 12 significant digits.
    pub fn csv_fields(&self) -> [String; 9] {
        [
            self.round.to_string(),
            self.step.to_string(),
            format_sig(self.time.as_f64(), 12),
            format_sig(self.f2_data.as_f64(), 12),
            format_sig(self.f2_ancilla.as_f64(), 12),
            self.s_total.map_or_else(|| "nan".to_string(), |s| format_sig(s.as_f64(), 12)),
            format_sig(self.s_data.as_f64(), 12),
            format_sig(self.s_ancilla.as_f64(), 12),
            self.n_traj.to_string(),
        ]
    }
}

/// Metrics at every sample point of `acc`, with the data fidelity taken
/// against `reference`.
pub fn compute_step_metrics<T: Real>(
    acc: &EnsembleAccumulator<T>,
    reference: &StateVector<T>,
) -> Result<Vec<RoundMetrics<T>>> {
    if acc.count() == 0 {
        return Err(Error::EmptyAccumulator);
    }
    let plan = acc.plan();
    let spr = plan.steps_per_round();
    let same_reference = reference == acc.data_reference();
    plan.points()
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let data = acc.data_density(k)?;
            let anc = acc.ancilla_density(k)?;
            let total = acc.total_density(k)?;
            let fa = acc.f2_ancilla_stats(k)?;
            let f2_data_err = if same_reference {
                acc.f2_data_stats(k)?.std_err
            } else {
                T::nan()
            };
            Ok(RoundMetrics {
                round: p.round + 1,
                step: p.step + 1,
                time: T::lit((p.round * spr + p.step + 1) as f64),
                f2_data: data.squared_fidelity(reference)?,
                f2_ancilla: anc.population(0),
                s_total: total.map(|t| t.von_neumann_entropy()).transpose()?,
                s_data: data.von_neumann_entropy()?,
                s_ancilla: anc.von_neumann_entropy()?,
                n_traj: acc.count(),
                f2_data_err,
                f2_ancilla_err: fa.std_err,
            })
        })
        .collect()
}

/// Metrics of a single density matrix of the full register, as produced by
/// the master-equation oracle.
pub fn density_metrics<T: Real>(
    rho: &DensityMatrix<T>,
    n_data: usize,
    reference: &StateVector<T>,
) -> Result<(T, T, T, T, T)> {
    let n = rho.n_qubits();
    let data_q: Vec<_> = (0..n_data).map(crate::qstate::QubitIndex).collect();
    let anc_q: Vec<_> = (n_data..n).map(crate::qstate::QubitIndex).collect();
    let data = rho.partial_trace(&data_q)?;
    let anc = rho.partial_trace(&anc_q)?;
    Ok((
        data.squared_fidelity(reference)?,
        anc.population(0),
        rho.von_neumann_entropy()?,
        data.von_neumann_entropy()?,
        anc.von_neumann_entropy()?,
    ))
}

/// Probability of the data register being in either codeword.
pub fn codespace_fidelity<T: Real>(data: &DensityMatrix<T>) -> T {
    data.population(0) + data.population(data.dim() - 1)
}

/// `%.{sig}g`-style formatting.
pub fn format_sig(v: f64, sig: usize) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return if v.is_nan() { "nan".into() } else if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sig = sig.max(1);
    // round first so that the exponent reflects the printed mantissa
    let sci = format!("{:.*e}", sig - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= sig as i32 {
        format!("{}e{}{:02}", trim_zeros(mantissa), if exp < 0 { '-' } else { '+' }, exp.abs())
    } else {
        let decimals = (sig as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
