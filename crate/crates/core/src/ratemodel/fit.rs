use crate::error::{Error, Result};
use crate::scalar::Real;

/// Number of rounds after `skip` used by the fit.
pub const FIT_WINDOW: usize = 200;
/// Largest accepted reconstruction residual relative to the decaying signal.
const RESIDUAL_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayFit<T> {
    pub steady_state: T,
    /// Per-round factor: `P(n) − P_ss ∝ δ^{−n}`.
    pub delta: T,
    /// Reconstruction residual over the window, relative to `‖P − P_ss‖`.
    pub relative_residual: T,
}

/// Fits `P(n) = P_ss + (P(k) − P_ss) δ^{−(n−k)}` to `values[k ..= k + 200]`.
///
/// `values[i]` is the value after round `i + 1`. The ratio of successive
/// differences fixes the decay and hence `P_ss`; `δ` is then the slope of a
/// least-squares line through `log|P(n) − P_ss|`.
pub fn fit_decay_constant<T: Real>(values: &[T], skip: usize) -> Result<DecayFit<T>> {
    if skip < 4 {
        return Err(Error::InvalidParameter(format!("skip = {skip}, need k >= 4")));
    }
    let end = skip + FIT_WINDOW;
    if values.len() <= end {
        return Err(Error::InvalidParameter(format!(
            "need {} values for a fit starting at round {skip}, got {}",
            end + 1,
            values.len()
        )));
    }
    let tail = &values[skip..=end];
    let diffs: Vec<T> = tail.windows(2).map(|w| w[1] - w[0]).collect();
    let sign = diffs[0].signum();
    if diffs.iter().any(|d| *d == T::zero() || d.signum() != sign) {
        return Err(Error::FitRejected("tail is not strictly monotone".into()));
    }

    let idx: Vec<T> = (0..diffs.len()).map(|i| T::lit(i as f64)).collect();
    let log_diff: Vec<T> = diffs.iter().map(|d| d.abs().ln()).collect();
    let (ln_r, _) = line_fit(&idx, &log_diff);
    let r = ln_r.exp();
    if r >= T::one() {
        return Err(Error::FitRejected(format!("tail is not decaying (ratio {r})")));
    }
    // P(n) − P_ss = ΔP(n) / (r − 1)
    let steady = tail
        .iter()
        .zip(&diffs)
        .map(|(p, d)| *p - *d / (r - T::one()))
        .sum::<T>()
        / T::lit(diffs.len() as f64);

    let gaps: Vec<T> = tail.iter().map(|p| *p - steady).collect();
    if gaps.iter().any(|g| *g == T::zero() || g.signum() != gaps[0].signum()) {
        return Err(Error::FitRejected("tail crosses its steady state".into()));
    }
    let n: Vec<T> = (0..tail.len()).map(|i| T::lit(i as f64)).collect();
    let logs: Vec<T> = gaps.iter().map(|g| g.abs().ln()).collect();
    let (slope, intercept) = line_fit(&n, &logs);
    let delta = (-slope).exp();

    let sign = gaps[0].signum();
    let mut res = T::zero();
    let mut norm = T::zero();
    for (i, g) in gaps.iter().enumerate() {
        let model = sign * (intercept + slope * n[i]).exp();
        res += (*g - model).powi(2);
        norm += g.powi(2);
    }
    let relative_residual = (res / norm).sqrt();
    if relative_residual > T::tol(RESIDUAL_TOL) {
        return Err(Error::FitRejected(format!(
            "relative residual {relative_residual:e} exceeds {RESIDUAL_TOL:e}"
        )));
    }
    Ok(DecayFit {
        steady_state: steady,
        delta,
        relative_residual,
    })
}

/// Least-squares `y ≈ slope·x + intercept`.
fn line_fit<T: Real>(x: &[T], y: &[T]) -> (T, T) {
    let n = T::lit(x.len() as f64);
    let mx = x.iter().copied().sum::<T>() / n;
    let my = y.iter().copied().sum::<T>() / n;
    let mut sxy = T::zero();
    let mut sxx = T::zero();
    for (a, b) in x.iter().zip(y) {
        sxy += (*a - mx) * (*b - my);
        sxx += (*a - mx) * (*a - mx);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}
