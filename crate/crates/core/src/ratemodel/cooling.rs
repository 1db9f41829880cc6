use crate::error::{Error, Result};
use crate::scalar::Real;

/// Populations of the eight ancilla basis states, labelled by their binary
/// value (ancilla 1 is the most significant bit).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AncillaPopulations<T>(pub [T; 8]);

impl<T: Real> AncillaPopulations<T> {
    pub fn basis(i: usize) -> Result<Self> {
        if i >= 8 {
            return Err(Error::InvalidParameter(format!("ancilla state {i} out of 0..8")));
        }
        let mut p = [T::zero(); 8];
        p[i] = T::one();
        Ok(AncillaPopulations(p))
    }

    pub fn uniform() -> Self {
        AncillaPopulations([T::lit(0.125); 8])
    }

    pub fn validate(&self) -> Result<()> {
        let total: T = self.0.iter().copied().sum();
        if self.0.iter().any(|&p| !(T::zero()..=T::one()).contains(&p)) {
            return Err(Error::InvalidParameter("population outside [0, 1]".into()));
        }
        if (total - T::one()).abs() > T::tol(1e-12) {
            return Err(Error::NotNormalized((total - T::one()).as_f64()));
        }
        Ok(())
    }

    /// Probability of the all-ground pattern.
    pub fn fidelity(&self) -> T {
        self.0[0]
    }

    /// Total probability with `w` excited ancillas.
    pub fn weight_class(&self, w: u32) -> T {
        (0..8).filter(|i: &usize| i.count_ones() == w).map(|i| self.0[i]).sum()
    }

    pub fn distance(&self, other: &Self) -> T {
        self.0.iter().zip(&other.0).map(|(a, b)| (*a - *b).abs()).fold(T::zero(), T::max)
    }
}

/// Cold-reservoir transition rates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoolingRates<T> {
    /// Decay `A = Γ_c(n_c + 1)`.
    pub a: T,
    /// Excitation `B = Γ_c n_c`.
    pub b: T,
}

impl<T: Real> CoolingRates<T> {
    pub fn new(gamma_c: T, n_c: T) -> Result<Self> {
        if !(gamma_c >= T::zero() && n_c >= T::zero()) || !gamma_c.is_finite() || !n_c.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "Gamma_c = {gamma_c}, n_c = {n_c} must be finite and >= 0"
            )));
        }
        Ok(CoolingRates {
            a: gamma_c * (n_c + T::one()),
            b: gamma_c * n_c,
        })
    }
}

/// Time derivative of the ancilla populations under cooling.
///
/// Every excited ancilla decays at `A` and every ground one is excited at
/// `B`, independently.
pub fn cooling_rhs<T: Real>(p: &AncillaPopulations<T>, rates: &CoolingRates<T>) -> [T; 8] {
    let mut d = [T::zero(); 8];
    for i in 0..8 {
        for bit in [1usize, 2, 4] {
            let (j, rate) = if i & bit != 0 { (i ^ bit, rates.a) } else { (i | bit, rates.b) };
            let flow = rate * p.0[i];
            d[i] -= flow;
            d[j] += flow;
        }
    }
    d
}

/// Fixed-step RK4 integration of [`cooling_rhs`] over `t`.
pub fn integrate_cooling<T: Real>(
    p: &AncillaPopulations<T>,
    rates: &CoolingRates<T>,
    t: T,
    steps: usize,
) -> AncillaPopulations<T> {
    let h = t / T::lit(steps.max(1) as f64);
    let shift = |p: &AncillaPopulations<T>, k: &[T; 8], s: T| {
        let mut q = *p;
        for i in 0..8 {
            q.0[i] += k[i] * s;
        }
        q
    };
    let mut x = *p;
    let half = h * T::lit(0.5);
    for _ in 0..steps.max(1) {
        let k1 = cooling_rhs(&x, rates);
        let k2 = cooling_rhs(&shift(&x, &k1, half), rates);
        let k3 = cooling_rhs(&shift(&x, &k2, half), rates);
        let k4 = cooling_rhs(&shift(&x, &k3, h), rates);
        for i in 0..8 {
            x.0[i] += (k1[i] + (k2[i] + k3[i]) * T::lit(2.0) + k4[i]) * h / T::lit(6.0);
        }
    }
    x
}

/// Stationary populations: `P_w = (B/A)^w / (1 + B/A)³` for a state with
/// `w` excited ancillas.
pub fn cooling_steady_state<T: Real>(rates: &CoolingRates<T>) -> Result<AncillaPopulations<T>> {
    if rates.a <= T::zero() {
        return Err(Error::InvalidParameter("steady state needs A > 0".into()));
    }
    let r = rates.b / rates.a;
    let p0 = (T::one() + r).powi(-3);
    let mut p = [T::zero(); 8];
    for (i, v) in p.iter_mut().enumerate() {
        *v = p0 * r.powi(i.count_ones() as i32);
    }
    Ok(AncillaPopulations(p))
}

/// `((n_c + 1)/(2n_c + 1))³`
pub fn ancilla_steady_fidelity<T: Real>(n_c: T) -> Result<T> {
    if !(n_c >= T::zero()) {
        return Err(Error::InvalidParameter(format!("n_c = {n_c} must be >= 0")));
    }
    if n_c.is_infinite() {
        return Ok(T::lit(0.125));
    }
    Ok(((n_c + T::one()) / (T::lit(2.0) * n_c + T::one())).powi(3))
}

/// Populations at time `t` after starting in basis state `initial` with
/// `B = 0`: each excited ancilla survives with probability `x = e^{−At}`.
pub fn cooling_closed_form<T: Real>(initial: usize, a: T, t: T) -> Result<AncillaPopulations<T>> {
    if initial >= 8 {
        return Err(Error::InvalidParameter(format!("ancilla state {initial} out of 0..8")));
    }
    if !(a >= T::zero() && t >= T::zero()) {
        return Err(Error::InvalidParameter("A and t must be >= 0".into()));
    }
    let x = (-a * t).exp();
    let w = initial.count_ones() as i32;
    let mut p = [T::zero(); 8];
    for (j, v) in p.iter_mut().enumerate() {
        if j & !initial == 0 {
            let k = j.count_ones() as i32;
            *v = x.powi(k) * (T::one() - x).powi(w - k);
        }
    }
    Ok(AncillaPopulations(p))
}

/// Ancilla fidelity after cooling, given the probabilities `p[k]` of `k`
/// excited ancillas beforehand. With `literal_exponent` the three-excitation
/// term uses `(1−x)²` instead of the binomial `(1−x)³`.
pub fn cooled_fidelity<T: Real>(p: [T; 4], x: T, literal_exponent: bool) -> T {
    let y = T::one() - x;
    let last = if literal_exponent { y * y } else { y * y * y };
    p[0] + p[1] * y + p[2] * y * y + p[3] * last
}

/// Slow-cooling self-consistent ancilla fidelity
/// `(1−α)(1−x) / (1 − α − x + 2αx)`.
pub fn slow_cooling_fss<T: Real>(alpha: T, x: T) -> Result<T> {
    let unit = T::zero()..T::one();
    if !unit.contains(&alpha) || !unit.contains(&x) {
        return Err(Error::InvalidParameter(format!("alpha = {alpha}, x = {x} must lie in [0, 1)")));
    }
    let den = T::one() - alpha - x + T::lit(2.0) * alpha * x;
    if den.abs() < T::lit(1e-12) {
        return Err(Error::InvalidParameter("vanishing denominator".into()));
    }
    Ok((T::one() - alpha) * (T::one() - x) / den)
}
