use crate::error::{Error, Result};
use crate::scalar::Real;

/// Per-round event parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RoundEventParams<T> {
    /// Ancilla fidelity after cooling.
    pub f_a: T,
    /// Per-qubit ancilla error probability over a round.
    pub alpha: T,
    /// Per-qubit data error probability over a round.
    pub beta: T,
}

impl<T: Real> RoundEventParams<T> {
    pub fn new(f_a: T, alpha: T, beta: T) -> Result<Self> {
        for (name, v) in [("F_a", f_a), ("alpha", alpha), ("beta", beta)] {
            if !(T::zero()..=T::one()).contains(&v) {
                return Err(Error::InvalidParameter(format!("{name} = {v} must lie in [0, 1]")));
            }
        }
        Ok(RoundEventParams { f_a, alpha, beta })
    }
}

/// Probabilities of the 16 round events `p_{c,p,k}`: ancilla cooled (c = 1)
/// or not (2), prepared correctly (p = 1) or not (2), and `k − 1` data
/// errors (k = 1..4).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EventProbabilities<T>(pub [[[T; 4]; 2]; 2]);

impl<T: Real> EventProbabilities<T> {
    /// `p(c, p, k)` with the 1-based labels used in the event names.
    pub fn get(&self, c: usize, p: usize, k: usize) -> T {
        self.0[c - 1][p - 1][k - 1]
    }

    /// Sum over the twelve distinct labels: the uncooled branch does not
    /// depend on preparation, so `p_{21k}` and `p_{22k}` are one event.
    pub fn distinct_total(&self) -> T {
        let mut s = T::zero();
        for k in 1..=4 {
            s += self.get(1, 1, k) + self.get(1, 2, k) + self.get(2, 1, k);
        }
        s
    }

    /// All 16 values in label order 111, 112, …, 224.
    pub fn flat(&self) -> [T; 16] {
        let mut out = [T::zero(); 16];
        for c in 0..2 {
            for p in 0..2 {
                for k in 0..4 {
                    out[c * 8 + p * 4 + k] = self.0[c][p][k];
                }
            }
        }
        out
    }
}

pub fn event_probabilities<T: Real>(params: &RoundEventParams<T>) -> EventProbabilities<T> {
    let RoundEventParams { f_a, alpha: a, beta: b } = *params;
    let one = T::one();
    let three = T::lit(3.0);
    let clean = (one - a).powi(3) + a.powi(3);
    let faulty = three * a * (one - a).powi(2) + three * a * a * (one - a);
    let data = [
        (one - b).powi(3),
        three * b * (one - b).powi(2),
        three * b * b * (one - b),
        b.powi(3),
    ];
    let mut p = [[[T::zero(); 4]; 2]; 2];
    for k in 0..4 {
        p[0][0][k] = f_a * clean * data[k];
        p[0][1][k] = f_a * faulty * data[k];
        p[1][0][k] = (one - f_a) * data[k];
        p[1][1][k] = (one - f_a) * data[k];
    }
    EventProbabilities(p)
}

/// Error-weight classes of the data register.
pub const CLASSES: [&str; 4] = ["0", "a", "b", "7"];

/// Class-to-class transition probabilities `f[i][j]` over one round, with
/// classes ordered `0, a, b, 7` (0, 1, 2, 3 data qubits in `|1⟩`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowMatrix<T>(pub [[T; 4]; 4]);

/// Row sums must equal one to this tolerance.
const ROW_SUM_TOL: f64 = 1e-10;

impl<T: Real> FlowMatrix<T> {
    pub fn validate(&self) -> Result<()> {
        for (row, r) in self.0.iter().enumerate() {
            let sum: T = r.iter().copied().sum();
            if (sum - T::one()).abs() > T::tol(ROW_SUM_TOL) {
                return Err(Error::FlowRowSum { row, sum: sum.as_f64() });
            }
        }
        Ok(())
    }

    pub fn identity() -> Self {
        let mut f = [[T::zero(); 4]; 4];
        for (i, row) in f.iter_mut().enumerate() {
            row[i] = T::one();
        }
        FlowMatrix(f)
    }

    /// `½(f_a0 + f_a7) / (f_0a + f_0b + f_a0 + f_a7)`, the two-class
    /// approximation to the stationary `P_0`.
    pub fn approximate_steady_p0(&self) -> T {
        let f = &self.0;
        T::lit(0.5) * (f[1][0] + f[1][3]) / (f[0][1] + f[0][2] + f[1][0] + f[1][3])
    }

    /// Exact stationary class distribution, by solving `q F = q`, `Σq = 1`.
    pub fn stationary(&self) -> Result<[T; 4]> {
        // rows of (Fᵀ − I) with the last equation replaced by normalization
        let mut m = [[T::zero(); 5]; 4];
        for i in 0..4 {
            for j in 0..4 {
                m[i][j] = self.0[j][i] - if i == j { T::one() } else { T::zero() };
            }
        }
        m[3] = [T::one(), T::one(), T::one(), T::one(), T::one()];
        for col in 0..4 {
            let piv = (col..4)
                .max_by(|&x, &y| m[x][col].abs().partial_cmp(&m[y][col].abs()).expect("finite"))
                .expect("non-empty");
            if m[piv][col].abs() < T::epsilon() {
                return Err(Error::InvalidParameter("flow matrix is not ergodic".into()));
            }
            m.swap(col, piv);
            for r in 0..4 {
                if r != col {
                    let k = m[r][col] / m[col][col];
                    for c in col..5 {
                        let v = m[col][c];
                        m[r][c] -= k * v;
                    }
                }
            }
        }
        Ok([0, 1, 2, 3].map(|i| m[i][4] / m[i][i]))
    }
}

/// Flow coefficients implied by the event probabilities.
///
/// Rows for two and three errors follow from the code's symmetry between
/// `|000⟩` and `|111⟩`. In `f_a0` the `p_213` weight is `2/9`; a weight of
/// `2/3` would make the row sum exceed one whenever `F_a < 1`.
pub fn flow_coefficients<T: Real>(p: &EventProbabilities<T>) -> Result<FlowMatrix<T>> {
    let g = |s: &str| {
        let d: Vec<usize> = s.bytes().map(|b| (b - b'0') as usize).collect();
        p.get(d[0], d[1], d[2])
    };
    let t = T::one() / T::lit(3.0);
    let n = T::one() / T::lit(9.0);
    let two = T::lit(2.0);
    let seven = T::lit(7.0);

    let f00 = g("111") + g("112") + t * g("122") + t * g("212");
    let f0a = g("121") + two * t * g("123") + g("211") + two * t * g("213");
    let f0b = g("113") + two * t * g("122") + g("124") + two * t * g("212") + g("214");
    let f07 = g("114") + t * g("123") + t * g("213");

    let fa0 = g("111") + t * g("112") + t * g("121") + two * n * g("123") + t * g("211") + two * n * g("213");
    let faa = two * t * g("113") + seven * n * g("122") + two * t * g("124") + seven * n * g("212") + two * t * g("214");
    let fab = two * t * g("112") + g("114") + two * t * g("121") + seven * n * g("123") + two * t * g("211")
        + seven * n * g("213");
    let fa7 = t * g("113") + two * n * g("122") + t * g("124") + two * n * g("212") + t * g("214");

    let f = FlowMatrix([
        [f00, f0a, f0b, f07],
        [fa0, faa, fab, fa7],
        [fa7, fab, faa, fa0],
        [f07, f0b, f0a, f00],
    ]);
    f.validate()?;
    Ok(f)
}

/// Data-register probabilities at a round boundary, stored per basis state:
/// `pa` is the probability of each single-error state, so
/// `p0 + 3pa + 3pb + p7 = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RoundChainState<T> {
    pub p0: T,
    pub pa: T,
    pub pb: T,
    pub p7: T,
}

impl<T: Real> RoundChainState<T> {
    pub fn perfect() -> Self {
        RoundChainState {
            p0: T::one(),
            pa: T::zero(),
            pb: T::zero(),
            p7: T::zero(),
        }
    }

    pub fn from_classes(q: [T; 4]) -> Self {
        let three = T::lit(3.0);
        RoundChainState {
            p0: q[0],
            pa: q[1] / three,
            pb: q[2] / three,
            p7: q[3],
        }
    }

    /// Class totals `[P_0, 3P_a, 3P_b, P_7]`.
    pub fn classes(&self) -> [T; 4] {
        let three = T::lit(3.0);
        [self.p0, three * self.pa, three * self.pb, self.p7]
    }

    pub fn normalization(&self) -> T {
        self.classes().iter().copied().sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.classes().iter().any(|&v| v < T::zero()) {
            return Err(Error::InvalidParameter("negative chain probability".into()));
        }
        let dev = self.normalization() - T::one();
        if dev.abs() > T::tol(1e-12) {
            return Err(Error::NotNormalized(dev.as_f64()));
        }
        Ok(())
    }

    /// Swaps `0 ↔ 7` and `a ↔ b`.
    pub fn mirrored(&self) -> Self {
        RoundChainState {
            p0: self.p7,
            pa: self.pb,
            pb: self.pa,
            p7: self.p0,
        }
    }

    /// One round: class totals are pushed through the flows.
    pub fn advance(&self, f: &FlowMatrix<T>) -> Self {
        let q = self.classes();
        let mut next = [T::zero(); 4];
        for (i, qi) in q.iter().enumerate() {
            for j in 0..4 {
                next[j] += *qi * f.0[i][j];
            }
        }
        Self::from_classes(next)
    }
}

/// `rounds` successive states after `initial` (the first entry is round 1).
pub fn iterate_round_chain<T: Real>(
    initial: &RoundChainState<T>,
    f: &FlowMatrix<T>,
    rounds: usize,
) -> Vec<RoundChainState<T>> {
    let mut out = Vec::with_capacity(rounds);
    let mut s = *initial;
    for _ in 0..rounds {
        s = s.advance(f);
        out.push(s);
    }
    out
}

/// First-round fidelity to first order:
/// `((n_c+1)/(2n_c+1))³ (1 − 3α − β) + β`.
pub fn first_round_p0<T: Real>(f_a: T, alpha: T, beta: T) -> T {
    f_a * (T::one() - T::lit(3.0) * alpha - beta) + beta
}

/// Second-order series `1 − 3α + (33 − 21n)α²` for `F_a = 1`, `β = α`.
pub fn perturbative_p0<T: Real>(n: usize, alpha: T) -> T {
    T::one() - T::lit(3.0) * alpha + (T::lit(33.0) - T::lit(21.0) * T::lit(n as f64)) * alpha * alpha
}

/// Second-order steady state `½(1 − 3α + 24α²)`.
pub fn perturbative_steady_p0<T: Real>(alpha: T) -> T {
    T::lit(0.5) * (T::one() - T::lit(3.0) * alpha + T::lit(24.0) * alpha * alpha)
}

/// Second-order decay constant `1 + 42α²`.
pub fn perturbative_delta<T: Real>(alpha: T) -> T {
    T::one() + T::lit(42.0) * alpha * alpha
}
