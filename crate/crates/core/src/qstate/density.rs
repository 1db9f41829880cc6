use super::linalg::hermitian_eigenvalues;
use super::register::{check_distinct, QubitIndex};
use super::state::StateVector;
use crate::error::{Error, Result};
use crate::scalar::{Real, C};

/// Eigenvalues below this magnitude are dropped from the entropy sum.
const ENTROPY_CUTOFF: f64 = 1e-14;
/// Most negative eigenvalue tolerated as rounding noise.
const NEGATIVE_EIGENVALUE_TOL: f64 = 1e-10;

/// Density operator of an `n`-qubit register, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix<T> {
    n_qubits: usize,
    data: Vec<C<T>>,
}

impl<T: Real> DensityMatrix<T> {
    pub(crate) fn from_raw(n_qubits: usize, data: Vec<C<T>>) -> Self {
        debug_assert_eq!(data.len(), 1 << (2 * n_qubits));
        DensityMatrix { n_qubits, data }
    }

    pub fn from_pure(state: &StateVector<T>) -> Self {
        let a = state.amplitudes();
        let dim = a.len();
        let mut data = Vec::with_capacity(dim * dim);
        for r in a {
            for c in a {
                data.push(*r * c.conj());
            }
        }
        DensityMatrix {
            n_qubits: state.n_qubits(),
            data,
        }
    }

    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        let mut data = vec![C::new(T::zero(), T::zero()); dim * dim];
        let p = T::one() / T::lit(dim as f64);
        for i in 0..dim {
            data[i * dim + i] = C::new(p, T::zero());
        }
        DensityMatrix { n_qubits, data }
    }

    /// Checks Hermiticity, unit trace and positivity.
    pub fn from_elements(n_qubits: usize, data: Vec<C<T>>) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: data.len(),
            });
        }
        let rho = DensityMatrix { n_qubits, data };
        rho.validate()?;
        Ok(rho)
    }

    pub fn validate(&self) -> Result<()> {
        let herm = self.hermiticity_deviation();
        if herm > T::tol(1e-12) {
            return Err(Error::NotHermitian(herm.as_f64()));
        }
        let tr = self.trace();
        if (tr.re - T::one()).abs() > T::tol(1e-10) || tr.im.abs() > T::tol(1e-10) {
            return Err(Error::NotNormalized(tr.re.as_f64()));
        }
        let min = self.eigenvalues()?[0];
        if min < -T::tol(NEGATIVE_EIGENVALUE_TOL) {
            return Err(Error::NegativeEigenvalue(min.as_f64()));
        }
        Ok(())
    }

    #[inline]
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    #[inline]
    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> C<T> {
        self.data[r * self.dim() + c]
    }

    #[inline]
    pub fn elements(&self) -> &[C<T>] {
        &self.data
    }

    /// Diagonal element `⟨i|ρ|i⟩`.
    pub fn population(&self, i: usize) -> T {
        self.get(i, i).re
    }

    pub fn trace(&self) -> C<T> {
        (0..self.dim()).fold(C::new(T::zero(), T::zero()), |acc, i| acc + self.get(i, i))
    }

    /// Largest `|ρ_rc − ρ̄_cr|`.
    pub fn hermiticity_deviation(&self) -> T {
        let d = self.dim();
        let mut worst = T::zero();
        for r in 0..d {
            for c in r..d {
                worst = worst.max((self.data[r * d + c] - self.data[c * d + r].conj()).norm());
            }
        }
        worst
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let (da, db) = (self.dim(), other.dim());
        let d = da * db;
        let mut data = vec![C::new(T::zero(), T::zero()); d * d];
        for ra in 0..da {
            for ca in 0..da {
                let a = self.get(ra, ca);
                for rb in 0..db {
                    for cb in 0..db {
                        data[(ra * db + rb) * d + ca * db + cb] = a * other.get(rb, cb);
                    }
                }
            }
        }
        DensityMatrix {
            n_qubits: self.n_qubits + other.n_qubits,
            data,
        }
    }

    /// `w·self + (1−w)·other`
    pub fn mix(&self, w: T, other: &Self) -> Result<Self> {
        self.check_same_dim(other.dim())?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| *a * w + *b * (T::one() - w))
            .collect();
        Ok(DensityMatrix {
            n_qubits: self.n_qubits,
            data,
        })
    }

    fn check_same_dim(&self, dim: usize) -> Result<()> {
        if dim != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: dim,
            });
        }
        Ok(())
    }

    /// Reduced state of `keep`, in the order given.
    pub fn partial_trace(&self, keep: &[QubitIndex]) -> Result<Self> {
        let n = self.n_qubits;
        check_distinct(keep, n)?;
        let k = keep.len();
        let dk = 1usize << k;
        let keep_mask: usize = keep.iter().map(|q| q.mask(n)).sum();
        let rest: Vec<usize> = (0..n)
            .map(|q| QubitIndex(q).mask(n))
            .filter(|m| keep_mask & m == 0)
            .collect();
        let base: Vec<usize> = (0..dk)
            .map(|p| {
                keep.iter().enumerate().fold(0, |acc, (pos, q)| {
                    if p & (1 << (k - 1 - pos)) != 0 {
                        acc | q.mask(n)
                    } else {
                        acc
                    }
                })
            })
            .collect();
        let mut out = vec![C::new(T::zero(), T::zero()); dk * dk];
        for env in 0..(1usize << rest.len()) {
            let off = rest.iter().enumerate().fold(0, |acc, (pos, m)| {
                if env & (1 << pos) != 0 {
                    acc | m
                } else {
                    acc
                }
            });
            for r in 0..dk {
                for c in 0..dk {
                    out[r * dk + c] += self.get(base[r] | off, base[c] | off);
                }
            }
        }
        Ok(DensityMatrix {
            n_qubits: k,
            data: out,
        })
    }

    /// `⟨ψ|ρ|ψ⟩`, clamped to `[0, 1]`.
    pub fn squared_fidelity(&self, target: &StateVector<T>) -> Result<T> {
        self.check_same_dim(target.dim())?;
        let a = target.amplitudes();
        let d = self.dim();
        let mut acc = C::new(T::zero(), T::zero());
        for r in 0..d {
            if a[r].norm_sqr() == T::zero() {
                continue;
            }
            let mut row = C::new(T::zero(), T::zero());
            for c in 0..d {
                row += self.data[r * d + c] * a[c];
            }
            acc += a[r].conj() * row;
        }
        Ok(acc.re.max(T::zero()).min(T::one()))
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Result<Vec<T>> {
        hermitian_eigenvalues(&self.data, self.dim())
    }

    /// `S = −tr ρ log₂ ρ`, in bits.
    pub fn von_neumann_entropy(&self) -> Result<T> {
        let herm = self.hermiticity_deviation();
        if herm > T::tol(1e-10) {
            return Err(Error::NotHermitian(herm.as_f64()));
        }
        let ev = self.eigenvalues()?;
        if ev[0] < -T::tol(NEGATIVE_EIGENVALUE_TOL) {
            return Err(Error::NegativeEigenvalue(ev[0].as_f64()));
        }
        let cut = T::lit(ENTROPY_CUTOFF);
        Ok(ev
            .into_iter()
            .filter(|&l| l > cut)
            .map(|l| -l * l.log2())
            .sum::<T>()
            .max(T::zero()))
    }

    /// `½‖ρ − σ‖₁`
    pub fn trace_distance(&self, other: &Self) -> Result<T> {
        self.check_same_dim(other.dim())?;
        let diff: Vec<C<T>> = self.data.iter().zip(&other.data).map(|(a, b)| *a - *b).collect();
        let ev = hermitian_eigenvalues(&diff, self.dim())?;
        Ok(ev.into_iter().map(|l| l.abs()).sum::<T>() * T::lit(0.5))
    }
}
