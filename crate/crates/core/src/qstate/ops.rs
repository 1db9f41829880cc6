use std::ops::Mul;

use crate::scalar::{cplx, Real, C};

/// A 2×2 complex matrix acting on one qubit, row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2<T>(pub [[C<T>; 2]; 2]);

impl<T: Real> Mat2<T> {
    pub fn new(m00: C<T>, m01: C<T>, m10: C<T>, m11: C<T>) -> Self {
        Mat2([[m00, m01], [m10, m11]])
    }

    pub fn real(m00: T, m01: T, m10: T, m11: T) -> Self {
        let z = T::zero();
        Self::new(cplx(m00, z), cplx(m01, z), cplx(m10, z), cplx(m11, z))
    }

    pub fn identity() -> Self {
        Self::real(T::one(), T::zero(), T::zero(), T::one())
    }

    pub fn pauli_x() -> Self {
        Self::real(T::zero(), T::one(), T::one(), T::zero())
    }

    pub fn pauli_z() -> Self {
        Self::real(T::one(), T::zero(), T::zero(), -T::one())
    }

    pub fn hadamard() -> Self {
        let h = T::FRAC_1_SQRT_2();
        Self::real(h, h, h, -h)
    }

    /// `σ₋ = |0⟩⟨1|`
    pub fn lowering() -> Self {
        Self::real(T::zero(), T::one(), T::zero(), T::zero())
    }

    /// `σ₊ = |1⟩⟨0|`
    pub fn raising() -> Self {
        Self::real(T::zero(), T::zero(), T::one(), T::zero())
    }

    /// `exp(-i·angle·G)` for any involutory generator (`G² = I`).
    pub fn exp_involutory(generator: &Self, angle: T) -> Self {
        let c = cplx(angle.cos(), T::zero());
        let s = cplx(T::zero(), -angle.sin());
        let mut out = [[C::new(T::zero(), T::zero()); 2]; 2];
        for (r, row) in out.iter_mut().enumerate() {
            for (k, v) in row.iter_mut().enumerate() {
                let id = if r == k { c } else { C::new(T::zero(), T::zero()) };
                *v = id + s * generator.0[r][k];
            }
        }
        Mat2(out)
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Self::new(m[0][0].conj(), m[1][0].conj(), m[0][1].conj(), m[1][1].conj())
    }

    /// Frobenius norm of `U†U − I`.
    pub fn unitarity_deviation(&self) -> T {
        let p = self.adjoint() * *self;
        let id = Self::identity();
        let mut acc = T::zero();
        for r in 0..2 {
            for c in 0..2 {
                acc += (p.0[r][c] - id.0[r][c]).norm_sqr();
            }
        }
        acc.sqrt()
    }
}

impl<T: Real> Mul for Mat2<T> {
    type Output = Mat2<T>;

    fn mul(self, rhs: Self) -> Self {
        let a = &self.0;
        let b = &rhs.0;
        let mut out = [[C::new(T::zero(), T::zero()); 2]; 2];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        Mat2(out)
    }
}
