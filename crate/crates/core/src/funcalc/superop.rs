//! Linear maps on `N x N` matrices, represented on column-major
//! vectorizations. With the Hilbert-Schmidt inner product `tr(x* y)` the
//! vectorization is unitary, so adjoints are conjugate transposes.

use std::ops::{Add, Mul, Sub};

use crate::matcore::{max_abs, CMat, HermitianMatrix, PositiveMatrix, C64};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct SuperOperator {
    dim: usize,
    matrix: CMat,
    self_adjoint: bool,
}

/// `vec(x)` stacking columns.
pub fn vectorize(x: &CMat) -> nalgebra::DVector<C64> {
    nalgebra::DVector::from_column_slice(x.as_slice())
}

pub fn unvectorize(v: &nalgebra::DVector<C64>, dim: usize) -> CMat {
    CMat::from_column_slice(dim, dim, v.as_slice())
}

impl SuperOperator {
    /// Wraps an `N² x N²` matrix acting on `vec`.
    pub fn new(dim: usize, matrix: CMat) -> Result<Self> {
        let n2 = dim * dim;
        if matrix.nrows() != n2 || matrix.ncols() != n2 {
            return Err(Error::DimensionMismatch { expected: n2, found: matrix.nrows().max(matrix.ncols()) });
        }
        Ok(Self::from_parts(dim, matrix))
    }

    fn from_parts(dim: usize, matrix: CMat) -> Self {
        let scale = max_abs(&matrix);
        let asym = (&matrix - matrix.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        let self_adjoint = asym <= 1e-12 * scale.max(f64::MIN_POSITIVE);
        Self { dim, matrix, self_adjoint }
    }

    /// Matrix of the linear map `f`, built column by column from matrix units.
    pub fn from_map<F: Fn(&CMat) -> CMat>(dim: usize, f: F) -> Self {
        let n2 = dim * dim;
        let mut matrix = CMat::zeros(n2, n2);
        for col in 0..n2 {
            let mut unit = CMat::zeros(dim, dim);
            unit[(col % dim, col / dim)] = C64::new(1.0, 0.0);
            let image = vectorize(&f(&unit));
            matrix.set_column(col, &image);
        }
        Self::from_parts(dim, matrix)
    }

    pub fn identity(dim: usize) -> Self {
        Self { dim, matrix: CMat::identity(dim * dim, dim * dim), self_adjoint: true }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { dim, matrix: CMat::zeros(dim * dim, dim * dim), self_adjoint: true }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn is_self_adjoint(&self) -> bool {
        self.self_adjoint
    }

    pub fn apply(&self, x: &CMat) -> CMat {
        unvectorize(&(&self.matrix * vectorize(x)), self.dim)
    }

    pub fn adjoint(&self) -> Self {
        Self { dim: self.dim, matrix: self.matrix.adjoint(), self_adjoint: self.self_adjoint }
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { dim: self.dim, matrix: self.matrix.scale(c), self_adjoint: self.self_adjoint }
    }

    /// Operator norm on the Hilbert-Schmidt space.
    pub fn norm(&self) -> f64 {
        self.matrix.clone().svd(false, false).singular_values.max()
    }

    pub fn frobenius(&self) -> f64 {
        crate::matcore::frobenius(&self.matrix)
    }

    /// The self-adjoint operator as a Hermitian matrix on the lifted space.
    pub fn lifted(&self) -> Result<HermitianMatrix> {
        HermitianMatrix::new(self.matrix.clone())
    }

    pub fn from_lifted(dim: usize, h: &HermitianMatrix) -> Result<Self> {
        Self::new(dim, h.as_matrix().clone())
    }
}

impl Add for &SuperOperator {
    type Output = SuperOperator;
    fn add(self, rhs: Self) -> SuperOperator {
        SuperOperator::from_parts(self.dim, &self.matrix + &rhs.matrix)
    }
}

impl Sub for &SuperOperator {
    type Output = SuperOperator;
    fn sub(self, rhs: Self) -> SuperOperator {
        SuperOperator::from_parts(self.dim, &self.matrix - &rhs.matrix)
    }
}

/// Composition `self ∘ rhs`.
impl Mul for &SuperOperator {
    type Output = SuperOperator;
    fn mul(self, rhs: Self) -> SuperOperator {
        SuperOperator::from_parts(self.dim, &self.matrix * &rhs.matrix)
    }
}

/// `L_x : h ↦ x h`, i.e. `1 ⊗ x` on column-major vectorizations.
pub fn left_superop(x: &HermitianMatrix) -> SuperOperator {
    let n = x.dim();
    SuperOperator::from_parts(n, CMat::identity(n, n).kronecker(x.as_matrix()))
}

/// `R_x : h ↦ h x`, i.e. `xᵀ ⊗ 1` on column-major vectorizations.
pub fn right_superop(x: &HermitianMatrix) -> SuperOperator {
    let n = x.dim();
    SuperOperator::from_parts(n, x.as_matrix().transpose().kronecker(&CMat::identity(n, n)))
}

/// `t L_x + (1 - t) R_x`.
pub fn mixed_multiplication(x: &HermitianMatrix, t: f64) -> SuperOperator {
    &left_superop(x).scale(t) + &right_superop(x).scale(1.0 - t)
}

/// Spectral power of a self-adjoint positive superoperator.
pub fn superop_power(s: &SuperOperator, alpha: f64) -> Result<SuperOperator> {
    if !(alpha >= 0.0) {
        return Err(Error::Domain(format!("superoperator power {alpha} must be non-negative")));
    }
    if !s.is_self_adjoint() {
        return Err(Error::Precondition("superoperator power needs a self-adjoint operator".into()));
    }
    let lifted = PositiveMatrix::new(s.lifted()?)?;
    let powered = lifted.power(alpha)?;
    SuperOperator::from_lifted(s.dim, powered.base())
}
