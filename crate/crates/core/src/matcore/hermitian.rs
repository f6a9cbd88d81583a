use std::ops::{Add, Mul, Sub};

use nalgebra::{DVector, SymmetricEigen};

use super::{frobenius, max_abs, CMat, C64, HERMITIAN_TOLERANCE};
use crate::{Error, Result};

/// Dense complex Hermitian matrix, stored as the Hermitian average of its input.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix {
    data: CMat,
}

/// Eigendecomposition `A = U diag(eigenvalues) U*` with ascending eigenvalues.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: CMat,
}

impl HermitianMatrix {
    /// Validates that `m` is square and Hermitian up to `1e-12 * maxabs(m)`.
    pub fn new(m: CMat) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch { expected: m.nrows(), found: m.ncols() });
        }
        let scale = max_abs(&m);
        let tolerance = HERMITIAN_TOLERANCE * scale;
        let asymmetry = (&m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if asymmetry > tolerance {
            return Err(Error::NotHermitian { asymmetry, tolerance });
        }
        Ok(Self::from_hermitian_part(&m))
    }

    /// `(m + m*) / 2` without validation. Used for results that are Hermitian
    /// by construction and only carry round-off asymmetry.
    pub fn from_hermitian_part(m: &CMat) -> Self {
        let data = (m + m.adjoint()).scale(0.5);
        Self { data }
    }

    pub fn from_real_diagonal(values: &[f64]) -> Self {
        Self { data: super::diag(values) }
    }

    /// Builds a real symmetric matrix from row-major entries.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        for r in rows {
            if r.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: r.len() });
            }
        }
        Self::new(CMat::from_fn(n, n, |i, j| C64::new(rows[i][j], 0.0)))
    }

    pub fn identity(n: usize) -> Self {
        Self { data: CMat::identity(n, n) }
    }

    pub fn zeros(n: usize) -> Self {
        Self { data: CMat::zeros(n, n) }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn as_matrix(&self) -> &CMat {
        &self.data
    }

    pub fn into_matrix(self) -> CMat {
        self.data
    }

    pub fn eigh(&self) -> Result<Spectrum> {
        eigh(self)
    }

    pub fn trace(&self) -> f64 {
        super::trace(&self.data).re
    }

    pub fn frobenius(&self) -> f64 {
        frobenius(&self.data)
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.data)
    }

    /// Largest absolute eigenvalue. Falls back to the Frobenius norm, an upper
    /// bound, if the eigensolver fails.
    pub fn op_norm(&self) -> f64 {
        match self.eigh() {
            Ok(s) => s.eigenvalues.iter().map(|l| l.abs()).fold(0.0, f64::max),
            Err(_) => self.frobenius(),
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { data: self.data.scale(c) }
    }

    /// `self + c * 1`.
    pub fn shift(&self, c: f64) -> Self {
        let mut data = self.data.clone();
        for i in 0..data.nrows() {
            data[(i, i)] += C64::new(c, 0.0);
        }
        Self { data }
    }

    pub fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(())
    }
}

impl Add for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn add(self, rhs: Self) -> HermitianMatrix {
        HermitianMatrix { data: &self.data + &rhs.data }
    }
}

impl Sub for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn sub(self, rhs: Self) -> HermitianMatrix {
        HermitianMatrix { data: &self.data - &rhs.data }
    }
}

/// Matrix product; in general not Hermitian.
impl Mul for &HermitianMatrix {
    type Output = CMat;
    fn mul(self, rhs: Self) -> CMat {
        &self.data * &rhs.data
    }
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.eigenvalues.iter().map(|l| l.abs()).fold(0.0, f64::max)
    }

    /// `U diag(values) U*` for an arbitrary real vector of values.
    pub fn compose(&self, values: &[f64]) -> CMat {
        let mut scaled = self.eigenvectors.clone();
        for (j, v) in values.iter().enumerate() {
            scaled.column_mut(j).scale_mut(*v);
        }
        let m = scaled * self.eigenvectors.adjoint();
        (&m + m.adjoint()).scale(0.5)
    }

    /// `f(A)` through the spectral decomposition.
    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> CMat {
        let values: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        self.compose(&values)
    }

    pub fn reconstruct(&self) -> CMat {
        self.compose(self.eigenvalues.as_slice())
    }
}

/// Hermitian eigendecomposition with ascending eigenvalues.
///
/// The decomposition is accepted only if it reconstructs the input to
/// `1e-10` in relative Frobenius norm; otherwise the residual is reported.
pub fn eigh(a: &HermitianMatrix) -> Result<Spectrum> {
    let n = a.dim();
    if n == 0 {
        return Ok(Spectrum { eigenvalues: DVector::zeros(0), eigenvectors: CMat::zeros(0, 0) });
    }
    let decomposition = SymmetricEigen::try_new(a.as_matrix().clone(), f64::EPSILON, 1000 * n)
        .ok_or(Error::EigenNonConvergence { residual: f64::NAN })?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| decomposition.eigenvalues[i].total_cmp(&decomposition.eigenvalues[j]));
    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&i| decomposition.eigenvalues[i]));
    let eigenvectors = CMat::from_fn(n, n, |r, c| decomposition.eigenvectors[(r, order[c])]);
    let spectrum = Spectrum { eigenvalues, eigenvectors };

    let norm = a.frobenius();
    let residual = frobenius(&(spectrum.reconstruct() - a.as_matrix()));
    if residual > 1e-10 * norm.max(f64::MIN_POSITIVE) && residual > 0.0 {
        return Err(Error::EigenNonConvergence { residual });
    }
    Ok(spectrum)
}
