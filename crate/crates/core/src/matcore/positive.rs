use nalgebra::DVector;

use super::{CMat, HermitianMatrix, Spectrum, PSD_TOLERANCE};
use crate::{Error, Result};

/// Positive semidefinite matrix with its (clamped) spectrum cached.
#[derive(Clone, Debug, PartialEq)]
pub struct PositiveMatrix {
    base: HermitianMatrix,
    spectrum: Spectrum,
    eig_floor: f64,
}

impl PositiveMatrix {
    /// Accepts eigenvalues down to `-1e-10 * ||h||_inf`, clamping them to zero.
    pub fn new(h: HermitianMatrix) -> Result<Self> {
        let spectrum = h.eigh()?;
        let tolerance = PSD_TOLERANCE * spectrum.max_abs();
        let min_eigenvalue = spectrum.min();
        if min_eigenvalue < -tolerance {
            return Err(Error::NotPositive { min_eigenvalue, tolerance });
        }
        if min_eigenvalue < 0.0 {
            let clamped: Vec<f64> = spectrum.eigenvalues.iter().map(|l| l.max(0.0)).collect();
            return Ok(Self::from_spectrum_unchecked(clamped, spectrum.eigenvectors));
        }
        Ok(Self { base: h, eig_floor: min_eigenvalue.max(0.0), spectrum })
    }

    pub fn from_matrix(m: CMat) -> Result<Self> {
        Self::new(HermitianMatrix::new(m)?)
    }

    /// Builds `U diag(values) U*` from non-negative values and a unitary `U`.
    /// Values are sorted together with the columns of `U`.
    pub fn from_spectrum(values: Vec<f64>, eigenvectors: CMat) -> Result<Self> {
        if values.len() != eigenvectors.ncols() || eigenvectors.nrows() != eigenvectors.ncols() {
            return Err(Error::DimensionMismatch { expected: eigenvectors.ncols(), found: values.len() });
        }
        if let Some(&bad) = values.iter().find(|v| !(**v >= 0.0)) {
            return Err(Error::NotPositive { min_eigenvalue: bad, tolerance: 0.0 });
        }
        Ok(Self::from_spectrum_unchecked(values, eigenvectors))
    }

    fn from_spectrum_unchecked(values: Vec<f64>, eigenvectors: CMat) -> Self {
        let n = values.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
        let eigenvalues = DVector::from_iterator(n, order.iter().map(|&i| values[i]));
        let eigenvectors = CMat::from_fn(n, n, |r, c| eigenvectors[(r, order[c])]);
        let spectrum = Spectrum { eigenvalues, eigenvectors };
        let base = HermitianMatrix::from_hermitian_part(&spectrum.reconstruct());
        let eig_floor = if n == 0 { 0.0 } else { spectrum.eigenvalues[0] };
        Self { base, spectrum, eig_floor }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_spectrum_unchecked(vec![1.0; n], CMat::identity(n, n))
    }

    pub fn zeros(n: usize) -> Self {
        Self::from_spectrum_unchecked(vec![0.0; n], CMat::identity(n, n))
    }

    pub fn from_diagonal(values: &[f64]) -> Result<Self> {
        Self::from_spectrum(values.to_vec(), CMat::identity(values.len(), values.len()))
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn base(&self) -> &HermitianMatrix {
        &self.base
    }

    pub fn as_matrix(&self) -> &CMat {
        self.base.as_matrix()
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn eig_floor(&self) -> f64 {
        self.eig_floor
    }

    pub fn max_eigenvalue(&self) -> f64 {
        if self.dim() == 0 {
            0.0
        } else {
            self.spectrum.eigenvalues[self.dim() - 1]
        }
    }

    /// Smallest strictly positive eigenvalue, if any.
    pub fn min_positive_eigenvalue(&self) -> Option<f64> {
        self.spectrum.eigenvalues.iter().copied().find(|&l| l > 0.0)
    }

    /// Membership in the positive invertible elements.
    pub fn is_strictly_positive(&self) -> bool {
        self.eig_floor > 0.0
    }

    pub fn op_norm(&self) -> f64 {
        self.max_eigenvalue()
    }

    pub fn trace(&self) -> f64 {
        self.spectrum.eigenvalues.iter().sum()
    }

    /// `self + eps * 1`, keeping the eigenbasis.
    pub fn shifted(&self, eps: f64) -> Result<Self> {
        let values: Vec<f64> = self.spectrum.eigenvalues.iter().map(|l| l + eps).collect();
        Self::from_spectrum(values, self.spectrum.eigenvectors.clone())
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        let values: Vec<f64> = self.spectrum.eigenvalues.iter().map(|l| l * c).collect();
        Self::from_spectrum(values, self.spectrum.eigenvectors.clone())
    }

    /// Spectral power `U diag(l^p) U*`.
    ///
    /// On the kernel `0^p = 0` for `p > 0` and `0^0 = 1`; negative powers of
    /// singular matrices are a domain error.
    pub fn power(&self, p: f64) -> Result<Self> {
        if !p.is_finite() {
            return Err(Error::Domain(format!("non-finite exponent {p}")));
        }
        if p < 0.0 && !self.is_strictly_positive() {
            return Err(Error::Domain(format!("negative power {p} of a singular matrix")));
        }
        let values: Vec<f64> = self
            .spectrum
            .eigenvalues
            .iter()
            .map(|&l| scalar_power(l, p))
            .collect();
        Ok(Self::from_spectrum_unchecked(values, self.spectrum.eigenvectors.clone()))
    }
}

fn scalar_power(l: f64, p: f64) -> f64 {
    if p == 0.0 {
        1.0
    } else if l == 0.0 {
        0.0
    } else {
        l.powf(p)
    }
}

pub fn power(a: &PositiveMatrix, p: f64) -> Result<PositiveMatrix> {
    a.power(p)
}

/// `|d| = (d^2)^{1/2}`.
pub fn abs_part(d: &HermitianMatrix) -> Result<PositiveMatrix> {
    let s = d.eigh()?;
    let values: Vec<f64> = s.eigenvalues.iter().map(|l| l.abs()).collect();
    PositiveMatrix::from_spectrum(values, s.eigenvectors)
}

/// Positive and negative parts `(d_+, d_-)` with `d = d_+ - d_-` and `d_+ d_- = 0`.
pub fn pos_neg_parts(d: &HermitianMatrix) -> Result<(PositiveMatrix, PositiveMatrix)> {
    let s = d.eigh()?;
    let plus: Vec<f64> = s.eigenvalues.iter().map(|l| l.max(0.0)).collect();
    let minus: Vec<f64> = s.eigenvalues.iter().map(|l| (-l).max(0.0)).collect();
    Ok((
        PositiveMatrix::from_spectrum(plus, s.eigenvectors.clone())?,
        PositiveMatrix::from_spectrum(minus, s.eigenvectors)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{frobenius, random_hermitian, random_psd, stream_rng, InstanceKind};

    #[test]
    fn identity_power_is_identity() {
        let r = PositiveMatrix::identity(4).power(7.5).unwrap();
        assert!(frobenius(&(r.as_matrix() - CMat::identity(4, 4))) < 1e-15);
    }

    #[test]
    fn diagonal_square_root() {
        let a = PositiveMatrix::from_diagonal(&[4.0, 9.0]).unwrap();
        let r = a.power(0.5).unwrap();
        let want = super::super::diag(&[2.0, 3.0]);
        assert!(frobenius(&(r.as_matrix() - want)) < 1e-15);
    }

    #[test]
    fn square_matches_product() {
        for seed in 0..20 {
            let a = random_psd(5, seed, InstanceKind::Generic);
            let sq = a.power(2.0).unwrap();
            let prod = a.as_matrix() * a.as_matrix();
            assert!(frobenius(&(sq.as_matrix() - &prod)) <= 1e-12 * frobenius(&prod));
        }
    }

    #[test]
    fn negative_power_of_singular_is_domain_error() {
        let a = PositiveMatrix::from_diagonal(&[0.0, 1.0]).unwrap();
        assert!(matches!(a.power(-0.5), Err(Error::Domain(_))));
        assert!(PositiveMatrix::from_diagonal(&[2.0, 1.0]).unwrap().power(-1.0).is_ok());
    }

    #[test]
    fn kernel_convention() {
        let a = PositiveMatrix::from_diagonal(&[0.0, 4.0]).unwrap();
        let r = a.power(0.5).unwrap();
        assert_eq!(r.spectrum().eigenvalues.as_slice(), &[0.0, 2.0]);
    }

    #[test]
    fn rejects_clearly_negative() {
        let h = HermitianMatrix::from_real_diagonal(&[1.0, -1e-3]);
        assert!(matches!(PositiveMatrix::new(h), Err(Error::NotPositive { .. })));
    }

    #[test]
    fn clamps_noise() {
        let h = HermitianMatrix::from_real_diagonal(&[1.0, -1e-13]);
        let p = PositiveMatrix::new(h).unwrap();
        assert_eq!(p.eig_floor(), 0.0);
        assert!(!p.is_strictly_positive());
    }

    #[test]
    fn pos_neg_parts_diagonal() {
        let d = HermitianMatrix::from_real_diagonal(&[1.0, -2.0]);
        let (p, m) = pos_neg_parts(&d).unwrap();
        assert!(frobenius(&(p.as_matrix() - super::super::diag(&[1.0, 0.0]))) < 1e-15);
        assert!(frobenius(&(m.as_matrix() - super::super::diag(&[0.0, 2.0]))) < 1e-15);
    }

    #[test]
    fn pos_neg_parts_of_psd() {
        let a = random_psd(4, 3, InstanceKind::Generic);
        let (p, m) = pos_neg_parts(a.base()).unwrap();
        assert!(frobenius(&(p.as_matrix() - a.as_matrix())) < 1e-12 * frobenius(a.as_matrix()));
        assert!(frobenius(m.as_matrix()) < 1e-12 * frobenius(a.as_matrix()));
    }

    #[test]
    fn pos_neg_parts_random() {
        let mut rng = stream_rng(11, 0);
        for _ in 0..50 {
            let d = random_hermitian(5, &mut rng);
            let (p, m) = pos_neg_parts(&d).unwrap();
            let nd = d.frobenius();
            assert!(frobenius(&(p.as_matrix() * m.as_matrix())) <= 1e-10 * nd * nd);
            assert!(frobenius(&(p.as_matrix() - m.as_matrix() - d.as_matrix())) <= 1e-10 * nd);
            let abs = abs_part(&d).unwrap();
            assert!(frobenius(&(abs.as_matrix() - p.as_matrix() - m.as_matrix())) <= 1e-10 * nd);
            let sq = PositiveMatrix::from_matrix(d.as_matrix() * d.as_matrix()).unwrap();
            let root = sq.power(0.5).unwrap();
            assert!(frobenius(&(root.as_matrix() - abs.as_matrix())) <= 1e-8 * nd);
        }
    }
}
