//! Fréchet derivative of `x ↦ x^p` on positive invertible matrices, by four
//! independent routes.

use serde::{Deserialize, Serialize};

use super::contour::{resolvent_at, ContourSpec};
use super::quadrature::graded_unit_rule;
use super::superop::{mixed_multiplication, superop_power};
use crate::matcore::{CMat, HermitianMatrix, PositiveMatrix, C64};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeMethod {
    /// Daleckii-Krein: Schur product with the divided-difference matrix.
    DividedDifference,
    /// `p ∫_0^1 (t L_x + (1-t) R_x)^{p-1}(h) dt`.
    SuperopIntegral,
    /// `(1/2πi) ∮ z^p (z-x)^{-1} h (z-x)^{-1} dz`.
    Contour,
    /// Central difference of `power(x + s h, p)`.
    FiniteDifference,
}

impl DerivativeMethod {
    pub const ALL: [DerivativeMethod; 4] = [
        DerivativeMethod::DividedDifference,
        DerivativeMethod::SuperopIntegral,
        DerivativeMethod::Contour,
        DerivativeMethod::FiniteDifference,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DerivativeMethod::DividedDifference => "divided_difference",
            DerivativeMethod::SuperopIntegral => "superop_integral",
            DerivativeMethod::Contour => "contour",
            DerivativeMethod::FiniteDifference => "finite_difference",
        }
    }
}

/// Gauss-Legendre nodes per panel for the superoperator integral.
const SUPEROP_NODES_PER_PANEL: usize = 16;

/// `f[a, b] = (a^p - b^p)/(a - b)`, or `p m^{p-1}` at the midpoint `m` when
/// `|a - b| <= 1e-8 (1 + |a| + |b|)`.
pub fn divided_difference(a: f64, b: f64, p: f64) -> f64 {
    if (a - b).abs() <= 1e-8 * (1.0 + a.abs() + b.abs()) {
        p * (0.5 * (a + b)).powf(p - 1.0)
    } else {
        (a.powf(p) - b.powf(p)) / (a - b)
    }
}

pub fn frechet_derivative(
    x: &PositiveMatrix,
    h: &HermitianMatrix,
    p: f64,
    method: DerivativeMethod,
) -> Result<HermitianMatrix> {
    if !(p >= 1.0) {
        return Err(Error::Domain(format!("derivative of x^p needs p >= 1, got {p}")));
    }
    if x.dim() != h.dim() {
        return Err(Error::DimensionMismatch { expected: x.dim(), found: h.dim() });
    }
    if !x.is_strictly_positive() {
        return Err(Error::Precondition("Fréchet derivative needs an invertible x".into()));
    }
    match method {
        DerivativeMethod::DividedDifference => Ok(by_divided_difference(x, h, p)),
        DerivativeMethod::SuperopIntegral => by_superop_integral(x, h, p),
        DerivativeMethod::Contour => by_contour(x, h, p, &ContourSpec::for_matrix(x)?),
        DerivativeMethod::FiniteDifference => by_finite_difference(x, h, p),
    }
}

fn by_divided_difference(x: &PositiveMatrix, h: &HermitianMatrix, p: f64) -> HermitianMatrix {
    let s = x.spectrum();
    let u = &s.eigenvectors;
    let lam = &s.eigenvalues;
    let n = x.dim();
    let mut ht = u.adjoint() * h.as_matrix() * u;
    for i in 0..n {
        for j in 0..n {
            ht[(i, j)] *= divided_difference(lam[i], lam[j], p);
        }
    }
    HermitianMatrix::from_hermitian_part(&(u * ht * u.adjoint()))
}

fn by_superop_integral(x: &PositiveMatrix, h: &HermitianMatrix, p: f64) -> Result<HermitianMatrix> {
    let n = x.dim();
    let condition = x.max_eigenvalue() / x.eig_floor();
    let mut acc = CMat::zeros(n, n);
    for (t, w) in graded_unit_rule(condition, SUPEROP_NODES_PER_PANEL) {
        let m = mixed_multiplication(x.base(), t);
        let powered = superop_power(&m, p - 1.0)?;
        acc += powered.apply(h.as_matrix()).scale(w);
    }
    Ok(HermitianMatrix::from_hermitian_part(&acc.scale(p)))
}

/// Contour route with an explicit circle.
pub fn by_contour(x: &PositiveMatrix, h: &HermitianMatrix, p: f64, contour: &ContourSpec) -> Result<HermitianMatrix> {
    contour.validate(x)?;
    let n = x.dim();
    let mut acc = CMat::zeros(n, n);
    for (z, w) in contour.points() {
        let r = resolvent_at(z, x.as_matrix())?;
        acc += (&r * h.as_matrix() * &r) * (z.powf(p) * w);
    }
    Ok(HermitianMatrix::from_hermitian_part(&acc))
}

/// Central-difference step `ε^{1/3} (1 + ||x||) / (1 + ||h||)`.
pub fn finite_difference_step(x: &PositiveMatrix, h: &HermitianMatrix) -> f64 {
    f64::EPSILON.cbrt() * (1.0 + x.op_norm()) / (1.0 + h.op_norm())
}

fn by_finite_difference(x: &PositiveMatrix, h: &HermitianMatrix, p: f64) -> Result<HermitianMatrix> {
    let s = finite_difference_step(x, h);
    let step = h.scale(s);
    let plus = PositiveMatrix::new(x.base() + &step)
        .map_err(|e| Error::Precondition(format!("x + s h left the positive cone: {e}")))?;
    let minus = PositiveMatrix::new(x.base() - &step)
        .map_err(|e| Error::Precondition(format!("x - s h left the positive cone: {e}")))?;
    let diff = plus.power(p)?.as_matrix() - minus.power(p)?.as_matrix();
    Ok(HermitianMatrix::from_hermitian_part(&diff.scale(0.5 / s)))
}

/// `(1/2πi)∮ z^p / ((z-a)(z-b)) dz` for scalars on the given circle; used to
/// check the divided-difference evaluation of the contour kernel.
pub fn scalar_contour_kernel(a: f64, b: f64, p: f64, contour: &ContourSpec) -> f64 {
    let (a, b) = (C64::new(a, 0.0), C64::new(b, 0.0));
    contour.points().map(|(z, w)| z.powf(p) / ((z - a) * (z - b)) * w).sum::<C64>().re
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcalc::quadrature::GaussLegendre;
    use crate::matcore::{frobenius, random_hermitian, random_psd, stream_rng, InstanceKind};

    fn rel(a: &HermitianMatrix, b: &HermitianMatrix) -> f64 {
        frobenius(&(a.as_matrix() - b.as_matrix())) / frobenius(b.as_matrix()).max(f64::MIN_POSITIVE)
    }

    #[test]
    fn euler_relation_all_methods() {
        let x = random_psd(3, 2, InstanceKind::SpectralGap);
        let p = 2.7;
        let want = x.power(p).unwrap().base().scale(p);
        for m in DerivativeMethod::ALL {
            let d = frechet_derivative(&x, x.base(), p, m).unwrap();
            let tol = if m == DerivativeMethod::FiniteDifference { 1e-6 } else { 1e-9 };
            assert!(rel(&d, &want) < tol, "{m:?}: {:e}", rel(&d, &want));
        }
    }

    #[test]
    fn commuting_diagonal_case() {
        let x = PositiveMatrix::from_diagonal(&[1.0, 2.0, 4.0]).unwrap();
        let h = HermitianMatrix::from_real_diagonal(&[0.5, -1.0, 2.0]);
        let p = 3.5;
        let want = HermitianMatrix::from_real_diagonal(&[
            p * 0.5,
            -p * 2f64.powf(p - 1.0),
            2.0 * p * 4f64.powf(p - 1.0),
        ]);
        for m in DerivativeMethod::ALL {
            let d = frechet_derivative(&x, &h, p, m).unwrap();
            let tol = if m == DerivativeMethod::FiniteDifference { 1e-6 } else { 1e-9 };
            assert!(rel(&d, &want) < tol, "{m:?}");
        }
    }

    #[test]
    fn cross_method_agreement() {
        let mut rng = stream_rng(99, 0);
        for seed in 0..4 {
            let x = random_psd(3, seed, InstanceKind::Generic).shifted(0.05).unwrap();
            let h = random_hermitian(3, &mut rng);
            let p = 3.5;
            let dd = frechet_derivative(&x, &h, p, DerivativeMethod::DividedDifference).unwrap();
            let si = frechet_derivative(&x, &h, p, DerivativeMethod::SuperopIntegral).unwrap();
            let ct = frechet_derivative(&x, &h, p, DerivativeMethod::Contour).unwrap();
            let fd = frechet_derivative(&x, &h, p, DerivativeMethod::FiniteDifference).unwrap();
            assert!(rel(&si, &dd) < 1e-7, "superop {:e}", rel(&si, &dd));
            assert!(rel(&ct, &dd) < 1e-7, "contour {:e}", rel(&ct, &dd));
            assert!(rel(&fd, &dd) < 1e-5, "fd {:e}", rel(&fd, &dd));
        }
    }

    #[test]
    fn linear_in_direction() {
        let mut rng = stream_rng(5, 5);
        let x = random_psd(3, 4, InstanceKind::SpectralGap);
        let h1 = random_hermitian(3, &mut rng);
        let h2 = random_hermitian(3, &mut rng);
        let alpha = -1.7;
        let combo = &h1.scale(alpha) + &h2;
        for m in [DerivativeMethod::DividedDifference, DerivativeMethod::SuperopIntegral, DerivativeMethod::Contour] {
            let d = frechet_derivative(&x, &combo, 2.4, m).unwrap();
            let e1 = frechet_derivative(&x, &h1, 2.4, m).unwrap();
            let e2 = frechet_derivative(&x, &h2, 2.4, m).unwrap();
            let lin = &e1.scale(alpha) + &e2;
            assert!(frobenius(&(d.as_matrix() - lin.as_matrix())) <= 1e-10 * frobenius(lin.as_matrix()));
        }
    }

    #[test]
    fn divided_difference_matches_segment_integral() {
        let rule = GaussLegendre::new(40);
        for &(a, b, p) in &[(1.0, 2.0, 3.5), (0.3, 5.0, 2.2), (2.0, 2.0, 4.1), (1.0, 1.0 + 1e-10, 3.0)] {
            let integral = p * rule.integrate(0.0, 1.0, |t| (t * a + (1.0 - t) * b).powf(p - 1.0));
            assert!((integral - divided_difference(a, b, p)).abs() <= 1e-10 * integral.abs());
        }
    }

    #[test]
    fn contour_kernel_is_divided_difference() {
        let c = ContourSpec::for_spectrum(0.5, 3.0).unwrap();
        for &(a, b) in &[(0.5, 3.0), (1.0, 2.0), (1.5, 1.5)] {
            let k = scalar_contour_kernel(a, b, 3.3, &c);
            let d = divided_difference(a, b, 3.3);
            assert!((k - d).abs() <= 1e-10 * d);
        }
    }

    #[test]
    fn preconditions() {
        let singular = PositiveMatrix::from_diagonal(&[0.0, 1.0]).unwrap();
        let h = HermitianMatrix::identity(2);
        assert!(matches!(
            frechet_derivative(&singular, &h, 2.0, DerivativeMethod::DividedDifference),
            Err(Error::Precondition(_))
        ));
        let x = PositiveMatrix::identity(2);
        assert!(frechet_derivative(&x, &h, 0.5, DerivativeMethod::Contour).is_err());
        assert!(frechet_derivative(&x, &HermitianMatrix::identity(3), 2.0, DerivativeMethod::Contour).is_err());
    }

    #[test]
    fn output_is_hermitian() {
        let mut rng = stream_rng(8, 1);
        let x = random_psd(4, 6, InstanceKind::SpectralGap);
        let h = random_hermitian(4, &mut rng);
        for m in DerivativeMethod::ALL {
            let d = frechet_derivative(&x, &h, 3.1, m).unwrap();
            let a = d.as_matrix();
            assert!(frobenius(&(a - a.adjoint())) <= 1e-10 * frobenius(a));
        }
    }
}
