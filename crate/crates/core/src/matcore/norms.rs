use super::{frobenius, CMat, HermitianMatrix};
use crate::{Error, Result};

/// `Re tr(AB)`. The imaginary part vanishes for Hermitian operands.
pub fn trace_pair(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<f64> {
    a.check_same_dim(b)?;
    let product: CMat = a * b;
    let t = super::trace(&product);
    debug_assert!(
        t.im.abs() <= 1e-10 * frobenius(a.as_matrix()) * frobenius(b.as_matrix()) + f64::MIN_POSITIVE,
        "imaginary trace {} for Hermitian pair",
        t.im
    );
    Ok(t.re)
}

/// Schatten p-norm `(sum |l_i|^p)^{1/p}`; `p = inf` is the operator norm.
pub fn schatten_norm(a: &HermitianMatrix, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::Domain(format!("Schatten exponent {p} below 1")));
    }
    let s = a.eigh()?;
    Ok(schatten_from_eigenvalues(s.eigenvalues.as_slice(), p))
}

/// Schatten p-norm from a list of eigenvalues (or, for commutative
/// models, values with unit weights).
pub(crate) fn schatten_from_eigenvalues(values: &[f64], p: f64) -> f64 {
    let top = values.iter().map(|l| l.abs()).fold(0.0, f64::max);
    if p.is_infinite() || top == 0.0 {
        return top;
    }
    let sum: f64 = values.iter().map(|l| (l.abs() / top).powf(p)).sum();
    top * sum.powf(1.0 / p)
}

/// `tr|a|^p = ||a||_p^p` computed directly from eigenvalues.
pub(crate) fn trace_abs_power(a: &HermitianMatrix, p: f64) -> Result<f64> {
    let s = a.eigh()?;
    Ok(s.eigenvalues.iter().map(|l| l.abs().powf(p)).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{random_hermitian, random_psd, random_unitary, stream_rng, InstanceKind};
    use proptest::prelude::*;

    #[test]
    fn trace_pair_diagonal() {
        let v = trace_pair(&HermitianMatrix::identity(2), &HermitianMatrix::from_real_diagonal(&[3.0, 5.0])).unwrap();
        assert_eq!(v, 8.0);
    }

    #[test]
    fn trace_pair_orthogonal_projections() {
        let s = 0.5f64.sqrt();
        let p = HermitianMatrix::from_real_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let q = HermitianMatrix::from_real_rows(&[vec![0.5, -0.5], vec![-0.5, 0.5]]).unwrap();
        assert!(trace_pair(&p, &q).unwrap().abs() < 1e-15 * s);
    }

    #[test]
    fn trace_pair_dimension_mismatch() {
        let r = trace_pair(&HermitianMatrix::identity(2), &HermitianMatrix::identity(3));
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn trace_pair_elementwise_oracle() {
        for seed in 0..30 {
            let (a, b) = crate::matcore::random_psd_pair(4, seed, InstanceKind::Generic);
            let v = trace_pair(a.base(), b.base()).unwrap();
            let oracle: f64 = a
                .as_matrix()
                .iter()
                .zip(b.as_matrix().iter())
                .map(|(x, y)| (x * y.conj()).re)
                .sum();
            assert!(v >= 0.0);
            assert!((v - oracle).abs() <= 1e-12 * oracle.abs().max(1.0));
        }
    }

    #[test]
    fn schatten_examples() {
        let d = HermitianMatrix::from_real_diagonal(&[3.0, -4.0]);
        assert!((schatten_norm(&d, 2.0).unwrap() - 5.0).abs() < 1e-14);
        for p in [1.0, 1.5, 2.0, 7.0] {
            let v = schatten_norm(&HermitianMatrix::identity(5), p).unwrap();
            assert!((v - 5f64.powf(1.0 / p)).abs() < 1e-13);
        }
        assert_eq!(schatten_norm(&HermitianMatrix::identity(5), f64::INFINITY).unwrap(), 1.0);
        assert!(matches!(schatten_norm(&d, 0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn schatten_four_matches_trace_power() {
        let mut rng = stream_rng(5, 1);
        for _ in 0..20 {
            let a = random_hermitian(4, &mut rng);
            let a2 = HermitianMatrix::from_hermitian_part(&(a.as_matrix() * a.as_matrix()));
            let oracle = trace_pair(&a2, &a2).unwrap().powf(0.25);
            let v = schatten_norm(&a, 4.0).unwrap();
            assert!((v - oracle).abs() <= 1e-12 * oracle);
        }
    }

    #[test]
    fn trace_positivity_many_trials() {
        for seed in 0..10_000u64 {
            let dim = 2 + (seed % 4) as usize;
            let (a, b) = crate::matcore::random_psd_pair(dim, seed, InstanceKind::Generic);
            let v = trace_pair(a.base(), b.base()).unwrap();
            assert!(v >= -1e-12 * a.base().frobenius() * b.base().frobenius());
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn unitary_invariance(seed in any::<u64>(), p in 1.0f64..8.0, dim in 1usize..6) {
            let mut rng = stream_rng(seed, 0);
            let a = random_hermitian(dim, &mut rng);
            let u = random_unitary(dim, &mut rng);
            let rotated = HermitianMatrix::from_hermitian_part(&(&u * a.as_matrix() * u.adjoint()));
            let x = schatten_norm(&a, p).unwrap();
            let y = schatten_norm(&rotated, p).unwrap();
            prop_assert!((x - y).abs() <= 1e-10 * x.max(1e-300));
        }

        #[test]
        fn triangle_inequality(seed in any::<u64>(), p in 1.0f64..8.0, dim in 1usize..6) {
            let mut rng = stream_rng(seed, 0);
            let a = random_hermitian(dim, &mut rng);
            let b = random_hermitian(dim, &mut rng);
            let s = schatten_norm(&(&a + &b), p).unwrap();
            let bound = schatten_norm(&a, p).unwrap() + schatten_norm(&b, p).unwrap();
            prop_assert!(s <= bound * (1.0 + 1e-12));
        }

        #[test]
        fn holder_inequality(seed in any::<u64>(), p in 1.0f64..8.0, dim in 1usize..6) {
            let mut rng = stream_rng(seed, 0);
            let a = random_hermitian(dim, &mut rng);
            let b = random_hermitian(dim, &mut rng);
            let q = if p == 1.0 { f64::INFINITY } else { p / (p - 1.0) };
            let lhs = trace_pair(&a, &b).unwrap().abs();
            let rhs = schatten_norm(&a, p).unwrap() * schatten_norm(&b, q).unwrap();
            prop_assert!(lhs <= rhs + 1e-10 * rhs.max(1.0));
        }
    }

    #[test]
    fn psd_pair_generic_kind_is_psd() {
        let a = random_psd(3, 9, InstanceKind::Generic);
        assert!(a.eig_floor() >= 0.0);
    }
}
