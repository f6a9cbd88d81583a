use super::Generator;
use crate::funcalc::SuperOperator;
use crate::matcore::{frobenius, CMat, HermitianMatrix};
use crate::{Error, Result};

const MAX_TAYLOR_TERMS: usize = 64;

/// Matrix exponential by scaling and squaring: the argument is scaled to
/// 1-norm at most `1/2` and the Taylor series is summed until a term drops
/// below `1e-18` of the partial sum.
pub fn expm(a: &CMat) -> CMat {
    let n = a.nrows();
    let norm1 = (0..a.ncols()).map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max);
    let squarings = if norm1 > 0.5 { (norm1 / 0.5).log2().ceil() as u32 } else { 0 };
    let scaled = a.scale(0.5f64.powi(squarings as i32));
    let mut sum = CMat::identity(n, n);
    let mut term = CMat::identity(n, n);
    for k in 1..=MAX_TAYLOR_TERMS {
        term = &term * &scaled / crate::matcore::C64::new(k as f64, 0.0);
        sum += &term;
        if frobenius(&term) < 1e-18 * frobenius(&sum) {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// `T_t = e^{tL}` as a superoperator.
pub fn propagator(g: &Generator, t: f64) -> Result<SuperOperator> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("evolution time must be finite and >= 0, got {t}")));
    }
    SuperOperator::new(g.dim(), expm(&g.superop().matrix().scale(t)))
}

/// `T_t x`.
pub fn evolve(g: &Generator, t: f64, x: &HermitianMatrix) -> Result<HermitianMatrix> {
    if x.dim() != g.dim() {
        return Err(Error::DimensionMismatch { expected: g.dim(), found: x.dim() });
    }
    Ok(HermitianMatrix::from_hermitian_part(&propagator(g, t)?.apply(x.as_matrix())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expectations::ce_spectral_averaging;
    use crate::matcore::{random_hermitian, stream_rng, C64};
    use crate::semigroups::{make_pinching_generator, pinching_closed_form, GeneratorSpec};

    #[test]
    fn scalar_and_nilpotent() {
        let a = CMat::from_element(1, 1, C64::new(-3.0, 0.0));
        assert!((expm(&a)[(0, 0)].re - (-3.0f64).exp()).abs() < 1e-15);
        let mut nil = CMat::zeros(2, 2);
        nil[(0, 1)] = C64::new(5.0, 0.0);
        let e = expm(&nil);
        assert!((e[(0, 1)].re - 5.0).abs() < 1e-13 && (e[(0, 0)].re - 1.0).abs() < 1e-14);
        let rot = CMat::from_row_slice(2, 2, &[C64::new(0.0, 0.0), C64::new(-2.0, 0.0), C64::new(2.0, 0.0), C64::new(0.0, 0.0)]);
        let r = expm(&rot);
        assert!((r[(0, 0)].re - 2.0f64.cos()).abs() < 1e-14 && (r[(1, 0)].re - 2.0f64.sin()).abs() < 1e-14);
    }

    #[test]
    fn evolve_examples() {
        let mut rng = stream_rng(3, 3);
        let g = GeneratorSpec::UnitaryMixing { count: 2, rates: vec![1.0, 0.3], seed: 9 }.build(3).unwrap();
        let x = random_hermitian(3, &mut rng);
        assert!(frobenius(&(evolve(&g, 0.0, &x).unwrap().as_matrix() - x.as_matrix())) < 1e-15);
        assert!(evolve(&g, -1.0, &x).is_err());
        let zero = GeneratorSpec::UnitaryMixing { count: 1, rates: vec![1.0], seed: 0 }.build(1).unwrap();
        let y = HermitianMatrix::from_real_diagonal(&[2.5]);
        assert!(frobenius(&(evolve(&zero, 7.0, &y).unwrap().as_matrix() - y.as_matrix())) < 1e-14);
        for (s, t) in [(0.3, 0.9), (2.0, 5.0)] {
            let lhs = evolve(&g, s + t, &x).unwrap();
            let rhs = evolve(&g, s, &evolve(&g, t, &x).unwrap()).unwrap();
            assert!((&lhs - &rhs).frobenius() <= 1e-9 * x.frobenius());
            assert!((lhs.trace() - x.trace()).abs() <= 1e-10 * x.frobenius());
        }
    }

    #[test]
    fn pinching_matches_closed_form() {
        let mut rng = stream_rng(4, 0);
        let d = random_hermitian(3, &mut rng);
        let e = ce_spectral_averaging(&d).unwrap();
        let g = make_pinching_generator(e.clone()).unwrap();
        let x = random_hermitian(3, &mut rng);
        for t in [0.0, 0.5, 3.0, 40.0] {
            let got = evolve(&g, t, &x).unwrap();
            let want = pinching_closed_form(&e, t, &x);
            assert!((&got - &want).frobenius() <= 1e-10 * x.frobenius(), "t = {t}");
        }
        let far = evolve(&g, 40.0, &x).unwrap();
        assert!((&far - &e.apply_hermitian(&x)).frobenius() <= 1e-8 * x.frobenius());
    }
}
