use nclp_core::expectations::ce_spectral_averaging;
use nclp_core::funcalc::{c_theta, frechet_derivative, DerivativeMethod};
use nclp_core::matcore::{diag, frobenius, random_hermitian, sample_psd, stream_rng, InstanceKind};
use nclp_core::semigroups::{evolve, make_pinching_generator, pinching_closed_form, resolvent};
use nclp_core::{CMat, HermitianMatrix, PositiveMatrix, C64};

/// `1 / ∫_0^∞ t^{θ−1}/(1+t) dt` by composite Simpson in `y = ln t`.
fn c_theta_oracle(theta: f64) -> f64 {
    let (lo, hi, n) = (-40.0 / theta, 40.0 / (1.0 - theta), 400_000usize);
    let h = (hi - lo) / n as f64;
    let f = |y: f64| {
        // e^{θy}/(1+e^y), arranged to avoid overflow on either tail.
        if y > 0.0 {
            ((theta - 1.0) * y).exp() / (1.0 + (-y).exp())
        } else {
            (theta * y).exp() / (1.0 + y.exp())
        }
    };
    let mut sum = f(lo) + f(hi);
    for k in 1..n {
        sum += f(lo + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    1.0 / (sum * h / 3.0)
}

#[test]
fn c_theta_against_simpson() {
    for theta in [0.1, 0.25, 0.5, 0.75, 0.9] {
        let (got, want) = (c_theta(theta).unwrap(), c_theta_oracle(theta));
        assert!((got - want).abs() <= 1e-10, "θ = {theta}: {got} vs {want}");
    }
    assert!((c_theta(0.5).unwrap() - std::f64::consts::FRAC_1_PI).abs() <= 1e-15);
}

#[test]
fn frechet_on_diagonal_golden() {
    // x = diag(1, 4), h swaps the basis vectors, p = 3: the off-diagonal
    // entry is (4³ − 1³)/(4 − 1) = 21 and the diagonal vanishes.
    let x = PositiveMatrix::from_diagonal(&[1.0, 4.0]).unwrap();
    let h = HermitianMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
    let want = CMat::from_row_slice(2, 2, &[C64::new(0.0, 0.0), C64::new(21.0, 0.0), C64::new(21.0, 0.0), C64::new(0.0, 0.0)]);
    for m in DerivativeMethod::ALL {
        let got = frechet_derivative(&x, &h, 3.0, m).unwrap();
        let tol = if m == DerivativeMethod::FiniteDifference { 1e-5 } else { 1e-9 };
        assert!(frobenius(&(got.as_matrix() - &want)) <= tol * 21.0, "{}", m.name());
    }
    // Diagonal direction: derivative p x^{p−1} h.
    let e = HermitianMatrix::from_real_diagonal(&[1.0, 0.0]);
    let got = frechet_derivative(&x, &e, 2.5, DerivativeMethod::DividedDifference).unwrap();
    assert!(frobenius(&(got.as_matrix() - diag(&[2.5, 0.0]))) <= 1e-14);
}

#[test]
fn euler_relation() {
    for seed in 0..8 {
        let x = sample_psd(4, InstanceKind::SpectralGap, &mut stream_rng(seed, 0));
        for p in [1.5, 2.0, 3.3, 6.0] {
            let want = x.power(p).unwrap().base().scale(p);
            for m in [DerivativeMethod::DividedDifference, DerivativeMethod::SuperopIntegral, DerivativeMethod::Contour] {
                let got = frechet_derivative(&x, x.base(), p, m).unwrap();
                let rel = frobenius(&(got.as_matrix() - want.as_matrix())) / want.frobenius();
                assert!(rel <= 1e-9, "{} p = {p}: {rel:e}", m.name());
            }
        }
    }
}

#[test]
fn pinching_semigroup_closed_forms() {
    for seed in 0..5 {
        let mut rng = stream_rng(seed, 1);
        let e = ce_spectral_averaging(&random_hermitian(3, &mut rng)).unwrap();
        let g = make_pinching_generator(e.clone()).unwrap();
        let x = random_hermitian(3, &mut rng);
        for t in [0.0, 0.3, 2.0, 15.0] {
            let got = evolve(&g, t, &x).unwrap();
            let want = pinching_closed_form(&e, t, &x);
            assert!(frobenius(&(got.as_matrix() - want.as_matrix())) <= 1e-12 * (1.0 + x.frobenius()));
        }
        for lambda in [0.1, 1.0, 10.0] {
            let got = resolvent(&g, lambda).unwrap().averaged(&x);
            let ex = e.apply_hermitian(&x);
            let want = (&x + &ex.scale(1.0 / lambda)).scale(lambda / (lambda + 1.0));
            assert!(frobenius(&(got.as_matrix() - want.as_matrix())) <= 1e-12 * (1.0 + x.frobenius()));
        }
    }
}
