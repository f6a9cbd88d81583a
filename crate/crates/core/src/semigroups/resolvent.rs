use serde::Serialize;

use super::{propagator, trace_row, Generator};
use crate::funcalc::quadrature::GaussLegendre;
use crate::funcalc::{SuperOperator, MAX_RESOLVENT_CONDITION};
use crate::matcore::{
    frobenius, max_abs, sample_psd, schatten_norm, trace_pair, CMat, HermitianMatrix, InstanceKind, LabRng,
    PositiveMatrix,
};
use crate::{Error, Result};

/// `R_λ = (λ − L)^{-1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Resolvent {
    lambda: f64,
    superop: SuperOperator,
    condition: f64,
}

fn one_norm(m: &CMat) -> f64 {
    (0..m.ncols()).map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

pub fn resolvent(g: &Generator, lambda: f64) -> Result<Resolvent> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::Domain(format!("resolvent parameter must be positive, got {lambda}")));
    }
    let n2 = g.dim() * g.dim();
    let shifted = CMat::identity(n2, n2).scale(lambda) - g.superop().matrix();
    let Some(inverse) = shifted.clone().lu().try_inverse() else {
        return Err(Error::Singular { condition: f64::INFINITY });
    };
    let condition = one_norm(&shifted) * one_norm(&inverse);
    if !(condition <= MAX_RESOLVENT_CONDITION) {
        return Err(Error::Singular { condition });
    }
    Ok(Resolvent { lambda, superop: SuperOperator::new(g.dim(), inverse)?, condition })
}

impl Resolvent {
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn superop(&self) -> &SuperOperator {
        &self.superop
    }

    /// 1-norm condition estimate of `λ − L`.
    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn apply(&self, x: &CMat) -> CMat {
        self.superop.apply(x)
    }

    /// `λ R_λ x`.
    pub fn averaged(&self, x: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix::from_hermitian_part(&self.apply(x.as_matrix())).scale(self.lambda)
    }

    /// Inverse residual and the positive/unital/trace-preserving checks for `λR_λ`.
    pub fn diagnostics(&self, g: &Generator, samples: usize, rng: &mut LabRng) -> Result<ResolventDiagnostics> {
        let n = g.dim();
        let n2 = n * n;
        let shifted = CMat::identity(n2, n2).scale(self.lambda) - g.superop().matrix();
        let inverse_residual = max_abs(&(shifted * self.superop.matrix() - CMat::identity(n2, n2)));
        let averaged = self.superop.scale(self.lambda);
        let unital_residual = max_abs(&(averaged.apply(&CMat::identity(n, n)) - CMat::identity(n, n)));
        let trace_residual = trace_row(&(&averaged - &SuperOperator::identity(n)));
        let mut positivity_floor = f64::INFINITY;
        for _ in 0..samples {
            let x = sample_psd(n, InstanceKind::Generic, rng);
            let y = self.averaged(x.base());
            positivity_floor = positivity_floor.min(y.eigh()?.min() / x.op_norm().max(f64::MIN_POSITIVE));
        }
        Ok(ResolventDiagnostics { inverse_residual, unital_residual, trace_residual, positivity_floor })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResolventDiagnostics {
    pub inverse_residual: f64,
    pub unital_residual: f64,
    pub trace_residual: f64,
    pub positivity_floor: f64,
}

impl ResolventDiagnostics {
    pub fn passes(&self) -> bool {
        self.inverse_residual <= 1e-10
            && self.unital_residual <= 1e-10
            && self.trace_residual <= 1e-10
            && self.positivity_floor >= -1e-10
    }
}

/// `∫_0^T e^{-λt} T_t x dt` with `e^{-λT} = 1e-12`, by 16-panel composite
/// Gauss-Legendre. Independent of the direct inverse.
pub fn laplace_resolvent_apply(g: &Generator, lambda: f64, x: &CMat) -> Result<CMat> {
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!("resolvent parameter must be positive, got {lambda}")));
    }
    const PANELS: usize = 16;
    let horizon = 1e12f64.ln() / lambda;
    let rule = GaussLegendre::new(24);
    let n = g.dim();
    let mut acc = CMat::zeros(n, n);
    for k in 0..PANELS {
        let a = horizon * k as f64 / PANELS as f64;
        let b = horizon * (k + 1) as f64 / PANELS as f64;
        for (t, w) in rule.on_interval(a, b) {
            acc += propagator(g, t)?.apply(x).scale(w * (-lambda * t).exp());
        }
    }
    Ok(acc)
}

/// Result of [`resolvent_defect_check`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DefectReport {
    /// `‖x − λR_λ x‖_p`.
    pub defect_norm: f64,
    /// `‖x‖_p`.
    pub input_norm: f64,
    /// `τ((x − λR_λ x)(λR_λ x)^{p-1})`.
    pub cross_term: f64,
}

impl DefectReport {
    /// Contraction and cross-term positivity, with slack `tol` relative to
    /// `‖x‖_p` and `‖x‖_p^p` respectively.
    pub fn holds(&self, p: f64, tol: f64) -> bool {
        let scale = self.input_norm.max(f64::MIN_POSITIVE);
        self.defect_norm <= self.input_norm + tol * scale && self.cross_term >= -tol * scale.powf(p)
    }
}

pub fn resolvent_defect_check(g: &Generator, lambda: f64, x: &PositiveMatrix, p: f64) -> Result<DefectReport> {
    if !(p >= 2.0) || !p.is_finite() {
        return Err(Error::Domain(format!("defect check needs finite p >= 2, got {p}")));
    }
    let r = resolvent(g, lambda)?;
    let averaged = PositiveMatrix::new(r.averaged(x.base()))?;
    let defect = x.base() - averaged.base();
    Ok(DefectReport {
        defect_norm: schatten_norm(&defect, p)?,
        input_norm: schatten_norm(x.base(), p)?,
        cross_term: trace_pair(&defect, averaged.power(p - 1.0)?.base())?,
    })
}

/// `‖(x − λR_λ x) − t(1 − tR_t) R_λ x‖_2` for each `t`.
pub fn resolvent_limit_residuals(g: &Generator, lambda: f64, x: &HermitianMatrix, ts: &[f64]) -> Result<Vec<f64>> {
    let r = resolvent(g, lambda)?;
    let defect = x.as_matrix() - r.apply(x.as_matrix()).scale(lambda);
    let rx = r.apply(x.as_matrix());
    ts.iter()
        .map(|&t| {
            let rt = resolvent(g, t)?;
            let approx = (&rx - rt.apply(&rx).scale(t)).scale(t);
            Ok(frobenius(&(&defect - approx)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expectations::{ce_block_sizes, ce_spectral_averaging};
    use crate::matcore::{random_hermitian, random_psd, stream_rng, C64};
    use crate::semigroups::{make_pinching_generator, GeneratorSpec};

    fn mixing(dim: usize, seed: u64) -> Generator {
        GeneratorSpec::UnitaryMixing { count: 2, rates: vec![0.8, 0.4], seed }.build(dim).unwrap()
    }

    #[test]
    fn zero_generator() {
        let g = GeneratorSpec::UnitaryMixing { count: 1, rates: vec![1.0], seed: 0 }.build(1).unwrap();
        let r = resolvent(&g, 4.0).unwrap();
        assert!((r.superop().matrix()[(0, 0)].re - 0.25).abs() < 1e-15);
        let x = random_psd(1, 0, InstanceKind::Generic);
        let d = resolvent_defect_check(&g, 4.0, &x, 3.0).unwrap();
        assert!(d.defect_norm < 1e-14 * d.input_norm);
    }

    #[test]
    fn rejects_nonpositive_lambda() {
        let g = mixing(2, 0);
        assert!(matches!(resolvent(&g, 0.0), Err(Error::Domain(_))));
        assert!(resolvent(&g, -1.0).is_err());
    }

    #[test]
    fn pinching_closed_form_and_fixed_points() {
        let mut rng = stream_rng(2, 0);
        let d = random_hermitian(3, &mut rng);
        let e = ce_spectral_averaging(&d).unwrap();
        let g = make_pinching_generator(e.clone()).unwrap();
        for lambda in [0.1, 0.7, 5.0] {
            let r = resolvent(&g, lambda).unwrap();
            let x = random_hermitian(3, &mut rng);
            let want = (&x + &e.apply_hermitian(&x).scale(1.0 / lambda)).scale(lambda / (lambda + 1.0));
            assert!((&r.averaged(&x) - &want).frobenius() <= 1e-10 * x.frobenius());
            let fixed = e.apply_hermitian(&x);
            assert!((&r.averaged(&fixed) - &fixed).frobenius() <= 1e-10 * x.frobenius());
        }
        let x = PositiveMatrix::new(e.apply_hermitian(random_psd(3, 1, InstanceKind::Generic).base())).unwrap();
        let report = resolvent_defect_check(&g, 0.7, &x, 3.5).unwrap();
        assert!(report.defect_norm <= 1e-10 * report.input_norm);
    }

    #[test]
    fn laplace_oracle_agrees() {
        let mut rng = stream_rng(5, 1);
        for (g, lambda) in [
            (mixing(2, 3), 0.7),
            (mixing(3, 4), 2.0),
            (make_pinching_generator(ce_block_sizes(&[1, 2], None).unwrap()).unwrap(), 0.7),
        ] {
            let n = g.dim();
            let x = random_hermitian(n, &mut rng).into_matrix()
                + random_hermitian(n, &mut rng).into_matrix() * C64::new(0.0, 1.0);
            let direct = resolvent(&g, lambda).unwrap().apply(&x);
            let oracle = laplace_resolvent_apply(&g, lambda, &x).unwrap();
            let rel = frobenius(&(&direct - &oracle)) / frobenius(&direct);
            assert!(rel <= 1e-6, "{rel:e}");
        }
    }

    #[test]
    fn averaged_resolvent_invariants() {
        let mut rng = stream_rng(7, 0);
        for lambda in [0.05, 0.7, 10.0] {
            let g = mixing(3, 8);
            let r = resolvent(&g, lambda).unwrap();
            let diag = r.diagnostics(&g, 5, &mut rng).unwrap();
            assert!(diag.passes(), "{diag:?}");
            for _ in 0..5 {
                let x = random_hermitian(3, &mut rng);
                let y = r.averaged(&x);
                for p in [2.0, 3.0, 4.0, f64::INFINITY] {
                    let a = schatten_norm(&y, p).unwrap();
                    let b = schatten_norm(&x, p).unwrap();
                    assert!(a <= b + 1e-9 * b, "λ={lambda} p={p}");
                }
            }
        }
    }

    #[test]
    fn defect_contract_on_random_inputs() {
        for trial in 0..50u64 {
            let g = mixing(3, trial);
            let x = random_psd(3, trial, InstanceKind::Generic);
            let report = resolvent_defect_check(&g, 0.7, &x, 3.5).unwrap();
            assert!(report.holds(3.5, 1e-9), "trial {trial}: {report:?}");
        }
    }

    #[test]
    fn limit_residuals_decrease() {
        let mut rng = stream_rng(9, 9);
        let g = mixing(3, 1);
        let x = random_hermitian(3, &mut rng);
        let res = resolvent_limit_residuals(&g, 0.7, &x, &[1e2, 1e3, 1e4]).unwrap();
        assert!(res[0] > res[1] && res[1] > res[2], "{res:?}");
        assert!(res[2] < 1e-3 * x.frobenius());
    }
}
