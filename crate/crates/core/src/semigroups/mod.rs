//! Trace-preserving, unital, positive semigroups `T_t = e^{tL}` on `M_N`,
//! their resolvents `R_λ = (λ − L)^{-1}`, and the contraction facts for
//! `x − λR_λ x`.

mod exp;
mod resolvent;

pub use exp::{evolve, expm, propagator};
pub use resolvent::{
    laplace_resolvent_apply, resolvent, resolvent_defect_check, resolvent_limit_residuals, DefectReport, Resolvent,
    ResolventDiagnostics,
};

use serde::{Deserialize, Serialize};

use crate::expectations::{ConditionalExpectation, ExpectationSpec};
use crate::funcalc::{vectorize, SuperOperator};
use crate::matcore::{
    max_abs, random_hermitian, random_unitary, sample_psd, stream_rng, trace, CMat, HermitianMatrix,
    InstanceKind, LabRng,
};
use crate::{Error, Result};

/// Largest matrix size `N` for which the lifted `N² x N²` generator is formed.
pub const MAX_GENERATOR_DIM: usize = 8;

#[derive(Clone, Debug, PartialEq)]
pub enum GeneratorKind {
    /// `L(x) = Σ r_j (u_j x u_j* − x)`.
    UnitaryMixing { unitaries: Vec<CMat>, rates: Vec<f64> },
    /// `L = E − Id`, so `T_t = e^{-t} Id + (1 − e^{-t}) E`.
    Pinching { expectation: ConditionalExpectation },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Generator {
    superop: SuperOperator,
    kind: GeneratorKind,
}

impl Generator {
    pub fn dim(&self) -> usize {
        self.superop.dim()
    }

    pub fn superop(&self) -> &SuperOperator {
        &self.superop
    }

    pub fn kind(&self) -> &GeneratorKind {
        &self.kind
    }

    pub fn apply(&self, x: &CMat) -> CMat {
        self.superop.apply(x)
    }

    /// Residuals of the generator and semigroup invariants on `samples`
    /// random inputs drawn from `rng`.
    pub fn diagnostics(&self, samples: usize, rng: &mut LabRng) -> Result<GeneratorDiagnostics> {
        let n = self.dim();
        let unital_residual = max_abs(&self.apply(&CMat::identity(n, n)));
        let mut trace_residual: f64 = 0.0;
        let mut hermiticity_residual: f64 = 0.0;
        let mut positivity_floor = f64::INFINITY;
        for _ in 0..samples {
            let x = random_hermitian(n, rng);
            let lx = self.apply(x.as_matrix());
            let scale = x.frobenius().max(1.0);
            trace_residual = trace_residual.max(trace(&lx).norm() / scale);
            hermiticity_residual = hermiticity_residual.max(max_abs(&(&lx - lx.adjoint())) / scale);
            let psd = sample_psd(n, InstanceKind::Generic, rng);
            for t in [0.1, 1.0, 10.0] {
                let evolved = evolve(self, t, psd.base())?;
                let floor = evolved.eigh()?.min() / psd.op_norm().max(f64::MIN_POSITIVE);
                positivity_floor = positivity_floor.min(floor);
            }
        }
        Ok(GeneratorDiagnostics { unital_residual, trace_residual, hermiticity_residual, positivity_floor })
    }
}

/// Invariant residuals; trace and Hermiticity residuals are relative to the
/// Frobenius norm of the input, the positivity floor to its operator norm.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeneratorDiagnostics {
    pub unital_residual: f64,
    pub trace_residual: f64,
    pub hermiticity_residual: f64,
    pub positivity_floor: f64,
}

impl GeneratorDiagnostics {
    pub fn passes(&self) -> bool {
        self.unital_residual <= 1e-11
            && self.trace_residual <= 1e-11
            && self.hermiticity_residual <= 1e-11
            && self.positivity_floor >= -1e-9
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n == 0 || n > MAX_GENERATOR_DIM {
        return Err(Error::Precondition(format!(
            "generator dimension {n} outside 1..={MAX_GENERATOR_DIM}"
        )));
    }
    Ok(())
}

pub fn make_unitary_mixing_generator(unitaries: Vec<CMat>, rates: Vec<f64>) -> Result<Generator> {
    let Some(first) = unitaries.first() else {
        return Err(Error::Precondition("unitary mixing needs at least one unitary".into()));
    };
    if unitaries.len() != rates.len() {
        return Err(Error::DimensionMismatch { expected: unitaries.len(), found: rates.len() });
    }
    let n = first.nrows();
    check_dim(n)?;
    let id = CMat::identity(n, n);
    let n2 = n * n;
    let mut matrix = CMat::zeros(n2, n2);
    for (j, (u, &r)) in unitaries.iter().zip(&rates).enumerate() {
        if u.nrows() != n || u.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: u.nrows() });
        }
        if max_abs(&(u.adjoint() * u - &id)) > 1e-10 {
            return Err(Error::Precondition(format!("matrix {j} is not unitary")));
        }
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::Domain(format!("rate {j} must be positive, got {r}")));
        }
        matrix += (u.conjugate().kronecker(u) - CMat::identity(n2, n2)).scale(r);
    }
    Ok(Generator { superop: SuperOperator::new(n, matrix)?, kind: GeneratorKind::UnitaryMixing { unitaries, rates } })
}

pub fn make_pinching_generator(expectation: ConditionalExpectation) -> Result<Generator> {
    let n = expectation.dim();
    check_dim(n)?;
    let superop = &SuperOperator::from_map(n, |x| expectation.apply(x)) - &SuperOperator::identity(n);
    Ok(Generator { superop, kind: GeneratorKind::Pinching { expectation } })
}

/// Closed form `e^{-t} x + (1 − e^{-t}) E(x)` of the pinching semigroup.
pub fn pinching_closed_form(e: &ConditionalExpectation, t: f64, x: &HermitianMatrix) -> HermitianMatrix {
    let decay = (-t).exp();
    &x.scale(decay) + &e.apply_hermitian(x).scale(1.0 - decay)
}

/// JSON description of a generator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorSpec {
    UnitaryMixing { count: usize, rates: Vec<f64>, seed: u64 },
    Pinching { expectation: ExpectationSpec },
}

impl GeneratorSpec {
    /// Builds the generator; `dim` sizes the random unitaries and must agree
    /// with the expectation for pinching generators.
    pub fn build(&self, dim: usize) -> Result<Generator> {
        match self {
            GeneratorSpec::UnitaryMixing { count, rates, seed } => {
                if *count != rates.len() {
                    return Err(Error::Config(format!("count {count} but {} rates", rates.len())));
                }
                check_dim(dim)?;
                let mut rng = stream_rng(*seed, 0);
                let unitaries = (0..*count).map(|_| random_unitary(dim, &mut rng)).collect();
                make_unitary_mixing_generator(unitaries, rates.clone())
            }
            GeneratorSpec::Pinching { expectation } => {
                let e = expectation.build()?;
                if e.dim() != dim {
                    return Err(Error::DimensionMismatch { expected: dim, found: e.dim() });
                }
                make_pinching_generator(e)
            }
        }
    }
}

/// `vec(1)* M`, the row whose vanishing means `M` annihilates the trace.
fn trace_row(m: &SuperOperator) -> f64 {
    let n = m.dim();
    let v = vectorize(&CMat::identity(n, n));
    (v.adjoint() * m.matrix()).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expectations::{ce_block_sizes, ce_spectral_averaging};
    use crate::matcore::C64;

    fn pauli_x() -> CMat {
        CMat::from_row_slice(2, 2, &[C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)])
    }

    #[test]
    fn identity_unitary_gives_zero() {
        let g = make_unitary_mixing_generator(vec![CMat::identity(3, 3)], vec![2.0]).unwrap();
        assert_eq!(g.superop().frobenius(), 0.0);
    }

    #[test]
    fn pauli_x_action() {
        let g = make_unitary_mixing_generator(vec![pauli_x()], vec![1.0]).unwrap();
        let x = crate::matcore::diag(&[0.3, 2.0]);
        let lx = g.apply(&x);
        assert!(crate::matcore::frobenius(&(lx - crate::matcore::diag(&[1.7, -1.7]))) < 1e-15);
    }

    #[test]
    fn rejects_bad_inputs() {
        let not_unitary = crate::matcore::diag(&[1.0, 2.0]);
        assert!(matches!(
            make_unitary_mixing_generator(vec![not_unitary], vec![1.0]),
            Err(Error::Precondition(_))
        ));
        assert!(make_unitary_mixing_generator(vec![pauli_x()], vec![-1.0]).is_err());
        assert!(make_unitary_mixing_generator(vec![pauli_x()], vec![]).is_err());
        assert!(make_pinching_generator(ConditionalExpectation::identity(9)).is_err());
    }

    #[test]
    fn invariant_suites() {
        let mut rng = stream_rng(11, 0);
        let spec = GeneratorSpec::UnitaryMixing { count: 3, rates: vec![0.5, 1.0, 0.25], seed: 4 };
        let mixing = spec.build(3).unwrap();
        let d = random_hermitian(3, &mut rng);
        let pinch = make_pinching_generator(ce_spectral_averaging(&d).unwrap()).unwrap();
        let blocks = make_pinching_generator(ce_block_sizes(&[1, 2], None).unwrap()).unwrap();
        for g in [mixing, pinch, blocks] {
            let diag = g.diagnostics(4, &mut rng).unwrap();
            assert!(diag.passes(), "{diag:?}");
            assert!(trace_row(g.superop()) < 1e-11);
        }
    }

    #[test]
    fn pinching_of_identity_is_zero() {
        let g = make_pinching_generator(ConditionalExpectation::identity(2)).unwrap();
        assert!(g.superop().frobenius() < 1e-15);
    }

    #[test]
    fn json_specs() {
        let g: GeneratorSpec =
            serde_json::from_str(r#"{"kind":"unitary_mixing","count":2,"rates":[1,2],"seed":5}"#).unwrap();
        assert_eq!(g.build(2).unwrap().dim(), 2);
        let p: GeneratorSpec =
            serde_json::from_str(r#"{"kind":"pinching","expectation":{"kind":"blocks","sizes":[1,1]}}"#).unwrap();
        assert!(p.build(2).is_ok());
        assert!(p.build(3).is_err());
        let bad = GeneratorSpec::UnitaryMixing { count: 2, rates: vec![1.0], seed: 0 };
        assert!(matches!(bad.build(2), Err(Error::Config(_))));
        let round: GeneratorSpec = serde_json::from_str(&serde_json::to_string(&g).unwrap()).unwrap();
        assert_eq!(round, g);
    }
}
