use super::ConditionalExpectation;
use crate::funcalc::{superop_power, SuperOperator};
use crate::matcore::{frobenius, HermitianMatrix, PositiveMatrix};
use crate::{Error, Result};

/// `E(x^α) − (E x)^α`, positive for `α ≥ 1` when the range of `E` is commutative.
pub fn jensen_gap(e: &ConditionalExpectation, x: &PositiveMatrix, alpha: f64) -> Result<HermitianMatrix> {
    if !(alpha >= 1.0) || !alpha.is_finite() {
        return Err(Error::Domain(format!("Jensen exponent must be >= 1, got {alpha}")));
    }
    if !e.has_commutative_range() {
        return Err(Error::Precondition("Jensen gap requires a commutative range".into()));
    }
    if x.dim() != e.dim() {
        return Err(Error::DimensionMismatch { expected: e.dim(), found: x.dim() });
    }
    let lhs = e.apply_hermitian(x.power(alpha)?.base());
    let rhs = e.apply_positive(x)?.power(alpha)?;
    Ok(&lhs - rhs.base())
}

/// The expectation as an orthogonal projection on the Hilbert-Schmidt space.
pub fn hs_projection_superop(e: &ConditionalExpectation) -> SuperOperator {
    SuperOperator::from_map(e.dim(), |x| e.apply(x))
}

/// `Ê S^α Ê − (Ê S Ê)^α` for an orthogonal projection `Ê` and `S ≥ 0`.
///
/// Both terms vanish off the range of `Ê`, so the full-space operator is the
/// gap restricted to that range.
pub fn operator_jensen_gap(e_hat: &SuperOperator, s: &SuperOperator, alpha: f64) -> Result<SuperOperator> {
    if !(1.0..=2.0).contains(&alpha) {
        return Err(Error::Domain(format!("operator Jensen exponent must lie in [1, 2], got {alpha}")));
    }
    compression_gap(e_hat, s, alpha)
}

/// `Ê S^α Ê − (Ê S Ê)^α` for any `α >= 0`; for `α ∈ (0, 1)` the order reverses.
pub(crate) fn compression_gap(e_hat: &SuperOperator, s: &SuperOperator, alpha: f64) -> Result<SuperOperator> {
    if e_hat.dim() != s.dim() {
        return Err(Error::DimensionMismatch { expected: e_hat.dim(), found: s.dim() });
    }
    let idem = frobenius((&(e_hat * e_hat) - e_hat).matrix());
    if !e_hat.is_self_adjoint() || idem > 1e-11 * e_hat.frobenius().max(1.0) {
        return Err(Error::Precondition("Ê is not an orthogonal projection".into()));
    }
    let powered = superop_power(s, alpha)?;
    let compressed = &(e_hat * s) * e_hat;
    let lhs = &(e_hat * &powered) * e_hat;
    let rhs = superop_power(&symmetrize(&compressed)?, alpha)?;
    symmetrize(&(&lhs - &rhs))
}

fn symmetrize(s: &SuperOperator) -> Result<SuperOperator> {
    let h = HermitianMatrix::from_hermitian_part(s.matrix());
    SuperOperator::from_lifted(s.dim(), &h)
}
