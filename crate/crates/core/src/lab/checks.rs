use serde::Serialize;

use crate::expectations::ConditionalExpectation;
use crate::matcore::{
    hs_inner, schatten_norm, trace_abs_power, trace_pair, HermitianMatrix, PositiveMatrix, WeightedAtoms,
};
use crate::{Error, Result};

pub(crate) fn require_p(p: f64, min: f64) -> Result<()> {
    if !(p >= min) || !p.is_finite() {
        return Err(Error::Domain(format!("exponent must be finite and >= {min}, got {p}")));
    }
    Ok(())
}

pub(crate) fn same_dim(a: &PositiveMatrix, b: &PositiveMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    Ok(())
}

/// `x^q`, returning `x` itself for `q = 1` so the `p = 2` case stays exact.
pub(crate) fn power_of(x: &PositiveMatrix, q: f64) -> Result<HermitianMatrix> {
    if q == 1.0 {
        Ok(x.base().clone())
    } else {
        Ok(x.power(q)?.base().clone())
    }
}

fn classical_gap(a: f64, b: f64, p: f64) -> f64 {
    (a - b) * (a.powf(p - 1.0) - b.powf(p - 1.0)) - (a - b).abs().powf(p)
}

/// `(a−b)(a^{p−1}−b^{p−1}) − |a−b|^p` for scalars `a, b >= 0`.
pub fn classical_pointwise_check(a: f64, b: f64, p: f64) -> Result<f64> {
    require_p(p, 2.0)?;
    if !(a >= 0.0 && b >= 0.0) {
        return Err(Error::Domain(format!("scalars must be non-negative, got ({a}, {b})")));
    }
    Ok(classical_gap(a, b, p))
}

/// The pointwise gap integrated against the atom weights.
pub fn classical_integrated_check(a: &WeightedAtoms, b: &WeightedAtoms, p: f64) -> Result<f64> {
    if a.weights() != b.weights() {
        return Err(Error::Precondition("functions must live on the same atoms".into()));
    }
    let mut total = 0.0;
    for ((w, &x), &y) in a.weights().iter().zip(a.values()).zip(b.values()) {
        total += w * classical_pointwise_check(x, y, p)?;
    }
    Ok(total)
}

/// `τ((a−b)(a^{p−1}−b^{p−1})) − τ(|a−b|^p)`.
pub fn theorem_gap(a: &PositiveMatrix, b: &PositiveMatrix, p: f64) -> Result<f64> {
    require_p(p, 2.0)?;
    same_dim(a, b)?;
    let delta = a.base() - b.base();
    let rhs = trace_pair(&delta, &(&power_of(a, p - 1.0)? - &power_of(b, p - 1.0)?))?;
    Ok(rhs - trace_abs_power(&delta, p)?)
}

/// `max(1, ‖a‖_p^p + ‖b‖_p^p)`, the absolute scale for theorem tolerances.
pub fn theorem_scale(a: &PositiveMatrix, b: &PositiveMatrix, p: f64) -> Result<f64> {
    Ok((trace_abs_power(a.base(), p)? + trace_abs_power(b.base(), p)?).max(1.0))
}

/// `gap / ‖a−b‖_p^p`, or `0` when `a = b`.
pub fn normalized_theorem_gap(a: &PositiveMatrix, b: &PositiveMatrix, p: f64) -> Result<(f64, f64)> {
    let gap = theorem_gap(a, b, p)?;
    let norm = trace_abs_power(&(a.base() - b.base()), p)?;
    let normalized = if norm > 0.0 { gap / norm } else { 0.0 };
    Ok((gap, normalized))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DualityReport {
    /// `⟨a−b, φ(a)−φ(b)⟩ − ‖a−b‖_p^p`, pairing evaluated entrywise.
    pub gap: f64,
    pub theorem_gap: f64,
    /// `|gap − theorem_gap| / scale`.
    pub agreement_residual: f64,
    /// Largest relative residual of `‖φ(x)‖_{p'} = ‖x‖_p^{p−1}` over `x ∈ {a, b}`.
    pub norm_residual: f64,
}

/// Monotonicity of the duality map `φ = f_{p−1}` on the positive cone.
pub fn duality_monotonicity_check(a: &PositiveMatrix, b: &PositiveMatrix, p: f64) -> Result<DualityReport> {
    require_p(p, 2.0)?;
    same_dim(a, b)?;
    let phi_a = power_of(a, p - 1.0)?;
    let phi_b = power_of(b, p - 1.0)?;
    let delta = a.base() - b.base();
    let pairing = hs_inner(delta.as_matrix(), (&phi_a - &phi_b).as_matrix()).re;
    let gap = pairing - trace_abs_power(&delta, p)?;
    let theorem = theorem_gap(a, b, p)?;
    let scale = theorem_scale(a, b, p)?;
    let dual = p / (p - 1.0);
    let mut norm_residual: f64 = 0.0;
    for (x, phi) in [(a, &phi_a), (b, &phi_b)] {
        let want = schatten_norm(x.base(), p)?.powf(p - 1.0);
        let got = schatten_norm(phi, dual)?;
        if want > 0.0 {
            norm_residual = norm_residual.max((got - want).abs() / want);
        } else {
            norm_residual = norm_residual.max(got);
        }
    }
    Ok(DualityReport { gap, theorem_gap: theorem, agreement_residual: (gap - theorem).abs() / scale, norm_residual })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Corollary1Report {
    /// `‖x − Ex‖_p / ‖x‖_p` (`0` for `x = 0`).
    pub ratio: f64,
    /// `τ((x − Ex)(Ex)^{p−1}) / ‖x‖_p^p`.
    pub orthogonality: f64,
}

pub fn corollary1_ratio(x: &PositiveMatrix, e: &ConditionalExpectation, p: f64) -> Result<Corollary1Report> {
    require_p(p, 2.0)?;
    if x.dim() != e.dim() {
        return Err(Error::DimensionMismatch { expected: e.dim(), found: x.dim() });
    }
    let ex = e.apply_positive(x)?;
    let defect = x.base() - ex.base();
    let norm = schatten_norm(x.base(), p)?;
    if norm == 0.0 {
        return Ok(Corollary1Report { ratio: 0.0, orthogonality: 0.0 });
    }
    let cross = trace_pair(&defect, &power_of(&ex, p - 1.0)?)?;
    Ok(Corollary1Report { ratio: schatten_norm(&defect, p)? / norm, orthogonality: cross / norm.powf(p) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expectations::{ce_block_sizes, ce_spectral_averaging};
    use crate::matcore::{random_psd_pair, InstanceKind};

    #[test]
    fn classical_examples() {
        assert_eq!(classical_pointwise_check(2.0, 1.0, 3.0).unwrap(), 2.0);
        assert_eq!(classical_pointwise_check(1.7, 1.7, 4.2).unwrap(), 0.0);
        assert!(classical_pointwise_check(-1.0, 1.0, 3.0).is_err());
        assert!(classical_pointwise_check(1.0, 1.0, 1.5).is_err());
    }

    #[test]
    fn classical_grid() {
        let mut min = f64::INFINITY;
        for i in 0..=100 {
            for j in 0..=100 {
                for k in 0..=24 {
                    let (a, b, p) = (i as f64 * 0.1, j as f64 * 0.1, 2.0 + k as f64 * 0.25);
                    let gap = classical_pointwise_check(a, b, p).unwrap();
                    let scale = a.max(b).powf(p).max(1.0);
                    min = min.min(gap / scale);
                }
            }
        }
        assert!(min >= -1e-12, "{min:e}");
    }

    #[test]
    fn integrated_form() {
        let a = WeightedAtoms::new(vec![0.5, 2.0], vec![2.0, 0.0]).unwrap();
        let b = a.with_values(vec![1.0, 1.0]).unwrap();
        assert_eq!(classical_integrated_check(&a, &b, 3.0).unwrap(), 0.5 * 2.0);
        let other = WeightedAtoms::new(vec![1.0, 1.0], vec![0.0, 0.0]).unwrap();
        assert!(classical_integrated_check(&a, &other, 3.0).is_err());
    }

    #[test]
    fn theorem_examples() {
        let a = PositiveMatrix::from_diagonal(&[2.0]).unwrap();
        let b = PositiveMatrix::from_diagonal(&[1.0]).unwrap();
        assert!((theorem_gap(&a, &b, 3.0).unwrap() - 2.0).abs() < 1e-12);
        let (x, y) = random_psd_pair(4, 3, InstanceKind::Generic);
        assert_eq!(theorem_gap(&x, &x, 3.3).unwrap(), 0.0);
        let (g2, n2) = normalized_theorem_gap(&x, &y, 2.0).unwrap();
        assert!(g2.abs() <= 1e-11 * theorem_scale(&x, &y, 2.0).unwrap() && n2.abs() <= 1e-11);
        assert!(theorem_gap(&x, &PositiveMatrix::identity(3), 3.0).is_err());
    }

    #[test]
    fn duality_examples() {
        let x = PositiveMatrix::from_diagonal(&[2.0, 3.0]).unwrap();
        let r = duality_monotonicity_check(&x, &x, 3.0).unwrap();
        assert_eq!(r.gap, 0.0);
        assert!(r.norm_residual < 1e-14);
        let want = 35f64.powf(2.0 / 3.0);
        let phi = x.power(2.0).unwrap();
        assert!((schatten_norm(phi.base(), 1.5).unwrap() - want).abs() < 1e-12 * want);
        for seed in 0..10 {
            let (a, b) = random_psd_pair(3, seed, InstanceKind::Generic);
            let r = duality_monotonicity_check(&a, &b, 3.7).unwrap();
            assert!(r.agreement_residual <= 1e-12 && r.norm_residual <= 1e-10, "{r:?}");
        }
    }

    #[test]
    fn corollary1_examples() {
        let scalars = ce_spectral_averaging(&HermitianMatrix::zeros(2)).unwrap();
        let x = PositiveMatrix::from_diagonal(&[1.0, 0.0]).unwrap();
        let r = corollary1_ratio(&x, &scalars, 2.0).unwrap();
        assert!((r.ratio - 0.5f64.sqrt()).abs() < 1e-15);
        let blocks = ce_block_sizes(&[1, 1], None).unwrap();
        let fixed = PositiveMatrix::from_diagonal(&[3.0, 1.0]).unwrap();
        assert_eq!(corollary1_ratio(&fixed, &blocks, 3.0).unwrap().ratio, 0.0);
        assert_eq!(corollary1_ratio(&PositiveMatrix::zeros(2), &blocks, 3.0).unwrap().ratio, 0.0);
    }
}
