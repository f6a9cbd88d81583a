//! The `p ∈ [3, 4]` argument through the derivative of `f_{p−1}` and the
//! operator Jensen inequality for `Ê`, and its failure for `p ∈ (2, 3)`.

use rand::Rng;
use serde::Serialize;

use super::checks::{power_of, require_p, same_dim, theorem_scale};
use crate::expectations::{ce_spectral_averaging, compression_gap, hs_projection_superop, operator_jensen_gap};
use crate::funcalc::quadrature::GaussLegendre;
use crate::funcalc::mixed_multiplication;
use crate::matcore::{
    hs_inner, instance_rng, sample_psd_pair, trace_abs_power, trace_pair, HermitianMatrix, InstanceKind,
    PositiveMatrix,
};
use crate::{Error, Result};

/// Default Gauss-Legendre order per axis for the `(t, u)` integral.
pub const ALT_QUADRATURE_NODES: usize = 48;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AltProofReport {
    /// Shift added to both inputs to make them invertible (`0` if none).
    pub epsilon: f64,
    /// `τ(δ(a^{p−1}−b^{p−1}))` by spectral calculus.
    pub direct: f64,
    /// `(p−1)∫∫⟨δ, (tL_x + (1−t)R_x)^{p−2} δ⟩ dt du`, `x = b + uδ`.
    pub representation: f64,
    /// `|representation − direct| / |direct|`.
    pub representation_residual: f64,
    /// `τ(δ((E b + δ)^{p−1} − (E b)^{p−1}))`.
    pub pinched: f64,
    /// `τ|δ|^p`.
    pub abs_power: f64,
    /// Smallest `⟨δ, (Ê M^{p−2} Ê − (Ê M Ê)^{p−2}) δ⟩ / scale` over the sample grid.
    pub pointwise_min: f64,
    /// Smallest eigenvalue of the operator Jensen gap over the grid, relative to `‖M‖^{p−2}`.
    pub jensen_floor: f64,
    pub scale: f64,
}

impl AltProofReport {
    /// Smallest normalized margin of the chain `direct >= pinched >= abs_power`
    /// and the sampled pointwise links.
    pub fn min_margin(&self) -> f64 {
        [(self.direct - self.pinched) / self.scale, (self.pinched - self.abs_power) / self.scale, self.pointwise_min]
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }
}

/// `t ↦ ⟨δ, (tL_x + (1−t)R_x)^α δ⟩`, evaluated in the eigenbasis of `x`.
struct QuadraticForm {
    weights: Vec<(f64, f64, f64)>,
    alpha: f64,
}

impl QuadraticForm {
    fn new(delta: &HermitianMatrix, x: &HermitianMatrix, alpha: f64) -> Result<Self> {
        let s = x.eigh()?;
        let u = &s.eigenvectors;
        let rotated = u.adjoint() * delta.as_matrix() * u;
        let lam = &s.eigenvalues;
        let n = x.dim();
        let mut weights = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                weights.push((rotated[(i, j)].norm_sqr(), lam[i], lam[j]));
            }
        }
        Ok(Self { weights, alpha })
    }

    fn at(&self, t: f64) -> f64 {
        self.weights
            .iter()
            .map(|&(w, li, lj)| {
                let m = (t * li + (1.0 - t) * lj).max(0.0);
                w * if self.alpha == 1.0 { m } else { m.powf(self.alpha) }
            })
            .sum()
    }
}

pub fn alt_proof_check(a: &PositiveMatrix, b: &PositiveMatrix, p: f64, eps: f64, nodes: usize) -> Result<AltProofReport> {
    require_p(p, 3.0)?;
    if p > 4.0 {
        return Err(Error::Domain(format!("the operator convexity argument needs p <= 4, got {p}")));
    }
    same_dim(a, b)?;
    let (a, b, epsilon) = if a.is_strictly_positive() && b.is_strictly_positive() {
        (a.clone(), b.clone(), 0.0)
    } else {
        let shift = eps * a.op_norm().max(b.op_norm()).max(1.0);
        (a.shifted(shift)?, b.shifted(shift)?, shift)
    };
    let alpha = p - 2.0;
    let delta = a.base() - b.base();
    let direct = trace_pair(&delta, &(&power_of(&a, p - 1.0)? - &power_of(&b, p - 1.0)?))?;

    let rule = GaussLegendre::new(nodes);
    let mut representation = 0.0;
    for (u, wu) in rule.on_interval(0.0, 1.0) {
        let form = QuadraticForm::new(&delta, &(b.base() + &delta.scale(u)), alpha)?;
        for (t, wt) in rule.on_interval(0.0, 1.0) {
            representation += wu * wt * form.at(t);
        }
    }
    representation *= p - 1.0;
    let representation_residual =
        if direct != 0.0 { (representation - direct).abs() / direct.abs() } else { representation.abs() };

    let e = ce_spectral_averaging(&delta)?;
    let eb = e.apply_positive(&b)?;
    let ebd = PositiveMatrix::new(eb.base() + &delta)?;
    let pinched = trace_pair(&delta, &(&power_of(&ebd, p - 1.0)? - &power_of(&eb, p - 1.0)?))?;
    let abs_power = trace_abs_power(&delta, p)?;
    let scale = theorem_scale(&a, &b, p)?;

    let e_hat = hs_projection_superop(&e);
    let mut pointwise_min = f64::INFINITY;
    let mut jensen_floor = f64::INFINITY;
    for u in [0.25, 0.5, 0.75] {
        let x = b.base() + &delta.scale(u);
        for t in [0.25, 0.5, 0.75] {
            let m = mixed_multiplication(&x, t);
            let gap = operator_jensen_gap(&e_hat, &m, alpha)?;
            let form = hs_inner(delta.as_matrix(), &gap.apply(delta.as_matrix())).re;
            pointwise_min = pointwise_min.min(form / scale);
            let floor = HermitianMatrix::from_hermitian_part(gap.matrix()).eigh()?.min();
            jensen_floor = jensen_floor.min(floor / m.norm().powf(alpha).max(f64::MIN_POSITIVE));
        }
    }
    Ok(AltProofReport {
        epsilon,
        direct,
        representation,
        representation_residual,
        pinched,
        abs_power,
        pointwise_min,
        jensen_floor,
        scale,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReversalWitness {
    pub seed: u64,
    pub trial: u64,
    pub dim: usize,
    pub p: f64,
    pub t: f64,
    pub u: f64,
    /// `⟨δ, (Ê S^α Ê − (Ê S Ê)^α) δ⟩ / (‖δ‖_2² ‖S‖^α)`.
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConcavityReport {
    pub p: f64,
    pub trials: u64,
    /// Largest eigenvalue of `Ê S^α Ê − (Ê S Ê)^α` relative to `‖S‖^α`; the
    /// reversed order holds when this is `<= 1e-9`.
    pub max_eigenvalue: f64,
    /// The most negative `δ`-quadratic form found.
    pub best_witness: Option<ReversalWitness>,
}

impl ConcavityReport {
    /// A witness strictly below `-1e-6`.
    pub fn witness_found(&self) -> bool {
        self.best_witness.as_ref().is_some_and(|w| w.value < -1e-6)
    }
}

/// One randomized instance of the concave case: `S = tL_x + (1−t)R_x` with
/// `x = b + uδ` and `Ê` the projection onto functions of `δ = a − b`.
pub fn concavity_instance(
    a: &PositiveMatrix,
    b: &PositiveMatrix,
    p: f64,
    t: f64,
    u: f64,
) -> Result<(f64, f64)> {
    if !(p > 2.0 && p < 3.0) {
        return Err(Error::Domain(format!("concave exponent needs p ∈ (2, 3), got {p}")));
    }
    same_dim(a, b)?;
    let alpha = p - 2.0;
    let delta = a.base() - b.base();
    let e_hat = hs_projection_superop(&ce_spectral_averaging(&delta)?);
    let x = b.base() + &delta.scale(u);
    let s = mixed_multiplication(&x, t);
    let scale = s.norm().powf(alpha).max(f64::MIN_POSITIVE);
    let gap = compression_gap(&e_hat, &s, alpha)?;
    let top = HermitianMatrix::from_hermitian_part(gap.matrix()).eigh()?.max() / scale;
    let dn = delta.frobenius();
    let form = if dn > 0.0 { hs_inner(delta.as_matrix(), &gap.apply(delta.as_matrix())).re / (dn * dn * scale) } else { 0.0 };
    Ok((top, form))
}

/// Randomized search for the reversal `Ê S^α Ê <= (Ê S Ê)^α`, `α = p − 2 ∈ (0, 1)`.
pub fn concavity_reversal_check(p: f64, dim: usize, seed: u64, trials: u64) -> Result<ConcavityReport> {
    let mut max_eigenvalue = f64::NEG_INFINITY;
    let mut best_witness: Option<ReversalWitness> = None;
    for trial in 0..trials {
        let mut rng = instance_rng(seed, dim, InstanceKind::Generic, trial);
        let (a, b) = sample_psd_pair(dim, InstanceKind::Generic, &mut rng);
        let t: f64 = rng.random();
        let u: f64 = rng.random();
        let (top, value) = concavity_instance(&a, &b, p, t, u)?;
        max_eigenvalue = max_eigenvalue.max(top);
        if best_witness.as_ref().is_none_or(|w| value < w.value) {
            best_witness = Some(ReversalWitness { seed, trial, dim, p, t, u, value });
        }
    }
    Ok(ConcavityReport { p, trials, max_eigenvalue, best_witness })
}
