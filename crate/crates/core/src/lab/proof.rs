//! Intermediate inequalities and identities of the case analysis:
//! `a >= b` with `p ∈ [2, 3]`, the split `α = a + δ₋ = b + δ₊`, and the
//! `p >= 3` telescoping identity followed by the commutative Jensen chain.

use serde::Serialize;

use super::checks::{power_of, require_p, same_dim, theorem_scale};
use crate::expectations::ce_spectral_averaging;
use crate::funcalc::{c_theta, QuadratureScheme};
use crate::matcore::{
    pos_neg_parts, re_trace_chain, re_trace_product, trace, trace_abs_power, trace_pair, CMat, HermitianMatrix, PositiveMatrix, Spectrum,
};
use crate::{Error, Result};

/// Log-spaced grid `s·10^k` for `k ∈ [-4, 4]`, `points` values.
pub fn log_t_grid(s: f64, points: usize) -> Vec<f64> {
    let s = s.max(f64::MIN_POSITIVE);
    let points = points.max(2);
    (0..points).map(|k| s * 10f64.powf(-4.0 + 8.0 * k as f64 / (points - 1) as f64)).collect()
}

/// `x(x+t)^{-1}` from a spectrum.
fn damped(s: &Spectrum, t: f64) -> CMat {
    s.map(|l| if l == 0.0 { 0.0 } else { l / (l + t) })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Case1aIntegrated {
    /// `τ(δ(a^{1+θ} − b^{1+θ}))` by spectral calculus.
    pub spectral_lhs: f64,
    /// The same quantity by integrating the `t`-integrand; `None` when the
    /// truncation leaves double range.
    pub quadrature_lhs: Option<f64>,
    /// `τ(δ^{2+θ})`.
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Case1aReport {
    /// Smallest `(integrand − bound)/scale` over the grid.
    pub min_residual: f64,
    pub worst_t: f64,
    /// `‖δ‖_F (‖δ‖_F + ‖b‖_F)`.
    pub scale: f64,
    pub integrated: Option<Case1aIntegrated>,
}

/// Integrand of `τ(δ(a^{1+θ} − b^{1+θ}))` at `t`, written as
/// `τ(δAδ) + τ(δ²B) − τ(δAδB)` with `A = a(a+t)^{-1}`, `B = b(b+t)^{-1}`.
/// This equals `τ(δ(δ + t²(a+t)^{-1} − t²(b+t)^{-1}))` without the
/// cancellation at large `t`.
fn case1a_integrand(delta: &CMat, sa: &Spectrum, sb: &Spectrum, t: f64) -> f64 {
    let a_part = damped(sa, t);
    let b_part = damped(sb, t);
    let dad = delta * &a_part * delta;
    let dd = delta * delta;
    trace(&dad).re + re_trace_product(&dd, &b_part) - re_trace_product(&dad, &b_part)
}

/// Pointwise lower bound `integrand(t) >= τ(δ³(δ+t)^{-1})` for `a = b + δ`,
/// `δ >= 0`, and the integrated conclusion for `θ ∈ (0, 1)`.
pub fn case1a_step_check(b: &PositiveMatrix, delta: &PositiveMatrix, theta: f64, ts: &[f64]) -> Result<Case1aReport> {
    same_dim(b, delta)?;
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::Domain(format!("θ must lie in [0, 1], got {theta}")));
    }
    let a = PositiveMatrix::new(b.base() + delta.base())?;
    let d = delta.as_matrix();
    let (sa, sb, sd) = (a.spectrum(), b.spectrum(), delta.spectrum());
    let scale = (delta.base().frobenius() * (delta.base().frobenius() + b.base().frobenius())).max(f64::MIN_POSITIVE);
    let bound = |t: f64| -> f64 { sd.eigenvalues.iter().map(|&l| l * l * l / (l + t)).sum() };
    let mut min_residual = f64::INFINITY;
    let mut worst_t = f64::NAN;
    for &t in ts {
        if !(t > 0.0) {
            return Err(Error::Domain(format!("grid points must be positive, got {t}")));
        }
        let r = (case1a_integrand(d, sa, sb, t) - bound(t)) / scale;
        if r < min_residual {
            min_residual = r;
            worst_t = t;
        }
    }
    let integrated = if theta > 0.0 && theta < 1.0 {
        let spectral_lhs = trace_pair(delta.base(), &(a.power(1.0 + theta)?.base() - b.power(1.0 + theta)?.base()))?;
        let rhs = trace_abs_power(delta.base(), 2.0 + theta)?;
        let quadrature_lhs = case1a_quadrature(d, &a, b, theta)?;
        Some(Case1aIntegrated { spectral_lhs, quadrature_lhs, rhs })
    } else {
        None
    };
    Ok(Case1aReport { min_residual, worst_t, scale, integrated })
}

fn case1a_quadrature(d: &CMat, a: &PositiveMatrix, b: &PositiveMatrix, theta: f64) -> Result<Option<f64>> {
    let Some(s_min) = [a.min_positive_eigenvalue(), b.min_positive_eigenvalue()].into_iter().flatten().reduce(f64::min)
    else {
        return Ok(Some(0.0));
    };
    let s_max = a.max_eigenvalue().max(b.max_eigenvalue());
    let scheme = QuadratureScheme::default();
    let Ok(nodes) = scheme.nodes(s_min, s_max, theta) else {
        return Ok(None);
    };
    let c = c_theta(theta)?;
    let sum: f64 = nodes
        .nodes
        .iter()
        .map(|&(t, w)| w * t.powf(theta) * case1a_integrand(d, a.spectrum(), b.spectrum(), t))
        .sum();
    Ok(Some(c * sum))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Case1bReport {
    /// The four terms of the expansion around `α`, in expansion order:
    /// `τ((a−α)(a^q−α^q))`, `τ((a−α)(α^q−b^q))`, `τ((α−b)(α^q−b^q))`,
    /// `τ((α−b)(a^q−α^q))` with `q = p − 1`.
    pub terms: [f64; 4],
    pub total: f64,
    /// `|Σ terms − total| / scale`.
    pub identity_residual: f64,
    /// Second and fourth terms divided by `scale`.
    pub cross_terms: [f64; 2],
    /// `(term₁ − τ(δ₋^p))/scale` and `(term₃ − τ(δ₊^p))/scale`.
    pub diagonal_margins: [f64; 2],
    pub scale: f64,
}

impl Case1bReport {
    pub fn min_margin(&self) -> f64 {
        self.cross_terms.iter().chain(&self.diagonal_margins).copied().fold(f64::INFINITY, f64::min)
    }
}

pub fn case1b_decomposition_check(a: &PositiveMatrix, b: &PositiveMatrix, p: f64) -> Result<Case1bReport> {
    require_p(p, 2.0)?;
    if p > 3.0 {
        return Err(Error::Domain(format!("the split around α needs p <= 3, got {p}")));
    }
    same_dim(a, b)?;
    let q = p - 1.0;
    let delta = a.base() - b.base();
    let (plus, minus) = pos_neg_parts(&delta)?;
    let alpha = PositiveMatrix::new(a.base() + minus.base())?;
    let (aq, bq, alq) = (power_of(a, q)?, power_of(b, q)?, power_of(&alpha, q)?);
    let a_minus_alpha = a.base() - alpha.base();
    let alpha_minus_b = alpha.base() - b.base();
    let terms = [
        trace_pair(&a_minus_alpha, &(&aq - &alq))?,
        trace_pair(&a_minus_alpha, &(&alq - &bq))?,
        trace_pair(&alpha_minus_b, &(&alq - &bq))?,
        trace_pair(&alpha_minus_b, &(&aq - &alq))?,
    ];
    let total = trace_pair(&delta, &(&aq - &bq))?;
    let scale = theorem_scale(a, b, p)?;
    Ok(Case1bReport {
        terms,
        total,
        identity_residual: (terms.iter().sum::<f64>() - total).abs() / scale,
        cross_terms: [terms[1] / scale, terms[3] / scale],
        diagonal_margins: [
            (terms[0] - trace_abs_power(minus.base(), p)?) / scale,
            (terms[2] - trace_abs_power(plus.base(), p)?) / scale,
        ],
        scale,
    })
}

/// `n = ⌊p − 2⌋`, the telescoping depth leaving an exponent `p − 1 − n ∈ [1, 2)`.
pub fn case2_default_depth(p: f64) -> Result<usize> {
    require_p(p, 3.0)?;
    Ok((p - 2.0).floor() as usize)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Case2IdentityReport {
    pub lhs: f64,
    pub rhs: f64,
    /// `|lhs − rhs| / scale`.
    pub residual: f64,
}

/// The telescoping identity
/// `τ(δ(a^{p−1}−b^{p−1})) = τ(δ(a^{p−1−n}−b^{p−1−n})b^n) + Σ_{k=1}^n τ(δ a^{p−1−k} δ b^{k−1})`.
pub fn case2_identity_check(a: &PositiveMatrix, b: &PositiveMatrix, p: f64, n: usize) -> Result<Case2IdentityReport> {
    require_p(p, 3.0)?;
    same_dim(a, b)?;
    let rest = p - 1.0 - n as f64;
    if n == 0 || !(1.0..2.0).contains(&rest) {
        return Err(Error::Domain(format!("depth {n} leaves exponent {rest} outside [1, 2) for p = {p}")));
    }
    let delta = a.base() - b.base();
    let d = delta.as_matrix();
    let lhs = trace_pair(&delta, &(&power_of(a, p - 1.0)? - &power_of(b, p - 1.0)?))?;
    let b_pow = |k: usize| -> Result<HermitianMatrix> {
        if k == 0 {
            Ok(HermitianMatrix::identity(b.dim()))
        } else {
            power_of(b, k as f64)
        }
    };
    let head = &power_of(a, rest)? - &power_of(b, rest)?;
    let mut rhs = re_trace_chain(&[d, head.as_matrix(), b_pow(n)?.as_matrix()]);
    for k in 1..=n {
        rhs += re_trace_chain(&[d, power_of(a, p - 1.0 - k as f64)?.as_matrix(), d, b_pow(k - 1)?.as_matrix()]);
    }
    let scale = theorem_scale(a, b, p)?;
    Ok(Case2IdentityReport { lhs, rhs, residual: (lhs - rhs).abs() / scale })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainLink {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Case2Chain {
    /// Each link asserts `lhs >= rhs`.
    pub links: Vec<ChainLink>,
    /// Smallest eigenvalues of `E b − δ₋` and `E(b+δ) − δ₊`, divided by scale.
    pub support_floors: [f64; 2],
    /// `|τ(δ²(δ₋^{p−2} + δ₊^{p−2})) − τ|δ|^p| / scale`.
    pub terminal_residual: f64,
    /// `τ(δ(a^{p−1}−b^{p−1}))`, the quantity the chain bounds from below.
    pub total: f64,
    /// `τ|δ|^p`, the final lower bound.
    pub final_bound: f64,
    pub scale: f64,
}

impl Case2Chain {
    /// Smallest `(lhs − rhs)/scale` over links and support floors.
    pub fn min_margin(&self) -> f64 {
        self.links
            .iter()
            .map(|l| (l.lhs - l.rhs) / self.scale)
            .chain(self.support_floors)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Every lower bound of the `p >= 3` argument on one instance, with
/// `E` the expectation onto the algebra generated by `δ = a − b`.
pub fn case2_conclusion_check(a: &PositiveMatrix, b: &PositiveMatrix, p: f64) -> Result<Case2Chain> {
    let n = case2_default_depth(p)?;
    same_dim(a, b)?;
    let theta = p - 2.0 - n as f64;
    let delta = a.base() - b.base();
    let d = delta.as_matrix();
    let dd = d * d;
    let e = ce_spectral_averaging(&delta)?;
    let (plus, minus) = pos_neg_parts(&delta)?;
    let eb = e.apply_positive(b)?;
    let ea = e.apply_positive(a)?;
    let alpha = p - 2.0;
    let sq = |x: &PositiveMatrix| -> Result<f64> { Ok(re_trace_product(&dd, power_of(x, alpha)?.as_matrix())) };

    let total = trace_pair(&delta, &(&power_of(a, p - 1.0)? - &power_of(b, p - 1.0)?))?;
    let head = &power_of(a, 1.0 + theta)? - &power_of(b, 1.0 + theta)?;
    let first = re_trace_chain(&[d, head.as_matrix(), power_of(b, n as f64)?.as_matrix()]);
    let (db, da, deb, dea) = (sq(b)?, sq(a)?, sq(&eb)?, sq(&ea)?);
    let tail = sq(&minus)? + sq(&plus)?;
    let final_bound = trace_abs_power(&delta, p)?;
    let scale = theorem_scale(a, b, p)?;
    let floor = |x: &PositiveMatrix, y: &PositiveMatrix| -> Result<f64> {
        Ok((x.base() - y.base()).eigh()?.min() / scale)
    };
    Ok(Case2Chain {
        links: vec![
            ChainLink { name: "drop_higher_terms", lhs: total, rhs: first + da },
            ChainLink { name: "resolvent_bound", lhs: first, rhs: db },
            ChainLink { name: "jensen_b", lhs: db, rhs: deb },
            ChainLink { name: "jensen_a", lhs: da, rhs: dea },
            ChainLink { name: "support_bounds", lhs: deb + dea, rhs: tail },
            ChainLink { name: "theorem", lhs: total, rhs: final_bound },
        ],
        support_floors: [floor(&eb, &minus)?, floor(&ea, &plus)?],
        terminal_residual: (tail - final_bound).abs() / scale,
        total,
        final_bound,
        scale,
    })
}
