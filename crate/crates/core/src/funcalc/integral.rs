//! Fractional powers `s^{1+θ}` through the resolvent integral
//!
//! ```text
//! s^{1+θ} = c_θ ∫_0^∞ t^θ s²/(s+t) dt/t,    s²/(s+t) = s − t + t²/(s+t)
//! ```
//!
//! discretized with the substitution `t = e^y` and composite Gauss-Legendre.

use std::f64::consts::PI;

use super::quadrature::{composite, GaussLegendre};
use crate::matcore::{CMat, HermitianMatrix, PositiveMatrix, C64};
use crate::{Error, Result};

/// Normalizing constant `c_θ = sin(πθ)/π`, the reciprocal of
/// `∫_0^∞ t^{θ-1}/(1+t) dt`.
pub fn c_theta(theta: f64) -> Result<f64> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::Domain(format!("c_theta needs 0 < θ < 1, got {theta}")));
    }
    Ok((PI * theta).sin() / PI)
}

/// Log-substituted composite Gauss-Legendre scheme for the resolvent integral.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureScheme {
    /// Width of each panel in `y = ln t`.
    pub panel_width: f64,
    pub nodes_per_panel: usize,
    /// Truncate where the integrand drops below this fraction of its peak.
    pub decay: f64,
}

impl Default for QuadratureScheme {
    fn default() -> Self {
        Self { panel_width: 2.0, nodes_per_panel: 32, decay: 1e-16 }
    }
}

/// Integration nodes `(t, weight)` where the weight already includes `dy = dt/t`.
#[derive(Clone, Debug)]
pub struct ResolventNodes {
    pub y_min: f64,
    pub y_max: f64,
    pub nodes: Vec<(f64, f64)>,
}

impl QuadratureScheme {
    /// Truncation interval in `y` for spectra inside `[s_min, s_max]`.
    ///
    /// Near `0` the integrand behaves like `s t^θ`, near `∞` like
    /// `s² t^{θ-1}`; both tails are cut where they fall below `decay` times
    /// the peak `~ s^{1+θ}`.
    pub fn bounds(&self, s_min: f64, s_max: f64, theta: f64) -> Result<(f64, f64)> {
        let log_decay = self.decay.ln();
        let y_min = s_min.ln() + log_decay / theta;
        let y_max = s_max.ln() - log_decay / (1.0 - theta);
        if y_min < -700.0 || y_max > 700.0 {
            return Err(Error::Quadrature(format!(
                "truncation [{y_min:.1}, {y_max:.1}] in ln t leaves double range for θ = {theta}"
            )));
        }
        Ok((y_min, y_max))
    }

    pub fn nodes(&self, s_min: f64, s_max: f64, theta: f64) -> Result<ResolventNodes> {
        let (y_min, y_max) = self.bounds(s_min, s_max, theta)?;
        let panels = ((y_max - y_min) / self.panel_width).ceil().max(1.0) as usize;
        let breaks: Vec<f64> =
            (0..=panels).map(|k| y_min + (y_max - y_min) * k as f64 / panels as f64).collect();
        let rule = GaussLegendre::new(self.nodes_per_panel);
        let nodes = composite(&rule, &breaks).into_iter().map(|(y, w)| (y.exp(), w)).collect();
        Ok(ResolventNodes { y_min, y_max, nodes })
    }

    /// Scalar evaluation of `s^{1+θ}` with this scheme.
    pub fn scalar_power(&self, s: f64, theta: f64) -> Result<f64> {
        let c = c_theta(theta)?;
        if s == 0.0 {
            return Ok(0.0);
        }
        let nodes = self.nodes(s, s, theta)?;
        let sum: f64 = nodes
            .nodes
            .iter()
            .map(|&(t, w)| {
                let g = if t <= s { s - t + t * t / (s + t) } else { s * s / (s + t) };
                w * t.powf(theta) * g
            })
            .sum();
        Ok(c * sum)
    }

    /// Reproduces `s^{1+θ}` for `s ∈ {1e-2, 1, 1e2}` and `θ ∈ {0.1, 0.5, 0.9}`
    /// within `1e-8` relative.
    pub fn self_test(&self) -> Result<()> {
        for &s in &[1e-2, 1.0, 1e2] {
            for &theta in &[0.1, 0.5, 0.9] {
                let got = self.scalar_power(s, theta)?;
                let want = s.powf(1.0 + theta);
                let rel = (got - want).abs() / want;
                if !(rel <= 1e-8) {
                    return Err(Error::Quadrature(format!(
                        "s = {s}, θ = {theta}: got {got:e}, want {want:e} (relative error {rel:e})"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Largest condition number accepted for `(A + t)^{-1}`.
pub const MAX_RESOLVENT_CONDITION: f64 = 1e14;

/// `A^{1+θ}` as `c_θ ∫ t^θ (A − t + t²(A+t)^{-1}) dt/t`.
///
/// For `t` above the spectrum the integrand is evaluated in the equivalent
/// form `A²(A+t)^{-1}`, which avoids cancelling two terms of size `t`.
pub fn power_integral(a: &PositiveMatrix, one_plus_theta: f64, scheme: &QuadratureScheme) -> Result<PositiveMatrix> {
    let theta = one_plus_theta - 1.0;
    let c = c_theta(theta)?;
    scheme.self_test()?;
    let n = a.dim();
    let Some(s_min) = a.min_positive_eigenvalue() else {
        return Ok(PositiveMatrix::zeros(n));
    };
    let s_max = a.max_eigenvalue();
    let rn = scheme.nodes(s_min, s_max, theta)?;
    debug_assert!(rn.y_min <= (s_min / 1e3).ln() && rn.y_max >= (s_max * 1e3).ln());

    let am = a.as_matrix();
    let a_sq = am * am;
    let mut acc = CMat::zeros(n, n);
    for &(t, w) in &rn.nodes {
        let condition = (s_max + t) / (s_min + t);
        if condition > MAX_RESOLVENT_CONDITION {
            return Err(Error::Singular { condition });
        }
        let mut shifted = am.clone();
        for i in 0..n {
            shifted[(i, i)] += C64::new(t, 0.0);
        }
        let resolvent = shifted.lu().try_inverse().ok_or(Error::Singular { condition })?;
        let integrand = if t <= s_max {
            let mut g = am + resolvent.scale(t * t);
            for i in 0..n {
                g[(i, i)] -= C64::new(t, 0.0);
            }
            g
        } else {
            &a_sq * resolvent
        };
        acc += integrand.scale(w * t.powf(theta));
    }
    PositiveMatrix::new(HermitianMatrix::from_hermitian_part(&acc.scale(c)))
}
