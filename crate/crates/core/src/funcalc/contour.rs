//! Holomorphic functional calculus on a circle in the right half-plane.

use std::f64::consts::PI;

use crate::matcore::{CMat, HermitianMatrix, PositiveMatrix, C64};
use crate::{Error, Result};

/// Circle `|z - center| = radius` discretized with `nodes` trapezoidal points.
#[derive(Clone, Debug, PartialEq)]
pub struct ContourSpec {
    pub center: f64,
    pub radius: f64,
    pub nodes: usize,
}

/// Default and lower bound on the trapezoidal node count.
pub const DEFAULT_CONTOUR_NODES: usize = 128;
/// Upper bound on the node count chosen by [`ContourSpec::for_spectrum`].
pub const MAX_CONTOUR_NODES: usize = 1 << 20;

impl ContourSpec {
    /// Circle around `[l_min, l_max] ⊂ (0, ∞)`.
    ///
    /// The center is the midpoint; the radius is the geometric mean of the
    /// half-width and the center, which balances the distance to the spectrum
    /// against the distance to the branch point at `0`. The node count is
    /// chosen so the geometric convergence factor reaches `1e-18`.
    pub fn for_spectrum(l_min: f64, l_max: f64) -> Result<Self> {
        if !(l_min > 0.0) || l_max < l_min {
            return Err(Error::Precondition(format!(
                "contour needs a spectrum inside (0, ∞), got [{l_min:e}, {l_max:e}]"
            )));
        }
        let center = 0.5 * (l_min + l_max);
        let half_width = 0.5 * (l_max - l_min);
        if half_width <= 1e-12 * center {
            return Ok(Self { center, radius: 0.5 * l_min, nodes: DEFAULT_CONTOUR_NODES });
        }
        let radius = (half_width * center).sqrt();
        let rate = (half_width / center).sqrt();
        let needed = (1e-18f64.ln() / rate.ln()).ceil();
        let nodes = if needed.is_finite() && needed < MAX_CONTOUR_NODES as f64 {
            (needed as usize).max(DEFAULT_CONTOUR_NODES).next_multiple_of(2)
        } else {
            MAX_CONTOUR_NODES
        };
        Ok(Self { center, radius, nodes })
    }

    pub fn for_matrix(a: &PositiveMatrix) -> Result<Self> {
        Self::for_spectrum(a.eig_floor(), a.max_eigenvalue())
    }

    /// Checks that the closed disk avoids `Re z <= 0` and that the spectrum
    /// lies strictly inside; returns the distance from the circle to the
    /// spectrum.
    pub fn validate(&self, a: &PositiveMatrix) -> Result<f64> {
        if !(self.radius > 0.0) || self.nodes < 2 {
            return Err(Error::Precondition(format!("degenerate contour {self:?}")));
        }
        if self.center - self.radius <= 0.0 {
            return Err(Error::Precondition(format!(
                "contour reaches Re z <= 0 (center {:e}, radius {:e})",
                self.center, self.radius
            )));
        }
        let reach = a
            .spectrum()
            .eigenvalues
            .iter()
            .map(|l| (l - self.center).abs())
            .fold(0.0, f64::max);
        let margin = self.radius - reach;
        if margin <= 1e-8 * self.radius {
            return Err(Error::Precondition(format!(
                "spectrum within {margin:e} of the contour (radius {:e})",
                self.radius
            )));
        }
        Ok(margin)
    }

    /// Points `z_k` and weights `r e^{iφ_k}/M`, so that
    /// `(1/2πi)∮ f(z) dz ≈ Σ_k w_k f(z_k)`.
    pub fn points(&self) -> impl Iterator<Item = (C64, C64)> + '_ {
        let m = self.nodes as f64;
        (0..self.nodes).map(move |k| {
            let phi = 2.0 * PI * (k as f64 + 0.5) / m;
            let e = C64::from_polar(1.0, phi);
            (C64::new(self.center, 0.0) + e * self.radius, e * (self.radius / m))
        })
    }
}

pub(crate) fn resolvent_at(z: C64, a: &CMat) -> Result<CMat> {
    let n = a.nrows();
    let mut m = -a.clone();
    for i in 0..n {
        m[(i, i)] += z;
    }
    m.lu().try_inverse().ok_or(Error::Singular { condition: f64::INFINITY })
}

/// `A^p = (1/2πi)∮ z^p (z − A)^{-1} dz` with the principal branch of `z^p`.
pub fn contour_power(a: &PositiveMatrix, p: f64, contour: &ContourSpec) -> Result<HermitianMatrix> {
    if !a.is_strictly_positive() {
        return Err(Error::Precondition("contour calculus needs a strictly positive matrix".into()));
    }
    contour.validate(a)?;
    let n = a.dim();
    let am = a.as_matrix();
    let mut acc = CMat::zeros(n, n);
    for (z, w) in contour.points() {
        let r = resolvent_at(z, am)?;
        acc += r * (z.powf(p) * w);
    }
    Ok(HermitianMatrix::from_hermitian_part(&acc))
}
