use serde::{Deserialize, Serialize};

use super::HermitianMatrix;
use crate::{Error, Result};

/// A function on finitely many weighted atoms: the commutative model of a
/// finite measure space. `tr(x) = sum mu_i x_i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AtomsRepr", into = "AtomsRepr")]
pub struct WeightedAtoms {
    weights: Vec<f64>,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AtomsRepr {
    weights: Vec<f64>,
    values: Vec<f64>,
}

impl TryFrom<AtomsRepr> for WeightedAtoms {
    type Error = Error;
    fn try_from(r: AtomsRepr) -> Result<Self> {
        WeightedAtoms::new(r.weights, r.values)
    }
}

impl From<WeightedAtoms> for AtomsRepr {
    fn from(w: WeightedAtoms) -> Self {
        AtomsRepr { weights: w.weights, values: w.values }
    }
}

impl WeightedAtoms {
    pub fn new(weights: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if weights.len() != values.len() {
            return Err(Error::DimensionMismatch { expected: weights.len(), found: values.len() });
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
            return Err(Error::Domain(format!("atom weight {w} is not positive")));
        }
        Ok(Self { weights, values })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Same weights, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.weights.clone(), values)
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Self {
        Self { weights: self.weights.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn trace(&self) -> f64 {
        self.weights.iter().zip(&self.values).map(|(w, v)| w * v).sum()
    }

    /// `(sum mu_i |x_i|^p)^{1/p}`, with `p = inf` the maximum over atoms.
    pub fn norm(&self, p: f64) -> Result<f64> {
        if !(p >= 1.0) {
            return Err(Error::Domain(format!("L_p exponent {p} below 1")));
        }
        if p.is_infinite() {
            return Ok(self.values.iter().map(|v| v.abs()).fold(0.0, f64::max));
        }
        let s: f64 = self.weights.iter().zip(&self.values).map(|(w, v)| w * v.abs().powf(p)).sum();
        Ok(s.powf(1.0 / p))
    }

    /// Diagonal matrix repeating value `i` `multiplicities[i]` times. When the
    /// weights are proportional to the multiplicities, the matrix trace is the
    /// atom trace divided by the proportionality constant.
    pub fn diagonal_embedding(&self, multiplicities: &[usize]) -> Result<HermitianMatrix> {
        if multiplicities.len() != self.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), found: multiplicities.len() });
        }
        let diag: Vec<f64> = self
            .values
            .iter()
            .zip(multiplicities)
            .flat_map(|(v, &m)| std::iter::repeat_n(*v, m))
            .collect();
        Ok(HermitianMatrix::from_real_diagonal(&diag))
    }
}
