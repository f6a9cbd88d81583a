//! Two-atom search for `‖x − Ex‖_p > ‖x‖_p` when `p < 2`, with `E` the
//! integral against the weights (expectation onto the constants).

use num_rational::Rational64;
use serde::Serialize;

use crate::matcore::WeightedAtoms;
use crate::{Error, Result};

const GRID: usize = 64;
const MU_FLOOR: f64 = 1e-9;

/// `‖x − Ex‖_p / ‖x‖_p` on atoms with weights `(μ, 1−μ)`, `x = (1, r)`.
pub fn two_atom_ratio(p: f64, mu: f64, r: f64) -> Result<f64> {
    let x = WeightedAtoms::new(vec![mu, 1.0 - mu], vec![1.0, r])?;
    let mean = x.trace();
    let centered = x.map(|v| v - mean);
    Ok(centered.norm(p)? / x.norm(p)?)
}

/// Exact `‖x − Ex‖_1 / ‖x‖_1` in rational arithmetic.
pub fn exact_ratio_p1(mu: Rational64, x: [Rational64; 2]) -> Result<Rational64> {
    let zero = Rational64::from_integer(0);
    let one = Rational64::from_integer(1);
    if !(mu > zero && mu < one) {
        return Err(Error::Domain(format!("weight {mu} outside (0, 1)")));
    }
    let abs = |v: Rational64| if v < zero { -v } else { v };
    let weights = [mu, one - mu];
    let mean = weights[0] * x[0] + weights[1] * x[1];
    let num = weights[0] * abs(x[0] - mean) + weights[1] * abs(x[1] - mean);
    let den = weights[0] * abs(x[0]) + weights[1] * abs(x[1]);
    if den == zero {
        return Ok(zero);
    }
    Ok(num / den)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchStep {
    pub mu: f64,
    pub r: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CounterexampleReport {
    pub p: f64,
    pub weights: [f64; 2],
    pub x: [f64; 2],
    pub ratio: f64,
    pub exceeds_one: bool,
    pub evaluations: usize,
    /// Grid optimum followed by every accepted refinement move.
    pub trace: Vec<SearchStep>,
}

/// Grid search on `(μ, r = x₂/x₁)` over a `64 x 64` grid followed by
/// coordinate refinement, within `budget` evaluations in total. Valid for
/// any `p >= 1`.
pub fn two_atom_search(p: f64, budget: usize) -> Result<CounterexampleReport> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::Domain(format!("search exponent must be finite and >= 1, got {p}")));
    }
    let mut evaluations = 0;
    let mut best = SearchStep { mu: 0.5, r: 1.0, ratio: f64::NEG_INFINITY };
    for i in 1..=GRID {
        let mu = i as f64 / (GRID + 1) as f64;
        for j in 0..GRID {
            let r = j as f64 / (GRID - 1) as f64;
            let ratio = two_atom_ratio(p, mu, r)?;
            evaluations += 1;
            if ratio > best.ratio {
                best = SearchStep { mu, r, ratio };
            }
        }
    }
    let mut trace = vec![best.clone()];
    let mut steps = [1.0 / (GRID + 1) as f64, 1.0 / (GRID - 1) as f64];
    while evaluations < budget && steps.iter().any(|&s| s > 1e-12) {
        let mut improved = false;
        for axis in 0..2 {
            for sign in [-1.0, 1.0] {
                if evaluations >= budget {
                    break;
                }
                let (mu, r) = if axis == 0 {
                    ((best.mu + sign * steps[0]).clamp(MU_FLOOR, 1.0 - MU_FLOOR), best.r)
                } else {
                    (best.mu, (best.r + sign * steps[1]).clamp(0.0, 1.0))
                };
                let ratio = two_atom_ratio(p, mu, r)?;
                evaluations += 1;
                if ratio > best.ratio {
                    best = SearchStep { mu, r, ratio };
                    trace.push(best.clone());
                    improved = true;
                }
            }
        }
        if !improved {
            steps = steps.map(|s| s * 0.5);
        }
    }
    Ok(CounterexampleReport {
        p,
        weights: [best.mu, 1.0 - best.mu],
        x: [1.0, best.r],
        ratio: best.ratio,
        exceeds_one: best.ratio > 1.0,
        evaluations,
        trace,
    })
}

/// [`two_atom_search`] restricted to `p ∈ [1, 2)`.
pub fn counterexample_search(p: f64, budget: usize) -> Result<CounterexampleReport> {
    if !(1.0..2.0).contains(&p) {
        return Err(Error::Domain(format!("counterexample search needs p ∈ [1, 2), got {p}")));
    }
    two_atom_search(p, budget)
}
