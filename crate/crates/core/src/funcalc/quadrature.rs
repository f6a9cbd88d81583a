//! Gauss-Legendre rules and composite variants.

use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// `n`-point rule via Newton iteration on the Legendre polynomial.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn on_interval(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes.iter().zip(&self.weights).map(move |(x, w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.on_interval(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let d = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite rule over the given breakpoints.
pub fn composite(rule: &GaussLegendre, breakpoints: &[f64]) -> Vec<(f64, f64)> {
    breakpoints
        .windows(2)
        .flat_map(|w| rule.on_interval(w[0], w[1]).collect::<Vec<_>>())
        .collect()
}

/// Panels on `[0, 1]` refined geometrically (ratio 1/2) towards both
/// endpoints, `levels` panels deep on each side.
pub fn graded_unit_breakpoints(levels: usize) -> Vec<f64> {
    let levels = levels.max(1);
    let mut left: Vec<f64> = (0..levels).map(|k| 0.5f64.powi((levels - k) as i32 + 1)).collect();
    left.insert(0, 0.0);
    let mut points = left.clone();
    points.push(0.5);
    points.extend(left.iter().rev().map(|x| 1.0 - x));
    points
}

/// Composite Gauss-Legendre nodes on `[0, 1]` graded so that integrands with
/// singularities at distance `~1/condition` outside the interval are resolved.
pub fn graded_unit_rule(condition: f64, nodes_per_panel: usize) -> Vec<(f64, f64)> {
    let levels = if condition.is_finite() && condition > 1.0 {
        (condition.log2().ceil() as usize + 2).clamp(2, 60)
    } else {
        2
    };
    composite(&GaussLegendre::new(nodes_per_panel), &graded_unit_breakpoints(levels))
}
