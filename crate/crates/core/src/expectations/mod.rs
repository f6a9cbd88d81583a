//! Trace-preserving conditional expectations onto subalgebras of `M_N`, the
//! commutative Jensen inequality, and the operator Jensen inequality for the
//! Hilbert-Schmidt projection of an expectation.

mod jensen;

pub(crate) use jensen::compression_gap;
pub use jensen::{hs_projection_superop, jensen_gap, operator_jensen_gap};

use serde::{Deserialize, Serialize};

use crate::matcore::{frobenius, trace, CMat, HermitianMatrix, MatrixJson, PositiveMatrix, C64};
use crate::{Error, Result};

/// Default eigenvalue clustering tolerance, relative to `1 + ||δ||_inf`.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-8;

/// A spectral projection of a Hermitian matrix with its (cluster-mean) eigenvalue.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralProjection {
    pub value: f64,
    pub projection: CMat,
    pub rank: usize,
}

/// Spectral projections of `delta`, merging eigenvalues whose spread within a
/// cluster stays below `cluster_tol * (1 + ||δ||_inf)`.
pub fn spectral_projections(delta: &HermitianMatrix, cluster_tol: f64) -> Result<Vec<SpectralProjection>> {
    let s = delta.eigh()?;
    let n = delta.dim();
    let tol = cluster_tol * (1.0 + s.max_abs());
    let mut out = Vec::new();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && s.eigenvalues[end] - s.eigenvalues[start] <= tol {
            end += 1;
        }
        let cols = s.eigenvectors.columns(start, end - start);
        let projection = cols * cols.adjoint();
        let value = s.eigenvalues.rows(start, end - start).mean();
        out.push(SpectralProjection { value, projection, rank: end - start });
        start = end;
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExpectationKind {
    /// `x ↦ Σ Q_i x Q_i` for an orthogonal resolution of the identity.
    BlockPinching,
    /// `x ↦ Σ_k tr(P_k x)/tr(P_k) P_k` onto the algebra generated by `generator`.
    SpectralAveraging { generator: HermitianMatrix, cluster_tol: f64 },
}

/// Unital, positive, trace-preserving idempotent onto a *-subalgebra.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionalExpectation {
    kind: ExpectationKind,
    dim: usize,
    projections: Vec<CMat>,
    ranks: Vec<usize>,
}

impl ConditionalExpectation {
    pub fn kind(&self) -> &ExpectationKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn projections(&self) -> &[CMat] {
        &self.projections
    }

    /// Whether the range is a commutative algebra.
    pub fn has_commutative_range(&self) -> bool {
        match self.kind {
            ExpectationKind::SpectralAveraging { .. } => true,
            ExpectationKind::BlockPinching => self.ranks.iter().all(|&r| r == 1),
        }
    }

    pub fn apply(&self, x: &CMat) -> CMat {
        let n = self.dim;
        match self.kind {
            ExpectationKind::BlockPinching => {
                self.projections.iter().fold(CMat::zeros(n, n), |acc, q| acc + q * x * q)
            }
            ExpectationKind::SpectralAveraging { .. } => {
                self.projections.iter().zip(&self.ranks).fold(CMat::zeros(n, n), |acc, (p, &r)| {
                    acc + p * (trace(&(p * x)) / r as f64)
                })
            }
        }
    }

    pub fn apply_hermitian(&self, x: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix::from_hermitian_part(&self.apply(x.as_matrix()))
    }

    pub fn apply_positive(&self, x: &PositiveMatrix) -> Result<PositiveMatrix> {
        PositiveMatrix::new(self.apply_hermitian(x.base()))
    }

    /// The identity map (single block).
    pub fn identity(dim: usize) -> Self {
        Self {
            kind: ExpectationKind::BlockPinching,
            dim,
            projections: vec![CMat::identity(dim, dim)],
            ranks: vec![dim],
        }
    }
}

/// Expectation onto the commutative algebra generated by `delta`, with the
/// default clustering tolerance.
pub fn ce_spectral_averaging(delta: &HermitianMatrix) -> Result<ConditionalExpectation> {
    ce_spectral_averaging_with_tol(delta, DEFAULT_CLUSTER_TOL)
}

pub fn ce_spectral_averaging_with_tol(delta: &HermitianMatrix, cluster_tol: f64) -> Result<ConditionalExpectation> {
    let parts = spectral_projections(delta, cluster_tol)?;
    Ok(ConditionalExpectation {
        kind: ExpectationKind::SpectralAveraging { generator: delta.clone(), cluster_tol },
        dim: delta.dim(),
        ranks: parts.iter().map(|p| p.rank).collect(),
        projections: parts.into_iter().map(|p| p.projection).collect(),
    })
}

/// Pinching by an orthogonal resolution of the identity `{Q_i}`.
pub fn ce_block_pinching(projections: Vec<CMat>) -> Result<ConditionalExpectation> {
    let Some(first) = projections.first() else {
        return Err(Error::Precondition("empty projection family".into()));
    };
    let n = first.nrows();
    let tol = 1e-10;
    let mut sum = CMat::zeros(n, n);
    let mut ranks = Vec::with_capacity(projections.len());
    for (i, q) in projections.iter().enumerate() {
        if q.nrows() != n || q.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: q.nrows() });
        }
        if frobenius(&(q - q.adjoint())) > tol || frobenius(&(q * q - q)) > tol * (n as f64) {
            return Err(Error::Precondition(format!("block {i} is not an orthogonal projection")));
        }
        for (j, other) in projections.iter().enumerate().skip(i + 1) {
            if frobenius(&(q * other)) > tol {
                return Err(Error::Precondition(format!("blocks {i} and {j} are not orthogonal")));
            }
        }
        ranks.push(trace(q).re.round() as usize);
        sum += q;
    }
    if frobenius(&(sum - CMat::identity(n, n))) > tol * (n as f64) {
        return Err(Error::Precondition("blocks do not sum to the identity".into()));
    }
    Ok(ConditionalExpectation { kind: ExpectationKind::BlockPinching, dim: n, projections, ranks })
}

/// Coordinate blocks of the given sizes, optionally rotated by a unitary `u`
/// (blocks become `u Q_i u*`).
pub fn ce_block_sizes(sizes: &[usize], basis: Option<&CMat>) -> Result<ConditionalExpectation> {
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(Error::Precondition(format!("invalid block sizes {sizes:?}")));
    }
    let n: usize = sizes.iter().sum();
    let mut projections = Vec::with_capacity(sizes.len());
    let mut offset = 0;
    for &s in sizes {
        let mut q = CMat::zeros(n, n);
        for i in offset..offset + s {
            q[(i, i)] = C64::new(1.0, 0.0);
        }
        if let Some(u) = basis {
            if u.nrows() != n {
                return Err(Error::DimensionMismatch { expected: n, found: u.nrows() });
            }
            q = u * q * u.adjoint();
        }
        projections.push(q);
        offset += s;
    }
    ce_block_pinching(projections)
}

/// JSON description of a conditional expectation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ExpectationSpec {
    Blocks {
        sizes: Vec<usize>,
    },
    Spectral {
        delta: MatrixJson,
        #[serde(default = "default_cluster_tol")]
        cluster_tol: f64,
    },
}

fn default_cluster_tol() -> f64 {
    DEFAULT_CLUSTER_TOL
}

impl ExpectationSpec {
    pub fn build(&self) -> Result<ConditionalExpectation> {
        match self {
            ExpectationSpec::Blocks { sizes } => ce_block_sizes(sizes, None),
            ExpectationSpec::Spectral { delta, cluster_tol } => {
                ce_spectral_averaging_with_tol(&delta.to_hermitian()?, *cluster_tol)
            }
        }
    }
}
