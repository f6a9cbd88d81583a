//! Hermitian and positive matrices with the unnormalized trace, Schatten norms,
//! spectral calculus, and a weighted commutative model of finite measure spaces.
//!
//! All matrices are dense `N x N` complex matrices in double precision. The
//! trace is the plain matrix trace, so `tr(1) = N`.

mod atoms;
mod hermitian;
mod json;
mod norms;
mod positive;
mod random;

pub use atoms::WeightedAtoms;
pub use hermitian::{eigh, HermitianMatrix, Spectrum};
pub use json::MatrixJson;
pub use norms::{schatten_norm, trace_pair};
pub(crate) use norms::trace_abs_power;
pub use positive::{abs_part, pos_neg_parts, power, PositiveMatrix};
pub use random::{
    instance_rng, random_hermitian, random_psd, random_psd_pair, random_unitary, sample_psd,
    sample_psd_pair, stream_rng, InstanceKind, LabRng,
};

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;

/// Relative tolerance on the smallest eigenvalue below which a matrix is
/// rejected as not positive semidefinite.
pub const PSD_TOLERANCE: f64 = 1e-10;

/// Relative tolerance on the entrywise asymmetry of a Hermitian literal.
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;

/// Complex trace of an arbitrary square matrix.
pub fn trace(m: &CMat) -> C64 {
    m.diagonal().iter().sum()
}

/// Real part of `tr(x y)` for arbitrary square matrices, computed without
/// forming the product.
pub fn re_trace_product(x: &CMat, y: &CMat) -> f64 {
    let n = x.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += (x[(i, j)] * y[(j, i)]).re;
        }
    }
    acc
}

/// Real part of the trace of a product of several matrices.
pub fn re_trace_chain(factors: &[&CMat]) -> f64 {
    match factors {
        [] => 0.0,
        [single] => trace(single).re,
        [first, rest @ ..] => {
            let mut acc = (*first).clone();
            for f in &rest[..rest.len() - 1] {
                acc = &acc * *f;
            }
            re_trace_product(&acc, rest[rest.len() - 1])
        }
    }
}

pub fn frobenius(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// Complex matrix with the given real diagonal.
pub fn diag(values: &[f64]) -> CMat {
    let n = values.len();
    CMat::from_fn(n, n, |i, j| if i == j { C64::new(values[i], 0.0) } else { C64::new(0.0, 0.0) })
}

/// Hilbert-Schmidt inner product `<x, y> = tr(x* y)`.
pub fn hs_inner(x: &CMat, y: &CMat) -> C64 {
    x.iter().zip(y.iter()).map(|(a, b)| a.conj() * b).sum()
}
