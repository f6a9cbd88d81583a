//! Deterministic test-instance generation.
//!
//! Every draw comes from a ChaCha8 stream keyed by `(seed, stream)`, so the
//! instance used by trial `k` of a campaign cell does not depend on which
//! thread evaluates it or in what order.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{CMat, HermitianMatrix, PositiveMatrix, C64};

pub type LabRng = ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InstanceKind {
    /// Wishart `G* G` with i.i.d. standard complex Gaussian `G`.
    Generic,
    /// Wishart with the smallest `ceil(N/3)` eigenvalues set to zero.
    Singular,
    /// Two PSD matrices diagonal in one random eigenbasis.
    CommutingPair,
    /// Eigenvalues split between `[1, 2]` and `[5, 6]`; strictly positive.
    SpectralGap,
}

impl InstanceKind {
    pub const ALL: [InstanceKind; 4] =
        [InstanceKind::Generic, InstanceKind::Singular, InstanceKind::CommutingPair, InstanceKind::SpectralGap];

    pub fn tag(self) -> u64 {
        match self {
            InstanceKind::Generic => 1,
            InstanceKind::Singular => 2,
            InstanceKind::CommutingPair => 3,
            InstanceKind::SpectralGap => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            InstanceKind::Generic => "generic",
            InstanceKind::Singular => "singular",
            InstanceKind::CommutingPair => "commuting-pair",
            InstanceKind::SpectralGap => "spectral-gap",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s || (s == "commuting" && *k == InstanceKind::CommutingPair))
    }
}

/// ChaCha8 generator on stream `stream` of key `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> LabRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stream for trial `trial` of instance family `(dim, kind)` under `seed`.
pub fn instance_rng(seed: u64, dim: usize, kind: InstanceKind, trial: u64) -> LabRng {
    let key = splitmix64(seed ^ splitmix64(((dim as u64) << 8) | kind.tag()));
    stream_rng(key, trial)
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    CMat::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// Haar-distributed unitary via QR of a Ginibre matrix with phase fixing.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMat {
    let qr = ginibre(dim, dim, rng).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// `(G + G*) / 2` with Ginibre `G`.
pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> HermitianMatrix {
    HermitianMatrix::from_hermitian_part(&ginibre(dim, dim, rng))
}

fn wishart<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> PositiveMatrix {
    let g = ginibre(dim, dim, rng);
    PositiveMatrix::from_matrix(g.adjoint() * g).expect("Wishart matrices are PSD")
}

fn wishart_eigenvalues<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    let w = wishart(dim, rng);
    let mut v: Vec<f64> = w.spectrum().eigenvalues.iter().copied().collect();
    v.shuffle(rng);
    v
}

/// Draws one PSD matrix of the given kind from `rng`.
pub fn sample_psd<R: Rng + ?Sized>(dim: usize, kind: InstanceKind, rng: &mut R) -> PositiveMatrix {
    match kind {
        InstanceKind::Generic => wishart(dim, rng),
        InstanceKind::Singular => {
            let w = wishart(dim, rng);
            let zeros = dim.div_ceil(3);
            let mut values: Vec<f64> = w.spectrum().eigenvalues.iter().copied().collect();
            for v in values.iter_mut().take(zeros) {
                *v = 0.0;
            }
            PositiveMatrix::from_spectrum(values, w.spectrum().eigenvectors.clone()).expect("non-negative")
        }
        InstanceKind::CommutingPair => sample_psd_pair(dim, kind, rng).0,
        InstanceKind::SpectralGap => {
            let u = random_unitary(dim, rng);
            let values: Vec<f64> = (0..dim)
                .map(|i| if i < dim / 2 { rng.random_range(1.0..2.0) } else { rng.random_range(5.0..6.0) })
                .collect();
            PositiveMatrix::from_spectrum(values, u).expect("positive")
        }
    }
}

/// Draws a pair; only `CommutingPair` correlates the two draws.
pub fn sample_psd_pair<R: Rng + ?Sized>(
    dim: usize,
    kind: InstanceKind,
    rng: &mut R,
) -> (PositiveMatrix, PositiveMatrix) {
    match kind {
        InstanceKind::CommutingPair => {
            let u = random_unitary(dim, rng);
            let la = wishart_eigenvalues(dim, rng);
            let lb = wishart_eigenvalues(dim, rng);
            (
                PositiveMatrix::from_spectrum(la, u.clone()).expect("non-negative"),
                PositiveMatrix::from_spectrum(lb, u).expect("non-negative"),
            )
        }
        _ => {
            let a = sample_psd(dim, kind, rng);
            let b = sample_psd(dim, kind, rng);
            (a, b)
        }
    }
}

/// Deterministic PSD instance keyed by `(seed, dim, kind)`. For the
/// commuting-pair kind this is the first element of [`random_psd_pair`].
pub fn random_psd(dim: usize, seed: u64, kind: InstanceKind) -> PositiveMatrix {
    let mut rng = instance_rng(seed, dim, kind, 0);
    sample_psd(dim, kind, &mut rng)
}

pub fn random_psd_pair(dim: usize, seed: u64, kind: InstanceKind) -> (PositiveMatrix, PositiveMatrix) {
    let mut rng = instance_rng(seed, dim, kind, 0);
    sample_psd_pair(dim, kind, &mut rng)
}
