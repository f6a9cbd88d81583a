//! Fixtures shared by the criterion benchmarks.

use nclp_core::expectations::ce_spectral_averaging;
use nclp_core::matcore::{random_hermitian, random_unitary, sample_psd, sample_psd_pair, stream_rng, InstanceKind};
use nclp_core::semigroups::{make_pinching_generator, make_unitary_mixing_generator, Generator};
use nclp_core::{HermitianMatrix, PositiveMatrix};

pub const SEED: u64 = 0x5eed;

/// A generic positive pair of size `dim`.
pub fn pair(dim: usize) -> (PositiveMatrix, PositiveMatrix) {
    sample_psd_pair(dim, InstanceKind::Generic, &mut stream_rng(SEED, dim as u64))
}

/// A strictly positive matrix with spectrum in `[1, 2] ∪ [5, 6]`, and a Hermitian direction.
pub fn invertible_with_direction(dim: usize) -> (PositiveMatrix, HermitianMatrix) {
    let mut rng = stream_rng(SEED, 100 + dim as u64);
    let x = sample_psd(dim, InstanceKind::SpectralGap, &mut rng);
    (x, random_hermitian(dim, &mut rng))
}

pub fn mixing_generator(dim: usize) -> Generator {
    let mut rng = stream_rng(SEED, 200 + dim as u64);
    let unitaries = (0..2).map(|_| random_unitary(dim, &mut rng)).collect();
    make_unitary_mixing_generator(unitaries, vec![1.0, 0.5]).expect("valid rates")
}

pub fn pinching_generator(dim: usize) -> Generator {
    let mut rng = stream_rng(SEED, 300 + dim as u64);
    make_pinching_generator(ce_spectral_averaging(&random_hermitian(dim, &mut rng)).expect("hermitian"))
        .expect("valid expectation")
}
