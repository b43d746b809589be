//! Seeded sampling of circularly-symmetric complex Gaussians.
//!
//! Streams come from ChaCha8 keyed by a `u64` seed; normals are produced by
//! Box-Muller, one complex sample per pair of uniforms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::matrix::{ComplexMatrix, ComplexVector, C64};

pub type TrialRng = ChaCha8Rng;

pub fn trial_rng(seed: u64) -> TrialRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seed for trial `index` of an experiment seeded with `seed`.
pub fn trial_seed(seed: u64, index: u64) -> u64 {
    seed ^ index
}

/// One draw of CN(0, 1): real and imaginary parts are independent N(0, 1/2).
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    // u1 in (0, 1] keeps ln finite
    let u1 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    let radius = (-u1.ln()).sqrt();
    let theta = std::f64::consts::TAU * u2;
    C64::new(radius * theta.cos(), radius * theta.sin())
}

/// `rows x cols` matrix of i.i.d. CN(0, 1) entries, drawn row-major.
pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, len: usize) -> ComplexVector {
    (0..len).map(|_| complex_gaussian(rng)).collect()
}
