//! Random state generators for property checks.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Exp1, StandardNormal};

use super::bell::BellDiagonalState;
use super::{CMatrix, DensityMatrix};

/// Full-rank density matrix `G G† / tr(G G†)` from a complex Ginibre matrix.
pub fn random_density_matrix<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DensityMatrix {
    let g = CMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let mut rho = &g * g.adjoint();
    let trace = rho.trace().re;
    rho.unscale_mut(trace);
    // Symmetrise away rounding asymmetry.
    let rho = (&rho + rho.adjoint()).unscale(2.0);
    DensityMatrix::from_trusted(rho)
}

/// Bell-diagonal weights drawn uniformly from the probability simplex.
pub fn random_bell_diagonal<R: Rng + ?Sized>(rng: &mut R) -> BellDiagonalState {
    let mut alpha = [0.0; 16];
    for a in alpha.iter_mut() {
        *a = rng.sample::<f64, _>(Exp1);
    }
    BellDiagonalState::normalised(alpha).expect("exponential draws are positive")
}

/// Bell-diagonal weights supported on a random subset of `support` entries.
pub fn random_sparse_bell_diagonal<R: Rng + ?Sized>(rng: &mut R, support: usize) -> BellDiagonalState {
    let support = support.clamp(1, 16);
    let mut idx: Vec<usize> = (0..16).collect();
    for i in 0..support {
        let j = rng.gen_range(i..16);
        idx.swap(i, j);
    }
    let mut alpha = [0.0; 16];
    for &k in &idx[..support] {
        alpha[k] = rng.sample::<f64, _>(Exp1);
    }
    BellDiagonalState::normalised(alpha).expect("exponential draws are positive")
}
