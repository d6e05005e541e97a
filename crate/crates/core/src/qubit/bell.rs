use crate::error::{Error, Result};

use super::states::{bell_state, kron, pauli};
use super::{expect_chain_dim, BellLabel, CMatrix, CVector, DensityMatrix, PauliLabel, CHAIN_DIM};

/// Eigenvalues `α_{a,b,a′,b′}` of a state diagonal in the tensored Bell basis
/// `|Φ_{a,b}⟩_{A,T} ⊗ |Φ_{a′,b′}⟩_{T′,B}`.
///
/// Index `8a + 4b + 2a′ + b′`.
#[derive(Debug, Clone, PartialEq)]
pub struct BellDiagonalState {
    alpha: [f64; 16],
}

impl BellDiagonalState {
    pub const NORMALISATION_TOLERANCE: f64 = 1e-12;

    pub fn new(alpha: [f64; 16]) -> Result<Self> {
        for &a in &alpha {
            if !(a >= 0.0) {
                return Err(Error::InvalidParameter {
                    name: "alpha",
                    value: a,
                    reason: "Bell-diagonal weights must be non-negative",
                });
            }
        }
        let total: f64 = alpha.iter().sum();
        if (total - 1.0).abs() > Self::NORMALISATION_TOLERANCE {
            return Err(Error::InvalidParameter {
                name: "alpha",
                value: total,
                reason: "Bell-diagonal weights must sum to 1",
            });
        }
        Ok(Self { alpha })
    }

    /// Rescales non-negative weights to unit sum.
    pub fn normalised(mut alpha: [f64; 16]) -> Result<Self> {
        let total: f64 = alpha.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidParameter {
                name: "alpha",
                value: total,
                reason: "weights must have positive sum",
            });
        }
        alpha.iter_mut().for_each(|a| *a /= total);
        Self::new(alpha)
    }

    pub fn uniform() -> Self {
        Self { alpha: [1.0 / 16.0; 16] }
    }

    /// Pure `Φ_{first} ⊗ Φ_{second}`.
    pub fn pure(first: BellLabel, second: BellLabel) -> Self {
        let mut alpha = [0.0; 16];
        alpha[Self::index(first, second)] = 1.0;
        Self { alpha }
    }

    /// Independent Bell-diagonal pairs on each link.
    pub fn product(first: [f64; 4], second: [f64; 4]) -> Result<Self> {
        let mut alpha = [0.0; 16];
        for (i, p) in first.iter().enumerate() {
            for (j, q) in second.iter().enumerate() {
                alpha[4 * i + j] = p * q;
            }
        }
        Self::normalised(alpha)
    }

    pub fn index(first: BellLabel, second: BellLabel) -> usize {
        4 * first.index() + second.index()
    }

    pub fn weight(&self, first: BellLabel, second: BellLabel) -> f64 {
        self.alpha[Self::index(first, second)]
    }

    pub fn weights(&self) -> &[f64; 16] {
        &self.alpha
    }
}

/// The sixteen vectors `|Φ_{a,b}⟩ ⊗ |Φ_{a′,b′}⟩`, ordered like [`BellDiagonalState`].
pub fn tensored_bell_basis() -> Vec<CVector> {
    let mut basis = Vec::with_capacity(CHAIN_DIM);
    for first in BellLabel::all() {
        let left = bell_state(first);
        for second in BellLabel::all() {
            let right = bell_state(second);
            basis.push(left.kronecker(&right));
        }
    }
    basis
}

fn tensored_bell_unitary() -> CMatrix {
    let cols = tensored_bell_basis();
    CMatrix::from_columns(&cols)
}

/// Matrix elements of `rho` in the tensored Bell basis.
pub fn to_tensored_bell_basis(rho: &CMatrix) -> CMatrix {
    let b = tensored_bell_unitary();
    b.adjoint() * rho * b
}

/// Diagonal of `rho` in the tensored Bell basis.
pub fn tensored_bell_diagonal(rho: &DensityMatrix) -> Result<[f64; 16]> {
    expect_chain_dim(rho)?;
    let mut out = [0.0; 16];
    for (k, v) in tensored_bell_basis().iter().enumerate() {
        out[k] = (v.adjoint() * rho.matrix() * v)[(0, 0)].re;
    }
    Ok(out)
}

/// `Σ α |Φ_{a,b}⟩⟨Φ_{a,b}| ⊗ |Φ_{a′,b′}⟩⟨Φ_{a′,b′}|`.
pub fn bell_diagonal_to_density(state: &BellDiagonalState) -> DensityMatrix {
    let mut rho = CMatrix::zeros(CHAIN_DIM, CHAIN_DIM);
    for (v, &w) in tensored_bell_basis().iter().zip(state.weights()) {
        if w != 0.0 {
            rho += (v * v.adjoint()).scale(w);
        }
    }
    DensityMatrix::from_trusted(rho)
}

/// Averages `rho` over the sixteen correlated Pauli conjugations
/// `U_{r,s} ⊗ U_{r,s} ⊗ U_{r′,s′} ⊗ U_{r′,s′}`.
pub fn twirl(rho: &DensityMatrix) -> Result<DensityMatrix> {
    expect_chain_dim(rho)?;
    let mut acc = CMatrix::zeros(CHAIN_DIM, CHAIN_DIM);
    for first in PauliLabel::all() {
        let u = pauli(first);
        let left = kron(&u, &u);
        for second in PauliLabel::all() {
            let v = pauli(second);
            let op = kron(&left, &kron(&v, &v));
            acc += &op * rho.matrix() * op.adjoint();
        }
    }
    Ok(DensityMatrix::from_trusted(acc.unscale(16.0)))
}
