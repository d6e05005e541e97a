//! Exact finite-dimensional algebra for the single-node relay.
//!
//! A single-node chain holds four qubits ordered `A ⊗ T ⊗ T′ ⊗ B`: Alice,
//! the node's receive half, the node's send half, and Bob. Basis index
//! `8a + 4t + 2t′ + b` puts Alice in the most significant bit. Bell pairs sit
//! on `(A, T)` and `(T′, B)`.

mod bell;
mod entropy;
mod measure;
pub mod random;
mod states;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub use bell::{
    bell_diagonal_to_density, tensored_bell_basis, tensored_bell_diagonal, to_tensored_bell_basis,
    twirl, BellDiagonalState,
};
pub use entropy::{holevo_bound, holevo_oracle, von_neumann_entropy};
pub use measure::{basis_error_rate, node_conditioned_ab_state, node_outcome_statistics, NodeOutcome};
pub use states::{bb84_projector, bb84_state, bell_state, hadamard, kron, pauli, rotated_bell_basis};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Dimension of the `A ⊗ T ⊗ T′ ⊗ B` register.
pub const CHAIN_DIM: usize = 16;

/// Tolerance used when validating density matrices.
pub const STATE_TOLERANCE: f64 = 1e-10;

/// Preparation / measurement basis of one party on one link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Basis {
    Z,
    X,
}

impl Basis {
    pub const BOTH: [Basis; 2] = [Basis::Z, Basis::X];

    pub fn from_bit(bit: bool) -> Self {
        if bit {
            Basis::X
        } else {
            Basis::Z
        }
    }

    pub fn bit(self) -> bool {
        matches!(self, Basis::X)
    }

    /// The conjugate basis.
    pub fn flipped(self) -> Self {
        match self {
            Basis::Z => Basis::X,
            Basis::X => Basis::Z,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Basis::Z => 'Z',
            Basis::X => 'X',
        }
    }
}

/// Label `(r, s)` of the Pauli operator `Σ_k (−1)^{ks} |k⊕r⟩⟨k|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliLabel {
    pub r: bool,
    pub s: bool,
}

impl PauliLabel {
    pub fn new(r: bool, s: bool) -> Self {
        Self { r, s }
    }

    pub fn all() -> impl Iterator<Item = PauliLabel> {
        (0..4u8).map(|i| PauliLabel::new(i & 2 != 0, i & 1 != 0))
    }
}

/// Bell-state label: `phase` is the `a` bit, `parity` the `b` bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BellLabel {
    pub phase: bool,
    pub parity: bool,
}

impl BellLabel {
    pub fn new(phase: bool, parity: bool) -> Self {
        Self { phase, parity }
    }

    /// All four labels in `(a, b)` lexicographic order.
    pub fn all() -> [BellLabel; 4] {
        [
            BellLabel::new(false, false),
            BellLabel::new(false, true),
            BellLabel::new(true, false),
            BellLabel::new(true, true),
        ]
    }

    /// Position in `(a, b)` lexicographic order.
    pub fn index(self) -> usize {
        (usize::from(self.phase) << 1) | usize::from(self.parity)
    }

    pub fn from_index(i: usize) -> Self {
        BellLabel::new(i & 2 != 0, i & 1 != 0)
    }

    /// Label with phase and parity exchanged.
    pub fn swapped(self) -> Self {
        BellLabel::new(self.parity, self.phase)
    }
}

/// A validated density matrix: square, Hermitian, unit trace, PSD.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(CMatrix);

impl DensityMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        validate_state(&matrix, STATE_TOLERANCE)?;
        Ok(Self(matrix))
    }

    /// Wraps a matrix known to be a valid state by construction.
    pub(crate) fn from_trusted(matrix: CMatrix) -> Self {
        Self(matrix)
    }

    /// Pure state `|ψ⟩⟨ψ|` for a normalised vector.
    pub fn pure(psi: &CVector) -> Result<Self> {
        Self::new(psi * psi.adjoint())
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self(CMatrix::identity(dim, dim).unscale(dim as f64))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }
}

impl AsRef<CMatrix> for DensityMatrix {
    fn as_ref(&self) -> &CMatrix {
        &self.0
    }
}

pub(crate) fn hermitian_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub(crate) fn min_eigenvalue(m: &CMatrix) -> f64 {
    m.clone()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

fn validate_state(m: &CMatrix, tol: f64) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    let deviation = hermitian_deviation(m);
    if deviation > tol {
        return Err(Error::NotHermitian { deviation });
    }
    let trace = m.trace();
    if (trace.re - 1.0).abs() > tol || trace.im.abs() > tol {
        return Err(Error::TraceNotOne { trace: trace.re });
    }
    let min = min_eigenvalue(m);
    if min < -tol {
        return Err(Error::NotPositive { min_eigenvalue: min });
    }
    Ok(())
}

pub(crate) fn expect_chain_dim(rho: &DensityMatrix) -> Result<()> {
    if rho.dim() != CHAIN_DIM {
        return Err(Error::DimensionMismatch {
            expected: CHAIN_DIM,
            found: rho.dim(),
        });
    }
    Ok(())
}

/// Largest entry modulus of `a − b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_hermitian() {
        let mut m = CMatrix::identity(2, 2).unscale(2.0);
        m[(0, 1)] = Complex64::new(0.1, 0.0);
        assert!(matches!(DensityMatrix::new(m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn rejects_bad_trace_and_negative_spectrum() {
        let m = CMatrix::identity(2, 2);
        assert!(matches!(DensityMatrix::new(m), Err(Error::TraceNotOne { .. })));
        let m = CMatrix::from_diagonal(&CVector::from_vec(vec![
            Complex64::new(1.2, 0.0),
            Complex64::new(-0.2, 0.0),
        ]));
        assert!(matches!(DensityMatrix::new(m), Err(Error::NotPositive { .. })));
    }

    #[test]
    fn bell_label_index_round_trip() {
        for (i, l) in BellLabel::all().iter().enumerate() {
            assert_eq!(l.index(), i);
            assert_eq!(BellLabel::from_index(i), *l);
        }
    }
}
