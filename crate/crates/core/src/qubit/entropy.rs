use crate::error::{Error, Result};
use crate::info::{h, shannon};

use super::bell::{bell_diagonal_to_density, tensored_bell_basis, BellDiagonalState};
use super::measure::node_outcome_statistics;
use super::states::{bb84_projector, kron, rotated_bell_basis};
use super::{hermitian_deviation, Basis, BellLabel, CMatrix, CHAIN_DIM, STATE_TOLERANCE};

/// Eigenvalues in `[−tolerance, 0)` count as zero.
fn spectrum_entropy(m: &CMatrix) -> f64 {
    m.clone()
        .symmetric_eigenvalues()
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|&l| -l * l.log2())
        .sum()
}

/// `S(ρ) = −Σ λ log2 λ`.
pub fn von_neumann_entropy(rho: &CMatrix) -> Result<f64> {
    let deviation = hermitian_deviation(rho);
    if deviation > STATE_TOLERANCE {
        return Err(Error::NotHermitian { deviation });
    }
    let eigenvalues = rho.clone().symmetric_eigenvalues();
    let min = eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -STATE_TOLERANCE {
        return Err(Error::NotPositive { min_eigenvalue: min });
    }
    Ok(eigenvalues
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|&l| -l * l.log2())
        .sum())
}

/// Holevo quantity between Alice's key bit (measured in `u1`) and Eve, where
/// Eve holds the canonical purification of the Bell-diagonal state and learns
/// both bits of the node's rotated Bell measurement.
pub fn holevo_oracle(state: &BellDiagonalState, u1: Basis, u2: Basis) -> f64 {
    // |Ψ⟩ = Σ_k √α_k |v_k⟩_{ATB} |k⟩_E  ↔  columns √α_k v_k.
    let basis = tensored_bell_basis();
    let mut purification = CMatrix::zeros(CHAIN_DIM, CHAIN_DIM);
    for (k, (v, &w)) in basis.iter().zip(state.weights()).enumerate() {
        purification.set_column(k, &v.scale(w.sqrt()));
    }

    let node_basis = rotated_bell_basis(u1, u2);
    let id_b = CMatrix::identity(2, 2);

    let mut p_x = [0.0; 2];
    let mut joint_entropy = 0.0; // S(X, E, C)
    let mut eve_entropy = 0.0; // S(E, C)
    for beta in &node_basis {
        let node_projector = beta * beta.adjoint();
        let mut marginal = CMatrix::zeros(CHAIN_DIM, CHAIN_DIM);
        for x in [false, true] {
            let p = kron(&kron(&bb84_projector(u1, x), &node_projector), &id_b);
            // Unnormalised Eve state, up to a transpose that leaves the spectrum unchanged.
            let sigma = purification.adjoint() * p * &purification;
            p_x[usize::from(x)] += sigma.trace().re;
            joint_entropy += spectrum_entropy(&sigma);
            marginal += sigma;
        }
        eve_entropy += spectrum_entropy(&marginal);
    }
    let chi = shannon(p_x) + eve_entropy - joint_entropy;
    chi.max(0.0)
}

/// `Σ_{a,b} p_{a,b|u1,u2} h(e^{ū1,ū2,b,a})`: the entropy bound on Eve's
/// information when the node's phase bit is also announced.
pub fn holevo_bound(state: &BellDiagonalState, u1: Basis, u2: Basis) -> f64 {
    let rho = bell_diagonal_to_density(state);
    let here = node_outcome_statistics(&rho, u1, u2).expect("chain dimension");
    let conjugate = node_outcome_statistics(&rho, u1.flipped(), u2.flipped()).expect("chain dimension");
    BellLabel::all()
        .iter()
        .map(|label| {
            let p = here[label.index()].probability;
            let e = conjugate[label.swapped().index()].error_rate;
            p * h(e)
        })
        .sum()
}
