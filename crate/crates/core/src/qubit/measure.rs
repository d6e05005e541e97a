use num_complex::Complex64;

use crate::error::Result;

use super::states::{bb84_projector, hadamard, kron, rotated_bell_basis};
use super::{expect_chain_dim, Basis, BellLabel, CMatrix, DensityMatrix, CHAIN_DIM};

fn local_rotation(u: Basis) -> CMatrix {
    match u {
        Basis::Z => CMatrix::identity(2, 2),
        Basis::X => hadamard(),
    }
}

/// Probability that Alice's bit disagrees with Bob's parity-corrected bit when
/// `A` and `T` are measured in `u1` and `T′` and `B` in `u2`.
pub fn basis_error_rate(rho: &DensityMatrix, u1: Basis, u2: Basis) -> Result<f64> {
    expect_chain_dim(rho)?;
    let first = local_rotation(u1);
    let second = local_rotation(u2);
    let w = kron(&kron(&first, &first), &kron(&second, &second));
    // Outcome (x, t, t′, y) has Born weight ⟨x t t′ y| W† ρ W |x t t′ y⟩.
    let rotated = w.adjoint() * rho.matrix() * w;
    let error = (0..CHAIN_DIM)
        .filter(|i| i.count_ones() % 2 == 1)
        .map(|i| rotated[(i, i)].re)
        .sum::<f64>();
    Ok(error.clamp(0.0, 1.0))
}

/// Unnormalised state of `A ⊗ B` after the node projects `T ⊗ T′` onto the
/// rotated Bell vector with the given label. Its trace is the outcome probability.
pub fn node_conditioned_ab_state(
    rho: &DensityMatrix,
    u1: Basis,
    u2: Basis,
    label: BellLabel,
) -> Result<CMatrix> {
    expect_chain_dim(rho)?;
    let beta = &rotated_bell_basis(u1, u2)[label.index()];
    // K = I_A ⊗ ⟨β|_{TT′} ⊗ I_B
    let mut k = CMatrix::zeros(4, CHAIN_DIM);
    for a in 0..2 {
        for b in 0..2 {
            for node in 0..4 {
                k[(2 * a + b, 8 * a + 2 * node + b)] = beta[node].conj();
            }
        }
    }
    Ok(&k * rho.matrix() * k.adjoint())
}

/// Statistics of one node Bell outcome at fixed bases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeOutcome {
    pub label: BellLabel,
    pub probability: f64,
    /// Conditional rate of `x ≠ y ⊕ b`, with `b` the announced parity.
    pub error_rate: f64,
}

/// Joint probabilities and conditional error rates of the node's four rotated
/// Bell outcomes, `A` measured in `u1` and `B` in `u2`.
pub fn node_outcome_statistics(rho: &DensityMatrix, u1: Basis, u2: Basis) -> Result<[NodeOutcome; 4]> {
    let mut out = [NodeOutcome {
        label: BellLabel::new(false, false),
        probability: 0.0,
        error_rate: 0.0,
    }; 4];
    for label in BellLabel::all() {
        let sigma = node_conditioned_ab_state(rho, u1, u2, label)?;
        let probability = sigma.trace().re.max(0.0);
        let mut error = 0.0;
        for x in [false, true] {
            for y in [false, true] {
                if x ^ y ^ label.parity {
                    let m = kron(&bb84_projector(u1, x), &bb84_projector(u2, y));
                    let p: Complex64 = (m * &sigma).trace();
                    error += p.re;
                }
            }
        }
        let error_rate = if probability > 0.0 {
            (error / probability).clamp(0.0, 1.0)
        } else {
            0.0
        };
        out[label.index()] = NodeOutcome {
            label,
            probability,
            error_rate,
        };
    }
    Ok(out)
}
