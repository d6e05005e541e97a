use num_complex::Complex64;
use std::f64::consts::FRAC_1_SQRT_2;

use super::{Basis, BellLabel, CMatrix, CVector, PauliLabel};

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `U_{r,s} = Σ_k (−1)^{ks} |k⊕r⟩⟨k|`.
pub fn pauli(label: PauliLabel) -> CMatrix {
    let mut u = CMatrix::zeros(2, 2);
    for k in 0..2usize {
        let sign = if label.s && k == 1 { -1.0 } else { 1.0 };
        let row = k ^ usize::from(label.r);
        u[(row, k)] = c(sign);
    }
    u
}

pub fn hadamard() -> CMatrix {
    CMatrix::from_row_slice(
        2,
        2,
        &[
            c(FRAC_1_SQRT_2),
            c(FRAC_1_SQRT_2),
            c(FRAC_1_SQRT_2),
            c(-FRAC_1_SQRT_2),
        ],
    )
}

fn hadamard_power(u: Basis) -> CMatrix {
    match u {
        Basis::Z => CMatrix::identity(2, 2),
        Basis::X => hadamard(),
    }
}

/// Kronecker product, first factor most significant.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// `|Φ_{a,b}⟩ = (1/√2) Σ_k (−1)^{ak} |k⊕b⟩|k⟩`.
pub fn bell_state(label: BellLabel) -> CVector {
    let mut v = CVector::zeros(4);
    for k in 0..2usize {
        let sign = if label.phase && k == 1 { -1.0 } else { 1.0 };
        let first = k ^ usize::from(label.parity);
        v[2 * first + k] = c(sign * FRAC_1_SQRT_2);
    }
    v
}

/// `{H^{u1} ⊗ H^{u2} |Φ_{a,b}⟩}` in `(a, b)` lexicographic order.
pub fn rotated_bell_basis(u1: Basis, u2: Basis) -> [CVector; 4] {
    let rot = kron(&hadamard_power(u1), &hadamard_power(u2));
    BellLabel::all().map(|label| &rot * bell_state(label))
}

/// BB84 signal `|φ^u_x⟩`: computational state for Z, its Hadamard image for X.
pub fn bb84_state(u: Basis, x: bool) -> CVector {
    let mut v = CVector::zeros(2);
    v[usize::from(x)] = c(1.0);
    match u {
        Basis::Z => v,
        Basis::X => hadamard() * v,
    }
}

/// POVM element `M^u_x = |φ^u_x⟩⟨φ^u_x|`.
pub fn bb84_projector(u: Basis, x: bool) -> CMatrix {
    let v = bb84_state(u, x);
    &v * v.adjoint()
}
