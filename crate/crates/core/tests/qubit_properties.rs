use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use str_relay::qubit::random::{random_bell_diagonal, random_density_matrix, random_sparse_bell_diagonal};
use str_relay::qubit::{
    basis_error_rate, bell_diagonal_to_density, bell_state, hadamard, holevo_bound, holevo_oracle,
    kron, max_abs_diff, node_conditioned_ab_state, rotated_bell_basis, tensored_bell_diagonal,
    to_tensored_bell_basis, twirl, Basis, BellDiagonalState, BellLabel, CMatrix, CVector,
};

fn label(a: u8, b: u8) -> BellLabel {
    BellLabel::new(a == 1, b == 1)
}

fn primed(l: BellLabel) -> CVector {
    let op = kron(&CMatrix::identity(2, 2), &hadamard());
    op * bell_state(l)
}

fn same_up_to_phase(a: &CVector, b: &CVector) -> bool {
    (a.dotc(b).norm() - 1.0).abs() < 1e-14
}

#[test]
fn rotated_bell_basis_matches_explicit_rows() {
    let rows: [(Basis, Basis, [CVector; 4]); 4] = [
        (
            Basis::Z,
            Basis::Z,
            [bell_state(label(0, 0)), bell_state(label(0, 1)), bell_state(label(1, 0)), bell_state(label(1, 1))],
        ),
        (
            Basis::Z,
            Basis::X,
            [primed(label(0, 0)), primed(label(0, 1)), primed(label(1, 0)), primed(label(1, 1))],
        ),
        (
            Basis::X,
            Basis::Z,
            [primed(label(0, 0)), primed(label(1, 0)), primed(label(0, 1)), primed(label(1, 1))],
        ),
        (
            Basis::X,
            Basis::X,
            [bell_state(label(0, 0)), bell_state(label(1, 0)), bell_state(label(0, 1)), bell_state(label(1, 1))],
        ),
    ];
    for (u1, u2, expected) in rows {
        let got = rotated_bell_basis(u1, u2);
        for (g, e) in got.iter().zip(expected.iter()) {
            assert!(same_up_to_phase(g, e), "row ({u1:?}, {u2:?})");
        }
    }
}

#[test]
fn twirl_output_is_bell_diagonal_and_keeps_bell_diagonal() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7e57);
    for _ in 0..20 {
        let rho = random_density_matrix(&mut rng, 16);
        let out = twirl(&rho).unwrap();
        let in_bell = to_tensored_bell_basis(out.matrix());
        for i in 0..16 {
            for j in 0..16 {
                if i != j {
                    assert!(in_bell[(i, j)].norm() < 1e-12);
                }
            }
        }
        // Oracle: the diagonal is the input's Bell-basis diagonal by direct change of basis.
        let oracle = to_tensored_bell_basis(rho.matrix());
        let diag = tensored_bell_diagonal(&out).unwrap();
        for k in 0..16 {
            assert!((diag[k] - oracle[(k, k)].re).abs() < 1e-12);
        }
    }
}

#[test]
fn twirl_is_idempotent_and_preserves_error_rates() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..20 {
        let rho = random_density_matrix(&mut rng, 16);
        let once = twirl(&rho).unwrap();
        let twice = twirl(&once).unwrap();
        assert!(max_abs_diff(once.matrix(), twice.matrix()) < 1e-12);
        for u1 in Basis::BOTH {
            for u2 in Basis::BOTH {
                let before = basis_error_rate(&rho, u1, u2).unwrap();
                let after = basis_error_rate(&once, u1, u2).unwrap();
                assert!((before - after).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn bell_diagonal_states_are_twirl_fixed_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let rho = bell_diagonal_to_density(&random_bell_diagonal(&mut rng));
        let out = twirl(&rho).unwrap();
        assert!(max_abs_diff(out.matrix(), rho.matrix()) < 1e-12);
    }
}

#[test]
fn conditional_states_related_by_relabelling() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..10 {
        let rho = bell_diagonal_to_density(&random_bell_diagonal(&mut rng));
        for u1 in Basis::BOTH {
            for u2 in Basis::BOTH {
                for l in BellLabel::all() {
                    let here = node_conditioned_ab_state(&rho, u1, u2, l).unwrap();
                    let there = node_conditioned_ab_state(&rho, u1.flipped(), u2.flipped(), l.swapped()).unwrap();
                    assert!(max_abs_diff(&here, &there) < 1e-13);
                }
            }
        }
    }
}

#[test]
fn holevo_never_exceeds_entropy_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for trial in 0..200 {
        let state = if trial % 2 == 0 {
            random_bell_diagonal(&mut rng)
        } else {
            random_sparse_bell_diagonal(&mut rng, 1 + trial % 6)
        };
        for u1 in Basis::BOTH {
            for u2 in Basis::BOTH {
                let chi = holevo_oracle(&state, u1, u2);
                let bound = holevo_bound(&state, u1, u2);
                assert!(chi <= bound + 1e-9, "trial {trial}: chi {chi} > bound {bound}");
            }
        }
    }
}

#[test]
fn phase_error_only_states_saturate_the_bound() {
    // Weight only on Φ_{a,0} ⊗ Φ_{a′,0}: no bit errors in either link.
    let weights = [0.7, 0.1, 0.15, 0.05];
    let mut alpha = [0.0; 16];
    for a in 0..2u8 {
        for ap in 0..2u8 {
            alpha[BellDiagonalState::index(label(a, 0), label(ap, 0))] = weights[(2 * a + ap) as usize];
        }
    }
    let state = BellDiagonalState::new(alpha).unwrap();
    // Z key with Z-measured links: phase errors are invisible in the key and
    // Eve's information reaches the bound.
    let chi = holevo_oracle(&state, Basis::Z, Basis::Z);
    let bound = holevo_bound(&state, Basis::Z, Basis::Z);
    assert!(bound - chi < 1e-9 && chi > 0.1, "chi {chi} bound {bound}");
    // X key: no conjugate errors, nothing leaks.
    assert!(holevo_oracle(&state, Basis::X, Basis::X) < 1e-9);
    assert!(holevo_bound(&state, Basis::X, Basis::X) < 1e-12);
}

#[test]
fn holevo_bounded_by_observed_conjugate_error() {
    // Concavity step: Σ p h(e_hidden) ≤ h(e^{ū1,ū2}).
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..50 {
        let state = random_bell_diagonal(&mut rng);
        let rho = bell_diagonal_to_density(&state);
        for u1 in Basis::BOTH {
            for u2 in Basis::BOTH {
                let e = basis_error_rate(&rho, u1.flipped(), u2.flipped()).unwrap();
                let h = str_relay::binary_entropy(e).unwrap();
                assert!(holevo_bound(&state, u1, u2) <= h + 1e-12);
                assert!(holevo_oracle(&state, u1, u2) <= h + 1e-9);
            }
        }
    }
}

#[test]
fn complex_entries_survive_twirl_trace() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let rho = random_density_matrix(&mut rng, 16);
    let out = twirl(&rho).unwrap();
    let tr: Complex64 = out.matrix().trace();
    assert!((tr.re - 1.0).abs() < 1e-12 && tr.im.abs() < 1e-12);
}
