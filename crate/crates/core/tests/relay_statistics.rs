use str_relay::relay::{
    compound_error, correct_and_estimate, corrected_bob_key, pair_and_announce, run_quantum_phase, simulate_chain,
    BasisVector, ChainConfig,
};

fn three_sigma(p: f64, n: f64) -> f64 {
    3.0 * (p * (1.0 - p) / n).sqrt()
}

#[test]
fn sifting_keeps_half_with_uniform_bases() {
    let cfg = ChainConfig {
        nodes: 1,
        p_z: 0.5,
        rounds: 200_000,
        flip: 0.0,
        detection: 1.0,
        seed: 7,
    };
    let data = run_quantum_phase(&cfg).unwrap();
    // p_z² + (1 − p_z)² = 0.5
    for count in data.survivor_counts() {
        let frac = count as f64 / cfg.rounds as f64;
        assert!((frac - 0.5).abs() < three_sigma(0.5, cfg.rounds as f64));
    }
}

#[test]
fn per_link_disagreement_matches_flip_probability() {
    let w = 0.05;
    let cfg = ChainConfig {
        nodes: 2,
        p_z: 0.3,
        rounds: 200_000,
        flip: w,
        detection: 0.8,
        seed: 11,
    };
    let data = run_quantum_phase(&cfg).unwrap();
    for link in &data.links {
        let n = link.len() as f64;
        let bad = link.iter().filter(|e| e.sender_bit != e.receiver_bit).count() as f64;
        assert!((bad / n - w).abs() < three_sigma(w, n));
    }
}

#[test]
fn noiseless_chain_recovers_alice_key() {
    for nodes in 0..4 {
        let cfg = ChainConfig {
            nodes,
            p_z: 0.5,
            rounds: 50_000,
            flip: 0.0,
            detection: 0.6,
            seed: 3,
        };
        let data = run_quantum_phase(&cfg).unwrap();
        let (paired, ann) = pair_and_announce(&data);
        assert!(!paired.is_empty());
        assert_eq!(corrected_bob_key(&paired, &ann), paired.alice);
        let table = correct_and_estimate(&paired, &ann);
        assert_eq!(table.total_errors(), 0);
        assert_eq!(table.total_samples(), paired.len() as u64);
    }
}

#[test]
fn error_rates_compound_across_links() {
    for (nodes, w) in [(1usize, 0.03), (2, 0.03), (0, 0.08)] {
        let cfg = ChainConfig {
            nodes,
            p_z: 0.5,
            rounds: 400_000,
            flip: w,
            detection: 1.0,
            seed: 1000 + nodes as u64,
        };
        let run = simulate_chain(&cfg).unwrap();
        let expected = compound_error(w, nodes + 1).unwrap();
        if nodes == 1 {
            assert!((expected - (1.0 - ((1.0 - w) * (1.0 - w) + w * w))).abs() < 1e-15);
        }
        if nodes == 2 {
            assert!((expected - (1.0 - (1.0 - 2.0 * w).powi(3)) / 2.0).abs() < 1e-15);
        }
        for u in BasisVector::all(nodes + 1) {
            let (_, n) = run.table.counts(u);
            let rate = run.table.rate(u).unwrap();
            assert!(
                (rate - expected).abs() < three_sigma(expected, n as f64),
                "m={nodes} u={} rate {rate} expected {expected}",
                u.label()
            );
        }
    }
}

#[test]
fn identical_seed_identical_output_for_any_thread_count() {
    let cfg = ChainConfig {
        nodes: 2,
        p_z: 0.5,
        rounds: 300_000,
        flip: 0.02,
        detection: 0.9,
        seed: 42,
    };
    let run_with = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_quantum_phase(&cfg).unwrap())
    };
    let one = run_with(1);
    assert_eq!(one, run_with(3));
    assert_eq!(one, run_with(8));
    let other_seed = run_quantum_phase(&ChainConfig { seed: 43, ..cfg.clone() }).unwrap();
    assert_ne!(one, other_seed);
}
