//! Self-checks of the module invariants, grouped into suites.
//!
//! Each check draws its random inputs from a seeded generator, so a run is
//! reproducible from `(trials, seed)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::decoy::{self, DecoyScenario, LinkPhysics, Protocol};
use crate::keyrate::{self, RateInputs};
use crate::qubit::random::{random_bell_diagonal, random_density_matrix};
use crate::qubit::{
    basis_error_rate, bell_diagonal_to_density, holevo_bound, holevo_oracle, tensored_bell_diagonal,
    to_tensored_bell_basis, twirl, von_neumann_entropy, Basis, BellDiagonalState, BellLabel, DensityMatrix,
    CHAIN_DIM,
};
use crate::relay::{self, BasisVector, ChainConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Suite {
    Twirl,
    Holevo,
    KeyRate,
    MonteCarlo,
    Decoy,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::Twirl, Suite::Holevo, Suite::KeyRate, Suite::MonteCarlo, Suite::Decoy];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Twirl => "twirl",
            Suite::Holevo => "holevo",
            Suite::KeyRate => "keyrate",
            Suite::MonteCarlo => "montecarlo",
            Suite::Decoy => "decoy",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub suite: Suite,
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed value, or a short explanation.
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> usize {
        self.checks.iter().filter(|c| c.passed).count()
    }

    pub fn failed(&self) -> usize {
        self.checks.len() - self.passed()
    }

    pub fn all_passed(&self) -> bool {
        self.failed() == 0
    }

    fn push(&mut self, suite: Suite, name: &'static str, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            suite,
            name,
            passed,
            detail: detail.into(),
        });
    }

    /// Records a check whose body may fail with a library error.
    fn record(&mut self, suite: Suite, name: &'static str, outcome: crate::Result<(bool, String)>) {
        match outcome {
            Ok((passed, detail)) => self.push(suite, name, passed, detail),
            Err(e) => self.push(suite, name, false, format!("error: {e}")),
        }
    }
}

pub const DEFAULT_TRIALS: usize = 100;

/// Runs every suite with `trials` random inputs per randomised check.
pub fn run_all(trials: usize, seed: u64) -> VerifyReport {
    let mut report = VerifyReport::default();
    for suite in Suite::ALL {
        run_suite(suite, trials, seed, &mut report);
    }
    report
}

pub fn run_suite(suite: Suite, trials: usize, seed: u64, report: &mut VerifyReport) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (suite as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    match suite {
        Suite::Twirl => twirl_suite(&mut rng, trials, report),
        Suite::Holevo => holevo_suite(&mut rng, trials, report),
        Suite::KeyRate => keyrate_suite(report),
        Suite::MonteCarlo => montecarlo_suite(seed, report),
        Suite::Decoy => decoy_suite(report),
    }
}

fn pairs() -> [(Basis, Basis); 4] {
    [(Basis::Z, Basis::Z), (Basis::Z, Basis::X), (Basis::X, Basis::Z), (Basis::X, Basis::X)]
}

fn twirl_suite(rng: &mut ChaCha8Rng, trials: usize, report: &mut VerifyReport) {
    let states: Vec<DensityMatrix> = (0..trials).map(|_| random_density_matrix(rng, CHAIN_DIM)).collect();

    report.record(Suite::Twirl, "diagonal in tensored Bell basis", (|| {
        let mut worst = 0.0f64;
        for rho in &states {
            let t = to_tensored_bell_basis(twirl(rho)?.matrix());
            for i in 0..CHAIN_DIM {
                for j in 0..CHAIN_DIM {
                    if i != j {
                        worst = worst.max(t[(i, j)].norm());
                    }
                }
            }
        }
        Ok((worst < 1e-12, format!("max off-diagonal {worst:.3e}")))
    })());

    report.record(Suite::Twirl, "idempotent and trace preserving", (|| {
        let mut worst = 0.0f64;
        for rho in states.iter().take(20) {
            let once = twirl(rho)?;
            let twice = twirl(&once)?;
            worst = worst.max(crate::qubit::max_abs_diff(once.matrix(), twice.matrix()));
            worst = worst.max((once.matrix().trace().re - 1.0).abs());
        }
        Ok((worst < 1e-12, format!("max deviation {worst:.3e}")))
    })());

    report.record(Suite::Twirl, "error rates invariant", (|| {
        let mut worst = 0.0f64;
        for rho in &states {
            let t = twirl(rho)?;
            for (u1, u2) in pairs() {
                worst = worst.max((basis_error_rate(rho, u1, u2)? - basis_error_rate(&t, u1, u2)?).abs());
            }
        }
        Ok((worst < 1e-10, format!("max difference {worst:.3e}")))
    })());

    report.record(Suite::Twirl, "Bell-diagonal states are fixed points", (|| {
        let mut worst = 0.0f64;
        for _ in 0..trials.min(20) {
            let state = random_bell_diagonal(rng);
            let rho = bell_diagonal_to_density(&state);
            let diag = tensored_bell_diagonal(&rho)?;
            for (a, b) in diag.iter().zip(state.weights()) {
                worst = worst.max((a - b).abs());
            }
            worst = worst.max(crate::qubit::max_abs_diff(twirl(&rho)?.matrix(), rho.matrix()));
        }
        Ok((worst < 1e-12, format!("max deviation {worst:.3e}")))
    })());

    report.record(Suite::Twirl, "entropy of trivial states", (|| {
        let pure = DensityMatrix::pure(&crate::qubit::bell_state(BellLabel::new(false, false)))?;
        let mixed = DensityMatrix::maximally_mixed(CHAIN_DIM);
        let s_pure = von_neumann_entropy(pure.matrix())?;
        let s_mixed = von_neumann_entropy(mixed.matrix())?;
        let ok = s_pure.abs() < 1e-10 && (s_mixed - 4.0).abs() < 1e-10;
        Ok((ok, format!("S(pure) {s_pure:.2e}, S(I/16) {s_mixed:.12}")))
    })());
}

fn holevo_suite(rng: &mut ChaCha8Rng, trials: usize, report: &mut VerifyReport) {
    let mut max_excess = f64::NEG_INFINITY;
    for _ in 0..trials {
        let state = random_bell_diagonal(rng);
        for (u1, u2) in pairs() {
            max_excess = max_excess.max(holevo_oracle(&state, u1, u2) - holevo_bound(&state, u1, u2));
        }
    }
    report.push(
        Suite::Holevo,
        "oracle below entropy bound",
        max_excess <= 1e-9,
        format!("max(χ − bound) {max_excess:.3e}"),
    );

    // Weight only on Φ_{a,0} ⊗ Φ_{a',0}: no bit errors, phase errors only.
    let mut alpha = [0.0; 16];
    let weights = [0.4, 0.3, 0.2, 0.1];
    for (k, w) in weights.iter().enumerate() {
        let first = BellLabel::new(k & 1 == 1, false);
        let second = BellLabel::new(k & 2 == 2, false);
        alpha[BellDiagonalState::index(first, second)] = *w;
    }
    report.record(Suite::Holevo, "bound saturated by phase-error family", (|| {
        let state = BellDiagonalState::new(alpha)?;
        let gap = holevo_bound(&state, Basis::Z, Basis::Z) - holevo_oracle(&state, Basis::Z, Basis::Z);
        Ok((gap.abs() < 1e-3, format!("gap {gap:.3e}")))
    })());

    let uniform = holevo_oracle(&BellDiagonalState::uniform(), Basis::Z, Basis::Z);
    report.push(
        Suite::Holevo,
        "maximally mixed chain leaks one bit",
        (uniform - 1.0).abs() < 1e-9,
        format!("χ {uniform:.12}"),
    );
}

fn keyrate_suite(report: &mut VerifyReport) {
    let expected = [(0usize, 0.1100), (1, 0.0584), (2, 0.0398)];
    for (nodes, target) in expected {
        let name = match nodes {
            0 => "threshold without nodes",
            1 => "threshold with one node",
            _ => "threshold with two nodes",
        };
        let found = keyrate::zero_crossing(nodes, 1.0);
        let ok = found.is_some_and(|e| (e - target).abs() <= 5e-4);
        report.push(Suite::KeyRate, name, ok, format!("{found:?} vs {target}"));
    }

    report.record(Suite::KeyRate, "conventional ≥ one node ≥ two nodes", (|| {
        let grid: Vec<f64> = (0..=60).map(|i| 0.002 * i as f64).collect();
        let rows = keyrate::fig2_curves(&grid, &[0, 1, 2])?;
        let bad = rows
            .iter()
            .filter(|r| !(r.rates[0] >= r.rates[1] && r.rates[1] >= r.rates[2]))
            .count();
        Ok((bad == 0, format!("{bad} of {} grid points out of order", rows.len())))
    })());

    report.record(Suite::KeyRate, "rate non-increasing in error rate", (|| {
        let mut previous = f64::INFINITY;
        let mut ok = true;
        for i in 0..=50 {
            let r = keyrate::str_rate_qubit(&RateInputs::constant(2, 0.01 * i as f64), 2)?.unclamped;
            ok &= r <= previous;
            previous = r;
        }
        Ok((ok, String::from("e = 0 … 0.5")))
    })());
}

fn montecarlo_suite(seed: u64, report: &mut VerifyReport) {
    const ROUNDS: u64 = 200_000;
    for (nodes, flip) in [(1usize, 0.01), (2, 0.05)] {
        let cfg = ChainConfig {
            nodes,
            p_z: 0.5,
            rounds: ROUNDS,
            flip,
            detection: 1.0,
            seed,
        };
        let name = if nodes == 1 {
            "error rates match compound model, one node"
        } else {
            "error rates match compound model, two nodes"
        };
        report.record(Suite::MonteCarlo, name, (|| {
            let run = relay::simulate_chain(&cfg)?;
            let expected = relay::compound_error(flip, nodes + 1)?;
            let mut worst_sigma = 0.0f64;
            for u in BasisVector::all(nodes + 1) {
                let (_, n) = run.table.counts(u);
                let observed = run.table.rate(u).unwrap_or(f64::NAN);
                let sigma = (expected * (1.0 - expected) / n as f64).sqrt();
                worst_sigma = worst_sigma.max((observed - expected).abs() / sigma);
            }
            Ok((worst_sigma < 3.0, format!("worst deviation {worst_sigma:.2}σ")))
        })());
    }

    report.record(Suite::MonteCarlo, "noiseless chain is error free", (|| {
        let cfg = ChainConfig {
            nodes: 2,
            rounds: 50_000,
            flip: 0.0,
            detection: 0.7,
            seed,
            ..ChainConfig::default()
        };
        let run = relay::simulate_chain(&cfg)?;
        let errors = run.table.total_errors();
        Ok((errors == 0 && run.table.total_samples() > 0, format!("{errors} errors")))
    })());

    report.record(Suite::MonteCarlo, "independent of worker count", (|| {
        let cfg = ChainConfig {
            nodes: 1,
            rounds: 150_000,
            flip: 0.03,
            seed,
            ..ChainConfig::default()
        };
        let reference = relay::run_quantum_phase(&cfg)?;
        for threads in [1, 4] {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|_| crate::Error::InvalidParameter {
                    name: "threads",
                    value: threads as f64,
                    reason: "thread pool could not be created",
                })?;
            if pool.install(|| relay::run_quantum_phase(&cfg))? != reference {
                return Ok((false, format!("{threads} workers differ")));
            }
        }
        Ok((true, String::from("1 and 4 workers agree with default pool")))
    })());
}

fn decoy_suite(report: &mut VerifyReport) {
    const BOUNDS: (f64, f64) = (1e-3, 2.0);

    report.record(Suite::Decoy, "fractions partition detections", (|| {
        let mut worst = 0.0f64;
        for links in 1..4 {
            for loss in [0.0, 15.0, 30.0] {
                let f = decoy::decoy_fractions(&vec![LinkPhysics::noisy(loss, 0.4); links])?;
                worst = worst.max((f.f_v + f.f_s_vs + f.f_m - 1.0).abs());
                if f.f_s_s > f.f_s_vs + 1e-15 {
                    return Ok((false, format!("f_ss > f_svs at {loss} dB")));
                }
            }
        }
        Ok((worst < 1e-12, format!("max |Σf − 1| {worst:.3e}")))
    })());

    for (name, base) in [
        ("noisy links ordered and non-increasing", LinkPhysics::noisy(0.0, 0.5)),
        ("error-free links ordered and non-increasing", LinkPhysics::error_free(0.0, 0.5)),
    ] {
        let f_ec = if base.intrinsic_error > 0.0 { 1.2 } else { 1.0 };
        report.record(Suite::Decoy, name, (|| {
            let mut previous = [f64::INFINITY; 3];
            for step in 0..=8 {
                let loss = 5.0 * step as f64;
                let mut rates = [0.0; 3];
                for (k, links) in [1usize, 2, 3].into_iter().enumerate() {
                    let protocol = if links == 1 { Protocol::Conventional } else { Protocol::Str };
                    let s = DecoyScenario::uniform_chain(base.with_loss(loss), links, f_ec, 0.5);
                    rates[k] = decoy::optimize_intensity(&s, protocol, BOUNDS)?.report.rate;
                }
                if step == 0 && rates.iter().any(|&r| r <= 0.0) {
                    return Ok((false, format!("non-positive rate at 0 dB: {rates:?}")));
                }
                if !(rates[0] >= rates[1] && rates[1] >= rates[2]) {
                    return Ok((false, format!("out of order at {loss} dB: {rates:?}")));
                }
                if rates.iter().zip(&previous).any(|(r, p)| *r > p * (1.0 + 1e-9)) {
                    return Ok((false, format!("rate rises at {loss} dB")));
                }
                previous = rates;
            }
            Ok((true, String::from("0–40 dB in 5 dB steps")))
        })());
    }
}
