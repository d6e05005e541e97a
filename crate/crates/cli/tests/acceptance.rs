//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use str_relay::decoy::{
    cutoff_loss, decoy_fractions, link_statistics, optimize_intensity, DecoyScenario, LinkPhysics, Protocol,
};
use str_relay::keyrate::{conventional_relay_rate, str_rate_for_link_error, zero_crossing};
use str_relay::qubit::random::{random_bell_diagonal, random_density_matrix};
use str_relay::qubit::{
    basis_error_rate, holevo_bound, holevo_oracle, rotated_bell_basis, twirl, Basis, BellDiagonalState,
    BellLabel, CMatrix, CVector,
};
use str_relay::relay::{
    compound_error, correct_and_estimate, corrected_bob_key, pair_and_announce, run_quantum_phase, simulate_chain,
    BasisVector, ChainConfig,
};

const TWIRL_OFF_DIAGONAL_TOL: f64 = 1e-12;
const TWIRL_STATES: usize = 100;
const TWIRL_TIME_LIMIT: Duration = Duration::from_secs(10);
const INVARIANCE_TOL: f64 = 1e-10;
const HOLEVO_STATES: usize = 1000;
const HOLEVO_SLACK: f64 = 1e-9;
const SATURATION_GAP: f64 = 1e-3;
const HOLEVO_TIME_LIMIT: Duration = Duration::from_secs(120);
const PHASE_TOL: f64 = 1e-12;
const THRESHOLD_TOL: f64 = 5e-4;
const MC_ROUNDS: u64 = 1_000_000;
const MC_SIGMAS: f64 = 3.0;
const DECOY_TIME_LIMIT: Duration = Duration::from_secs(300);
const FRACTION_SUM_TOL: f64 = 1e-15;
const POISSON_TOL: f64 = 1e-9;
const POISSON_CUTOFF: i32 = 30;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn pairs() -> [(Basis, Basis); 4] {
    [(Basis::Z, Basis::Z), (Basis::Z, Basis::X), (Basis::X, Basis::Z), (Basis::X, Basis::X)]
}

fn real_vector(entries: [f64; 4], scale: f64) -> CVector {
    CVector::from_iterator(4, entries.iter().map(|&x| Complex64::new(x * scale, 0.0)))
}

/// The four two-qubit Bell states written out in the computational basis.
fn literal_bell() -> [CVector; 4] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    [
        real_vector([1.0, 0.0, 0.0, 1.0], s),
        real_vector([0.0, 1.0, 1.0, 0.0], s),
        real_vector([1.0, 0.0, 0.0, -1.0], s),
        real_vector([0.0, -1.0, 1.0, 0.0], s),
    ]
}

/// Bell states with a Hadamard on the second qubit, written out.
fn literal_primed_bell() -> [CVector; 4] {
    [
        real_vector([1.0, 1.0, 1.0, -1.0], 0.5),
        real_vector([1.0, -1.0, 1.0, 1.0], 0.5),
        real_vector([1.0, 1.0, -1.0, 1.0], 0.5),
        real_vector([-1.0, 1.0, 1.0, 1.0], 0.5),
    ]
}

fn max_off_diagonal_in_bell_basis(rho: &CMatrix) -> f64 {
    let bell = literal_bell();
    let basis: Vec<CVector> = bell
        .iter()
        .flat_map(|first| bell.iter().map(move |second| first.kronecker(second)))
        .collect();
    let mut worst = 0.0f64;
    for (i, bi) in basis.iter().enumerate() {
        let rho_bi = rho * bi;
        for (j, bj) in basis.iter().enumerate() {
            if i != j {
                worst = worst.max(bj.dotc(&rho_bi).norm());
            }
        }
    }
    worst
}

fn twirl_diagonalisation() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..TWIRL_STATES {
        let rho = random_density_matrix(&mut rng, 16);
        let t = twirl(&rho).map_err(|e| e.to_string())?;
        worst = worst.max(max_off_diagonal_in_bell_basis(t.matrix()));
    }
    let elapsed = start.elapsed();
    ensure(
        worst < TWIRL_OFF_DIAGONAL_TOL && elapsed < TWIRL_TIME_LIMIT,
        format!("max off-diagonal {worst:.2e} over {TWIRL_STATES} states in {elapsed:.2?}"),
    )
}

fn twirl_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for _ in 0..TWIRL_STATES {
        let rho = random_density_matrix(&mut rng, 16);
        let t = twirl(&rho).map_err(|e| e.to_string())?;
        for (u1, u2) in pairs() {
            let a = basis_error_rate(&rho, u1, u2).map_err(|e| e.to_string())?;
            let b = basis_error_rate(&t, u1, u2).map_err(|e| e.to_string())?;
            worst = worst.max((a - b).abs());
        }
    }
    ensure(worst < INVARIANCE_TOL, format!("max |Δe| {worst:.2e}"))
}

fn holevo_bound_check() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut excess = f64::NEG_INFINITY;
    for _ in 0..HOLEVO_STATES {
        let state = random_bell_diagonal(&mut rng);
        for (u1, u2) in pairs() {
            excess = excess.max(holevo_oracle(&state, u1, u2) - holevo_bound(&state, u1, u2));
        }
    }
    // Rank-4 family on Φ_{a,0} ⊗ Φ_{a',0}: phase errors only.
    let mut gap = 0.0f64;
    for weights in [[0.4, 0.3, 0.2, 0.1], [0.7, 0.1, 0.1, 0.1], [0.25; 4]] {
        let mut alpha = [0.0; 16];
        for (k, w) in weights.iter().enumerate() {
            let first = BellLabel::new(k & 1 == 1, false);
            let second = BellLabel::new(k & 2 == 2, false);
            alpha[BellDiagonalState::index(first, second)] = *w;
        }
        let state = BellDiagonalState::new(alpha).map_err(|e| e.to_string())?;
        gap = gap.max((holevo_bound(&state, Basis::Z, Basis::Z) - holevo_oracle(&state, Basis::Z, Basis::Z)).abs());
    }
    let elapsed = start.elapsed();
    ensure(
        excess <= HOLEVO_SLACK && gap < SATURATION_GAP && elapsed < HOLEVO_TIME_LIMIT,
        format!("max(χ − bound) {excess:.2e}, saturation gap {gap:.2e}, {elapsed:.2?}"),
    )
}

fn rotated_basis_rows() -> Outcome {
    let b = literal_bell();
    let p = literal_primed_bell();
    let rows = [
        (Basis::Z, Basis::Z, [&b[0], &b[1], &b[2], &b[3]]),
        (Basis::Z, Basis::X, [&p[0], &p[1], &p[2], &p[3]]),
        (Basis::X, Basis::Z, [&p[0], &p[2], &p[1], &p[3]]),
        (Basis::X, Basis::X, [&b[0], &b[2], &b[1], &b[3]]),
    ];
    let mut worst = 0.0f64;
    for (u1, u2, expected) in rows {
        for (got, want) in rotated_bell_basis(u1, u2).iter().zip(expected) {
            worst = worst.max(1.0 - got.dotc(want).norm()).max(got.norm() - 1.0);
        }
    }
    ensure(worst < PHASE_TOL, format!("max 1 − |⟨row|expected⟩| {worst:.2e}"))
}

fn fig2_thresholds() -> Outcome {
    let targets = [(0usize, 0.1100), (1, 0.0584), (2, 0.0398)];
    let mut found = Vec::new();
    for (m, target) in targets {
        let e = zero_crossing(m, 1.0).ok_or(format!("no zero crossing for {m} node(s)"))?;
        if (e - target).abs() > THRESHOLD_TOL {
            return Err(format!("{m} node(s): {e:.5} vs {target}"));
        }
        found.push(format!("{e:.5}"));
    }
    for i in 0..=60 {
        let e = 0.002 * i as f64;
        let conv = conventional_relay_rate(&[e, e], 1.0).map_err(|x| x.to_string())?.rate;
        let s1 = str_rate_for_link_error(e, 1, 1.0).map_err(|x| x.to_string())?.rate;
        let s2 = str_rate_for_link_error(e, 2, 1.0).map_err(|x| x.to_string())?.rate;
        if !(conv >= s1 && s1 >= s2) {
            return Err(format!("ordering fails at e_link {e}"));
        }
    }
    Ok(format!("zero crossings {} ; ordered on 61-point grid", found.join(", ")))
}

/// Twenty-four bins are each held to 3σ, so a correct simulator fails this
/// for roughly 6% of seeds; the seed is fixed and the run is deterministic.
fn monte_carlo_consistency() -> Outcome {
    let mut worst = 0.0f64;
    for nodes in [1usize, 2] {
        for flip in [0.01, 0.05] {
            let cfg = ChainConfig {
                nodes,
                p_z: 0.5,
                rounds: MC_ROUNDS,
                flip,
                detection: 1.0,
                seed: 420 + nodes as u64,
            };
            let run = simulate_chain(&cfg).map_err(|e| e.to_string())?;
            let expected = compound_error(flip, nodes + 1).map_err(|e| e.to_string())?;
            for u in BasisVector::all(nodes + 1) {
                let (_, n) = run.table.counts(u);
                let observed = run.table.rate(u).ok_or("empty bin")?;
                let sigma = (expected * (1.0 - expected) / n as f64).sqrt();
                worst = worst.max((observed - expected).abs() / sigma);
            }
        }
    }
    let cfg = ChainConfig {
        nodes: 2,
        p_z: 0.5,
        rounds: MC_ROUNDS,
        flip: 0.0,
        detection: 0.8,
        seed: 7,
    };
    let data = run_quantum_phase(&cfg).map_err(|e| e.to_string())?;
    let (paired, ann) = pair_and_announce(&data);
    let errors = correct_and_estimate(&paired, &ann).total_errors();
    let recovered = corrected_bob_key(&paired, &ann) == paired.alice;
    ensure(
        worst <= MC_SIGMAS && errors == 0 && recovered && !paired.is_empty(),
        format!("worst deviation {worst:.2}σ; noiseless run {errors} errors, key recovered {recovered}"),
    )
}

const MU_BOUNDS: (f64, f64) = (1e-3, 2.0);

fn fig3_panel(base: LinkPhysics, f_ec: f64) -> Result<[Vec<f64>; 3], String> {
    let grid: Vec<f64> = (0..=80).map(|i| 0.5 * i as f64).collect();
    let mut curves = [Vec::new(), Vec::new(), Vec::new()];
    for &loss in &grid {
        for (k, links) in [1usize, 2, 3].into_iter().enumerate() {
            let protocol = if links == 1 { Protocol::Conventional } else { Protocol::Str };
            let s = DecoyScenario::uniform_chain(base.with_loss(loss), links, f_ec, 0.5);
            let opt = optimize_intensity(&s, protocol, MU_BOUNDS).map_err(|e| e.to_string())?;
            curves[k].push(opt.report.rate);
        }
    }
    for (k, c) in curves.iter().enumerate() {
        if c[0] <= 0.0 {
            return Err(format!("curve {k} not positive at 0 dB"));
        }
        if c.windows(2).any(|w| w[1] > w[0] * (1.0 + 1e-9)) {
            return Err(format!("curve {k} increases with loss"));
        }
    }
    for i in 0..grid.len() {
        if !(curves[0][i] >= curves[1][i] && curves[1][i] >= curves[2][i]) {
            return Err(format!("ordering fails at {} dB", grid[i]));
        }
    }
    Ok(curves)
}

fn decoy_fig3() -> Outcome {
    let start = Instant::now();
    fig3_panel(LinkPhysics::noisy(0.0, 0.5), 1.2)?;
    fig3_panel(LinkPhysics::error_free(0.0, 0.5), 1.2)?;
    let make = |links| DecoyScenario::uniform_chain(LinkPhysics::noisy(0.0, 0.5), links, 1.2, 0.5);
    let cutoff = |links, protocol| -> Result<f64, String> {
        cutoff_loss(&make(links), protocol, MU_BOUNDS, 80.0)
            .map_err(|e| e.to_string())?
            .ok_or(format!("no cutoff below 80 dB for {links} link(s)"))
    };
    let conv = cutoff(1, Protocol::Conventional)?;
    let s1 = cutoff(2, Protocol::Str)?;
    let s2 = cutoff(3, Protocol::Str)?;
    let elapsed = start.elapsed();
    ensure(
        s1 < conv && s2 < conv && elapsed < DECOY_TIME_LIMIT,
        format!("cutoffs conventional {conv:.2} dB, STR-1 {s1:.2} dB, STR-2 {s2:.2} dB; both panels ordered; {elapsed:.2?}"),
    )
}

fn poisson_oracle(link: &LinkPhysics) -> (f64, f64) {
    let eta = link.detector_efficiency * 10f64.powf(-link.loss_db / 10.0);
    let y0 = 1.0 - (1.0 - link.dark_count_prob).powi(2);
    let (mut q, mut eq, mut p) = (0.0, 0.0, (-link.mu).exp());
    for n in 0..=POISSON_CUTOFF {
        if n > 0 {
            p *= link.mu / f64::from(n);
        }
        let none = (1.0 - eta).powi(n);
        q += p * (1.0 - (1.0 - y0) * none);
        eq += p * (0.5 * y0 * none + link.intrinsic_error * (1.0 - none));
    }
    (q, eq / q)
}

fn fraction_identities() -> Outcome {
    let mut worst_sum = 0.0f64;
    let mut worst_oracle = 0.0f64;
    for loss in [0.0, 15.0, 35.0] {
        for mu in [0.05, 0.5, 1.5] {
            for (pd, ed) in [(0.0, 0.0), (6e-6, 0.0185), (1e-4, 0.04)] {
                let link = LinkPhysics {
                    loss_db: loss,
                    detector_efficiency: 0.5,
                    dark_count_prob: pd,
                    intrinsic_error: ed,
                    mu,
                };
                let st = link_statistics(&link).map_err(|e| e.to_string())?;
                let (q, e) = poisson_oracle(&link);
                worst_oracle = worst_oracle.max((st.gain - q).abs()).max((st.qber - e).abs());
                for links in 1..=3 {
                    let f = decoy_fractions(&vec![link; links]).map_err(|e| e.to_string())?;
                    worst_sum = worst_sum.max((f.f_v + f.f_s_vs + f.f_m - 1.0).abs());
                }
            }
        }
    }
    ensure(
        worst_sum <= FRACTION_SUM_TOL && worst_oracle < POISSON_TOL,
        format!("max |Σf − 1| {worst_sum:.1e}; max oracle deviation {worst_oracle:.2e} on 3×3×3 grid"),
    )
}

fn determinism() -> Outcome {
    let dir = std::env::temp_dir().join(format!("str-relay-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let run = |name: &str, workers: &str| -> Result<Vec<u8>, String> {
        let path = dir.join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_str-relay"))
            .args(["montecarlo", "--rounds", "1000000", "--seed", "42", "--flip", "0.03", "--nodes", "2"])
            .args(["--workers", workers, "-o"])
            .arg(&path)
            .output()
            .map_err(|e| e.to_string())?;
        if !status.status.success() {
            return Err(String::from_utf8_lossy(&status.stderr).into_owned());
        }
        std::fs::read(Path::new(&path)).map_err(|e| e.to_string())
    };
    let reference = run("a.csv", "0")?;
    let mut identical = reference == run("b.csv", "0")?;
    for workers in ["1", "2", "7"] {
        identical &= reference == run(&format!("w{workers}.csv"), workers)?;
    }
    let _ = std::fs::remove_dir_all(&dir);
    ensure(identical, String::from("seed 42 twice plus 1, 2, 7 workers"))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("twirl diagonalisation", twirl_diagonalisation),
        ("twirl invariance of error rates", twirl_invariance),
        ("Holevo quantity below entropy bound", holevo_bound_check),
        ("rotated Bell basis rows", rotated_basis_rows),
        ("qubit-rate thresholds and ordering", fig2_thresholds),
        ("Monte Carlo consistency", monte_carlo_consistency),
        ("decoy-state curves", decoy_fig3),
        ("fraction identities and Poisson oracle", fraction_identities),
        ("Monte Carlo determinism", determinism),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("[PASS] {}. {name}: {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("[FAIL] {}. {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
