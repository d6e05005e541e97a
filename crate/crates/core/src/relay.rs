//! Monte Carlo execution of the relay protocol over a chain of `m` nodes.
//!
//! Each of the `m + 1` links is modelled as a classical stochastic channel:
//! independent basis choices at both ends, a detection event with fixed
//! probability and an independent bit flip. Rounds are processed in fixed-size
//! blocks, each drawing from its own ChaCha stream keyed by `(link, block)`, so
//! output does not depend on how blocks are scheduled across threads.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{check_probability, Error, Result};
use crate::info::{odd_parity, shannon};
use crate::qubit::Basis;

/// Rounds per RNG block.
pub const BLOCK_ROUNDS: u64 = 1 << 16;

/// Word offset between consecutive blocks inside one ChaCha stream.
const BLOCK_WORD_STRIDE: u128 = 1 << 40;

#[derive(Debug, Clone, PartialEq)]
pub struct ChainConfig {
    /// Number of intermediate nodes `m`; the chain has `m + 1` links.
    pub nodes: usize,
    /// Probability that any party picks the Z basis.
    pub p_z: f64,
    /// Rounds `N` per link.
    pub rounds: u64,
    /// Bit-flip probability on every link.
    pub flip: f64,
    /// Detection probability on every link.
    pub detection: f64,
    pub seed: u64,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            nodes: 1,
            p_z: 0.5,
            rounds: 100_000,
            flip: 0.0,
            detection: 1.0,
            seed: 0,
        }
    }
}

impl ChainConfig {
    pub fn links(&self) -> usize {
        self.nodes + 1
    }

    pub fn validate(&self) -> Result<()> {
        check_probability("p_z", self.p_z)?;
        check_probability("flip", self.flip)?;
        if self.flip > 0.5 {
            return Err(Error::InvalidParameter {
                name: "flip",
                value: self.flip,
                reason: "must lie in [0, 1/2]",
            });
        }
        if !(self.detection > 0.0 && self.detection <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "detection",
                value: self.detection,
                reason: "must lie in (0, 1]",
            });
        }
        if self.rounds == 0 {
            return Err(Error::InvalidParameter {
                name: "rounds",
                value: 0.0,
                reason: "must be at least 1",
            });
        }
        if self.nodes >= 31 {
            return Err(Error::InvalidParameter {
                name: "nodes",
                value: self.nodes as f64,
                reason: "basis vectors are limited to 31 links",
            });
        }
        Ok(())
    }
}

/// One event that survived sifting on a link.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SiftedEvent {
    pub round: u64,
    pub basis: Basis,
    pub sender_bit: bool,
    pub receiver_bit: bool,
}

/// Per-link sifted events, link 0 starting at Alice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SiftedLinkData {
    pub links: Vec<Vec<SiftedEvent>>,
}

impl SiftedLinkData {
    pub fn survivor_counts(&self) -> Vec<usize> {
        self.links.iter().map(Vec::len).collect()
    }
}

struct RoundDraw {
    sender_basis: Basis,
    receiver_basis: Basis,
    detected: bool,
    sender_bit: bool,
    flip: bool,
}

fn draw_round<R: Rng>(rng: &mut R, cfg: &ChainConfig) -> RoundDraw {
    let sender_basis = if rng.gen_bool(cfg.p_z) { Basis::Z } else { Basis::X };
    let receiver_basis = if rng.gen_bool(cfg.p_z) { Basis::Z } else { Basis::X };
    let detected = rng.gen_bool(cfg.detection);
    let sender_bit = rng.gen::<bool>();
    let flip = rng.gen_bool(cfg.flip);
    RoundDraw {
        sender_basis,
        receiver_basis,
        detected,
        sender_bit,
        flip,
    }
}

fn block_rng(seed: u64, link: usize, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(link as u64);
    rng.set_word_pos(u128::from(block) * BLOCK_WORD_STRIDE);
    rng
}

fn simulate_block(cfg: &ChainConfig, link: usize, block: u64) -> Vec<SiftedEvent> {
    let start = block * BLOCK_ROUNDS;
    let end = (start + BLOCK_ROUNDS).min(cfg.rounds);
    let mut rng = block_rng(cfg.seed, link, block);
    let mut out = Vec::new();
    for round in start..end {
        let d = draw_round(&mut rng, cfg);
        // Sifting looks at bases and the detection flag only.
        if !(d.detected && d.sender_basis == d.receiver_basis) {
            continue;
        }
        out.push(SiftedEvent {
            round,
            basis: d.sender_basis,
            sender_bit: d.sender_bit,
            receiver_bit: d.sender_bit ^ d.flip,
        });
    }
    out
}

/// Quantum phase: preparation, measurement, sifting and keymap on every link.
pub fn run_quantum_phase(cfg: &ChainConfig) -> Result<SiftedLinkData> {
    cfg.validate()?;
    let blocks = cfg.rounds.div_ceil(BLOCK_ROUNDS);
    let jobs: Vec<(usize, u64)> = (0..cfg.links())
        .flat_map(|link| (0..blocks).map(move |b| (link, b)))
        .collect();
    let results: Vec<Vec<SiftedEvent>> = jobs
        .par_iter()
        .map(|&(link, block)| simulate_block(cfg, link, block))
        .collect();
    let mut links = vec![Vec::new(); cfg.links()];
    for ((link, _), events) in jobs.into_iter().zip(results) {
        links[link].extend(events);
    }
    Ok(SiftedLinkData { links })
}

/// Basis choices `(u_1, …, u_{m+1})` of one paired index; link `i` is bit `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisVector {
    bits: u32,
    links: u8,
}

impl BasisVector {
    pub fn new(bits: u32, links: usize) -> Self {
        debug_assert!(links <= 31 && bits < (1 << links));
        Self {
            bits,
            links: links as u8,
        }
    }

    pub fn from_bases(bases: &[Basis]) -> Self {
        let bits = bases
            .iter()
            .enumerate()
            .fold(0u32, |acc, (i, b)| acc | (u32::from(b.bit()) << i));
        Self::new(bits, bases.len())
    }

    /// All `2^links` vectors in index order.
    pub fn all(links: usize) -> impl Iterator<Item = BasisVector> {
        (0..(1u32 << links)).map(move |bits| BasisVector::new(bits, links))
    }

    pub fn index(self) -> usize {
        self.bits as usize
    }

    pub fn links(self) -> usize {
        self.links as usize
    }

    pub fn basis(self, link: usize) -> Basis {
        Basis::from_bit(self.bits & (1 << link) != 0)
    }

    /// Every link's basis flipped.
    pub fn complement(self) -> Self {
        Self::new(!self.bits & ((1u32 << self.links) - 1), self.links())
    }

    /// Product of per-link probabilities, given each link's Z probability.
    pub fn probability(self, z_probabilities: &[f64]) -> f64 {
        (0..self.links())
            .map(|i| match self.basis(i) {
                Basis::Z => z_probabilities[i],
                Basis::X => 1.0 - z_probabilities[i],
            })
            .product()
    }

    /// Compact label such as `ZXZ`.
    pub fn label(self) -> String {
        (0..self.links()).map(|i| self.basis(i).symbol()).collect()
    }
}

/// Aligned raw keys after pairing, plus each paired index's basis vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairedKeys {
    pub alice: Vec<bool>,
    pub bob: Vec<bool>,
    pub basis_vectors: Vec<BasisVector>,
    /// First link with no survivors, when pairing was impossible.
    pub empty_link: Option<usize>,
}

impl PairedKeys {
    pub fn len(&self) -> usize {
        self.alice.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alice.is_empty()
    }
}

/// Public parity bits `b_{j,i} = t_{j,i} ⊕ t′_{j,i}`, one row per node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Announcements {
    pub parities: Vec<Vec<bool>>,
}

/// Pairs the `i`-th survivor of every link and computes node parities.
///
/// Pairing uses survival order and truncates to the shortest link.
pub fn pair_and_announce(data: &SiftedLinkData) -> (PairedKeys, Announcements) {
    let links = data.links.len();
    let nodes = links.saturating_sub(1);
    let empty_link = data.links.iter().position(Vec::is_empty);
    let n = if empty_link.is_some() {
        0
    } else {
        data.links.iter().map(Vec::len).min().unwrap_or(0)
    };

    let mut alice = Vec::with_capacity(n);
    let mut bob = Vec::with_capacity(n);
    let mut basis_vectors = Vec::with_capacity(n);
    let mut parities = vec![Vec::with_capacity(n); nodes];
    let mut bases = vec![Basis::Z; links];
    for i in 0..n {
        for (j, link) in data.links.iter().enumerate() {
            bases[j] = link[i].basis;
        }
        basis_vectors.push(BasisVector::from_bases(&bases));
        alice.push(data.links[0][i].sender_bit);
        bob.push(data.links[links - 1][i].receiver_bit);
        for (j, row) in parities.iter_mut().enumerate() {
            // Node j+1 received on link j and sent on link j+1.
            let t = data.links[j][i].receiver_bit;
            let t_prime = data.links[j + 1][i].sender_bit;
            row.push(t ^ t_prime);
        }
    }
    (
        PairedKeys {
            alice,
            bob,
            basis_vectors,
            empty_link,
        },
        Announcements { parities },
    )
}

/// Bob's corrected key `y′_i = (⊕_j b_{j,i}) ⊕ y_i`.
pub fn corrected_bob_key(paired: &PairedKeys, ann: &Announcements) -> Vec<bool> {
    paired
        .bob
        .iter()
        .enumerate()
        .map(|(i, &y)| ann.parities.iter().fold(y, |acc, row| acc ^ row[i]))
        .collect()
}

/// Error and sample counts per basis vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErrorRateTable {
    links: usize,
    counts: Vec<(u64, u64)>,
}

impl ErrorRateTable {
    pub fn new(links: usize) -> Self {
        Self {
            links,
            counts: vec![(0, 0); 1 << links],
        }
    }

    pub fn links(&self) -> usize {
        self.links
    }

    pub fn nodes(&self) -> usize {
        self.links - 1
    }

    pub fn record(&mut self, u: BasisVector, error: bool) {
        let entry = &mut self.counts[u.index()];
        entry.0 += u64::from(error);
        entry.1 += 1;
    }

    /// `(errors, samples)` for one basis vector.
    pub fn counts(&self, u: BasisVector) -> (u64, u64) {
        self.counts[u.index()]
    }

    /// Observed error rate; `None` when no samples landed in the bin.
    pub fn rate(&self, u: BasisVector) -> Option<f64> {
        let (errors, samples) = self.counts(u);
        (samples > 0).then(|| errors as f64 / samples as f64)
    }

    /// Rates for every basis vector, empty bins reported as 0.
    pub fn rates(&self) -> Vec<f64> {
        BasisVector::all(self.links)
            .map(|u| self.rate(u).unwrap_or(0.0))
            .collect()
    }

    pub fn total_samples(&self) -> u64 {
        self.counts.iter().map(|c| c.1).sum()
    }

    pub fn total_errors(&self) -> u64 {
        self.counts.iter().map(|c| c.0).sum()
    }
}

/// Applies parity corrections and bins disagreements by basis vector.
pub fn correct_and_estimate(paired: &PairedKeys, ann: &Announcements) -> ErrorRateTable {
    let links = ann.parities.len() + 1;
    let mut table = ErrorRateTable::new(links);
    let corrected = corrected_bob_key(paired, ann);
    for ((&x, &y), &u) in paired.alice.iter().zip(&corrected).zip(&paired.basis_vectors) {
        table.record(u, x != y);
    }
    table
}

/// Shannon entropy of Alice's key bits within each basis vector's bin.
pub fn observed_key_entropy(paired: &PairedKeys, links: usize) -> Vec<f64> {
    let mut ones = vec![0u64; 1 << links];
    let mut totals = vec![0u64; 1 << links];
    for (&x, &u) in paired.alice.iter().zip(&paired.basis_vectors) {
        ones[u.index()] += u64::from(x);
        totals[u.index()] += 1;
    }
    ones.iter()
        .zip(&totals)
        .map(|(&k, &n)| {
            if n == 0 {
                1.0
            } else {
                let p = k as f64 / n as f64;
                shannon([p, 1.0 - p])
            }
        })
        .collect()
}

/// Probability of an odd number of independent per-link flips:
/// `(1 − (1 − 2e)^links) / 2`.
pub fn compound_error(e_link: f64, links: usize) -> Result<f64> {
    if !(0.0..=0.5).contains(&e_link) {
        return Err(Error::InvalidParameter {
            name: "e_link",
            value: e_link,
            reason: "must lie in [0, 1/2]",
        });
    }
    Ok(odd_parity(std::iter::repeat_n(e_link, links)))
}

/// Full pipeline output of one Monte Carlo run.
#[derive(Debug, Clone, PartialEq)]
pub struct RelayRun {
    pub survivors: Vec<usize>,
    pub paired: usize,
    pub empty_link: Option<usize>,
    pub table: ErrorRateTable,
}

pub fn simulate_chain(cfg: &ChainConfig) -> Result<RelayRun> {
    let sifted = run_quantum_phase(cfg)?;
    let (paired, ann) = pair_and_announce(&sifted);
    let table = correct_and_estimate(&paired, &ann);
    Ok(RelayRun {
        survivors: sifted.survivor_counts(),
        paired: paired.len(),
        empty_link: paired.empty_link,
        table,
    })
}
