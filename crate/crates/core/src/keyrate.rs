//! Asymptotic key rates for qubit signals.
//!
//! All rates here are in bits per sifted, paired signal. The STR rate is
//!
//! ```text
//! r = Σ_u p_u H(K^u) − f_EC Σ_u p_u h(e^u) − Σ_u p_ũ h(e^u)
//! ```
//!
//! where `u` runs over basis vectors of the `m + 1` links and `ũ` flips every
//! basis in `u`.

use crate::error::{Error, Result};
use crate::info::h;
use crate::numeric::bisect;
use crate::relay::{compound_error, BasisVector, ErrorRateTable};

pub use crate::info::binary_entropy;

/// Rate together with its decomposition.
///
/// `rate = max(0, unclamped)` and
/// `unclamped = entropy_term − leak_term − holevo_term − tagged_term`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeyRateReport {
    pub rate: f64,
    pub unclamped: f64,
    pub entropy_term: f64,
    pub leak_term: f64,
    pub holevo_term: f64,
    /// Fraction of key discarded as tagged (multi-photon); zero for qubits.
    pub tagged_term: f64,
}

impl KeyRateReport {
    pub fn from_terms(entropy_term: f64, leak_term: f64, holevo_term: f64, tagged_term: f64) -> Self {
        let unclamped = entropy_term - leak_term - holevo_term - tagged_term;
        Self {
            rate: unclamped.max(0.0),
            unclamped,
            entropy_term,
            leak_term,
            holevo_term,
            tagged_term,
        }
    }

    /// Multiplies every term by a non-negative factor (e.g. detections per clock cycle).
    pub fn scaled(self, factor: f64) -> Self {
        Self::from_terms(
            self.entropy_term * factor,
            self.leak_term * factor,
            self.holevo_term * factor,
            self.tagged_term * factor,
        )
    }

    pub fn zero() -> Self {
        Self::from_terms(0.0, 0.0, 0.0, 0.0)
    }
}

/// Probability that a sifted event on one link is in the Z basis when both
/// ends choose Z with probability `p_z`.
pub fn sifted_z_probability(p_z: f64) -> f64 {
    let z = p_z * p_z;
    let x = (1.0 - p_z) * (1.0 - p_z);
    if z + x == 0.0 {
        0.5
    } else {
        z / (z + x)
    }
}

/// Sifting efficiency of one link, `p_z² + (1 − p_z)²`.
pub fn sifting_factor(p_z: f64) -> f64 {
    p_z * p_z + (1.0 - p_z) * (1.0 - p_z)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateInputs {
    /// Per-link probability that a sifted event is in the Z basis.
    pub z_probabilities: Vec<f64>,
    /// Error rate per basis vector, indexed by [`BasisVector::index`].
    pub error_rates: Vec<f64>,
    pub f_ec: f64,
    /// Entropy of Alice's key bits per basis vector, in bits.
    pub key_entropy: Vec<f64>,
}

impl RateInputs {
    /// Uniform bases, Shannon-limit error correction, one bit of key entropy.
    pub fn uniform(error_rates: Vec<f64>) -> Self {
        let links = error_rates.len().trailing_zeros() as usize;
        Self {
            z_probabilities: vec![0.5; links],
            key_entropy: vec![1.0; error_rates.len()],
            error_rates,
            f_ec: 1.0,
        }
    }

    /// Every basis vector sees the same error rate.
    pub fn constant(nodes: usize, error_rate: f64) -> Self {
        Self::uniform(vec![error_rate; 1 << (nodes + 1)])
    }

    pub fn from_table(table: &ErrorRateTable) -> Self {
        Self::uniform(table.rates())
    }

    pub fn with_f_ec(mut self, f_ec: f64) -> Self {
        self.f_ec = f_ec;
        self
    }

    /// Sets per-party basis probability `p_z` on every link.
    pub fn with_party_p_z(mut self, p_z: f64) -> Self {
        let q = sifted_z_probability(p_z);
        self.z_probabilities.iter_mut().for_each(|z| *z = q);
        self
    }

    pub fn with_key_entropy(mut self, key_entropy: Vec<f64>) -> Self {
        self.key_entropy = key_entropy;
        self
    }

    fn validate(&self, nodes: usize) -> Result<()> {
        let links = nodes + 1;
        let expected = 1usize << links;
        for len in [self.error_rates.len(), self.key_entropy.len()] {
            if len != expected {
                return Err(Error::TableSize {
                    nodes,
                    expected,
                    found: len,
                });
            }
        }
        if self.z_probabilities.len() != links {
            return Err(Error::DimensionMismatch {
                expected: links,
                found: self.z_probabilities.len(),
            });
        }
        if !(self.f_ec >= 1.0) {
            return Err(Error::InvalidParameter {
                name: "f_ec",
                value: self.f_ec,
                reason: "error-correction inefficiency must be at least 1",
            });
        }
        for &e in &self.error_rates {
            crate::error::check_probability("error_rate", e)?;
        }
        for &p in &self.z_probabilities {
            crate::error::check_probability("p_z", p)?;
        }
        Ok(())
    }
}

/// STR key rate for `nodes` intermediate nodes.
pub fn str_rate_qubit(inputs: &RateInputs, nodes: usize) -> Result<KeyRateReport> {
    inputs.validate(nodes)?;
    let mut entropy = 0.0;
    let mut leak = 0.0;
    let mut holevo = 0.0;
    for u in BasisVector::all(nodes + 1) {
        let p_u = u.probability(&inputs.z_probabilities);
        let p_conj = u.complement().probability(&inputs.z_probabilities);
        let he = h(inputs.error_rates[u.index()]);
        entropy += p_u * inputs.key_entropy[u.index()];
        leak += p_u * he;
        holevo += p_conj * he;
    }
    Ok(KeyRateReport::from_terms(entropy, inputs.f_ec * leak, holevo, 0.0))
}

/// Inputs for the single-node variant where the node defines the key map.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeFocusedInputs {
    pub nodes: usize,
    pub p_z: f64,
    /// Entropy of the node's key data for `(u1, u2)` in order ZZ, ZX, XZ, XX.
    pub node_entropy: [f64; 4],
    pub leak: f64,
    /// Overall error rate between `d_A` and the corrected `d′_B`.
    pub error_rate: f64,
}

/// `(1/4) Σ H(K_T^{u1,u2}) − leak − h(e)`; valid only for one node and
/// uniform bases.
pub fn node_focused_rate(inputs: &NodeFocusedInputs) -> Result<KeyRateReport> {
    if inputs.nodes != 1 {
        return Err(Error::NodeFocusedNodeCount(inputs.nodes));
    }
    if (inputs.p_z - 0.5).abs() > 1e-12 {
        return Err(Error::NodeFocusedBasis(inputs.p_z));
    }
    let he = binary_entropy(inputs.error_rate)?;
    let entropy = inputs.node_entropy.iter().sum::<f64>() / 4.0;
    Ok(KeyRateReport::from_terms(entropy, inputs.leak, he, 0.0))
}

/// Conventional trusted relay: every link runs its own BB84 post-processing,
/// so the chain is limited by its worst link.
pub fn conventional_relay_rate(e_links: &[f64], f_ec: f64) -> Result<KeyRateReport> {
    if e_links.is_empty() {
        return Err(Error::NoLinks);
    }
    let mut worst: Option<KeyRateReport> = None;
    for &e in e_links {
        if !(0.0..=0.5).contains(&e) {
            return Err(Error::InvalidParameter {
                name: "e_link",
                value: e,
                reason: "must lie in [0, 1/2]",
            });
        }
        let he = h(e);
        let report = KeyRateReport::from_terms(1.0, f_ec * he, he, 0.0);
        if worst.is_none_or(|w| report.unclamped < w.unclamped) {
            worst = Some(report);
        }
    }
    Ok(worst.expect("non-empty"))
}

/// STR rate with uniform bases, Shannon-limit correction and every basis
/// vector at the compound error of `nodes + 1` links at `e_link`.
pub fn str_rate_for_link_error(e_link: f64, nodes: usize, f_ec: f64) -> Result<KeyRateReport> {
    let e = compound_error(e_link, nodes + 1)?;
    str_rate_qubit(&RateInputs::constant(nodes, e).with_f_ec(f_ec), nodes)
}

/// One row of the rate-versus-link-error curves.
#[derive(Debug, Clone, PartialEq)]
pub struct Fig2Row {
    pub e_link: f64,
    /// One rate per requested node count; node count 0 is the conventional relay.
    pub rates: Vec<f64>,
}

/// Rates versus per-link error for a conventional relay (`nodes = 0`) and
/// STR chains with the given node counts, at the Shannon limit.
pub fn fig2_curves(grid: &[f64], node_counts: &[usize]) -> Result<Vec<Fig2Row>> {
    grid.iter()
        .map(|&e_link| {
            let rates = node_counts
                .iter()
                .map(|&m| {
                    if m == 0 {
                        conventional_relay_rate(&[e_link, e_link], 1.0).map(|r| r.rate)
                    } else {
                        str_rate_for_link_error(e_link, m, 1.0).map(|r| r.rate)
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Fig2Row { e_link, rates })
        })
        .collect()
}

/// Per-link error at which the rate first reaches zero, by bisection on the
/// unclamped rate over `[0, 1/2]`.
pub fn zero_crossing(nodes: usize, f_ec: f64) -> Option<f64> {
    let rate = |e: f64| {
        if nodes == 0 {
            conventional_relay_rate(&[e], f_ec).map(|r| r.unclamped)
        } else {
            str_rate_for_link_error(e, nodes, f_ec).map(|r| r.unclamped)
        }
        .unwrap_or(f64::NAN)
    };
    bisect(rate, 0.0, 0.25, 1e-12)
}
