//! Weak-coherent-pulse physical layer with tagged-signal key rates.
//!
//! Every link has a Poisson source of mean photon number `μ`, a lossy channel
//! and a pair of threshold detectors with dark counts. Photon-number fractions
//! of the detected events are computed exactly from this honest-channel model.
//!
//! Channel model, with `η` the overall transmittance and `p_d` the dark-count
//! probability per detector:
//!
//! ```text
//! Y_0     = 1 − (1 − p_d)²
//! Y_n     = 1 − (1 − Y_0)(1 − η)^n
//! e_n Y_n = e_0 Y_0 (1 − η)^n + e_det (1 − (1 − η)^n)
//! Q       = 1 − (1 − Y_0) e^{−μη}
//! E Q     = e_0 Y_0 e^{−μη} + e_det (1 − e^{−μη})
//! ```
//!
//! with `e_0 = 1/2`: dark clicks, including double clicks, yield a uniformly
//! random bit.

use crate::error::{Error, Result};
use crate::info::{h, odd_parity};
use crate::keyrate::{sifting_factor, KeyRateReport};
use crate::numeric::{bisect, golden_section_max, log_grid};

/// Error rate of a click with no signal photon.
pub const VACUUM_ERROR: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkPhysics {
    pub loss_db: f64,
    pub detector_efficiency: f64,
    /// Dark-count probability per detector per clock cycle.
    pub dark_count_prob: f64,
    /// Misalignment error `e_det` of a detected signal photon.
    pub intrinsic_error: f64,
    /// Mean photon number of the source.
    pub mu: f64,
}

impl LinkPhysics {
    /// Detector efficiency 50%, intrinsic error 1.85%, dark counts 6e-6.
    pub fn noisy(loss_db: f64, mu: f64) -> Self {
        Self {
            loss_db,
            detector_efficiency: 0.5,
            dark_count_prob: 6e-6,
            intrinsic_error: 0.0185,
            mu,
        }
    }

    /// Detector efficiency 50% and no noise.
    pub fn error_free(loss_db: f64, mu: f64) -> Self {
        Self {
            loss_db,
            detector_efficiency: 0.5,
            dark_count_prob: 0.0,
            intrinsic_error: 0.0,
            mu,
        }
    }

    pub fn with_mu(self, mu: f64) -> Self {
        Self { mu, ..self }
    }

    pub fn with_loss(self, loss_db: f64) -> Self {
        Self { loss_db, ..self }
    }

    /// `η = η_det · 10^{−loss/10}`.
    pub fn transmittance(&self) -> f64 {
        self.detector_efficiency * 10f64.powf(-self.loss_db / 10.0)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name, value, reason| Err(Error::InvalidParameter { name, value, reason });
        if !(self.loss_db >= 0.0 && self.loss_db.is_finite()) {
            return bad("loss_db", self.loss_db, "must be finite and non-negative");
        }
        if !(self.detector_efficiency > 0.0 && self.detector_efficiency <= 1.0) {
            return bad("detector_efficiency", self.detector_efficiency, "must lie in (0, 1]");
        }
        if !(0.0..1.0).contains(&self.dark_count_prob) {
            return bad("dark_count_prob", self.dark_count_prob, "must lie in [0, 1)");
        }
        if !(0.0..=0.5).contains(&self.intrinsic_error) {
            return bad("intrinsic_error", self.intrinsic_error, "must lie in [0, 1/2]");
        }
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return bad("mu", self.mu, "must be positive");
        }
        Ok(())
    }

    pub fn vacuum_yield(&self) -> f64 {
        1.0 - (1.0 - self.dark_count_prob).powi(2)
    }

    /// Detection probability given `n` photons sent.
    pub fn yield_n(&self, n: u32) -> f64 {
        let miss = (1.0 - self.transmittance()).powi(n as i32);
        1.0 - (1.0 - self.vacuum_yield()) * miss
    }

    /// Error rate of detections given `n` photons sent.
    pub fn error_n(&self, n: u32) -> f64 {
        let y0 = self.vacuum_yield();
        let miss = (1.0 - self.transmittance()).powi(n as i32);
        let y = self.yield_n(n);
        if y == 0.0 {
            return VACUUM_ERROR;
        }
        (VACUUM_ERROR * y0 * miss + self.intrinsic_error * (1.0 - miss)) / y
    }
}

/// Poisson probability `e^{−μ} μ^n / n!`.
pub fn poisson(n: u32, mu: f64) -> f64 {
    let log_p = -mu + f64::from(n) * mu.ln() - ln_factorial(n);
    log_p.exp()
}

fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|k| f64::from(k).ln()).sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkStatistics {
    pub gain: f64,
    pub qber: f64,
    pub yield0: f64,
    pub yield1: f64,
    pub error0: f64,
    pub error1: f64,
    /// Fraction of detections from vacuum pulses, `P(0) Y_0 / Q`.
    pub vacuum_fraction: f64,
    /// Fraction of detections from single-photon pulses, `P(1) Y_1 / Q`.
    pub single_fraction: f64,
}

pub fn link_statistics(phys: &LinkPhysics) -> Result<LinkStatistics> {
    phys.validate()?;
    let eta = phys.transmittance();
    let y0 = phys.vacuum_yield();
    let survive = (-phys.mu * eta).exp();
    let gain = 1.0 - (1.0 - y0) * survive;
    if gain <= 0.0 {
        return Err(Error::ZeroGain { link: 0 });
    }
    let qber = (VACUUM_ERROR * y0 * survive + phys.intrinsic_error * (1.0 - survive)) / gain;
    let yield1 = phys.yield_n(1);
    Ok(LinkStatistics {
        gain,
        qber,
        yield0: y0,
        yield1,
        error0: VACUUM_ERROR,
        error1: phys.error_n(1),
        vacuum_fraction: poisson(0, phys.mu) * y0 / gain,
        single_fraction: poisson(1, phys.mu) * yield1 / gain,
    })
}

/// Photon-number fractions of detected raw-key events across the chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoyFractions {
    /// Vacuum sent on the first link.
    pub f_v: f64,
    /// Single photon on every link.
    pub f_s_s: f64,
    /// Single photon on the first link, vacuum or single photon elsewhere.
    pub f_s_vs: f64,
    /// Multi-photon on some link (tagged): `1 − f_v − f_s_vs`.
    pub f_m: f64,
    /// Error rate of the `f_s_vs` events.
    pub e_s_vs: f64,
    /// Error rate of the `f_s_s` events.
    pub e_s_s: f64,
}

pub fn decoy_fractions(links: &[LinkPhysics]) -> Result<DecoyFractions> {
    let stats = chain_statistics(links)?;
    Ok(fractions_from_stats(&stats))
}

fn chain_statistics(links: &[LinkPhysics]) -> Result<Vec<LinkStatistics>> {
    if links.is_empty() {
        return Err(Error::NoLinks);
    }
    links
        .iter()
        .enumerate()
        .map(|(i, l)| {
            link_statistics(l).map_err(|e| match e {
                Error::ZeroGain { .. } => Error::ZeroGain { link: i },
                other => other,
            })
        })
        .collect()
}

fn fractions_from_stats(stats: &[LinkStatistics]) -> DecoyFractions {
    let first = &stats[0];
    let rest = &stats[1..];
    let f_v = first.vacuum_fraction;
    let f_s_s = first.single_fraction * rest.iter().map(|s| s.single_fraction).product::<f64>();
    let f_s_vs = first.single_fraction
        * rest
            .iter()
            .map(|s| s.vacuum_fraction + s.single_fraction)
            .product::<f64>();
    let f_m = 1.0 - f_v - f_s_vs;

    let e_s_s = odd_parity(stats.iter().map(|s| s.error1));
    let e_s_vs = odd_parity(std::iter::once(first.error1).chain(rest.iter().map(|s| {
        let w = s.vacuum_fraction + s.single_fraction;
        if w > 0.0 {
            (s.vacuum_fraction * s.error0 + s.single_fraction * s.error1) / w
        } else {
            VACUUM_ERROR
        }
    })));

    DecoyFractions {
        f_v,
        f_s_s,
        f_s_vs,
        f_m: f_m.max(0.0),
        e_s_vs,
        e_s_s,
    }
}

/// Which single-photon quantities enter the privacy-amplification term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TaggingMode {
    /// `f_{s,v/s}` and `e_{s,v/s}`.
    #[default]
    Exact,
    /// `f_{s,s}` and `e_{s,s}`; events with vacuum on a later link are tagged.
    Conservative,
}

/// How per-signal rates are converted to bits per clock cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClockNormalization {
    /// Every link must detect in the same clock cycle: `Π_j Q_j · Π_j s`.
    #[default]
    Coincidence,
    /// Sifted events are paired in order of survival: `min_j (Q_j s)`.
    Paired,
}

/// A chain of links sharing post-processing settings.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoyScenario {
    pub links: Vec<LinkPhysics>,
    pub f_ec: f64,
    pub p_z: f64,
    /// Asymptotic basis bias: sifting keeps every detection.
    pub efficient_sifting: bool,
    pub tagging: TaggingMode,
    pub normalization: ClockNormalization,
}

impl DecoyScenario {
    /// `links` identical copies of `link` with default post-processing.
    pub fn uniform_chain(link: LinkPhysics, links: usize, f_ec: f64, p_z: f64) -> Self {
        Self {
            links: vec![link; links],
            f_ec,
            p_z,
            efficient_sifting: false,
            tagging: TaggingMode::Exact,
            normalization: ClockNormalization::Coincidence,
        }
    }

    pub fn nodes(&self) -> usize {
        self.links.len().saturating_sub(1)
    }

    /// Same scenario with every source at intensity `mu`.
    pub fn with_mu(&self, mu: f64) -> Self {
        Self {
            links: self.links.iter().map(|l| l.with_mu(mu)).collect(),
            ..self.clone()
        }
    }

    /// Same scenario with every link at `loss_db`.
    pub fn with_loss(&self, loss_db: f64) -> Self {
        Self {
            links: self.links.iter().map(|l| l.with_loss(loss_db)).collect(),
            ..self.clone()
        }
    }

    /// Fraction of detections kept by basis sifting on one link.
    pub fn link_sifting(&self) -> f64 {
        if self.efficient_sifting {
            1.0
        } else {
            sifting_factor(self.p_z)
        }
    }

    fn validate(&self) -> Result<()> {
        if self.links.is_empty() {
            return Err(Error::NoLinks);
        }
        if !(self.f_ec >= 1.0) {
            return Err(Error::InvalidParameter {
                name: "f_ec",
                value: self.f_ec,
                reason: "error-correction inefficiency must be at least 1",
            });
        }
        crate::error::check_probability("p_z", self.p_z)
    }
}

/// STR rate in bits per sifted paired signal.
pub fn decoy_rate_per_signal(scenario: &DecoyScenario) -> Result<KeyRateReport> {
    scenario.validate()?;
    let stats = chain_statistics(&scenario.links)?;
    Ok(per_signal_from_stats(scenario, &stats))
}

fn per_signal_from_stats(scenario: &DecoyScenario, stats: &[LinkStatistics]) -> KeyRateReport {
    let fr = fractions_from_stats(stats);
    let total_error = odd_parity(stats.iter().map(|s| s.qber));
    // With isotropic link noise every basis vector shares one error rate, so
    // Σ_u p_u H(K^u) = 1 and Σ_u p_ũ h(e^u) = h(e).
    let (single, single_error) = match scenario.tagging {
        TaggingMode::Exact => (fr.f_s_vs, fr.e_s_vs),
        TaggingMode::Conservative => (fr.f_s_s, fr.e_s_s),
    };
    let tagged = (1.0 - fr.f_v - single).max(0.0);
    KeyRateReport::from_terms(1.0, scenario.f_ec * h(total_error), single * h(single_error), tagged)
}

fn clock_factor(scenario: &DecoyScenario, stats: &[LinkStatistics]) -> f64 {
    let s = scenario.link_sifting();
    match scenario.normalization {
        ClockNormalization::Coincidence => stats.iter().map(|st| st.gain * s).product(),
        ClockNormalization::Paired => stats
            .iter()
            .map(|st| st.gain * s)
            .fold(f64::INFINITY, f64::min),
    }
}

/// STR decoy-state rate in bits per clock cycle.
pub fn decoy_rate(scenario: &DecoyScenario) -> Result<KeyRateReport> {
    scenario.validate()?;
    let stats = chain_statistics(&scenario.links)?;
    let per_signal = per_signal_from_stats(scenario, &stats);
    Ok(per_signal.scaled(clock_factor(scenario, &stats)))
}

/// Tagged-signal rate of one conventional BB84 link, bits per clock cycle:
/// `Q s [c_1 (1 − h(e_1)) − f_EC h(E)]`.
pub fn conventional_decoy_rate(link: &LinkPhysics, f_ec: f64, p_z: f64) -> Result<KeyRateReport> {
    let scenario = DecoyScenario::uniform_chain(*link, 1, f_ec, p_z);
    conventional_chain_rate(&scenario)
}

/// Conventional trusted relay: every link distils its own key, the chain is
/// limited by its worst link.
pub fn conventional_chain_rate(scenario: &DecoyScenario) -> Result<KeyRateReport> {
    scenario.validate()?;
    let s = scenario.link_sifting();
    let mut worst: Option<KeyRateReport> = None;
    for (i, link) in scenario.links.iter().enumerate() {
        let st = link_statistics(link).map_err(|e| match e {
            Error::ZeroGain { .. } => Error::ZeroGain { link: i },
            other => other,
        })?;
        let c1 = st.single_fraction;
        let report = KeyRateReport::from_terms(1.0, scenario.f_ec * h(st.qber), c1 * h(st.error1), 1.0 - c1)
            .scaled(st.gain * s);
        if worst.is_none_or(|w| report.unclamped < w.unclamped) {
            worst = Some(report);
        }
    }
    Ok(worst.expect("validated non-empty"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Protocol {
    Conventional,
    Str,
}

impl Protocol {
    pub fn rate(self, scenario: &DecoyScenario) -> Result<KeyRateReport> {
        match self {
            Protocol::Conventional => conventional_chain_rate(scenario),
            Protocol::Str => decoy_rate(scenario),
        }
    }
}

/// Number of log-spaced points in the coarse intensity scan.
pub const INTENSITY_GRID_POINTS: usize = 240;
/// Width of the final golden-section bracket.
pub const INTENSITY_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizedRate {
    pub mu: f64,
    pub report: KeyRateReport,
}

/// Maximises the per-clock-cycle rate over one intensity shared by all sources.
///
/// A log-spaced scan locates the best grid point, then golden-section search
/// refines within its neighbouring grid cells. When no intensity gives a
/// positive rate the lower bound is returned with a zero report.
pub fn optimize_intensity(
    scenario: &DecoyScenario,
    protocol: Protocol,
    mu_bounds: (f64, f64),
) -> Result<OptimizedRate> {
    let (lo, hi) = mu_bounds;
    if !(lo > 0.0 && hi <= 10.0 && lo < hi) {
        return Err(Error::EmptyBounds { lower: lo, upper: hi });
    }
    scenario.validate()?;
    let objective = |mu: f64| {
        protocol
            .rate(&scenario.with_mu(mu))
            .map(|r| r.unclamped)
            .unwrap_or(f64::NEG_INFINITY)
    };

    let grid = log_grid(lo, hi, INTENSITY_GRID_POINTS);
    let values: Vec<f64> = grid.iter().map(|&mu| objective(mu)).collect();
    let best = values
        .iter()
        .enumerate()
        .fold(0, |best, (i, &v)| if v > values[best] { i } else { best });

    if !(values[best] > 0.0) {
        let report = protocol.rate(&scenario.with_mu(lo))?;
        return Ok(OptimizedRate {
            mu: lo,
            report: KeyRateReport {
                rate: 0.0,
                ..report
            },
        });
    }

    let left = grid[best.saturating_sub(1)];
    let right = grid[(best + 1).min(grid.len() - 1)];
    let (mu, value) = golden_section_max(objective, left, right, INTENSITY_TOLERANCE);
    let mu = if value >= values[best] { mu } else { grid[best] };
    Ok(OptimizedRate {
        mu,
        report: protocol.rate(&scenario.with_mu(mu))?,
    })
}

/// Smallest per-link loss at which the optimised rate vanishes, searched by
/// bisection on `[0, max_loss_db]`. `None` if the rate is still positive at
/// `max_loss_db`.
pub fn cutoff_loss(
    scenario: &DecoyScenario,
    protocol: Protocol,
    mu_bounds: (f64, f64),
    max_loss_db: f64,
) -> Result<Option<f64>> {
    let positive = |loss: f64| -> Result<bool> {
        Ok(optimize_intensity(&scenario.with_loss(loss), protocol, mu_bounds)?.report.rate > 0.0)
    };
    if !positive(0.0)? {
        return Ok(Some(0.0));
    }
    if positive(max_loss_db)? {
        return Ok(None);
    }
    let sign = |loss: f64| match positive(loss) {
        Ok(true) => 1.0,
        _ => -1.0,
    };
    Ok(bisect(sign, 0.0, max_loss_db, 1e-3))
}
