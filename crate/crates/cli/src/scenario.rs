use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use str_relay::decoy::{ClockNormalization, LinkPhysics, TaggingMode};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    QubitRate,
    Fig2Sweep,
    DecoySweep,
    Montecarlo,
    Verify,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::QubitRate => "qubit-rate",
            Mode::Fig2Sweep => "fig2-sweep",
            Mode::DecoySweep => "decoy-sweep",
            Mode::Montecarlo => "montecarlo",
            Mode::Verify => "verify",
        }
    }
}

/// Inclusive arithmetic grid written as `start:stop:step`, or a single value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Grid {
    pub fn single(value: f64) -> Self {
        Self {
            start: value,
            stop: value,
            step: 1.0,
        }
    }

    /// Grid points in increasing order; the stop value is included when it
    /// lies on the grid up to rounding.
    pub fn points(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..count).map(|i| self.start + i as f64 * self.step).collect()
    }

    pub fn is_single(&self) -> bool {
        self.start == self.stop
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let number = |p: &str| p.parse::<f64>().map_err(|_| format!("`{p}` is not a number"));
        let grid = match parts.as_slice() {
            [v] => Grid::single(number(v)?),
            [a, b, step] => Grid {
                start: number(a)?,
                stop: number(b)?,
                step: number(step)?,
            },
            _ => return Err(format!("`{s}` is neither a value nor start:stop:step")),
        };
        if !(grid.start.is_finite() && grid.stop.is_finite()) {
            return Err(String::from("grid bounds must be finite"));
        }
        if !(grid.step > 0.0 && grid.step.is_finite()) {
            return Err(String::from("grid step must be positive"));
        }
        if grid.stop < grid.start {
            return Err(String::from("grid stop must not precede start"));
        }
        Ok(grid)
    }
}

impl TryFrom<String> for Grid {
    type Error = String;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Grid> for String {
    fn from(g: Grid) -> String {
        g.to_string()
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_single() {
            write!(f, "{}", self.start)
        } else {
            write!(f, "{}:{}:{}", self.start, self.stop, self.step)
        }
    }
}

/// Source intensity: optimised per grid point, or fixed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "IntensityRepr", into = "IntensityRepr")]
pub enum Intensity {
    Auto,
    Fixed(f64),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum IntensityRepr {
    Value(f64),
    Text(String),
}

impl FromStr for Intensity {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Intensity::Auto);
        }
        s.parse::<f64>()
            .map(Intensity::Fixed)
            .map_err(|_| format!("`{s}` is neither `auto` nor a number"))
    }
}

impl TryFrom<IntensityRepr> for Intensity {
    type Error = String;
    fn try_from(r: IntensityRepr) -> Result<Self, Self::Error> {
        match r {
            IntensityRepr::Value(v) => Ok(Intensity::Fixed(v)),
            IntensityRepr::Text(s) => s.parse(),
        }
    }
}

impl From<Intensity> for IntensityRepr {
    fn from(i: Intensity) -> Self {
        match i {
            Intensity::Auto => IntensityRepr::Text(String::from("auto")),
            Intensity::Fixed(v) => IntensityRepr::Value(v),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tagging {
    Exact,
    Conservative,
}

impl From<Tagging> for TaggingMode {
    fn from(t: Tagging) -> Self {
        match t {
            Tagging::Exact => TaggingMode::Exact,
            Tagging::Conservative => TaggingMode::Conservative,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    Coincidence,
    Paired,
}

impl From<Normalization> for ClockNormalization {
    fn from(n: Normalization) -> Self {
        match n {
            Normalization::Coincidence => ClockNormalization::Coincidence,
            Normalization::Paired => ClockNormalization::Paired,
        }
    }
}

/// Detector and source parameters shared by every link unless overridden.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkTemplate {
    pub detector_efficiency: f64,
    pub dark_count_prob: f64,
    pub intrinsic_error: f64,
}

impl Default for LinkTemplate {
    fn default() -> Self {
        Self {
            detector_efficiency: 0.5,
            dark_count_prob: 6e-6,
            intrinsic_error: 0.0185,
        }
    }
}

/// Per-link deviations from the template. A fixed `loss_db` pins that link
/// instead of following the sweep.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkOverride {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub loss_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detector_efficiency: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dark_count_prob: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub intrinsic_error: Option<f64>,
}

/// A fully resolved run description. Every field has a default, so a config
/// file only needs the keys it changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub mode: Mode,
    /// CSV destination; `<mode>.csv` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub seed: u64,
    /// Node counts. Sweeps emit one curve per entry; `montecarlo` takes one.
    pub nodes: Vec<usize>,
    pub f_ec: f64,
    pub p_z: f64,

    pub e_link: Grid,

    pub loss_db: Grid,
    pub mu: Intensity,
    pub mu_min: f64,
    pub mu_max: f64,
    pub efficient_sifting: bool,
    pub tagging: Tagging,
    pub normalization: Normalization,
    pub link: LinkTemplate,
    pub links: Vec<LinkOverride>,

    pub rounds: u64,
    pub flip: f64,
    pub detection: f64,
    /// Worker threads for Monte Carlo and sweeps; 0 uses every core.
    pub workers: usize,

    pub trials: usize,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            mode: Mode::QubitRate,
            output: None,
            seed: 42,
            nodes: vec![1],
            f_ec: 1.0,
            p_z: 0.5,
            e_link: Grid::single(0.02),
            loss_db: Grid {
                start: 0.0,
                stop: 40.0,
                step: 0.5,
            },
            mu: Intensity::Auto,
            mu_min: 1e-3,
            mu_max: 2.0,
            efficient_sifting: false,
            tagging: Tagging::Exact,
            normalization: Normalization::Coincidence,
            link: LinkTemplate::default(),
            links: Vec::new(),
            rounds: 1_000_000,
            flip: 0.01,
            detection: 1.0,
            workers: 0,
            trials: str_relay::verify::DEFAULT_TRIALS,
        }
    }
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Parse {
            file: None,
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::Parse { message, .. } => CliError::Parse {
                file: Some(path.to_owned()),
                message,
            },
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serialises")
    }

    pub fn output_path(&self) -> PathBuf {
        self.output
            .clone()
            .unwrap_or_else(|| PathBuf::from(format!("{}.csv", self.mode.name())))
    }

    /// Physical description of every link at a given swept loss.
    pub fn link_physics(&self, links: usize, loss_db: f64, mu: f64) -> Vec<LinkPhysics> {
        (0..links)
            .map(|i| {
                let o = self.links.get(i).copied().unwrap_or_default();
                LinkPhysics {
                    loss_db: o.loss_db.unwrap_or(loss_db),
                    detector_efficiency: o.detector_efficiency.unwrap_or(self.link.detector_efficiency),
                    dark_count_prob: o.dark_count_prob.unwrap_or(self.link.dark_count_prob),
                    intrinsic_error: o.intrinsic_error.unwrap_or(self.link.intrinsic_error),
                    mu,
                }
            })
            .collect()
    }

    /// Checks the fields the selected mode reads.
    pub fn validate(&self) -> Result<(), CliError> {
        let probability = |field: &'static str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(CliError::field(field, format!("{v} is not a probability")))
            }
        };
        if !(self.f_ec >= 1.0 && self.f_ec.is_finite()) {
            return Err(CliError::field("f_ec", format!("{} must be at least 1", self.f_ec)));
        }
        probability("p_z", self.p_z)?;
        match self.mode {
            Mode::QubitRate | Mode::Fig2Sweep => {
                self.require_nodes()?;
                let points = self.e_link.points();
                if points.iter().any(|e| !(0.0..=0.5).contains(e)) {
                    return Err(CliError::field("e_link", "per-link error rates must lie in [0, 1/2]"));
                }
            }
            Mode::DecoySweep => {
                self.require_nodes()?;
                if self.loss_db.start < 0.0 {
                    return Err(CliError::field("loss_db", "loss must be non-negative"));
                }
                if let Intensity::Fixed(mu) = self.mu {
                    if !(mu > 0.0 && mu <= 10.0) {
                        return Err(CliError::field("mu", format!("{mu} must lie in (0, 10]")));
                    }
                }
                if !(self.mu_min > 0.0 && self.mu_min < self.mu_max && self.mu_max <= 10.0) {
                    return Err(CliError::field("mu_min", "intensity bounds must satisfy 0 < mu_min < mu_max ≤ 10"));
                }
                probability("link.detector_efficiency", self.link.detector_efficiency)?;
                probability("link.dark_count_prob", self.link.dark_count_prob)?;
                if !(0.0..=0.5).contains(&self.link.intrinsic_error) {
                    return Err(CliError::field("link.intrinsic_error", "must lie in [0, 1/2]"));
                }
                let longest = self.nodes.iter().max().map_or(1, |m| m + 1);
                if self.links.len() > longest {
                    return Err(CliError::field(
                        "links",
                        format!("{} overrides given for at most {longest} links", self.links.len()),
                    ));
                }
            }
            Mode::Montecarlo => {
                if self.nodes.len() != 1 {
                    return Err(CliError::field("nodes", "montecarlo runs exactly one chain length"));
                }
                if self.rounds == 0 {
                    return Err(CliError::field("rounds", "must be positive"));
                }
                probability("flip", self.flip)?;
                probability("detection", self.detection)?;
            }
            Mode::Verify => {
                if self.trials == 0 {
                    return Err(CliError::field("trials", "must be positive"));
                }
            }
        }
        Ok(())
    }

    fn require_nodes(&self) -> Result<(), CliError> {
        if self.nodes.is_empty() {
            return Err(CliError::field("nodes", "at least one node count is required"));
        }
        Ok(())
    }
}
