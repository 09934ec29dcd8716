//! Scenario configuration, loaded from JSON.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::{noise_var_from_snr, LinkBudget};
use crate::error::{Error, Result};
use crate::pncodes::{MAX_DEGREE, MIN_DEGREE};

pub const DEFAULT_TRIALS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    #[serde(rename = "OMA", alias = "oma")]
    Oma,
    #[serde(rename = "CSMS", alias = "csms")]
    Csms,
}

impl Scheme {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::Oma => "OMA",
            Scheme::Csms => "CSMS",
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "oma" => Ok(Scheme::Oma),
            "csms" => Ok(Scheme::Csms),
            _ => Err(Error::Config(format!("unknown scheme '{s}'"))),
        }
    }
}

/// When the uncalibrated element phases are drawn.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhasePolicy {
    /// Once per grid point; the mismatch is fixed and only the noise varies.
    #[default]
    PerPoint,
    /// Redrawn for every trial.
    PerTrial,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmplitudePolicy {
    #[default]
    AllOnes,
}

/// One Monte-Carlo scenario.
///
/// Exactly one sweep is given: `snr_grid_db` (with fixed `elements`), or
/// `v_grid` (with a fixed SNR from `ev_n0_db` or `link_budget`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scheme: Scheme,
    /// Walsh order for OMA, m-sequence length `2^r - 1` for CSMS.
    pub code_length: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elements: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snr_grid_db: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_grid: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ev_n0_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub link_budget: Option<LinkBudget>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub master_seed: u64,
    /// LFSR taps for CSMS; the built-in table is used when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub taps: Option<Vec<u32>>,
    #[serde(default)]
    pub phase_policy: PhasePolicy,
    #[serde(default)]
    pub amplitude_policy: AmplitudePolicy,
}

fn default_trials() -> usize {
    DEFAULT_TRIALS
}

/// One (V, SNR) operating point of a scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    /// Position in the scenario grid; feeds the seed derivation.
    pub index: usize,
    pub elements: usize,
    pub ev_n0_db: f64,
    /// `σ²` for unit amplitudes.
    pub noise_variance: f64,
}

impl GridPoint {
    pub fn new(index: usize, elements: usize, ev_n0_db: f64) -> Self {
        Self {
            index,
            elements,
            ev_n0_db,
            noise_variance: noise_var_from_snr(ev_n0_db, 1.0),
        }
    }

    /// Point without receiver noise (reported SNR is +inf).
    pub fn noiseless(index: usize, elements: usize) -> Self {
        Self {
            index,
            elements,
            ev_n0_db: f64::INFINITY,
            noise_variance: 0.0,
        }
    }
}

impl ScenarioConfig {
    pub fn snr_sweep(scheme: Scheme, code_length: usize, elements: usize, snr_grid_db: Vec<f64>) -> Self {
        Self {
            scheme,
            code_length,
            elements: Some(elements),
            snr_grid_db: Some(snr_grid_db),
            v_grid: None,
            ev_n0_db: None,
            link_budget: None,
            trials: DEFAULT_TRIALS,
            master_seed: 0,
            taps: None,
            phase_policy: PhasePolicy::default(),
            amplitude_policy: AmplitudePolicy::default(),
        }
    }

    pub fn element_sweep(scheme: Scheme, code_length: usize, v_grid: Vec<usize>, ev_n0_db: f64) -> Self {
        Self {
            elements: None,
            snr_grid_db: None,
            v_grid: Some(v_grid),
            ev_n0_db: Some(ev_n0_db),
            ..Self::snr_sweep(scheme, code_length, 0, Vec::new())
        }
    }

    pub fn with_trials(mut self, trials: usize) -> Self {
        self.trials = trials;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.master_seed = seed;
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// LFSR degree for a CSMS code length.
    pub fn degree(&self) -> Option<u32> {
        let n = self.code_length + 1;
        if n.is_power_of_two() {
            Some(n.trailing_zeros())
        } else {
            None
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        match self.scheme {
            Scheme::Oma => {
                if self.code_length < 2 || !self.code_length.is_power_of_two() {
                    return Err(Error::Config(format!(
                        "OMA code length {} must be a power of two",
                        self.code_length
                    )));
                }
                if self.taps.is_some() {
                    return Err(Error::Config("taps only apply to CSMS".into()));
                }
            }
            Scheme::Csms => match self.degree() {
                Some(r) if (MIN_DEGREE..=MAX_DEGREE).contains(&r) => {}
                _ => {
                    return Err(Error::Config(format!(
                        "CSMS code length {} must be 2^r - 1 with r in {MIN_DEGREE}..={MAX_DEGREE}",
                        self.code_length
                    )))
                }
            },
        }
        let elements: Vec<usize> = match (&self.snr_grid_db, &self.v_grid) {
            (Some(grid), None) => {
                if grid.is_empty() || grid.iter().any(|s| !s.is_finite()) {
                    return Err(Error::Config("snr_grid_db must hold finite values".into()));
                }
                if self.ev_n0_db.is_some() || self.link_budget.is_some() {
                    return Err(Error::Config(
                        "ev_n0_db/link_budget only apply to a v_grid sweep".into(),
                    ));
                }
                vec![self
                    .elements
                    .ok_or_else(|| Error::Config("snr_grid_db needs 'elements'".into()))?]
            }
            (None, Some(grid)) => {
                if self.elements.is_some() {
                    return Err(Error::Config("'elements' conflicts with v_grid".into()));
                }
                match (self.ev_n0_db, &self.link_budget) {
                    (Some(s), None) if s.is_finite() => {}
                    (None, Some(lb)) => lb.validate()?,
                    _ => {
                        return Err(Error::Config(
                            "v_grid needs exactly one of ev_n0_db or link_budget".into(),
                        ))
                    }
                }
                if grid.is_empty() {
                    return Err(Error::Config("v_grid is empty".into()));
                }
                grid.clone()
            }
            _ => {
                return Err(Error::Config(
                    "exactly one of snr_grid_db or v_grid must be given".into(),
                ))
            }
        };
        for v in elements {
            if v < 2 || v > self.code_length {
                return Err(Error::Config(format!(
                    "element count {v} must lie in 2..={}",
                    self.code_length
                )));
            }
        }
        Ok(())
    }

    /// Fixed SNR of a V sweep.
    fn fixed_snr(&self) -> Result<f64> {
        match (self.ev_n0_db, &self.link_budget) {
            (Some(s), _) => Ok(s),
            (None, Some(lb)) => lb.ev_n0_db(),
            (None, None) => Err(Error::Config("no fixed SNR".into())),
        }
    }

    /// Grid points in report order.
    pub fn grid(&self) -> Result<Vec<GridPoint>> {
        self.validate()?;
        if let Some(snrs) = &self.snr_grid_db {
            let v = self.elements.unwrap();
            return Ok(snrs
                .iter()
                .enumerate()
                .map(|(i, &s)| GridPoint::new(i, v, s))
                .collect());
        }
        let snr = self.fixed_snr()?;
        Ok(self
            .v_grid
            .as_ref()
            .unwrap()
            .iter()
            .enumerate()
            .map(|(i, &v)| GridPoint::new(i, v, snr))
            .collect())
    }
}
