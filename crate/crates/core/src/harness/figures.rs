//! Sweeps behind the published accuracy figures.
//!
//! - `fig5`/`fig6` (gain/phase RMSE vs SNR): V = 50, OMA with L ∈ {64, 128,
//!   256}, CSMS with L ∈ {63, 127, 255}, E_v/N₀ from 10 to 40 dB in 5 dB steps.
//! - `fig7`/`fig8` (gain/phase RMSE vs V): E_v/N₀ = 30 dB, CSMS with
//!   L ∈ {127, 255, 511} and V swept up to L, OMA at L = 512 as the benchmark.
//!
//! Each pair shares one sweep; the CSV carries both gain and phase columns.

use std::str::FromStr;

use crate::error::{Error, Result};
use crate::harness::config::{ScenarioConfig, Scheme};
use crate::harness::report::RmseReport;
use crate::harness::run::{run_scenario, with_workers};

pub const SNR_SWEEP_ELEMENTS: usize = 50;
pub const SNR_SWEEP_OMA_LENGTHS: [usize; 3] = [64, 128, 256];
pub const SNR_SWEEP_CSMS_LENGTHS: [usize; 3] = [63, 127, 255];
pub const V_SWEEP_SNR_DB: f64 = 30.0;
pub const V_SWEEP_CSMS_LENGTHS: [usize; 3] = [127, 255, 511];
pub const V_SWEEP_OMA_LENGTH: usize = 512;

pub const SNR_SWEEP_TRIALS: usize = 10_000;
pub const V_SWEEP_TRIALS: usize = 1_000;

/// Fractions of L visited by the V sweep, before adding V = L.
const V_FRACTIONS: [f64; 8] = [0.1, 0.2, 0.4, 0.6, 0.8, 0.9, 0.95, 0.98];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    Fig5,
    Fig6,
    Fig7,
    Fig8,
}

impl FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig5" => Ok(Figure::Fig5),
            "fig6" => Ok(Figure::Fig6),
            "fig7" => Ok(Figure::Fig7),
            "fig8" => Ok(Figure::Fig8),
            _ => Err(Error::UnknownFigure(s.to_string())),
        }
    }
}

impl Figure {
    pub fn name(&self) -> &'static str {
        match self {
            Figure::Fig5 => "fig5",
            Figure::Fig6 => "fig6",
            Figure::Fig7 => "fig7",
            Figure::Fig8 => "fig8",
        }
    }

    fn is_snr_sweep(&self) -> bool {
        matches!(self, Figure::Fig5 | Figure::Fig6)
    }

    pub fn default_trials(&self) -> usize {
        if self.is_snr_sweep() {
            SNR_SWEEP_TRIALS
        } else {
            V_SWEEP_TRIALS
        }
    }

    /// Scenarios in emission order.
    pub fn scenarios(&self, trials: usize, seed: u64) -> Vec<ScenarioConfig> {
        let mut out = Vec::new();
        if self.is_snr_sweep() {
            let grid = snr_grid();
            for l in SNR_SWEEP_OMA_LENGTHS {
                out.push(ScenarioConfig::snr_sweep(Scheme::Oma, l, SNR_SWEEP_ELEMENTS, grid.clone()));
            }
            for l in SNR_SWEEP_CSMS_LENGTHS {
                out.push(ScenarioConfig::snr_sweep(Scheme::Csms, l, SNR_SWEEP_ELEMENTS, grid.clone()));
            }
        } else {
            let mut all_v = Vec::new();
            for l in V_SWEEP_CSMS_LENGTHS {
                let grid = v_grid(l);
                all_v.extend(&grid);
                out.push(ScenarioConfig::element_sweep(Scheme::Csms, l, grid, V_SWEEP_SNR_DB));
            }
            all_v.sort_unstable();
            all_v.dedup();
            out.insert(
                0,
                ScenarioConfig::element_sweep(Scheme::Oma, V_SWEEP_OMA_LENGTH, all_v, V_SWEEP_SNR_DB),
            );
        }
        out.into_iter()
            .map(|c| c.with_trials(trials).with_seed(seed))
            .collect()
    }

    fn comments(&self, trials: usize, seed: u64) -> Vec<String> {
        let mut c = vec![format!("figure={} trials={trials} seed={seed}", self.name())];
        if self.is_snr_sweep() {
            let grid: Vec<String> = snr_grid().iter().map(|s| s.to_string()).collect();
            c.push(format!(
                "V={SNR_SWEEP_ELEMENTS} snr_grid_db={}",
                grid.join(";")
            ));
        } else {
            c.push(format!("ev_n0_db={V_SWEEP_SNR_DB}"));
        }
        c
    }
}

/// 10, 15, …, 40 dB.
pub fn snr_grid() -> Vec<f64> {
    (0..7).map(|i| 10.0 + 5.0 * i as f64).collect()
}

/// V values swept for code length L: a few fractions of L, then V = L.
pub fn v_grid(code_length: usize) -> Vec<usize> {
    let mut grid: Vec<usize> = V_FRACTIONS
        .iter()
        .map(|f| ((f * code_length as f64).round() as usize).max(2))
        .chain(std::iter::once(code_length))
        .collect();
    grid.sort_unstable();
    grid.dedup();
    grid
}

/// Runs every scenario of a figure and concatenates the rows.
pub fn reproduce_figure(figure: Figure, trials: Option<usize>, seed: u64, workers: usize) -> Result<RmseReport> {
    let trials = trials.unwrap_or_else(|| figure.default_trials());
    let scenarios = figure.scenarios(trials, seed);
    let mut report = with_workers(workers, || {
        let mut report = RmseReport::default();
        for cfg in &scenarios {
            report.extend(run_scenario(cfg)?);
        }
        Ok(report)
    })?;
    report.comments = figure.comments(trials, seed);
    Ok(report)
}

/// Looks up a figure by name, see [`reproduce_figure`].
pub fn reproduce_named(name: &str, trials: Option<usize>, seed: u64, workers: usize) -> Result<RmseReport> {
    reproduce_figure(name.parse()?, trials, seed, workers)
}
