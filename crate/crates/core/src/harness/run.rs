//! Monte-Carlo trials and per-point aggregation.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::channel::{synthesize_stream_csms, synthesize_window_oma, ElementGains, NoiseSpec};
use crate::error::{Error, Result};
use crate::harness::config::{GridPoint, PhasePolicy, ScenarioConfig, Scheme};
use crate::harness::report::{RmseReport, RmseRow};
use crate::harness::seed::{phase_rng, trial_rng, SimRng};
use crate::pncodes::{msequence_code, walsh_matrix, CodeMatrix, SignatureCode};
use crate::receiver::{
    consecutive_offsets, csms_peaks, extract_mismatch, oma_estimate, wrap_degrees, MismatchReport,
    ZfEqualizer,
};
use crate::theory::{csms_noise_stats, oma_noise_stats, theory_point, NoiseStats, TheoryPoint};

/// Estimation errors of one trial for elements 2..V: estimate minus truth.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialErrors {
    pub gain_db: Vec<f64>,
    pub phase_deg: Vec<f64>,
}

enum Signaling {
    Oma(CodeMatrix),
    Csms {
        m: SignatureCode,
        offsets: Vec<usize>,
        equalizer: ZfEqualizer,
    },
}

/// Everything a trial needs for one grid point, built once.
pub struct PointSetup {
    point: GridPoint,
    master_seed: u64,
    phase_policy: PhasePolicy,
    signaling: Signaling,
    noise: NoiseSpec,
    stats: NoiseStats,
    /// Gains shared by all trials under [`PhasePolicy::PerPoint`].
    gains: ElementGains,
}

impl PointSetup {
    pub fn new(cfg: &ScenarioConfig, point: GridPoint) -> Result<Self> {
        let msequence = match cfg.scheme {
            Scheme::Csms => Some(csms_code(cfg)?),
            Scheme::Oma => None,
        };
        Self::with_code(cfg, point, msequence.as_ref())
    }

    fn with_code(cfg: &ScenarioConfig, point: GridPoint, m: Option<&SignatureCode>) -> Result<Self> {
        let v = point.elements;
        if v < 2 || v > cfg.code_length {
            return Err(Error::Config(format!(
                "element count {v} must lie in 2..={}",
                cfg.code_length
            )));
        }
        let noise = NoiseSpec::new(point.noise_variance)?;
        let (signaling, stats) = match (cfg.scheme, m) {
            (Scheme::Oma, _) => (
                Signaling::Oma(walsh_matrix(cfg.code_length, v)?),
                oma_noise_stats(&noise, v),
            ),
            (Scheme::Csms, Some(m)) => (
                Signaling::Csms {
                    m: m.clone(),
                    offsets: consecutive_offsets(v),
                    equalizer: ZfEqualizer::new(m.len(), v)?,
                },
                csms_noise_stats(m, v, &noise)?,
            ),
            (Scheme::Csms, None) => unreachable!("CSMS setup without a code"),
        };
        let gains = ElementGains::uniform_random(v, &mut phase_rng(cfg.master_seed, point.index))?;
        Ok(Self {
            point,
            master_seed: cfg.master_seed,
            phase_policy: cfg.phase_policy,
            signaling,
            noise,
            stats,
            gains,
        })
    }

    pub fn point(&self) -> &GridPoint {
        &self.point
    }

    pub fn noise_stats(&self) -> &NoiseStats {
        &self.stats
    }

    /// Gains of the given trial.
    pub fn gains_for(&self, rng: &mut SimRng) -> Result<ElementGains> {
        match self.phase_policy {
            PhasePolicy::PerPoint => Ok(self.gains.clone()),
            PhasePolicy::PerTrial => ElementGains::uniform_random(self.point.elements, rng),
        }
    }

    /// Complex gain estimates of one noisy observation.
    pub fn estimate(&self, gains: &ElementGains, rng: &mut SimRng) -> Result<Vec<Complex64>> {
        match &self.signaling {
            Signaling::Oma(codes) => {
                let window = synthesize_window_oma(codes, gains, &self.noise, rng)?;
                oma_estimate(codes, &window)
            }
            Signaling::Csms {
                m,
                offsets,
                equalizer,
            } => {
                let stream = synthesize_stream_csms(m, offsets, gains, &self.noise, rng)?;
                let peaks = csms_peaks(m, offsets, &stream)?;
                equalizer.equalize(&peaks)
            }
        }
    }

    /// One synthesize → receive → (ZF) → mismatch pass.
    pub fn trial(&self, trial_index: usize) -> Result<(ElementGains, TrialErrors)> {
        let mut rng = trial_rng(self.master_seed, self.point.index, trial_index);
        let gains = self.gains_for(&mut rng)?;
        let estimate = extract_mismatch(&self.estimate(&gains, &mut rng)?)?;
        let truth = MismatchReport::from_truth(gains.amplitudes(), gains.phases())?;
        let errors = mismatch_errors(&estimate, &truth);
        Ok((gains, errors))
    }

    pub fn theory(&self, gains: &ElementGains) -> Result<TheoryPoint> {
        theory_point(gains, &self.stats)
    }
}

fn csms_code(cfg: &ScenarioConfig) -> Result<SignatureCode> {
    let degree = cfg
        .degree()
        .ok_or_else(|| Error::Config(format!("{} is not an m-sequence length", cfg.code_length)))?;
    msequence_code(degree, cfg.taps.as_deref())
}

/// Estimate minus truth, phase wrapped to (-180, 180].
pub fn mismatch_errors(estimate: &MismatchReport, truth: &MismatchReport) -> TrialErrors {
    TrialErrors {
        gain_db: estimate
            .gain_db
            .iter()
            .zip(&truth.gain_db)
            .map(|(e, t)| e - t)
            .collect(),
        phase_deg: estimate
            .phase_deg
            .iter()
            .zip(&truth.phase_deg)
            .map(|(e, t)| wrap_degrees(e - t))
            .collect(),
    }
}

/// Runs a single trial of a grid point.
pub fn run_trial(cfg: &ScenarioConfig, point: GridPoint, trial_index: usize) -> Result<TrialErrors> {
    PointSetup::new(cfg, point)?.trial(trial_index).map(|(_, e)| e)
}

/// Element-averaged RMSE and its Monte-Carlo standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RmseEstimate {
    pub rmse: f64,
    pub stderr: f64,
}

/// Aggregates squared errors `sq[trial][element]`.
///
/// The averaged RMSE is `f = mean_v sqrt(MSE_v)`. Its standard error uses the
/// delta method on the per-trial linearization
/// `z_t = Σ_v e²_{t,v} / (2 (V-1) RMSE_v)`, which keeps the correlation
/// between elements that share the reference.
pub fn aggregate(sq: &[Vec<f64>]) -> RmseEstimate {
    let n = sq.len();
    let v = sq.first().map_or(0, Vec::len);
    if n == 0 || v == 0 {
        return RmseEstimate { rmse: 0.0, stderr: 0.0 };
    }
    let nf = n as f64;
    let mut mse = vec![0.0; v];
    for row in sq {
        for (acc, e) in mse.iter_mut().zip(row) {
            *acc += e;
        }
    }
    let rmse: Vec<f64> = mse.iter().map(|s| (s / nf).sqrt()).collect();
    let mean_rmse = rmse.iter().sum::<f64>() / v as f64;
    if n < 2 {
        return RmseEstimate { rmse: mean_rmse, stderr: 0.0 };
    }
    let weights: Vec<f64> = rmse
        .iter()
        .map(|&r| if r > 0.0 { 1.0 / (2.0 * v as f64 * r) } else { 0.0 })
        .collect();
    let z: Vec<f64> = sq
        .iter()
        .map(|row| row.iter().zip(&weights).map(|(e, w)| e * w).sum())
        .collect();
    let z_mean = z.iter().sum::<f64>() / nf;
    let z_var = z.iter().map(|x| (x - z_mean).powi(2)).sum::<f64>() / (nf - 1.0);
    RmseEstimate {
        rmse: mean_rmse,
        stderr: (z_var / nf).sqrt(),
    }
}

/// Runs every trial of one grid point and fills a report row.
pub fn run_point(cfg: &ScenarioConfig, setup: &PointSetup) -> Result<RmseRow> {
    let results: Vec<(ElementGains, TrialErrors)> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| setup.trial(t))
        .collect::<Result<_>>()?;

    let sq_gain: Vec<Vec<f64>> = results
        .iter()
        .map(|(_, e)| e.gain_db.iter().map(|x| x * x).collect())
        .collect();
    let sq_phase: Vec<Vec<f64>> = results
        .iter()
        .map(|(_, e)| e.phase_deg.iter().map(|x| x * x).collect())
        .collect();
    let gain = aggregate(&sq_gain);
    let phase = aggregate(&sq_phase);

    let (gain_theory, phase_theory) = match cfg.phase_policy {
        PhasePolicy::PerPoint => setup.theory(&setup.gains)?.average()?,
        PhasePolicy::PerTrial => {
            // per element: root of the trial-averaged predicted MSE
            let v = setup.point.elements - 1;
            let (mut g, mut p) = (vec![0.0; v], vec![0.0; v]);
            for (gains, _) in &results {
                let t = setup.theory(gains)?;
                for i in 0..v {
                    g[i] += t.gain_db[i] * t.gain_db[i];
                    p[i] += t.phase_deg[i] * t.phase_deg[i];
                }
            }
            let n = results.len() as f64;
            let avg = |x: Vec<f64>| x.iter().map(|s| (s / n).sqrt()).sum::<f64>() / v as f64;
            (avg(g), avg(p))
        }
    };

    Ok(RmseRow {
        scheme: cfg.scheme,
        elements: setup.point.elements,
        code_length: cfg.code_length,
        ev_n0_db: setup.point.ev_n0_db,
        gain_rmse_theory_db: gain_theory,
        gain_rmse_sim_db: gain.rmse,
        gain_rmse_sim_stderr: gain.stderr,
        phase_rmse_theory_deg: phase_theory,
        phase_rmse_sim_deg: phase.rmse,
        phase_rmse_sim_stderr: phase.stderr,
        trials: cfg.trials,
        seed: cfg.master_seed,
    })
}

/// Runs a scenario on the global rayon pool.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RmseReport> {
    cfg.validate()?;
    let m = match cfg.scheme {
        Scheme::Csms => Some(csms_code(cfg)?),
        Scheme::Oma => None,
    };
    let mut rows = Vec::new();
    for point in cfg.grid()? {
        let setup = PointSetup::with_code(cfg, point, m.as_ref())?;
        rows.push(run_point(cfg, &setup)?);
    }
    Ok(RmseReport::new(rows))
}

/// Runs a scenario on a dedicated pool of `workers` threads. The report does
/// not depend on `workers`.
pub fn run_scenario_with_workers(cfg: &ScenarioConfig, workers: usize) -> Result<RmseReport> {
    with_workers(workers, || run_scenario(cfg))
}

pub(crate) fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?;
    pool.install(f)
}
