//! Closed-form RMSE of the estimated gain and phase mismatch.
//!
//! The estimates are modeled as `w̃_v = w_v + x_v` with circular Gaussian
//! errors of variance `σ_v²` and real correlation coefficient `ρ_{v,1}` against
//! the reference element. Both formulas are high-SNR approximations; they are
//! meaningful only when `a_v²/σ_v²` is large (roughly 10 dB and up). No guard is
//! applied.
//!
//! For orthogonal codes the errors are white: `σ_v² = σ²`, `ρ = 0`. For
//! cyclically shifted m-sequences the peaks share noise samples through their
//! overlapping windows, and zero forcing mixes them further:
//! `R_x = M⁻¹ R_xp M⁻¹`.

use nalgebra::DMatrix;

use crate::channel::{ElementGains, NoiseSpec};
use crate::error::{Error, Result};
use crate::pncodes::{aperiodic_autocorrelation, SignatureCode};
use crate::receiver::ZfEqualizer;

/// Error variances of every element and correlation of elements 2..V with
/// element 1.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseStats {
    variances: Vec<f64>,
    correlations: Vec<f64>,
}

impl NoiseStats {
    pub fn new(variances: Vec<f64>, correlations: Vec<f64>) -> Result<Self> {
        if variances.is_empty() || correlations.len() + 1 != variances.len() {
            return Err(Error::Dimension(format!(
                "{} variances need {} correlations, got {}",
                variances.len(),
                variances.len().saturating_sub(1),
                correlations.len()
            )));
        }
        Ok(Self {
            variances,
            correlations,
        })
    }

    pub fn elements(&self) -> usize {
        self.variances.len()
    }

    /// `σ_v²` for v = 1..V (index 0 is element 1).
    pub fn variances(&self) -> &[f64] {
        &self.variances
    }

    /// `ρ_{v,1}` for v = 2..V (index 0 is element 2).
    pub fn correlations(&self) -> &[f64] {
        &self.correlations
    }
}

/// White, uncorrelated estimation errors of an orthogonal code bank.
pub fn oma_noise_stats(noise: &NoiseSpec, elements: usize) -> NoiseStats {
    NoiseStats {
        variances: vec![noise.variance(); elements],
        correlations: vec![0.0; elements.saturating_sub(1)],
    }
}

/// Covariance of the raw peak noise for consecutive peak offsets.
///
/// Peaks y and z correlate windows that overlap in `L - |z - y|` noise
/// samples, hence `R_xp(y, z) = σ²·Σ_k m(k) m(k - |z - y|)`.
pub fn csms_peak_noise_cov(
    m: &SignatureCode,
    offsets: &[usize],
    noise: &NoiseSpec,
) -> Result<DMatrix<f64>> {
    if offsets.iter().enumerate().any(|(v, &q)| q != v) {
        return Err(Error::Offset(
            "the noise covariance model needs consecutive offsets q_v = v - 1".into(),
        ));
    }
    let v = offsets.len();
    if v == 0 || v > m.len() {
        return Err(Error::Offset(format!(
            "{v} peaks for a code of length {}",
            m.len()
        )));
    }
    let s2 = noise.variance();
    let lags: Vec<f64> = (0..v).map(|d| s2 * aperiodic_autocorrelation(m, d)).collect();
    Ok(DMatrix::from_fn(v, v, |y, z| lags[y.abs_diff(z)]))
}

/// Error statistics after zero forcing, `R_x = M⁻¹ R_xp M⁻¹`.
///
/// With `M⁻¹ = (b - a)I + a·11ᵀ` and symmetric `R_xp` this expands to
/// `(b-a)² R + (b-a)a (r_y + r_z) + a² S`, where `r` are row sums and `S` is
/// the grand total, so only row sums are needed.
pub fn csms_gain_noise_stats(eq: &ZfEqualizer, r_xp: &DMatrix<f64>) -> Result<NoiseStats> {
    let v = eq.elements();
    if r_xp.shape() != (v, v) {
        return Err(Error::Dimension(format!(
            "covariance is {:?}, equalizer expects {v}x{v}",
            r_xp.shape()
        )));
    }
    let (a, d) = (eq.off_diagonal(), eq.diagonal() - eq.off_diagonal());
    let row: Vec<f64> = (0..v).map(|y| r_xp.row(y).sum()).collect();
    let total: f64 = row.iter().sum();
    let entry = |y: usize, z: usize| d * d * r_xp[(y, z)] + d * a * (row[y] + row[z]) + a * a * total;

    let variances: Vec<f64> = (0..v).map(|y| entry(y, y)).collect();
    let correlations = (1..v)
        .map(|y| entry(y, 0) / (variances[y] * variances[0]).sqrt())
        .collect();
    NoiseStats::new(variances, correlations)
}

/// Inputs of the pairwise formulas for element v against element 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairInputs {
    pub amp_v: f64,
    pub amp_1: f64,
    /// Radians.
    pub phase_v: f64,
    /// Radians.
    pub phase_1: f64,
    pub var_v: f64,
    pub var_1: f64,
    pub rho: f64,
}

/// Approximate gain-mismatch RMSE in dB.
///
/// `|w̃|²/a²` is approximated as Gaussian with mean `1 + σ²/a²` and variance
/// `σ⁴/a⁴ + 2σ²/a²`; the ratio of the two squared magnitudes then has
/// approximate mean and variance, and `10·log10` is linearized around 1.
pub fn gain_rmse_theory(p: &PairInputs) -> f64 {
    let s1 = p.var_1 / (p.amp_1 * p.amp_1);
    let sv = p.var_v / (p.amp_v * p.amp_v);
    let mu1 = s1 + 1.0;
    let muv = sv + 1.0;
    let sd1 = (s1 * s1 + 2.0 * s1).sqrt();
    let sdv = (sv * sv + 2.0 * sv).sqrt();
    let cos = (p.phase_1 - p.phase_v).cos();
    let cross = p.rho * (p.var_1 * p.var_v).sqrt() / (p.amp_1 * p.amp_v);
    // ρ̂·σ̂₁·σ̂_v, the covariance of the two squared magnitudes
    let cov = 1.0 + s1 + sv + 2.0 * cross * cos + s1 * sv * (0.5 + 0.625 * p.rho * p.rho)
        - mu1 * muv;

    let var = sd1 * sd1 * muv * muv / mu1.powi(4) + sdv * sdv / (mu1 * mu1)
        - 2.0 * cov * muv / mu1.powi(3);
    let bias = muv / mu1 + sd1 * sd1 * muv / mu1.powi(3) - cov / (mu1 * mu1) - 1.0;
    10.0 / std::f64::consts::LN_10 * (var + bias * bias).sqrt()
}

/// Approximate phase-mismatch RMSE in degrees.
pub fn phase_rmse_theory(p: &PairInputs) -> Result<f64> {
    let cross = p.rho * (p.var_1 * p.var_v).sqrt() * (p.phase_1 - p.phase_v).cos();
    let radicand = p.var_v / (2.0 * p.amp_v * p.amp_v) + p.var_1 / (2.0 * p.amp_1 * p.amp_1)
        - 2.0 * cross / (2.0 * p.amp_v * p.amp_1 + cross);
    if !(radicand >= 0.0) {
        return Err(Error::NegativeRadicand(radicand));
    }
    Ok(radicand.sqrt().to_degrees())
}

/// Predicted RMSEs of elements 2..V.
#[derive(Debug, Clone, PartialEq)]
pub struct TheoryPoint {
    pub gain_db: Vec<f64>,
    pub phase_deg: Vec<f64>,
}

impl TheoryPoint {
    /// Element-averaged `(gain dB, phase deg)`.
    pub fn average(&self) -> Result<(f64, f64)> {
        Ok((average_rmse(&self.gain_db)?, average_rmse(&self.phase_deg)?))
    }
}

/// Evaluates both formulas for every element against element 1.
pub fn theory_point(gains: &ElementGains, stats: &NoiseStats) -> Result<TheoryPoint> {
    if gains.len() != stats.elements() {
        return Err(Error::Dimension(format!(
            "{} gains but noise stats for {} elements",
            gains.len(),
            stats.elements()
        )));
    }
    let (amp, phase, var) = (gains.amplitudes(), gains.phases(), stats.variances());
    let mut gain_db = Vec::with_capacity(gains.len().saturating_sub(1));
    let mut phase_deg = Vec::with_capacity(gains.len().saturating_sub(1));
    for v in 1..gains.len() {
        let pair = PairInputs {
            amp_v: amp[v],
            amp_1: amp[0],
            phase_v: phase[v],
            phase_1: phase[0],
            var_v: var[v],
            var_1: var[0],
            rho: stats.correlations()[v - 1],
        };
        gain_db.push(gain_rmse_theory(&pair));
        phase_deg.push(phase_rmse_theory(&pair)?);
    }
    Ok(TheoryPoint { gain_db, phase_deg })
}

/// Arithmetic mean of per-element RMSE values (not of MSEs).
pub fn average_rmse(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Dimension("no elements to average over".into()));
    }
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

/// Noise statistics of the zero-forced estimates for an m-sequence with
/// consecutive offsets.
pub fn csms_noise_stats(m: &SignatureCode, elements: usize, noise: &NoiseSpec) -> Result<NoiseStats> {
    let eq = ZfEqualizer::new(m.len(), elements)?;
    let offsets: Vec<usize> = (0..elements).collect();
    let r_xp = csms_peak_noise_cov(m, &offsets, noise)?;
    csms_gain_noise_stats(&eq, &r_xp)
}
