//! Oversampled DSSS baseband model.
//!
//! Chips are held for `F` samples (rectangular pulse), the receiver convolves
//! with the same rectangular pulse and samples once per chip at the end of each
//! chip interval. With perfect chip synchronization this chain reduces exactly
//! to the chip-rate model `r(k) = Σ_v w_v c_v(k)` used everywhere else.
//!
//! The continuous-time pulse of amplitude `1/T_c` only yields a unit
//! chip-epoch response after an implicit `T_c` scaling. Here chips have unit
//! amplitude and the filter output is divided by its own peak (`F`), which
//! makes the equivalence exact.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pncodes::SignatureCode;

pub const DEFAULT_OVERSAMPLE: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct OversampledWaveform {
    samples: Vec<Complex64>,
    oversample: usize,
    chip_duration: f64,
}

impl OversampledWaveform {
    pub fn new(samples: Vec<Complex64>, oversample: usize, chip_duration: f64) -> Result<Self> {
        if oversample < 2 {
            return Err(Error::Dimension(format!(
                "oversample factor {oversample} must be at least 2"
            )));
        }
        if samples.len() % oversample != 0 {
            return Err(Error::Dimension(format!(
                "{} samples is not a multiple of F={oversample}",
                samples.len()
            )));
        }
        Ok(Self {
            samples,
            oversample,
            chip_duration,
        })
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn oversample(&self) -> usize {
        self.oversample
    }

    pub fn chip_duration(&self) -> f64 {
        self.chip_duration
    }

    /// Sample period `T_c / F`.
    pub fn sample_period(&self) -> f64 {
        self.chip_duration / self.oversample as f64
    }

    pub fn chips(&self) -> usize {
        self.samples.len() / self.oversample
    }

    /// `Σ_v gain_v · waveform_v`. All inputs must share length and `F`.
    pub fn superpose(parts: &[(Complex64, &OversampledWaveform)]) -> Result<Self> {
        let Some((_, first)) = parts.first() else {
            return Err(Error::Dimension("nothing to superpose".into()));
        };
        let mut samples = vec![Complex64::new(0.0, 0.0); first.samples.len()];
        for (gain, wf) in parts {
            if wf.samples.len() != samples.len() || wf.oversample != first.oversample {
                return Err(Error::Dimension("waveforms differ in shape".into()));
            }
            for (acc, s) in samples.iter_mut().zip(&wf.samples) {
                *acc += gain * s;
            }
        }
        Ok(Self {
            samples,
            oversample: first.oversample,
            chip_duration: first.chip_duration,
        })
    }
}

/// Piecewise-constant baseband waveform: chip `l` is held for `F` samples.
pub fn synthesize_baseband(code: &SignatureCode, oversample: usize) -> Result<OversampledWaveform> {
    synthesize_baseband_with_chip(code, oversample, 1.0)
}

pub fn synthesize_baseband_with_chip(
    code: &SignatureCode,
    oversample: usize,
    chip_duration: f64,
) -> Result<OversampledWaveform> {
    if oversample < 2 {
        return Err(Error::Dimension(format!(
            "oversample factor {oversample} must be at least 2"
        )));
    }
    let samples = code
        .chips()
        .iter()
        .flat_map(|&c| std::iter::repeat(Complex64::new(c, 0.0)).take(oversample))
        .collect();
    OversampledWaveform::new(samples, oversample, chip_duration)
}

/// Rectangular chip matched filter followed by chip-rate sampling.
///
/// The convolution with an `F`-tap boxcar peaks at `F` times the chip value
/// at the end of each chip, so the output is divided by `F` and sampled at
/// sample index `(k + 1)·F - 1` for chip `k`.
pub fn chip_matched_filter_and_sample(wf: &OversampledWaveform) -> Vec<Complex64> {
    let f = wf.oversample;
    let x = &wf.samples;
    let filtered = boxcar(x, f);
    let norm = 1.0 / f as f64;
    (0..wf.chips())
        .map(|k| filtered[(k + 1) * f - 1] * norm)
        .collect()
}

/// Causal running sum over the last `taps` samples (full-length convolution
/// truncated to the input length).
fn boxcar(x: &[Complex64], taps: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(x.len());
    let mut acc = Complex64::new(0.0, 0.0);
    for n in 0..x.len() {
        acc += x[n];
        if n >= taps {
            acc -= x[n - taps];
        }
        out.push(acc);
    }
    out
}
