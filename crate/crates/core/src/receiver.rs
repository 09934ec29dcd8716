//! Calibration receiver: correlation peaks, zero-forcing equalization and
//! mismatch extraction.
//!
//! Orthogonal signaling uses one matched filter per element, all peaking on
//! the same sample, so the peak vector is `p = Cᵀr`. Cyclically shifted
//! signaling uses a single matched filter tuned to `m`; element v's peak shows
//! up `q_v` samples after element 1's. Those peaks are mixed by the periodic
//! autocorrelation matrix `M`, and zero forcing undoes it.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pncodes::{periodic_autocorrelation, CodeMatrix, SignatureCode};

/// Correlation peak values, one per element.
#[derive(Debug, Clone, PartialEq)]
pub struct PeakVector(pub Vec<Complex64>);

impl PeakVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }
}

/// Offsets must start at 0, increase strictly and stay below `len`.
pub fn validate_offsets(offsets: &[usize], len: usize) -> Result<()> {
    match offsets.first() {
        None => return Err(Error::Offset("no offsets given".into())),
        Some(&q) if q != 0 => {
            return Err(Error::Offset(format!("first offset must be 0, got {q}")))
        }
        _ => {}
    }
    if offsets.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Offset(format!(
            "offsets must be strictly increasing: {offsets:?}"
        )));
    }
    let last = *offsets.last().unwrap();
    if last >= len {
        return Err(Error::Offset(format!(
            "largest offset {last} exceeds L-1 = {}",
            len - 1
        )));
    }
    Ok(())
}

/// Default peak positions `q_v = v - 1`.
pub fn consecutive_offsets(elements: usize) -> Vec<usize> {
    (0..elements).collect()
}

/// Parallel matched-filter bank output `p = Cᵀr`. For orthogonal codes this
/// already is the unbiased gain estimate.
pub fn oma_estimate(codes: &CodeMatrix, window: &[Complex64]) -> Result<Vec<Complex64>> {
    if window.len() != codes.code_len() {
        return Err(Error::Dimension(format!(
            "window of {} samples for codes of length {}",
            window.len(),
            codes.code_len()
        )));
    }
    Ok(codes
        .columns()
        .iter()
        .map(|c| correlate(c.chips(), window))
        .collect())
}

fn correlate(chips: &[f64], samples: &[Complex64]) -> Complex64 {
    let (mut re, mut im) = (0.0, 0.0);
    for (&c, s) in chips.iter().zip(samples) {
        re += c * s.re;
        im += c * s.im;
    }
    Complex64::new(re, im)
}

/// Single matched filter tuned to `m`, read out at the epochs `L - 1 + q_v`:
/// `p_v = Σ_k m(k)·stream(k + q_v)`.
pub fn csms_peaks(m: &SignatureCode, offsets: &[usize], stream: &[Complex64]) -> Result<PeakVector> {
    let len = m.len();
    validate_offsets(offsets, len)?;
    let needed = len + offsets.last().unwrap();
    if stream.len() < needed {
        return Err(Error::Dimension(format!(
            "stream has {} samples, peaks need {needed}",
            stream.len()
        )));
    }
    Ok(PeakVector(
        offsets
            .iter()
            .map(|&q| correlate(m.chips(), &stream[q..q + len]))
            .collect(),
    ))
}

/// `M(y, z) = periodic autocorrelation of m at lag q_z - q_y`.
pub fn build_correlation_matrix(m: &SignatureCode, offsets: &[usize]) -> Result<DMatrix<f64>> {
    let len = m.len();
    validate_offsets(offsets, len)?;
    let v = offsets.len();
    Ok(DMatrix::from_fn(v, v, |y, z| {
        let lag = (offsets[z] as isize - offsets[y] as isize).rem_euclid(len as isize);
        periodic_autocorrelation(m, lag as usize)
    }))
}

/// Zero-forcing equalizer for m-sequence shifts.
///
/// For an m-sequence, `M` has unit diagonal and `-1/L` everywhere else,
/// whatever the offsets. Its inverse has diagonal `b` and off-diagonal `a`:
///
/// ```text
/// a = L / ((L + 1)(L - V + 1))
/// b = L (L - V + 2) / ((L + 1)(L - V + 1))
/// ```
///
/// so `w̃_v = a·Σp + (b - a)·p_v` costs O(V).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZfEqualizer {
    code_len: usize,
    elements: usize,
    a: f64,
    b: f64,
}

impl ZfEqualizer {
    pub fn new(code_len: usize, elements: usize) -> Result<Self> {
        if elements == 0 || elements > code_len {
            return Err(Error::Singular {
                elements,
                length: code_len,
            });
        }
        let l = code_len as f64;
        let dof = (code_len - elements + 1) as f64;
        let denom = (l + 1.0) * dof;
        Ok(Self {
            code_len,
            elements,
            a: l / denom,
            b: l * (dof + 1.0) / denom,
        })
    }

    pub fn code_len(&self) -> usize {
        self.code_len
    }

    pub fn elements(&self) -> usize {
        self.elements
    }

    /// Off-diagonal entry of `M⁻¹`.
    pub fn off_diagonal(&self) -> f64 {
        self.a
    }

    /// Diagonal entry of `M⁻¹`.
    pub fn diagonal(&self) -> f64 {
        self.b
    }

    /// The ideal `M`: unit diagonal, `-1/L` elsewhere.
    pub fn correlation_matrix(&self) -> DMatrix<f64> {
        let off = -1.0 / self.code_len as f64;
        DMatrix::from_fn(self.elements, self.elements, |i, j| if i == j { 1.0 } else { off })
    }

    /// Dense `M⁻¹` from the `(a, b)` pattern.
    pub fn inverse_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.elements, self.elements, |i, j| {
            if i == j {
                self.b
            } else {
                self.a
            }
        })
    }

    /// `w̃ = M⁻¹p` in 4V real multiplies.
    pub fn equalize(&self, peaks: &PeakVector) -> Result<Vec<Complex64>> {
        if peaks.len() != self.elements {
            return Err(Error::Dimension(format!(
                "{} peaks for an equalizer built for {} elements",
                peaks.len(),
                self.elements
            )));
        }
        let sum: Complex64 = peaks.0.iter().sum();
        let common = sum * self.a;
        let diag = self.b - self.a;
        Ok(peaks.0.iter().map(|p| common + p * diag).collect())
    }
}

/// Functional form of [`ZfEqualizer::equalize`].
pub fn zf_equalize(peaks: &PeakVector, eq: &ZfEqualizer) -> Result<Vec<Complex64>> {
    eq.equalize(peaks)
}

/// Gain (dB) and phase (degrees) of elements 2..V relative to element 1.
#[derive(Debug, Clone, PartialEq)]
pub struct MismatchReport {
    pub gain_db: Vec<f64>,
    pub phase_deg: Vec<f64>,
}

impl MismatchReport {
    /// Truth-side mismatch from known amplitudes and phases (radians).
    pub fn from_truth(amplitudes: &[f64], phases: &[f64]) -> Result<Self> {
        if amplitudes.is_empty() || amplitudes.len() != phases.len() {
            return Err(Error::Dimension("amplitude/phase lengths differ".into()));
        }
        let (a1, p1) = (amplitudes[0], phases[0]);
        if a1 == 0.0 {
            return Err(Error::ReferenceZero);
        }
        Ok(Self {
            gain_db: amplitudes[1..].iter().map(|a| 20.0 * (a / a1).log10()).collect(),
            phase_deg: phases[1..]
                .iter()
                .map(|p| wrap_degrees((p - p1).to_degrees()))
                .collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.gain_db.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gain_db.is_empty()
    }
}

/// Relative mismatch of each estimate against the first one.
pub fn extract_mismatch(estimates: &[Complex64]) -> Result<MismatchReport> {
    let Some(reference) = estimates.first() else {
        return Err(Error::Dimension("no estimates".into()));
    };
    let ref_mag = reference.norm();
    if ref_mag == 0.0 {
        return Err(Error::ReferenceZero);
    }
    let ref_arg = reference.arg();
    Ok(MismatchReport {
        gain_db: estimates[1..]
            .iter()
            .map(|w| 20.0 * (w.norm() / ref_mag).log10())
            .collect(),
        phase_deg: estimates[1..]
            .iter()
            .map(|w| wrap_degrees((w.arg() - ref_arg).to_degrees()))
            .collect(),
    })
}

/// Wraps an angle in degrees to `(-180, 180]`.
pub fn wrap_degrees(deg: f64) -> f64 {
    let w = (deg + 180.0).rem_euclid(360.0) - 180.0;
    if w == -180.0 {
        180.0
    } else {
        w
    }
}
