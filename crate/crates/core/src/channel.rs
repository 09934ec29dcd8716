//! Ground-truth element gains, circular complex Gaussian noise, SNR
//! bookkeeping and the calibration link budget.
//!
//! Noise variates come from `rand_distr::StandardNormal` (ziggurat method).
//! Results are reproducible per seed within this crate only.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pncodes::{CodeMatrix, SignatureCode};
use crate::receiver::validate_offsets;

/// Boltzmann constant as used in the calibration link budget, dBW/Hz/K.
pub const BOLTZMANN_DBW_HZ_K: f64 = -228.0;

/// Complex channel gains `w_v = a_v·e^{jφ_v}` of the V elements.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementGains {
    amplitudes: Vec<f64>,
    phases: Vec<f64>,
}

impl ElementGains {
    /// Phases are reduced to `[0, 2π)`.
    pub fn new(amplitudes: Vec<f64>, phases: Vec<f64>) -> Result<Self> {
        if amplitudes.len() != phases.len() {
            return Err(Error::InvalidGains(format!(
                "{} amplitudes but {} phases",
                amplitudes.len(),
                phases.len()
            )));
        }
        if amplitudes.is_empty() {
            return Err(Error::InvalidGains("no elements".into()));
        }
        if amplitudes.iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
            return Err(Error::InvalidGains("amplitudes must be positive".into()));
        }
        let phases = phases.into_iter().map(|p| p.rem_euclid(TAU)).collect();
        Ok(Self { amplitudes, phases })
    }

    /// Unit amplitudes with phases drawn uniformly from `[0, 2π)`.
    pub fn uniform_random<R: Rng + ?Sized>(elements: usize, rng: &mut R) -> Result<Self> {
        let phases = (0..elements).map(|_| rng.gen_range(0.0..TAU)).collect();
        Self::new(vec![1.0; elements], phases)
    }

    pub fn from_complex(w: &[Complex64]) -> Result<Self> {
        Self::new(
            w.iter().map(|c| c.norm()).collect(),
            w.iter().map(|c| c.arg()).collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn complex(&self) -> Vec<Complex64> {
        self.amplitudes
            .iter()
            .zip(&self.phases)
            .map(|(&a, &p)| Complex64::from_polar(a, p))
            .collect()
    }
}

/// Total complex noise variance `σ²`; each quadrature carries `σ²/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    variance: f64,
}

impl NoiseSpec {
    pub fn new(variance: f64) -> Result<Self> {
        if !(variance >= 0.0) || !variance.is_finite() {
            return Err(Error::Config(format!("noise variance {variance} must be >= 0")));
        }
        Ok(Self { variance })
    }

    pub fn noiseless() -> Self {
        Self { variance: 0.0 }
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        let s = (0.5 * self.variance).sqrt();
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(s * re, s * im)
    }

    /// Adds i.i.d. noise in place. Draws nothing when `σ² = 0`.
    pub fn add_to<R: Rng + ?Sized>(&self, samples: &mut [Complex64], rng: &mut R) {
        if self.variance == 0.0 {
            return;
        }
        for x in samples {
            *x += self.sample(rng);
        }
    }
}

/// Downlink calibration link budget, all terms in dB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    pub eirp_dbw: f64,
    pub path_loss_db: f64,
    pub g_over_t_dbk: f64,
    pub ts_seconds: f64,
    #[serde(default = "default_kb")]
    pub kb_dbw_hz_k: f64,
}

fn default_kb() -> f64 {
    BOLTZMANN_DBW_HZ_K
}

impl LinkBudget {
    pub fn validate(&self) -> Result<()> {
        if !(self.ts_seconds > 0.0) {
            return Err(Error::Config("link budget ts_seconds must be > 0".into()));
        }
        Ok(())
    }

    /// `E_v/N₀` in dB.
    pub fn ev_n0_db(&self) -> Result<f64> {
        self.validate()?;
        Ok(ev_n0_from_link_budget(self))
    }
}

/// `EIRP − L_p + G/T − k_B + 10·log10(T_s)`.
pub fn ev_n0_from_link_budget(lb: &LinkBudget) -> f64 {
    lb.eirp_dbw - lb.path_loss_db + lb.g_over_t_dbk - lb.kb_dbw_hz_k + 10.0 * lb.ts_seconds.log10()
}

/// Noise variance that makes the peak SNR `a²/σ²` equal to `E_v/N₀`.
pub fn noise_var_from_snr(ev_n0_db: f64, amplitude: f64) -> f64 {
    amplitude * amplitude / 10f64.powf(ev_n0_db / 10.0)
}

/// One code period received under orthogonal signaling: `r = C·w + n`.
pub fn synthesize_window_oma<R: Rng + ?Sized>(
    codes: &CodeMatrix,
    gains: &ElementGains,
    noise: &NoiseSpec,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    if codes.elements() != gains.len() {
        return Err(Error::Dimension(format!(
            "{} codes for {} elements",
            codes.elements(),
            gains.len()
        )));
    }
    let w = gains.complex();
    let mut r = vec![Complex64::new(0.0, 0.0); codes.code_len()];
    for (code, wv) in codes.columns().iter().zip(&w) {
        for (acc, &c) in r.iter_mut().zip(code.chips()) {
            *acc += wv * c;
        }
    }
    noise.add_to(&mut r, rng);
    Ok(r)
}

/// Received stream for cyclically shifted signaling, long enough to capture
/// every element's peak: `L + q_V` samples of the periodic composite plus
/// independent noise on every sample.
pub fn synthesize_stream_csms<R: Rng + ?Sized>(
    m: &SignatureCode,
    offsets: &[usize],
    gains: &ElementGains,
    noise: &NoiseSpec,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    let len = m.len();
    validate_offsets(offsets, len)?;
    if offsets.len() != gains.len() {
        return Err(Error::Dimension(format!(
            "{} offsets for {} elements",
            offsets.len(),
            gains.len()
        )));
    }
    // One period of Σ_v w_v m^{q_v}, then periodic extension.
    let w = gains.complex();
    let chips = m.chips();
    let mut period = vec![Complex64::new(0.0, 0.0); len];
    for (&q, wv) in offsets.iter().zip(&w) {
        for (k, acc) in period.iter_mut().enumerate() {
            *acc += wv * chips[(k + len - q) % len];
        }
    }
    let total = len + offsets.last().copied().unwrap_or(0);
    let mut stream: Vec<Complex64> = (0..total).map(|k| period[k % len]).collect();
    noise.add_to(&mut stream, rng);
    Ok(stream)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pncodes::{msequence_code, walsh_matrix};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn link_budget_example() {
        let lb = LinkBudget {
            eirp_dbw: 10.0,
            path_loss_db: 200.0,
            g_over_t_dbk: 30.0,
            ts_seconds: 1e-3,
            kb_dbw_hz_k: BOLTZMANN_DBW_HZ_K,
        };
        // 10 - 200 + 30 + 228 - 30
        assert!(close(lb.ev_n0_db().unwrap(), 38.0, 1e-12));
        let more_loss = LinkBudget { path_loss_db: 210.0, ..lb };
        assert!(close(ev_n0_from_link_budget(&more_loss), 28.0, 1e-12));
        let longer = LinkBudget { ts_seconds: 1e-2, ..lb };
        assert!(close(ev_n0_from_link_budget(&longer), 48.0, 1e-12));
        let bad = LinkBudget { ts_seconds: 0.0, ..lb };
        assert!(bad.ev_n0_db().is_err());
    }

    #[test]
    fn link_budget_kb_defaults_when_absent() {
        let lb: LinkBudget = serde_json::from_str(
            r#"{"eirp_dbw":10,"path_loss_db":200,"g_over_t_dbk":30,"ts_seconds":0.001}"#,
        )
        .unwrap();
        assert_eq!(lb.kb_dbw_hz_k, -228.0);
    }

    #[test]
    fn snr_inversion() {
        assert!(close(noise_var_from_snr(30.0, 1.0), 1e-3, 1e-18));
        assert!(close(noise_var_from_snr(30.0, 2.0), 4e-3, 1e-17));
        assert!(close(noise_var_from_snr(0.0, 1.0), 1.0, 0.0));
    }

    #[test]
    fn gains_reject_nonpositive_amplitude() {
        assert!(ElementGains::new(vec![1.0, 0.0], vec![0.0, 0.0]).is_err());
        assert!(ElementGains::new(vec![1.0], vec![0.0, 0.0]).is_err());
        let g = ElementGains::new(vec![1.0], vec![-1.0]).unwrap();
        assert!(close(g.phases()[0], TAU - 1.0, 1e-15));
    }

    #[test]
    fn noiseless_oma_window() {
        let c = walsh_matrix(2, 2).unwrap();
        let g = ElementGains::from_complex(&[Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)])
            .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r = synthesize_window_oma(&c, &g, &NoiseSpec::noiseless(), &mut rng).unwrap();
        let s = 0.5f64.sqrt();
        // [[s, s], [s, -s]] · [1, j]
        assert!((r[0] - Complex64::new(s, s)).norm() < 1e-15);
        assert!((r[1] - Complex64::new(s, -s)).norm() < 1e-15);
    }

    #[test]
    fn oma_window_dimension_mismatch() {
        let c = walsh_matrix(4, 3).unwrap();
        let g = ElementGains::new(vec![1.0; 2], vec![0.0; 2]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(
            synthesize_window_oma(&c, &g, &NoiseSpec::noiseless(), &mut rng),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn noiseless_window_is_linear_in_gains() {
        let c = walsh_matrix(8, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g1 = ElementGains::uniform_random(3, &mut rng).unwrap();
        let eps = 1e-6;
        let g2 = ElementGains::new(
            g1.amplitudes().iter().map(|a| a * eps).collect(),
            g1.phases().to_vec(),
        )
        .unwrap();
        let n = NoiseSpec::noiseless();
        let r1 = synthesize_window_oma(&c, &g1, &n, &mut rng).unwrap();
        let r2 = synthesize_window_oma(&c, &g2, &n, &mut rng).unwrap();
        for (a, b) in r1.iter().zip(&r2) {
            assert!((a * eps - b).norm() < 1e-20);
        }
    }

    #[test]
    fn noise_moments() {
        let n = NoiseSpec::new(1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let count = 100_000;
        let draws: Vec<Complex64> = (0..count).map(|_| n.sample(&mut rng)).collect();
        let nf = count as f64;
        let mean: Complex64 = draws.iter().sum::<Complex64>() / nf;
        let var_re = draws.iter().map(|d| d.re * d.re).sum::<f64>() / nf;
        let var_im = draws.iter().map(|d| d.im * d.im).sum::<f64>() / nf;
        let cross = draws.iter().map(|d| d.re * d.im).sum::<f64>() / nf;
        let total = draws.iter().map(|d| d.norm_sqr()).sum::<f64>() / nf;
        // per-quadrature variance 0.5: se(mean) = sqrt(0.5/n), se(var) = 0.5*sqrt(2/n)
        let se_mean = (0.5 / nf).sqrt();
        let se_var = 0.5 * (2.0 / nf).sqrt();
        assert!(mean.re.abs() < 3.0 * se_mean && mean.im.abs() < 3.0 * se_mean);
        assert!(close(var_re, 0.5, 3.0 * se_var));
        assert!(close(var_im, 0.5, 3.0 * se_var));
        assert!(cross.abs() < 3.0 * 0.5 / nf.sqrt());
        assert!(close(total, 1.0, 0.03));
    }

    #[test]
    fn csms_stream_single_element_is_periodic_code() {
        let m = msequence_code(3, None).unwrap();
        let w = Complex64::new(0.5, -0.25);
        let g = ElementGains::from_complex(&[w]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = synthesize_stream_csms(&m, &[0], &g, &NoiseSpec::noiseless(), &mut rng).unwrap();
        assert_eq!(s.len(), 7);
        for (k, x) in s.iter().enumerate() {
            assert!((x - w * m.chips()[k]).norm() < 1e-15);
        }
    }

    #[test]
    fn csms_stream_length_and_offset_errors() {
        let m = msequence_code(3, None).unwrap();
        let g = ElementGains::new(vec![1.0; 2], vec![0.0; 2]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let n = NoiseSpec::noiseless();
        assert_eq!(synthesize_stream_csms(&m, &[0, 3], &g, &n, &mut rng).unwrap().len(), 10);
        assert!(matches!(
            synthesize_stream_csms(&m, &[0, 0], &g, &n, &mut rng),
            Err(Error::Offset(_))
        ));
        assert!(matches!(
            synthesize_stream_csms(&m, &[1, 2], &g, &n, &mut rng),
            Err(Error::Offset(_))
        ));
        assert!(matches!(
            synthesize_stream_csms(&m, &[0, 7], &g, &n, &mut rng),
            Err(Error::Offset(_))
        ));
    }
}
