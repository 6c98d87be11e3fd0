//! Sweep post-processing: calibration, path loss, CIR, PDP, MPC detection,
//! RMS delay spread and coherence bandwidth.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::synthesis::FrequencySweep;

pub const DEFAULT_GAMMA_P_DB: f64 = 60.0;
pub const DEFAULT_GAMMA_N_DB: f64 = 15.0;
pub const DEFAULT_COHERENCE_K: f64 = 50.0;

/// Back-to-back system response G(f).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationProfile {
    pub system_response: Vec<Complex64>,
    pub source: String,
}

impl CalibrationProfile {
    pub fn new(system_response: Vec<Complex64>, source: impl Into<String>) -> Result<Self> {
        let cal = CalibrationProfile {
            system_response,
            source: source.into(),
        };
        cal.validate()?;
        Ok(cal)
    }

    pub fn identity(k: usize) -> Self {
        CalibrationProfile {
            system_response: vec![Complex64::new(1.0, 0.0); k],
            source: "identity".into(),
        }
    }

    pub fn len(&self) -> usize {
        self.system_response.len()
    }

    pub fn is_empty(&self) -> bool {
        self.system_response.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        match self.system_response.iter().position(|g| !(g.norm() > 0.0) || !g.is_finite()) {
            Some(bin) => Err(Error::ZeroCalibration { bin }),
            None => Ok(()),
        }
    }
}

fn check_len(sweep: &FrequencySweep, cal: &CalibrationProfile) -> Result<()> {
    if sweep.k() != cal.len() {
        return Err(Error::LengthMismatch {
            expected: sweep.k(),
            got: cal.len(),
        });
    }
    Ok(())
}

/// H = H_V / G per sample.
pub fn calibrate(raw: &FrequencySweep, cal: &CalibrationProfile) -> Result<FrequencySweep> {
    check_len(raw, cal)?;
    cal.validate()?;
    let samples = raw.samples.iter().zip(&cal.system_response).map(|(h, g)| h / g).collect();
    Ok(FrequencySweep { samples, ..raw.clone() })
}

/// H_V = H · G per sample; the inverse of [`calibrate`].
pub fn apply_system_response(sweep: &FrequencySweep, cal: &CalibrationProfile) -> Result<FrequencySweep> {
    check_len(sweep, cal)?;
    let samples = sweep.samples.iter().zip(&cal.system_response).map(|(h, g)| h * g).collect();
    Ok(FrequencySweep { samples, ..sweep.clone() })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLoss {
    /// 10·log10(mean |H|²) − Gt − Gr, negative for a lossy channel.
    pub raw_db: f64,
    /// Reported loss, the negation of `raw_db`.
    pub pl_db: f64,
}

pub fn path_loss_detail(sweep: &FrequencySweep, gt_dbi: f64, gr_dbi: f64) -> Result<PathLoss> {
    if sweep.samples.is_empty() {
        return Err(Error::Empty("sweep"));
    }
    let mean_power = sweep.samples.iter().map(|h| h.norm_sqr()).sum::<f64>() / sweep.k() as f64;
    if !(mean_power > 0.0) {
        return Err(Error::ZeroPower);
    }
    let raw_db = 10.0 * mean_power.log10() - gt_dbi - gr_dbi;
    Ok(PathLoss { raw_db, pl_db: -raw_db })
}

pub fn path_loss(sweep: &FrequencySweep, gt_dbi: f64, gr_dbi: f64) -> Result<f64> {
    path_loss_detail(sweep, gt_dbi, gr_dbi).map(|p| p.pl_db)
}

pub fn hann_window(k: usize) -> Vec<f64> {
    if k < 2 {
        return vec![1.0; k];
    }
    let denom = (k - 1) as f64;
    (0..k).map(|i| 0.5 * (1.0 - (TAU * i as f64 / denom).cos())).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Window {
    #[default]
    Hann,
    Rectangular,
}

impl Window {
    pub fn coefficients(self, k: usize) -> Vec<f64> {
        match self {
            Window::Hann => hann_window(k),
            Window::Rectangular => vec![1.0; k],
        }
    }
}

/// Hann-windowed inverse DFT, scaled by 1/K. Output bin l sits at delay
/// l / (K·Δf); the top bins alias to negative delays.
pub fn ctf_to_cir(sweep: &FrequencySweep) -> Vec<Complex64> {
    ctf_to_cir_with(sweep, Window::Hann)
}

pub fn ctf_to_cir_with(sweep: &FrequencySweep, window: Window) -> Vec<Complex64> {
    let k = sweep.k();
    let mut buf: Vec<Complex64> = sweep
        .samples
        .iter()
        .zip(window.coefficients(k))
        .map(|(h, w)| h * w)
        .collect();
    if k == 0 {
        return buf;
    }
    FftPlanner::new().plan_fft_inverse(k).process(&mut buf);
    let scale = 1.0 / k as f64;
    buf.iter_mut().for_each(|x| *x *= scale);
    buf
}

/// Number of top bins treated as negative delays (Hann mainlobe half-width).
pub const WRAP_BINS: usize = 2;

/// Delay of each CIR bin, seconds.
pub fn bin_delays(sweep: &FrequencySweep) -> Vec<f64> {
    let k = sweep.k();
    let spacing = 1.0 / (k as f64 * sweep.spacing());
    (0..k)
        .map(|l| {
            let l = if k > 2 * WRAP_BINS && l >= k - WRAP_BINS { l as f64 - k as f64 } else { l as f64 };
            l * spacing
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mpc {
    pub bin: usize,
    /// Seconds.
    pub delay: f64,
    /// dB.
    pub power: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionParams {
    pub gamma_p: f64,
    pub gamma_n: f64,
}

impl Default for DetectionParams {
    fn default() -> Self {
        DetectionParams {
            gamma_p: DEFAULT_GAMMA_P_DB,
            gamma_n: DEFAULT_GAMMA_N_DB,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerDelayProfile {
    /// dB per delay bin.
    pub powers: Vec<f64>,
    /// Seconds per bin.
    pub delays: Vec<f64>,
    /// 1 / (f_stop − f_start).
    pub delay_resolution: f64,
    pub noise_floor: f64,
    pub threshold: f64,
    pub valid_mpcs: Vec<Mpc>,
}

fn to_db(p: f64) -> f64 {
    if p > 0.0 {
        10.0 * p.log10()
    } else {
        f64::NEG_INFINITY
    }
}

/// Median power of the last quarter of delay bins, excluding the wrapped tail.
pub fn estimate_noise_floor(powers_db: &[f64]) -> f64 {
    let k = powers_db.len();
    if k == 0 {
        return f64::NEG_INFINITY;
    }
    let end = if k > 2 * WRAP_BINS { k - WRAP_BINS } else { k };
    let start = (k - k / 4).min(end.saturating_sub(1));
    let mut tail: Vec<f64> = powers_db[start..end].to_vec();
    tail.sort_by(|a, b| a.total_cmp(b));
    let n = tail.len();
    if n % 2 == 1 {
        tail[n / 2]
    } else {
        0.5 * (tail[n / 2 - 1] + tail[n / 2])
    }
}

pub fn detection_threshold(p_max: f64, noise_floor: f64, params: DetectionParams) -> f64 {
    (p_max - params.gamma_p).max(noise_floor + params.gamma_n)
}

/// PDP of a calibrated sweep with MPCs detected under `params`.
pub fn power_delay_profile(sweep: &FrequencySweep, params: DetectionParams) -> Result<PowerDelayProfile> {
    sweep.validate()?;
    let cir = ctf_to_cir(sweep);
    let powers: Vec<f64> = cir.iter().map(|h| to_db(h.norm_sqr())).collect();
    let noise_floor = estimate_noise_floor(&powers);
    let mut pdp = PowerDelayProfile {
        delays: bin_delays(sweep),
        powers,
        delay_resolution: 1.0 / sweep.bandwidth(),
        noise_floor,
        threshold: f64::NAN,
        valid_mpcs: Vec::new(),
    };
    let (threshold, mpcs) = detect(&pdp, params);
    pdp.threshold = threshold;
    pdp.valid_mpcs = mpcs;
    Ok(pdp)
}

fn detect(pdp: &PowerDelayProfile, params: DetectionParams) -> (f64, Vec<Mpc>) {
    let p_max = pdp.powers.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let threshold = detection_threshold(p_max, pdp.noise_floor, params);
    let mut mpcs: Vec<Mpc> = pdp
        .powers
        .iter()
        .zip(&pdp.delays)
        .enumerate()
        .filter(|(_, (&p, _))| p >= threshold && p.is_finite())
        .map(|(bin, (&power, &delay))| Mpc { bin, delay, power })
        .collect();
    mpcs.sort_by(|a, b| a.delay.total_cmp(&b.delay));
    (threshold, mpcs)
}

/// Bins at or above max(P_max − γ_P, N_0 + γ_N), in delay order.
pub fn detect_mpcs(pdp: &PowerDelayProfile, gamma_p: f64, gamma_n: f64) -> Vec<Mpc> {
    detect(pdp, DetectionParams { gamma_p, gamma_n }).1
}

/// Valid MPCs that are local maxima of the PDP.
pub fn pdp_peaks(pdp: &PowerDelayProfile) -> Vec<Mpc> {
    let k = pdp.powers.len();
    pdp.valid_mpcs
        .iter()
        .filter(|m| {
            let p = pdp.powers[m.bin];
            let prev = pdp.powers[(m.bin + k - 1) % k];
            let next = pdp.powers[(m.bin + 1) % k];
            p > prev && p >= next
        })
        .copied()
        .collect()
}

/// Power-weighted RMS spread of MPC delays, seconds.
pub fn rms_delay_spread(mpcs: &[Mpc]) -> Result<f64> {
    if mpcs.is_empty() {
        return Err(Error::Empty("MPC list"));
    }
    let lin: Vec<f64> = mpcs.iter().map(|m| 10f64.powf(m.power / 10.0)).collect();
    let total: f64 = lin.iter().sum();
    if !(total > 0.0) {
        return Err(Error::ZeroPower);
    }
    if mpcs.len() == 1 {
        return Ok(0.0);
    }
    let mean = mpcs.iter().zip(&lin).map(|(m, p)| p * m.delay).sum::<f64>() / total;
    let var = mpcs.iter().zip(&lin).map(|(m, p)| p * (m.delay - mean).powi(2)).sum::<f64>() / total;
    Ok(var.max(0.0).sqrt())
}

/// Bc = 1 / (k · τ_rms), Hz.
pub fn coherence_bandwidth(rms_ds: f64, k_factor: f64) -> Result<f64> {
    if !(rms_ds > 0.0) {
        return Err(Error::Domain(format!("coherence bandwidth needs rms_ds > 0, got {rms_ds}")));
    }
    if !(k_factor > 0.0) {
        return Err(Error::Domain(format!("coherence constant must be positive, got {k_factor}")));
    }
    Ok(1.0 / (k_factor * rms_ds))
}

/// Everything the process stage derives from one sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessedSweep {
    pub path_loss: PathLoss,
    pub pdp: PowerDelayProfile,
    pub rms_ds: f64,
}

pub fn process_sweep(
    raw: &FrequencySweep,
    cal: Option<&CalibrationProfile>,
    gt_dbi: f64,
    gr_dbi: f64,
    params: DetectionParams,
) -> Result<ProcessedSweep> {
    let sweep = match cal {
        Some(c) => calibrate(raw, c)?,
        None => raw.clone(),
    };
    let path_loss = path_loss_detail(&sweep, gt_dbi, gr_dbi)?;
    let pdp = power_delay_profile(&sweep, params)?;
    let rms_ds = rms_delay_spread(&pdp.valid_mpcs)?;
    Ok(ProcessedSweep { path_loss, pdp, rms_ds })
}
