//! The 1-bit RIS panel: cell layout, coding-state responses, ideal phase
//! profiles and codebook quantization.
//!
//! Cell `(m, n)` sits at row `m` (along y) and column `n` (along x), centered
//! on the panel origin. The incidence plane is x–z, so column mirroring is
//! the symmetry that swaps the Tx and Rx sides.
//!
//! A cell contributes `w · exp(−jψ)` to the received field, where `ψ` is the
//! propagation phase `k·(|tx − c| + |rx − c|)` and `w` its reflection
//! coefficient. Perfect compensation therefore means `arg w = ψ`, and the
//! quantizer picks, per cell, the coding state whose phase lies closest to ψ.

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::geometry::MeasurementPoint;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Per-frequency state responses, linearly interpolated and clamped at the ends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResponseTable {
    pub frequencies: Vec<f64>,
    pub state0: Vec<Complex64>,
    pub state1: Vec<Complex64>,
}

impl ResponseTable {
    fn validate(&self) -> Result<()> {
        let n = self.frequencies.len();
        if n == 0 || self.state0.len() != n || self.state1.len() != n {
            return Err(Error::InvalidInput(
                "response table columns must be non-empty and equally long".into(),
            ));
        }
        if self.frequencies.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput(
                "response table frequencies must increase strictly".into(),
            ));
        }
        Ok(())
    }

    fn interpolate(&self, values: &[Complex64], frequency: f64) -> Complex64 {
        let f = &self.frequencies;
        if frequency <= f[0] {
            return values[0];
        }
        if frequency >= f[f.len() - 1] {
            return values[values.len() - 1];
        }
        let hi = f.partition_point(|&x| x <= frequency);
        let lo = hi - 1;
        let t = (frequency - f[lo]) / (f[hi] - f[lo]);
        values[lo] * (1.0 - t) + values[hi] * t
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RisConfiguration {
    pub m_rows: usize,
    pub n_cols: usize,
    /// Cell width along x, meters.
    pub dx: f64,
    /// Cell height along y, meters.
    pub dy: f64,
    /// Reflection coefficient for coding "0".
    pub state0: Complex64,
    /// Reflection coefficient for coding "1".
    pub state1: Complex64,
    pub center_frequency: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub response_table: Option<ResponseTable>,
}

/// Complex coefficient with the given insertion loss (dB) and phase (degrees).
pub fn lossy_state(loss_db: f64, phase_deg: f64) -> Complex64 {
    Complex64::from_polar(10f64.powf(-loss_db / 20.0), phase_deg.to_radians())
}

impl Default for RisConfiguration {
    /// The fabricated 32×16 panel: 55° at 0.75 dB loss for coding "0",
    /// −125° at 0.25 dB loss for coding "1", 2.6 GHz center.
    fn default() -> Self {
        RisConfiguration {
            m_rows: 32,
            n_cols: 16,
            dx: 0.05,
            dy: 0.05,
            state0: lossy_state(0.75, 55.0),
            state1: lossy_state(0.25, -125.0),
            center_frequency: 2.6e9,
            response_table: None,
        }
    }
}

impl RisConfiguration {
    /// A lossless antipodal panel of arbitrary size, for synthetic studies.
    pub fn ideal(m_rows: usize, n_cols: usize) -> Self {
        RisConfiguration {
            m_rows,
            n_cols,
            state0: Complex64::new(1.0, 0.0),
            state1: Complex64::new(-1.0, 0.0),
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let inv = |name: &'static str, detail: String| Err(Error::Invariant { name, detail });
        if self.m_rows == 0 || self.n_cols == 0 {
            return inv("non-empty panel", format!("{}x{}", self.m_rows, self.n_cols));
        }
        if !(self.dx > 0.0 && self.dy > 0.0 && self.center_frequency > 0.0) {
            return inv("positive cell size and frequency", String::new());
        }
        for (i, s) in [self.state0, self.state1].into_iter().enumerate() {
            if !(s.norm() <= 1.0 + 1e-12) {
                return inv("|state| <= 1", format!("state{i} magnitude {}", s.norm()));
            }
        }
        let diff = wrap_pi(self.state0.arg() - self.state1.arg()).abs();
        if (diff - PI).abs() > 1e-9 {
            return inv(
                "state phase difference = 180 deg",
                format!("difference {:.6} deg", diff.to_degrees()),
            );
        }
        if let Some(table) = &self.response_table {
            table.validate()?;
        }
        Ok(())
    }

    pub fn cells(&self) -> usize {
        self.m_rows * self.n_cols
    }

    /// Total reflecting area M·N·dx·dy, square meters.
    pub fn aperture(&self) -> f64 {
        self.cells() as f64 * self.dx * self.dy
    }

    pub fn wavelength(&self, frequency: f64) -> f64 {
        SPEED_OF_LIGHT / frequency
    }

    pub fn cell_position(&self, m: usize, n: usize) -> [f64; 3] {
        let x = (n as f64 - (self.n_cols as f64 - 1.0) / 2.0) * self.dx;
        let y = (m as f64 - (self.m_rows as f64 - 1.0) / 2.0) * self.dy;
        [x, y, 0.0]
    }

    /// Reflection coefficient of a coding state at `frequency`.
    pub fn state(&self, bit: bool, frequency: f64) -> Complex64 {
        match &self.response_table {
            Some(t) => t.interpolate(if bit { &t.state1 } else { &t.state0 }, frequency),
            None => {
                if bit {
                    self.state1
                } else {
                    self.state0
                }
            }
        }
    }

    pub fn max_state_magnitude(&self, frequency: f64) -> f64 {
        self.state(false, frequency)
            .norm()
            .max(self.state(true, frequency).norm())
    }
}

/// Wraps to (−π, π].
fn wrap_pi(x: f64) -> f64 {
    let r = (x + PI).rem_euclid(TAU) - PI;
    if r <= -PI {
        r + TAU
    } else {
        r
    }
}

fn circular_distance(a: f64, b: f64) -> f64 {
    wrap_pi(a - b).abs()
}

/// Geometry a codebook was designed for: (d1, θt, d2, θr), meters and degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamTarget {
    pub d1: f64,
    pub theta_t: f64,
    pub d2: f64,
    pub theta_r: f64,
}

impl From<&MeasurementPoint> for BeamTarget {
    fn from(p: &MeasurementPoint) -> Self {
        BeamTarget {
            d1: p.d1,
            theta_t: p.eaoa_t,
            d2: p.d2,
            theta_r: p.eaod_r,
        }
    }
}

/// Per-cell compensation phase in [0, 2π), radians, row-major M×N.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseProfile {
    pub phases: Array2<f64>,
    pub target: BeamTarget,
    pub frequency: f64,
}

fn distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

pub fn ideal_phase_profile(
    point: &MeasurementPoint,
    ris: &RisConfiguration,
    frequency: f64,
) -> Result<PhaseProfile> {
    if !(frequency > 0.0) {
        return Err(Error::Domain(format!("frequency must be positive, got {frequency}")));
    }
    let k = TAU / ris.wavelength(frequency);
    let tx = point.tx_position();
    let rx = point.rx_position();
    let phases = Array2::from_shape_fn((ris.m_rows, ris.n_cols), |(m, n)| {
        let c = ris.cell_position(m, n);
        (k * (distance(tx, c) + distance(rx, c))).rem_euclid(TAU)
    });
    Ok(PhaseProfile {
        phases,
        target: BeamTarget::from(point),
        frequency,
    })
}

/// Binary coding matrix; `true` selects coding "1".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Codebook {
    pub bits: Array2<bool>,
    pub target: BeamTarget,
    /// Decision-boundary offset used at quantization, radians.
    pub threshold: f64,
}

impl Codebook {
    /// Every cell in the same coding state (the specular, "metal plate" setting).
    pub fn uniform(ris: &RisConfiguration, bit: bool, target: BeamTarget) -> Self {
        Codebook {
            bits: Array2::from_elem((ris.m_rows, ris.n_cols), bit),
            target,
            threshold: 0.0,
        }
    }

    pub fn complement(&self) -> Self {
        Codebook {
            bits: self.bits.mapv(|b| !b),
            ..self.clone()
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        self.bits.dim()
    }

    fn check_dims(&self, ris: &RisConfiguration) -> Result<()> {
        let expected = (ris.m_rows, ris.n_cols);
        if self.dims() != expected {
            return Err(Error::Dimension {
                expected,
                got: self.dims(),
            });
        }
        Ok(())
    }
}

/// Bit decision for one cell. Ties go to coding "0".
fn decide(phase: f64, threshold: f64, arg0: f64, arg1: f64) -> bool {
    let shifted = phase - threshold;
    circular_distance(shifted, arg1) < circular_distance(shifted, arg0)
}

/// Nearest-state quantization with the decision boundary rotated by `threshold`.
pub fn quantize_codebook(profile: &PhaseProfile, ris: &RisConfiguration, threshold: f64) -> Codebook {
    let arg0 = ris.state(false, profile.frequency).arg();
    let arg1 = ris.state(true, profile.frequency).arg();
    Codebook {
        bits: profile.phases.mapv(|p| decide(p, threshold, arg0, arg1)),
        target: profile.target,
        threshold,
    }
}

fn gain_db(sum: Complex64, cells: usize, max_weight: f64) -> f64 {
    20.0 * (sum.norm() / (cells as f64 * max_weight)).log10()
}

/// Normalized coherent gain of arbitrary per-cell weights against a profile:
/// |Σ w·exp(−jψ)| / (M·N·max|w|), in dB. Never exceeds 0 dB.
pub fn weighted_gain_db(weights: &Array2<Complex64>, profile: &PhaseProfile) -> Result<f64> {
    if weights.dim() != profile.phases.dim() {
        return Err(Error::Dimension {
            expected: profile.phases.dim(),
            got: weights.dim(),
        });
    }
    let max_w = weights.iter().map(|w| w.norm()).fold(0.0, f64::max);
    if max_w == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let sum: Complex64 = weights
        .iter()
        .zip(profile.phases.iter())
        .map(|(w, &p)| w * Complex64::from_polar(1.0, -p))
        .sum();
    Ok(gain_db(sum, weights.len(), max_w))
}

/// Continuous-phase weights that compensate the profile exactly.
pub fn continuous_weights(profile: &PhaseProfile) -> Array2<Complex64> {
    profile.phases.mapv(|p| Complex64::from_polar(1.0, p))
}

fn codebook_sum(bits: &Array2<bool>, phases: &Array2<f64>, s0: Complex64, s1: Complex64) -> Complex64 {
    bits.iter()
        .zip(phases.iter())
        .map(|(&b, &p)| if b { s1 } else { s0 } * Complex64::from_polar(1.0, -p))
        .sum()
}

/// Gain of a codebook evaluated against an already computed profile.
pub fn codebook_gain_on_profile(
    codebook: &Codebook,
    profile: &PhaseProfile,
    ris: &RisConfiguration,
) -> Result<f64> {
    codebook.check_dims(ris)?;
    if profile.phases.dim() != codebook.dims() {
        return Err(Error::Dimension {
            expected: codebook.dims(),
            got: profile.phases.dim(),
        });
    }
    let f = profile.frequency;
    let sum = codebook_sum(&codebook.bits, &profile.phases, ris.state(false, f), ris.state(true, f));
    Ok(gain_db(sum, ris.cells(), ris.max_state_magnitude(f)))
}

/// Normalized array-factor gain (dB, ≤ 0) of `codebook` seen from `point`.
pub fn array_factor_gain(
    codebook: &Codebook,
    point: &MeasurementPoint,
    ris: &RisConfiguration,
    frequency: f64,
) -> Result<f64> {
    codebook.check_dims(ris)?;
    let profile = ideal_phase_profile(point, ris, frequency)?;
    codebook_gain_on_profile(codebook, &profile, ris)
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedBeam {
    pub codebook: Codebook,
    pub gain_db: f64,
}

/// Exhaustive threshold sweep.
///
/// A cell's decision flips only where the shifted phase crosses one of the two
/// bisectors between the state phases, so the reachable codebooks are exactly
/// those at the midpoints between consecutive flip thresholds. Each step flips
/// the cells of one breakpoint group and updates the running sum in place.
/// Returns the highest-gain codebook; ties keep the earliest threshold
/// (threshold 0 is tried first).
pub fn sweep_threshold(profile: &PhaseProfile, ris: &RisConfiguration) -> QuantizedBeam {
    let f = profile.frequency;
    let (s0, s1) = (ris.state(false, f), ris.state(true, f));
    let (arg0, arg1) = (s0.arg(), s1.arg());
    let bisector = arg0 + wrap_pi(arg1 - arg0) / 2.0;
    let phases: Vec<f64> = profile.phases.iter().copied().collect();

    let mut breaks: Vec<(f64, usize)> = Vec::with_capacity(2 * phases.len());
    for (i, &p) in phases.iter().enumerate() {
        for b in [bisector, bisector + PI] {
            breaks.push(((p - b).rem_euclid(TAU), i));
        }
    }
    breaks.sort_by(|a, b| a.0.total_cmp(&b.0));

    let contribution = |bit: bool, p: f64| if bit { s1 } else { s0 } * Complex64::from_polar(1.0, -p);

    let mut best_t = 0.0;
    let mut best_norm = codebook_sum(
        &profile.phases.mapv(|p| decide(p, 0.0, arg0, arg1)),
        &profile.phases,
        s0,
        s1,
    )
    .norm();

    if !breaks.is_empty() {
        // group breakpoints that coincide to within rounding
        let mut groups: Vec<(f64, Vec<usize>)> = Vec::new();
        for &(t, i) in &breaks {
            match groups.last_mut() {
                Some((gt, cells)) if t - *gt < 1e-12 => cells.push(i),
                _ => groups.push((t, vec![i])),
            }
        }
        let g = groups.len();
        let midpoint = |j: usize| {
            let a = groups[j].0;
            let b = if j + 1 < g { groups[j + 1].0 } else { groups[0].0 + TAU };
            ((a + b) / 2.0).rem_euclid(TAU)
        };

        let t0 = midpoint(0);
        let mut bits: Vec<bool> = phases.iter().map(|&p| decide(p, t0, arg0, arg1)).collect();
        let mut sum: Complex64 = bits
            .iter()
            .zip(&phases)
            .map(|(&b, &p)| contribution(b, p))
            .sum();
        let mut consider = |t: f64, norm: f64| {
            if norm > best_norm * (1.0 + 1e-12) {
                best_norm = norm;
                best_t = t;
            }
        };
        consider(t0, sum.norm());
        for j in 1..g {
            let t = midpoint(j);
            for &i in &groups[j].1 {
                let nb = decide(phases[i], t, arg0, arg1);
                if nb != bits[i] {
                    sum += contribution(nb, phases[i]) - contribution(bits[i], phases[i]);
                    bits[i] = nb;
                }
            }
            consider(t, sum.norm());
        }
    }

    let codebook = quantize_codebook(profile, ris, best_t);
    let sum = codebook_sum(&codebook.bits, &profile.phases, s0, s1);
    QuantizedBeam {
        gain_db: gain_db(sum, ris.cells(), ris.max_state_magnitude(f)),
        codebook,
    }
}

/// Swept-threshold codebook for a point, designed at the panel's center frequency.
pub fn design_codebook(point: &MeasurementPoint, ris: &RisConfiguration) -> Result<QuantizedBeam> {
    let profile = ideal_phase_profile(point, ris, ris.center_frequency)?;
    Ok(sweep_threshold(&profile, ris))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn profile_from(phases: Array2<f64>) -> PhaseProfile {
        PhaseProfile {
            phases,
            target: BeamTarget {
                d1: 1.0,
                theta_t: 0.0,
                d2: 1.0,
                theta_r: 0.0,
            },
            frequency: 2.6e9,
        }
    }

    #[test]
    fn default_panel_is_valid() {
        let ris = RisConfiguration::default();
        ris.validate().unwrap();
        assert_eq!(ris.cells(), 512);
        assert_abs_diff_eq!(ris.aperture(), 1.28, epsilon = 1e-12);
        assert_abs_diff_eq!(ris.state0.arg().to_degrees(), 55.0, epsilon = 1e-9);
        assert_abs_diff_eq!(20.0 * ris.state1.norm().log10(), -0.25, epsilon = 1e-12);
    }

    #[test]
    fn rejects_non_antipodal_or_active_states() {
        let mut ris = RisConfiguration::default();
        ris.state1 = lossy_state(0.25, -100.0);
        assert!(ris.validate().is_err());
        let mut ris = RisConfiguration::default();
        ris.state0 = Complex64::new(1.2, 0.0);
        ris.state1 = Complex64::new(-1.0, 0.0);
        assert!(ris.validate().is_err());
    }

    #[test]
    fn single_cell_profile_is_total_path_phase() {
        let ris = RisConfiguration {
            m_rows: 1,
            n_cols: 1,
            ..Default::default()
        };
        let p = MeasurementPoint::at(3.0, 4.5, 30.0, 20.0);
        let prof = ideal_phase_profile(&p, &ris, 2.6e9).unwrap();
        let k = TAU / ris.wavelength(2.6e9);
        assert_abs_diff_eq!(prof.phases[[0, 0]], (k * 7.5).rem_euclid(TAU), epsilon = 1e-9);
    }

    #[test]
    fn symmetric_geometry_gives_column_mirror_symmetry() {
        let ris = RisConfiguration::default();
        let p = MeasurementPoint::at(7.0, 7.0, 40.0, 40.0);
        let prof = ideal_phase_profile(&p, &ris, 2.6e9).unwrap();
        let n = ris.n_cols;
        for m in 0..ris.m_rows {
            for c in 0..n {
                let a = prof.phases[[m, c]];
                let b = prof.phases[[m, n - 1 - c]];
                assert!(circular_distance(a, b) < 1e-6, "row {m} col {c}");
            }
        }
    }

    #[test]
    fn far_field_row_gradient_matches_plane_wave() {
        let ris = RisConfiguration::default();
        let theta_t: f64 = 30.0;
        let size = 1.6;
        let far = 200.0 * size;
        let p = MeasurementPoint::at(far, far, theta_t, 0.0);
        let prof = ideal_phase_profile(&p, &ris, 2.6e9).unwrap();
        let k = TAU / ris.wavelength(2.6e9);
        let expected = k * theta_t.to_radians().sin() * ris.dx;
        let row = prof.phases.row(ris.m_rows / 2);
        let steps: Vec<f64> = row.windows(2).into_iter().map(|w| wrap_pi(w[1] - w[0])).collect();
        let mean = steps.iter().sum::<f64>() / steps.len() as f64;
        assert!(((mean - expected) / expected).abs() < 0.01, "{mean} vs {expected}");
    }

    #[test]
    fn uniform_profile_at_state1_phase_selects_state1() {
        let ris = RisConfiguration::default();
        let prof = profile_from(Array2::from_elem((32, 16), ris.state1.arg().rem_euclid(TAU)));
        let cb = quantize_codebook(&prof, &ris, 0.0);
        assert!(cb.bits.iter().all(|&b| b));
        let prof0 = profile_from(Array2::from_elem((32, 16), ris.state0.arg()));
        assert!(quantize_codebook(&prof0, &ris, 0.0).bits.iter().all(|&b| !b));
    }

    #[test]
    fn half_turn_complements_every_bit() {
        let ris = RisConfiguration::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let phases = Array2::from_shape_fn((32, 16), |_| rng.random_range(0.0..TAU));
        let a = quantize_codebook(&profile_from(phases.clone()), &ris, 0.3);
        let b = quantize_codebook(&profile_from(phases.mapv(|p| (p + PI).rem_euclid(TAU))), &ris, 0.3);
        // boundary cells are measure-zero for random phases
        assert_eq!(a.complement().bits, b.bits);
    }

    #[test]
    fn tie_goes_to_state0() {
        let ris = RisConfiguration::ideal(1, 1);
        // equidistant from 0 and π
        let prof = profile_from(Array2::from_elem((1, 1), PI / 2.0));
        assert!(!quantize_codebook(&prof, &ris, 0.0).bits[[0, 0]]);
    }

    #[test]
    fn quantization_is_idempotent() {
        let ris = RisConfiguration::default();
        let p = MeasurementPoint::at(9.0, 11.0, 60.0, 30.0);
        let prof = ideal_phase_profile(&p, &ris, 2.6e9).unwrap();
        assert_eq!(quantize_codebook(&prof, &ris, 1.1), quantize_codebook(&prof, &ris, 1.1));
    }

    #[test]
    fn continuous_weights_are_fully_coherent() {
        let ris = RisConfiguration::default();
        let p = MeasurementPoint::at(9.0, 11.0, 60.0, 30.0);
        let prof = ideal_phase_profile(&p, &ris, 2.6e9).unwrap();
        let g = weighted_gain_db(&continuous_weights(&prof), &prof).unwrap();
        assert_abs_diff_eq!(g, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn uniform_codebook_near_specular_far_field_is_coherent() {
        let ris = RisConfiguration::default();
        let p = MeasurementPoint::at(2000.0, 2000.0, 45.0, 45.0);
        let cb = Codebook::uniform(&ris, false, BeamTarget::from(&p));
        let g = array_factor_gain(&cb, &p, &ris, 2.6e9).unwrap();
        // coherent maximum for an all-"0" panel is |s0|/max|s|
        let coherent = 20.0 * (ris.state0.norm() / ris.state1.norm()).log10();
        assert!(g <= coherent + 1e-9);
        assert!(g > coherent - 0.5, "{g}");
    }

    #[test]
    fn mismatched_codebook_is_rejected() {
        let ris = RisConfiguration::default();
        let p = MeasurementPoint::at(5.0, 5.0, 45.0, 45.0);
        let cb = Codebook::uniform(&RisConfiguration::ideal(4, 4), false, BeamTarget::from(&p));
        assert!(matches!(
            array_factor_gain(&cb, &p, &ris, 2.6e9),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn complement_invariance_for_antipodal_equal_states() {
        let ris = RisConfiguration::ideal(32, 16);
        for (d1, d2, tt, tr) in [(9.0, 8.0, 60.0, 30.0), (5.0, 17.0, 45.0, 45.0), (12.0, 3.0, 75.0, 60.0)] {
            let p = MeasurementPoint::at(d1, d2, tt, tr);
            let beam = design_codebook(&p, &ris).unwrap();
            let a = array_factor_gain(&beam.codebook, &p, &ris, 2.6e9).unwrap();
            let b = array_factor_gain(&beam.codebook.complement(), &p, &ris, 2.6e9).unwrap();
            assert_abs_diff_eq!(a, b, epsilon = 1e-9);
        }
    }

    #[test]
    fn complement_changes_device_gain_by_at_most_the_state_imbalance() {
        let ris = RisConfiguration::default();
        let imbalance = 20.0 * (ris.state1.norm() / ris.state0.norm()).log10();
        let p = MeasurementPoint::at(9.0, 8.0, 60.0, 30.0);
        let beam = design_codebook(&p, &ris).unwrap();
        let a = array_factor_gain(&beam.codebook, &p, &ris, 2.6e9).unwrap();
        let b = array_factor_gain(&beam.codebook.complement(), &p, &ris, 2.6e9).unwrap();
        assert!((a - b).abs() <= imbalance + 1e-9);
    }

    #[test]
    fn sweep_never_loses_to_nearest_phase_or_uniform() {
        let ris = RisConfiguration::default();
        for (d1, d2, tt, tr) in [(9.0, 8.0, 60.0, 30.0), (6.0, 15.0, 45.0, 45.0), (18.0, 18.0, 45.0, 45.0)] {
            let p = MeasurementPoint::at(d1, d2, tt, tr);
            let prof = ideal_phase_profile(&p, &ris, 2.6e9).unwrap();
            let beam = sweep_threshold(&prof, &ris);
            let nearest = codebook_gain_on_profile(&quantize_codebook(&prof, &ris, 0.0), &prof, &ris).unwrap();
            let uniform = codebook_gain_on_profile(&Codebook::uniform(&ris, false, prof.target), &prof, &ris).unwrap();
            assert!(beam.gain_db >= nearest - 1e-9);
            assert!(beam.gain_db >= uniform - 1e-9);
            assert!(beam.gain_db <= 1e-12);
        }
    }

    #[test]
    fn sweep_matches_dense_threshold_grid() {
        let ris = RisConfiguration::default();
        let p = MeasurementPoint::at(10.0, 9.0, 75.0, 45.0);
        let prof = ideal_phase_profile(&p, &ris, 2.6e9).unwrap();
        let beam = sweep_threshold(&prof, &ris);
        let dense = (0..20_000)
            .map(|i| {
                let t = TAU * i as f64 / 20_000.0;
                codebook_gain_on_profile(&quantize_codebook(&prof, &ris, t), &prof, &ris).unwrap()
            })
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(beam.gain_db >= dense - 1e-9);
        assert!(beam.gain_db - dense < 1e-6, "{} vs {}", beam.gain_db, dense);
    }

    #[test]
    fn response_table_interpolates() {
        let mut ris = RisConfiguration::default();
        ris.response_table = Some(ResponseTable {
            frequencies: vec![2.5e9, 2.7e9],
            state0: vec![lossy_state(1.0, 50.0), lossy_state(0.5, 60.0)],
            state1: vec![lossy_state(0.3, -130.0), lossy_state(0.2, -120.0)],
        });
        ris.validate().unwrap();
        let mid = ris.state(false, 2.6e9);
        let ends = (ris.state(false, 2.5e9) + ris.state(false, 2.7e9)) / 2.0;
        assert_abs_diff_eq!(mid.re, ends.re, epsilon = 1e-12);
        assert_eq!(ris.state(true, 1e9), lossy_state(0.3, -130.0));
    }
}
