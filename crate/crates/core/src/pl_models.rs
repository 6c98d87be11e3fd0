//! Traditional and RIS-aware floating-intercept (FI) and close-in (CI)
//! path-loss models.

use serde::{Deserialize, Serialize};
use std::fmt::{self, Write as _};

use crate::error::{Error, Result};
use crate::geometry::{MeasurementPoint, Scenario, COS_FLOOR};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelFamily {
    FiTraditional,
    CiTraditional,
    FiRis,
    CiRis,
}

impl ModelFamily {
    pub const ALL: [ModelFamily; 4] = [
        ModelFamily::FiTraditional,
        ModelFamily::CiTraditional,
        ModelFamily::FiRis,
        ModelFamily::CiRis,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelFamily::FiTraditional => "fi-traditional",
            ModelFamily::CiTraditional => "ci-traditional",
            ModelFamily::FiRis => "fi-ris",
            ModelFamily::CiRis => "ci-ris",
        }
    }

    pub fn is_ci(self) -> bool {
        matches!(self, ModelFamily::CiTraditional | ModelFamily::CiRis)
    }

    pub fn is_traditional(self) -> bool {
        matches!(self, ModelFamily::FiTraditional | ModelFamily::CiTraditional)
    }

    /// Names of the five parameter slots, in vector order.
    pub fn param_names(self) -> [&'static str; 5] {
        match self {
            ModelFamily::FiTraditional => ["alpha", "beta", "-", "-", "-"],
            ModelFamily::CiTraditional => ["pl_ref", "n", "-", "-", "-"],
            ModelFamily::FiRis => ["alpha", "beta1", "beta2", "lambda1", "lambda2"],
            ModelFamily::CiRis => ["pl_ref", "n1", "n2", "mu1", "mu2"],
        }
    }
}

impl fmt::Display for ModelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ModelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fi-traditional" => Ok(ModelFamily::FiTraditional),
            "ci-traditional" => Ok(ModelFamily::CiTraditional),
            "fi-ris" | "fi" => Ok(ModelFamily::FiRis),
            "ci-ris" | "ci" => Ok(ModelFamily::CiRis),
            other => Err(Error::InvalidInput(format!("unknown model family `{other}`"))),
        }
    }
}

/// Which geometric variables a model uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VariableMask {
    pub d1: bool,
    pub d2: bool,
    pub theta_t: bool,
    pub theta_r: bool,
}

impl VariableMask {
    pub const ALL: VariableMask = VariableMask { d1: true, d2: true, theta_t: true, theta_r: true };
    pub const DISTANCES: VariableMask = VariableMask { d1: true, d2: true, theta_t: false, theta_r: false };
    pub const D2_ONLY: VariableMask = VariableMask { d1: false, d2: true, theta_t: false, theta_r: false };

    /// Reduced model used for each scenario's fits.
    pub fn for_scenario(scenario: Scenario) -> Self {
        match scenario {
            Scenario::Outdoor => Self::ALL,
            Scenario::Indoor => Self::DISTANCES,
            Scenario::O2i => Self::D2_ONLY,
        }
    }

    /// Flags for the four exponent slots (β1, β2, λ1, λ2).
    pub fn flags(self) -> [bool; 4] {
        [self.d1, self.d2, self.theta_t, self.theta_r]
    }

    pub fn count(self) -> usize {
        self.flags().iter().filter(|&&b| b).count()
    }
}

impl Default for VariableMask {
    fn default() -> Self {
        Self::ALL
    }
}

impl fmt::Display for VariableMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = ["d1", "d2", "theta_t", "theta_r"];
        let on: Vec<&str> = names.iter().zip(self.flags()).filter(|(_, b)| *b).map(|(n, _)| *n).collect();
        if on.is_empty() {
            f.write_str("none")
        } else {
            f.write_str(&on.join(","))
        }
    }
}

impl std::str::FromStr for VariableMask {
    type Err = Error;

    /// Accepts `all`, `none`, a scenario name, or a comma list of
    /// `d1,d2,theta_t,theta_r` (also `tt`, `tr`).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "all" => return Ok(Self::ALL),
            "none" => return Ok(VariableMask { d1: false, d2: false, theta_t: false, theta_r: false }),
            "distances" => return Ok(Self::DISTANCES),
            _ => {}
        }
        if let Ok(sc) = s.parse::<Scenario>() {
            return Ok(Self::for_scenario(sc));
        }
        let mut m = VariableMask { d1: false, d2: false, theta_t: false, theta_r: false };
        for tok in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            match tok {
                "d1" => m.d1 = true,
                "d2" => m.d2 = true,
                "theta_t" | "tt" => m.theta_t = true,
                "theta_r" | "tr" => m.theta_r = true,
                other => return Err(Error::InvalidInput(format!("unknown mask variable `{other}`"))),
            }
        }
        Ok(m)
    }
}

/// Reference geometry (d0¹, d0², θ0ᵗ, θ0ʳ); metres and degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferencePoint {
    pub d1: f64,
    pub d2: f64,
    pub theta_t: f64,
    pub theta_r: f64,
}

impl Default for ReferencePoint {
    fn default() -> Self {
        ReferencePoint { d1: 1.0, d2: 1.0, theta_t: 0.0, theta_r: 0.0 }
    }
}

/// Free-space reference intercept of the CI fit for each scenario, dB.
pub fn ci_reference_db(scenario: Scenario) -> f64 {
    match scenario {
        Scenario::Outdoor => 21.38,
        Scenario::Indoor => 26.97,
        Scenario::O2i => 46.06,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub family: ModelFamily,
    /// α for FI families, the frozen reference PL for CI families.
    pub alpha_or_ref: f64,
    /// (β1, β2) or (n1, n2).
    pub exps_distance: (f64, f64),
    /// (λ1, λ2) or (μ1, μ2).
    pub exps_angle: (f64, f64),
    pub variable_mask: VariableMask,
    pub reference: ReferencePoint,
}

impl ModelParams {
    pub fn new(family: ModelFamily, alpha_or_ref: f64, exps_distance: (f64, f64), exps_angle: (f64, f64)) -> Self {
        let mask = if family.is_traditional() {
            VariableMask { d1: true, d2: false, theta_t: false, theta_r: false }
        } else {
            VariableMask::ALL
        };
        ModelParams {
            family,
            alpha_or_ref,
            exps_distance,
            exps_angle,
            variable_mask: mask,
            reference: ReferencePoint::default(),
        }
        .masked()
    }

    pub fn fi(alpha: f64, beta1: f64, beta2: f64, lambda1: f64, lambda2: f64) -> Self {
        Self::new(ModelFamily::FiRis, alpha, (beta1, beta2), (lambda1, lambda2))
    }

    pub fn ci(pl_ref: f64, n1: f64, n2: f64, mu1: f64, mu2: f64) -> Self {
        Self::new(ModelFamily::CiRis, pl_ref, (n1, n2), (mu1, mu2))
    }

    pub fn fi_traditional(alpha: f64, beta: f64) -> Self {
        Self::new(ModelFamily::FiTraditional, alpha, (beta, 0.0), (0.0, 0.0))
    }

    /// `pl_d0` is the free-space loss at the close-in distance `d0`.
    pub fn ci_traditional(pl_d0: f64, n: f64, d0: f64) -> Self {
        let mut p = Self::new(ModelFamily::CiTraditional, pl_d0, (n, 0.0), (0.0, 0.0));
        p.reference.d1 = d0;
        p
    }

    pub fn with_mask(mut self, mask: VariableMask) -> Self {
        self.variable_mask = mask;
        self.masked()
    }

    /// Zeroes the exponents of masked-out variables.
    pub fn masked(mut self) -> Self {
        let [d1, d2, tt, tr] = self.variable_mask.flags();
        if !d1 {
            self.exps_distance.0 = 0.0;
        }
        if !d2 {
            self.exps_distance.1 = 0.0;
        }
        if !tt {
            self.exps_angle.0 = 0.0;
        }
        if !tr {
            self.exps_angle.1 = 0.0;
        }
        self
    }

    /// [α or PL_ref, β1, β2, λ1, λ2].
    pub fn vector(&self) -> [f64; 5] {
        [
            self.alpha_or_ref,
            self.exps_distance.0,
            self.exps_distance.1,
            self.exps_angle.0,
            self.exps_angle.1,
        ]
    }

    pub fn with_vector(mut self, v: [f64; 5]) -> Self {
        self.alpha_or_ref = v[0];
        self.exps_distance = (v[1], v[2]);
        self.exps_angle = (v[3], v[4]);
        self.masked()
    }

    pub fn validate(&self) -> Result<()> {
        let [d1, d2, tt, tr] = self.variable_mask.flags();
        let v = self.vector();
        for (i, on) in [d1, d2, tt, tr].into_iter().enumerate() {
            if !on && v[i + 1] != 0.0 {
                return Err(Error::Invariant {
                    name: "masked exponents are zero",
                    detail: format!("{} = {}", self.family.param_names()[i + 1], v[i + 1]),
                });
            }
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Invariant { name: "finite parameters", detail: format!("{v:?}") });
        }
        Ok(())
    }

    /// Mean path loss at `point`, dB.
    pub fn eval(&self, point: &MeasurementPoint) -> Result<f64> {
        match self.family {
            ModelFamily::FiTraditional => eval_fi_traditional(self, point.tx_rx_distance()),
            ModelFamily::CiTraditional => eval_ci_traditional(self, point.tx_rx_distance()),
            ModelFamily::FiRis => eval_fi_ris(self, point),
            ModelFamily::CiRis => eval_ci_ris(self, point),
        }
    }

    /// Flat `key = value` block, one parameter per line, masked slots omitted.
    pub fn to_text_block(&self) -> String {
        let mut out = String::new();
        let names = self.family.param_names();
        let v = self.vector();
        let active = [true, self.variable_mask.d1, self.variable_mask.d2, self.variable_mask.theta_t, self.variable_mask.theta_r];
        let _ = writeln!(out, "family = {}", self.family);
        let _ = writeln!(out, "mask = {}", self.variable_mask);
        for i in 0..5 {
            if active[i] && names[i] != "-" {
                let _ = writeln!(out, "{} = {:.16e}", names[i], v[i]);
            }
        }
        let r = self.reference;
        let _ = writeln!(out, "reference = {:.16e} {:.16e} {:.16e} {:.16e}", r.d1, r.d2, r.theta_t, r.theta_r);
        out
    }
}

fn positive(d: f64, name: &str) -> Result<f64> {
    if d > 0.0 && d.is_finite() {
        Ok(d)
    } else {
        Err(Error::Domain(format!("{name} must be positive, got {d}")))
    }
}

fn cos_deg(theta: f64, name: &str) -> Result<f64> {
    let c = theta.to_radians().cos();
    if c > COS_FLOOR {
        Ok(c)
    } else {
        Err(Error::Domain(format!("cos({name}) must be positive, {name} = {theta}°")))
    }
}

/// α + 10β·log10(d).
pub fn eval_fi_traditional(params: &ModelParams, d: f64) -> Result<f64> {
    let d = positive(d, "d")?;
    Ok(params.alpha_or_ref + 10.0 * params.exps_distance.0 * d.log10())
}

/// PL_FS(d0) + 10n·log10(d/d0).
pub fn eval_ci_traditional(params: &ModelParams, d: f64) -> Result<f64> {
    let d = positive(d, "d")?;
    let d0 = positive(params.reference.d1, "d0")?;
    Ok(params.alpha_or_ref + 10.0 * params.exps_distance.0 * (d / d0).log10())
}

fn ris_terms(params: &ModelParams, point: &MeasurementPoint, reference: ReferencePoint) -> Result<f64> {
    let m = params.variable_mask;
    let (b1, b2) = params.exps_distance;
    let (l1, l2) = params.exps_angle;
    let mut pl = params.alpha_or_ref;
    if m.d1 {
        pl += 10.0 * b1 * (positive(point.d1, "d1")? / positive(reference.d1, "d0_1")?).log10();
    }
    if m.d2 {
        pl += 10.0 * b2 * (positive(point.d2, "d2")? / positive(reference.d2, "d0_2")?).log10();
    }
    if m.theta_t {
        pl -= 10.0 * l1 * (cos_deg(point.eaoa_t, "theta_t")? / cos_deg(reference.theta_t, "theta0_t")?).log10();
    }
    if m.theta_r {
        pl -= 10.0 * l2 * (cos_deg(point.eaod_r, "theta_r")? / cos_deg(reference.theta_r, "theta0_r")?).log10();
    }
    Ok(pl)
}

/// α + 10β1·log10 d1 + 10β2·log10 d2 − 10λ1·log10 cos θt − 10λ2·log10 cos θr.
pub fn eval_fi_ris(params: &ModelParams, point: &MeasurementPoint) -> Result<f64> {
    ris_terms(params, point, ReferencePoint::default())
}

/// Close-in form anchored at the reference geometry with a fixed intercept.
pub fn eval_ci_ris(params: &ModelParams, point: &MeasurementPoint) -> Result<f64> {
    ris_terms(params, point, params.reference)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn pt(d1: f64, d2: f64, tt: f64, tr: f64) -> MeasurementPoint {
        MeasurementPoint::at(d1, d2, tt, tr)
    }

    #[test]
    fn traditional_examples() {
        let fi = ModelParams::fi_traditional(0.0, 2.0);
        assert_abs_diff_eq!(eval_fi_traditional(&fi, 10.0).unwrap(), 20.0, epsilon = 1e-12);
        let fi = ModelParams::fi_traditional(31.5, 2.7);
        assert_eq!(eval_fi_traditional(&fi, 1.0).unwrap(), 31.5);
        let fi = ModelParams::fi_traditional(5.0, 2.0);
        let gap = eval_fi_traditional(&fi, 100.0).unwrap() - eval_fi_traditional(&fi, 10.0).unwrap();
        assert_abs_diff_eq!(gap, 20.0, epsilon = 1e-12);
        assert!(eval_fi_traditional(&fi, 0.0).is_err());

        let ci = ModelParams::ci_traditional(40.0, 2.0, 2.0);
        assert_eq!(eval_ci_traditional(&ci, 2.0).unwrap(), 40.0);
        assert_abs_diff_eq!(eval_ci_traditional(&ci, 20.0).unwrap(), 60.0, epsilon = 1e-12);
    }

    #[test]
    fn ci_traditional_equals_fi_under_reparameterization() {
        let (pl0, n, d0) = (38.2, 2.4, 3.0);
        let ci = ModelParams::ci_traditional(pl0, n, d0);
        let fi = ModelParams::fi_traditional(pl0 - 10.0 * n * d0.log10(), n);
        for d in [0.5, 1.0, 7.0, 123.0] {
            assert_abs_diff_eq!(
                eval_ci_traditional(&ci, d).unwrap(),
                eval_fi_traditional(&fi, d).unwrap(),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn ris_examples() {
        let fi = ModelParams::fi(20.08, 2.29, 1.88, 1.21, 0.65);
        assert_eq!(eval_fi_ris(&fi, &pt(1.0, 1.0, 0.0, 0.0)).unwrap(), 20.08);
        let base = eval_fi_ris(&fi, &pt(3.0, 4.0, 0.0, 10.0)).unwrap();
        let tilt = eval_fi_ris(&fi, &pt(3.0, 4.0, 60.0, 10.0)).unwrap();
        assert_abs_diff_eq!(tilt - base, 10.0 * 1.21 * 2f64.log10(), epsilon = 1e-12);
        assert!(eval_fi_ris(&fi, &pt(3.0, 4.0, 90.0, 10.0)).is_err());

        let ci = ModelParams::ci(21.38, 2.0, 2.0, 1.0, 1.0);
        assert_eq!(eval_ci_ris(&ci, &pt(1.0, 1.0, 0.0, 0.0)).unwrap(), 21.38);
        assert_abs_diff_eq!(eval_ci_ris(&ci, &pt(9.0, 1.0, 45.0, 45.0)).unwrap(), 43.47, epsilon = 0.01);

        let o2i = ModelParams::ci(46.06, 0.0, 2.0, 0.0, 0.0).with_mask(VariableMask::D2_ONLY);
        assert_eq!(eval_ci_ris(&o2i, &pt(9.0, 1.0, 30.0, 40.0)).unwrap(), 46.06);
    }

    #[test]
    fn masking_zeroes_exponents() {
        let p = ModelParams::fi(20.0, 2.0, 2.0, 1.0, 1.0).with_mask(VariableMask::DISTANCES);
        assert_eq!(p.exps_angle, (0.0, 0.0));
        p.validate().unwrap();
        let mut bad = p;
        bad.exps_angle.0 = 0.3;
        assert!(matches!(bad.validate(), Err(Error::Invariant { name: "masked exponents are zero", .. })));
    }

    #[test]
    fn mask_parsing() {
        assert_eq!("all".parse::<VariableMask>().unwrap(), VariableMask::ALL);
        assert_eq!("d1,d2".parse::<VariableMask>().unwrap(), VariableMask::DISTANCES);
        assert_eq!("o2i".parse::<VariableMask>().unwrap(), VariableMask::D2_ONLY);
        assert_eq!("d1,tt".parse::<VariableMask>().unwrap().to_string(), "d1,theta_t");
        assert!("d3".parse::<VariableMask>().is_err());
        for m in [VariableMask::ALL, VariableMask::DISTANCES, VariableMask::D2_ONLY] {
            assert_eq!(m.to_string().parse::<VariableMask>().unwrap(), m);
        }
    }

    #[test]
    fn text_block_omits_masked_slots() {
        let p = ModelParams::ci(26.97, 2.04, 2.04, 0.0, 0.0).with_mask(VariableMask::DISTANCES);
        let t = p.to_text_block();
        assert!(t.contains("family = ci-ris"));
        assert!(t.contains("n1 = "));
        assert!(!t.contains("mu1"));
    }
}
