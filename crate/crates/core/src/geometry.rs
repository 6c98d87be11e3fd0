//! Measurement-campaign geometry.
//!
//! A campaign is a set of cases, each one a fixed pair of elevation angles
//! plus a layout describing where Tx and Rx stand. Outdoor and indoor cases
//! are Cartesian Tx × Rx walks along two trajectory lines meeting at the RIS;
//! the O2I cases keep Tx fixed and walk Rx down one of two classroom aisles.
//!
//! Angles are in degrees at every public boundary. Positions are expressed
//! in the RIS frame: panel in the x–y plane, boresight along +z, Tx on the
//! φ = 180° side of the incidence plane and Rx on the φ = 0° side.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

/// Azimuth of arrival, fixed by the campaign layout (Tx, Rx and RIS center
/// share one height).
pub const AAOA_T_DEG: f64 = 180.0;
/// Azimuth of departure, fixed by the campaign layout.
pub const AAOD_R_DEG: f64 = 0.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Outdoor,
    Indoor,
    O2i,
}

impl Scenario {
    pub const ALL: [Scenario; 3] = [Scenario::Outdoor, Scenario::Indoor, Scenario::O2i];

    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::Outdoor => "outdoor",
            Scenario::Indoor => "indoor",
            Scenario::O2i => "o2i",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "outdoor" => Ok(Scenario::Outdoor),
            "indoor" => Ok(Scenario::Indoor),
            "o2i" => Ok(Scenario::O2i),
            other => Err(Error::InvalidInput(format!("unknown scenario `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PropagationMode {
    WithoutRis,
    SpecularRis,
    IntelligentRis,
}

impl PropagationMode {
    pub const ALL: [PropagationMode; 3] = [
        PropagationMode::WithoutRis,
        PropagationMode::SpecularRis,
        PropagationMode::IntelligentRis,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PropagationMode::WithoutRis => "without-ris",
            PropagationMode::SpecularRis => "specular-ris",
            PropagationMode::IntelligentRis => "intelligent-ris",
        }
    }
}

impl fmt::Display for PropagationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for PropagationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "without-ris" | "without" => Ok(PropagationMode::WithoutRis),
            "specular-ris" | "specular" => Ok(PropagationMode::SpecularRis),
            "intelligent-ris" | "intelligent" => Ok(PropagationMode::IntelligentRis),
            other => Err(Error::InvalidInput(format!("unknown propagation mode `{other}`"))),
        }
    }
}

/// Cosines at or below this count as grazing; cos(90°) is 6e-17 in f64.
pub const COS_FLOOR: f64 = 1e-12;

/// One Tx/RIS/Rx geometry sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementPoint {
    pub point_id: String,
    pub scenario: Scenario,
    pub mode: PropagationMode,
    /// Tx to RIS-center distance, meters.
    pub d1: f64,
    /// Rx to RIS-center distance, meters.
    pub d2: f64,
    /// Elevation angle of arrival θt, degrees.
    pub eaoa_t: f64,
    /// Azimuth angle of arrival φt, degrees.
    pub aaoa_t: f64,
    /// Elevation angle of departure θr, degrees.
    pub eaod_r: f64,
    /// Azimuth angle of departure φr, degrees.
    pub aaod_r: f64,
}

impl MeasurementPoint {
    pub fn new(
        point_id: impl Into<String>,
        scenario: Scenario,
        mode: PropagationMode,
        d1: f64,
        d2: f64,
        eaoa_t: f64,
        eaod_r: f64,
    ) -> Self {
        MeasurementPoint {
            point_id: point_id.into(),
            scenario,
            mode,
            d1,
            d2,
            eaoa_t,
            aaoa_t: AAOA_T_DEG,
            eaod_r,
            aaod_r: AAOD_R_DEG,
        }
    }

    /// Bare geometry sample with placeholder labels, handy for model evaluation.
    pub fn at(d1: f64, d2: f64, eaoa_t: f64, eaod_r: f64) -> Self {
        Self::new(
            "adhoc",
            Scenario::Outdoor,
            PropagationMode::IntelligentRis,
            d1,
            d2,
            eaoa_t,
            eaod_r,
        )
    }

    /// Checks the point invariants, naming the first one that fails.
    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, name: &'static str| {
            if ok {
                Ok(())
            } else {
                Err(Error::Invariant {
                    name,
                    detail: format!("point `{}`", self.point_id),
                })
            }
        };
        check(self.d1.is_finite() && self.d1 > 0.0, "d1 > 0")?;
        check(self.d2.is_finite() && self.d2 > 0.0, "d2 > 0")?;
        check(
            self.eaoa_t.is_finite() && self.eaoa_t.to_radians().cos() > COS_FLOOR,
            "cos(eaoa_t) > 0",
        )?;
        check(
            self.eaod_r.is_finite() && self.eaod_r.to_radians().cos() > COS_FLOOR,
            "cos(eaod_r) > 0",
        )?;
        check(
            self.aaoa_t.is_finite() && self.aaod_r.is_finite(),
            "finite azimuths",
        )
    }

    /// Tx position in the RIS frame, meters.
    pub fn tx_position(&self) -> [f64; 3] {
        spherical(self.d1, self.eaoa_t, self.aaoa_t)
    }

    /// Rx position in the RIS frame, meters.
    pub fn rx_position(&self) -> [f64; 3] {
        spherical(self.d2, self.eaod_r, self.aaod_r)
    }

    /// Straight-line Tx–Rx distance, the `d` of the single-variable models.
    pub fn tx_rx_distance(&self) -> f64 {
        let t = self.tx_position();
        let r = self.rx_position();
        ((t[0] - r[0]).powi(2) + (t[1] - r[1]).powi(2) + (t[2] - r[2]).powi(2)).sqrt()
    }
}

fn spherical(r: f64, theta_deg: f64, phi_deg: f64) -> [f64; 3] {
    let (st, ct) = theta_deg.to_radians().sin_cos();
    let (sp, cp) = phi_deg.to_radians().sin_cos();
    [r * st * cp, r * st * sp, r * ct]
}

/// Inclusive start..=stop walk at a fixed step, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceRange {
    pub start: f64,
    pub stop: f64,
    #[serde(default = "default_step")]
    pub step: f64,
}

fn default_step() -> f64 {
    1.0
}

impl DistanceRange {
    pub fn new(start: f64, stop: f64) -> Self {
        DistanceRange {
            start,
            stop,
            step: 1.0,
        }
    }

    pub fn len(&self) -> usize {
        if !(self.step > 0.0) || self.stop < self.start {
            return 0;
        }
        // 1e-9 absorbs decimal representation error in e.g. 2.26..10.26
        ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn positions(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |i| self.start + i as f64 * self.step)
    }
}

/// How Tx and Rx move within one angle case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CaseLayout {
    /// Every Tx position paired with every Rx position.
    Grid { tx: DistanceRange, rx: DistanceRange },
    /// Tx fixed at `d1`; Rx walks away from the RIS along a line through it.
    FixedTxRadial { d1: f64, rx: DistanceRange },
    /// Tx fixed at `d1`; Rx walks an aisle crossing the Tx–RIS line `along`
    /// meters from the RIS, moving away from that line. The departure angle
    /// follows from the geometry at every step.
    FixedTxAisle {
        d1: f64,
        rx: DistanceRange,
        along: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleCase {
    pub label: String,
    /// θt, degrees.
    pub theta_t: f64,
    /// θr, degrees. Ignored by [`CaseLayout::FixedTxAisle`].
    #[serde(default)]
    pub theta_r: f64,
    pub layout: CaseLayout,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignSpec {
    pub scenario: Scenario,
    pub mode: PropagationMode,
    pub cases: Vec<AngleCase>,
}

impl CampaignSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |detail: String| Error::Invariant {
            name: "campaign spec",
            detail,
        };
        if self.cases.is_empty() {
            return Err(bad(format!("{}/{}: no angle cases", self.scenario, self.mode)));
        }
        for case in &self.cases {
            let ranges: Vec<&DistanceRange> = match &case.layout {
                CaseLayout::Grid { tx, rx } => vec![tx, rx],
                CaseLayout::FixedTxRadial { d1, rx } | CaseLayout::FixedTxAisle { d1, rx, .. } => {
                    if !(*d1 > 0.0) {
                        return Err(bad(format!("case {}: fixed d1 must be positive", case.label)));
                    }
                    vec![rx]
                }
            };
            for r in ranges {
                if !(r.step > 0.0) {
                    return Err(bad(format!("case {}: step must be positive", case.label)));
                }
                if r.start > r.stop {
                    return Err(bad(format!("case {}: range start exceeds stop", case.label)));
                }
                if !(r.start > 0.0) {
                    return Err(bad(format!("case {}: distances must be positive", case.label)));
                }
            }
            if let CaseLayout::FixedTxAisle { along, .. } = case.layout {
                if !(along > 0.0) {
                    return Err(bad(format!("case {}: aisle offset must be positive", case.label)));
                }
            }
        }
        Ok(())
    }

    /// Number of points the spec generates, without building them.
    pub fn point_count(&self) -> usize {
        self.cases
            .iter()
            .map(|c| match &c.layout {
                CaseLayout::Grid { tx, rx } => tx.len() * rx.len(),
                CaseLayout::FixedTxRadial { rx, .. } | CaseLayout::FixedTxAisle { rx, .. } => {
                    rx.len()
                }
            })
            .sum()
    }
}

/// EAoD at the `i`th (1-based) right-aisle position for a 1 m step.
///
/// `rx_t` is the first perpendicular offset from the Tx–RIS line and `perp`
/// the distance from the RIS along that line to the aisle.
pub fn right_aisle_eaod(i: usize, theta_t: f64, rx_t: f64, perp: f64) -> Result<f64> {
    aisle_eaod(i, theta_t, rx_t, 1.0, perp)
}

pub fn aisle_eaod(i: usize, theta_t: f64, rx_t: f64, step: f64, perp: f64) -> Result<f64> {
    if i == 0 {
        return Err(Error::Domain("aisle index is 1-based".into()));
    }
    if !(perp > 0.0) {
        return Err(Error::Domain(format!("aisle offset must be positive, got {perp}")));
    }
    let offset = rx_t + (i - 1) as f64 * step;
    Ok((offset / perp).atan().to_degrees() - (90.0 - theta_t))
}

/// Rx–RIS distance at the `i`th aisle position (geometric inference: the
/// aisle position sits `perp` along the Tx–RIS line and `offset` across it).
pub fn aisle_d2(i: usize, rx_t: f64, step: f64, perp: f64) -> f64 {
    let offset = rx_t + (i.saturating_sub(1)) as f64 * step;
    offset.hypot(perp)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignGrid {
    pub points: Vec<MeasurementPoint>,
    /// Set when some case contributed no points.
    pub warnings: Vec<String>,
}

fn point_id(scenario: Scenario, mode: PropagationMode, case: usize, tx: usize, rx: usize) -> String {
    format!("{scenario}-{mode}-c{case}-t{tx:02}-r{rx:02}")
}

pub fn build_campaign_grid(spec: &CampaignSpec) -> CampaignGrid {
    let mut points = Vec::with_capacity(spec.point_count());
    let mut warnings = Vec::new();
    for (ci, case) in spec.cases.iter().enumerate() {
        let case_no = ci + 1;
        let before = points.len();
        let mk = |tx: usize, rx: usize, d1: f64, d2: f64, theta_r: f64| {
            MeasurementPoint::new(
                point_id(spec.scenario, spec.mode, case_no, tx, rx),
                spec.scenario,
                spec.mode,
                d1,
                d2,
                case.theta_t,
                theta_r,
            )
        };
        match &case.layout {
            CaseLayout::Grid { tx, rx } => {
                for (ti, d1) in tx.positions().enumerate() {
                    for (ri, d2) in rx.positions().enumerate() {
                        points.push(mk(ti, ri, d1, d2, case.theta_r));
                    }
                }
            }
            CaseLayout::FixedTxRadial { d1, rx } => {
                for (ri, d2) in rx.positions().enumerate() {
                    points.push(mk(0, ri, *d1, d2, case.theta_r));
                }
            }
            CaseLayout::FixedTxAisle { d1, rx, along } => {
                for ri in 0..rx.len() {
                    let i = ri + 1;
                    // along > 0 is enforced by validate(); unvalidated specs
                    // with a bad offset just yield nothing for this case
                    let Ok(theta_r) = aisle_eaod(i, case.theta_t, rx.start, rx.step, *along) else {
                        break;
                    };
                    let d2 = aisle_d2(i, rx.start, rx.step, *along);
                    points.push(mk(0, ri, *d1, d2, theta_r));
                }
            }
        }
        if points.len() == before {
            warnings.push(format!(
                "{}/{} case {} ({}) produced no points",
                spec.scenario, spec.mode, case_no, case.label
            ));
        }
    }
    CampaignGrid { points, warnings }
}

pub fn total_acquisitions(specs: &[CampaignSpec]) -> usize {
    specs.iter().map(CampaignSpec::point_count).sum()
}

/// The nine campaigns as laid out in the original measurement tables.
pub mod builtin {
    use super::*;

    /// Perpendicular distance from the RIS to the right aisle, meters.
    pub const O2I_AISLE_OFFSET: f64 = 4.5;
    pub const O2I_D1: f64 = 9.0;

    fn grid(label: &str, theta_t: f64, theta_r: f64, tx: (f64, f64), rx: (f64, f64)) -> AngleCase {
        AngleCase {
            label: label.to_string(),
            theta_t,
            theta_r,
            layout: CaseLayout::Grid {
                tx: DistanceRange::new(tx.0, tx.1),
                rx: DistanceRange::new(rx.0, rx.1),
            },
        }
    }

    fn o2i_cases() -> Vec<AngleCase> {
        vec![
            AngleCase {
                label: "left-aisle".into(),
                theta_t: 45.0,
                theta_r: 45.0,
                layout: CaseLayout::FixedTxRadial {
                    d1: O2I_D1,
                    rx: DistanceRange::new(2.26, 10.26),
                },
            },
            AngleCase {
                label: "right-aisle".into(),
                theta_t: 45.0,
                theta_r: 0.0,
                layout: CaseLayout::FixedTxAisle {
                    d1: O2I_D1,
                    rx: DistanceRange::new(2.26, 10.26),
                    along: O2I_AISLE_OFFSET,
                },
            },
        ]
    }

    pub fn campaign(scenario: Scenario, mode: PropagationMode) -> CampaignSpec {
        use PropagationMode::*;
        let cases = match (scenario, mode) {
            (Scenario::Outdoor, WithoutRis) | (Scenario::Outdoor, SpecularRis) => {
                vec![grid("45/45", 45.0, 45.0, (5.0, 18.0), (5.0, 18.0))]
            }
            // Case 2 starts Tx at 5 m while the others start at 9 m; kept as tabulated.
            (Scenario::Outdoor, IntelligentRis) => vec![
                grid("45/30", 45.0, 30.0, (9.0, 18.0), (5.0, 12.0)),
                grid("45/45", 45.0, 45.0, (5.0, 18.0), (5.0, 18.0)),
                grid("45/60", 45.0, 60.0, (9.0, 18.0), (8.0, 15.0)),
                grid("60/30", 60.0, 30.0, (9.0, 18.0), (8.0, 18.0)),
                grid("60/45", 60.0, 45.0, (9.0, 18.0), (8.0, 15.0)),
                grid("60/60", 60.0, 60.0, (9.0, 18.0), (8.0, 15.0)),
                grid("75/30", 75.0, 30.0, (9.0, 18.0), (8.0, 15.0)),
                grid("75/45", 75.0, 45.0, (9.0, 18.0), (8.0, 15.0)),
                grid("75/60", 75.0, 60.0, (9.0, 18.0), (8.0, 15.0)),
            ],
            (Scenario::Indoor, WithoutRis) | (Scenario::Indoor, SpecularRis) => {
                vec![grid("45/45", 45.0, 45.0, (5.0, 18.0), (5.0, 18.0))]
            }
            (Scenario::Indoor, IntelligentRis) => vec![
                grid("45/45", 45.0, 45.0, (5.0, 18.0), (5.0, 18.0)),
                grid("60/30", 60.0, 30.0, (5.0, 18.0), (5.0, 18.0)),
            ],
            (Scenario::O2i, _) => o2i_cases(),
        };
        CampaignSpec {
            scenario,
            mode,
            cases,
        }
    }

    pub fn all() -> Vec<CampaignSpec> {
        Scenario::ALL
            .iter()
            .flat_map(|&s| PropagationMode::ALL.iter().map(move |&m| campaign(s, m)))
            .collect()
    }

    pub fn scenario(scenario: Scenario) -> Vec<CampaignSpec> {
        PropagationMode::ALL
            .iter()
            .map(|&m| campaign(scenario, m))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn right_aisle_angle_set() {
        let expected = [-18.33, -9.08, -1.57, 4.45, 9.29, 13.2, 16.42, 19.08, 21.32];
        for (i, want) in expected.iter().enumerate() {
            let got = right_aisle_eaod(i + 1, 45.0, 2.26, 4.5).unwrap();
            assert_abs_diff_eq!(got, *want, epsilon = 0.01);
        }
    }

    #[test]
    fn right_aisle_rejects_bad_offset() {
        assert!(right_aisle_eaod(1, 45.0, 2.26, 0.0).is_err());
        assert!(right_aisle_eaod(1, 45.0, 2.26, -1.0).is_err());
        assert!(right_aisle_eaod(0, 45.0, 2.26, 4.5).is_err());
    }

    #[test]
    fn right_aisle_monotone_in_index() {
        let mut prev = f64::NEG_INFINITY;
        for i in 1..40 {
            let a = right_aisle_eaod(i, 45.0, 2.26, 4.5).unwrap();
            assert!(a > prev);
            prev = a;
        }
    }

    #[test]
    fn per_case_counts_match_tables() {
        let outdoor = builtin::campaign(Scenario::Outdoor, PropagationMode::IntelligentRis);
        let per_case: Vec<usize> = outdoor
            .cases
            .iter()
            .map(|c| match &c.layout {
                CaseLayout::Grid { tx, rx } => tx.len() * rx.len(),
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(per_case, vec![80, 196, 80, 110, 80, 80, 80, 80, 80]);
        assert_eq!(build_campaign_grid(&outdoor).points.len(), 866);

        let spec = builtin::campaign(Scenario::Outdoor, PropagationMode::SpecularRis);
        assert_eq!(build_campaign_grid(&spec).points.len(), 196);
        let indoor = builtin::campaign(Scenario::Indoor, PropagationMode::IntelligentRis);
        assert_eq!(build_campaign_grid(&indoor).points.len(), 392);
    }

    #[test]
    fn totals() {
        assert_eq!(total_acquisitions(&builtin::all()), 2096);
        assert_eq!(total_acquisitions(&builtin::scenario(Scenario::Outdoor)), 1258);
        assert_eq!(total_acquisitions(&builtin::scenario(Scenario::O2i)), 54);
    }

    #[test]
    fn grid_is_deterministic_and_points_valid() {
        for spec in builtin::all() {
            spec.validate().unwrap();
            let a = build_campaign_grid(&spec);
            let b = build_campaign_grid(&spec);
            assert_eq!(a, b);
            assert!(a.warnings.is_empty());
            assert_eq!(a.points.len(), spec.point_count());
            for p in &a.points {
                p.validate().unwrap();
                assert_eq!(p.aaoa_t, 180.0);
                assert_eq!(p.aaod_r, 0.0);
            }
            let mut ids: Vec<_> = a.points.iter().map(|p| p.point_id.clone()).collect();
            ids.sort();
            ids.dedup();
            assert_eq!(ids.len(), a.points.len());
        }
    }

    #[test]
    fn o2i_right_aisle_geometry() {
        let spec = builtin::campaign(Scenario::O2i, PropagationMode::IntelligentRis);
        let grid = build_campaign_grid(&spec);
        let right: Vec<_> = grid.points.iter().filter(|p| p.point_id.contains("-c2-")).collect();
        assert_eq!(right.len(), 9);
        assert_abs_diff_eq!(right[0].eaod_r, -18.33, epsilon = 0.01);
        assert_abs_diff_eq!(right[0].d2, 2.26f64.hypot(4.5), epsilon = 1e-12);
        assert!(right.iter().all(|p| p.d1 == 9.0));
    }

    #[test]
    fn empty_range_warns() {
        let spec = CampaignSpec {
            scenario: Scenario::Indoor,
            mode: PropagationMode::SpecularRis,
            cases: vec![AngleCase {
                label: "empty".into(),
                theta_t: 45.0,
                theta_r: 45.0,
                layout: CaseLayout::Grid {
                    tx: DistanceRange::new(5.0, 4.0),
                    rx: DistanceRange::new(5.0, 18.0),
                },
            }],
        };
        let grid = build_campaign_grid(&spec);
        assert!(grid.points.is_empty());
        assert_eq!(grid.warnings.len(), 1);
        assert!(spec.validate().is_err());
    }

    #[test]
    fn positions_follow_azimuth_convention() {
        let p = MeasurementPoint::at(2.0, 3.0, 30.0, 60.0);
        let t = p.tx_position();
        let r = p.rx_position();
        assert_abs_diff_eq!(t[0], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(t[2], 3f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(r[0], 3.0 * 60f64.to_radians().sin(), epsilon = 1e-12);
        assert_abs_diff_eq!(r[1], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn validation_names_invariant() {
        let p = MeasurementPoint::at(1.0, 1.0, 90.0, 0.0);
        match p.validate() {
            Err(Error::Invariant { name, .. }) => assert_eq!(name, "cos(eaoa_t) > 0"),
            other => panic!("unexpected {other:?}"),
        }
    }
}
