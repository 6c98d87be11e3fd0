use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use std::collections::HashSet;

use rischan_core::geometry::{
    aisle_d2, aisle_eaod, build_campaign_grid, builtin, right_aisle_eaod, total_acquisitions, MeasurementPoint,
    PropagationMode, Scenario,
};

#[test]
fn builtin_campaigns_total_2096() {
    let specs = builtin::all();
    assert_eq!(total_acquisitions(&specs), 2096);
    let mut ids = HashSet::new();
    for spec in &specs {
        let grid = build_campaign_grid(spec);
        assert!(grid.warnings.is_empty(), "{:?}", grid.warnings);
        assert_eq!(grid.points.len(), spec.point_count());
        for p in grid.points {
            p.validate().unwrap();
            assert!(ids.insert(p.point_id.clone()), "duplicate {}", p.point_id);
        }
    }
    assert_eq!(ids.len(), 2096);
}

#[test]
fn per_mode_counts() {
    let count = |s, m| build_campaign_grid(&builtin::campaign(s, m)).points.len();
    assert_eq!(count(Scenario::Outdoor, PropagationMode::IntelligentRis), 866);
    assert_eq!(count(Scenario::Indoor, PropagationMode::IntelligentRis), 392);
    assert_eq!(count(Scenario::O2i, PropagationMode::SpecularRis), 18);
}

#[test]
fn right_aisle_endpoints() {
    assert_abs_diff_eq!(right_aisle_eaod(1, 45.0, 2.26, 4.5).unwrap(), -18.33, epsilon = 0.01);
    assert_abs_diff_eq!(right_aisle_eaod(3, 45.0, 2.26, 4.5).unwrap(), -1.57, epsilon = 0.01);
    assert_abs_diff_eq!(right_aisle_eaod(9, 45.0, 2.26, 4.5).unwrap(), 21.32, epsilon = 0.01);
}

#[test]
fn invalid_points_are_rejected() {
    assert!(MeasurementPoint::at(-1.0, 2.0, 0.0, 0.0).validate().is_err());
    assert!(MeasurementPoint::at(1.0, 0.0, 0.0, 0.0).validate().is_err());
    assert!(MeasurementPoint::at(1.0, 2.0, 90.0, 0.0).validate().is_err());
    assert!(MeasurementPoint::at(1.0, 2.0, 0.0, -90.0).validate().is_err());
}

#[test]
fn tx_rx_distance_of_mirror_geometry() {
    let p = MeasurementPoint::at(3.0, 3.0, 45.0, 45.0);
    assert_abs_diff_eq!(p.tx_rx_distance(), 6.0 * 45f64.to_radians().sin(), epsilon = 1e-12);
}

proptest! {
    #[test]
    fn aisle_angles_increase_along_the_aisle(
        theta in 10.0f64..70.0, rx_t in 0.5f64..5.0, step in 0.3f64..2.0, perp in 1.0f64..8.0,
    ) {
        let mut prev = f64::NEG_INFINITY;
        for i in 1..10 {
            let a = aisle_eaod(i, theta, rx_t, step, perp).unwrap();
            prop_assert!(a > prev);
            prop_assert!(a.abs() < 90.0);
            prev = a;
        }
        prop_assert!(aisle_d2(2, rx_t, step, perp) > aisle_d2(1, rx_t, step, perp));
    }
}
