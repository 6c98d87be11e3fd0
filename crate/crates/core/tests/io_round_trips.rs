use num_complex::Complex64;
use proptest::prelude::*;

use rischan_core::campaign_io::{
    aggregate_rms_ds, campaign_from_toml, campaign_to_toml, embed_reference_tables, load_calibration,
    load_dataset, load_fit, load_processed, load_table, save_calibration, save_dataset, save_fit, save_processed,
    save_table, synthesis_from_toml, synthesis_to_toml, FitFile, ProcessedFile, ProcessedRecord, SweepRecord,
    SynthesisDocument,
};
use rischan_core::dsp::{process_sweep, CalibrationProfile, DetectionParams};
use rischan_core::fitting::{fit_model, FitBounds, FitOptions};
use rischan_core::geometry::{build_campaign_grid, builtin, PropagationMode, Scenario};
use rischan_core::pl_models::{ModelFamily, VariableMask};
use rischan_core::ris_array::RisConfiguration;
use rischan_core::synthesis::{synth_sweep, SynthesisConfig, HORN_GAIN_DBI};
use rischan_core::Error;

fn records(scenario: Scenario, mode: PropagationMode, take: usize) -> Vec<SweepRecord> {
    let ris = RisConfiguration::default();
    let config = SynthesisConfig { rng_seed: 11, shadow_sigma_db: 1.5, multipath: true, ..Default::default() };
    build_campaign_grid(&builtin::campaign(scenario, mode))
        .points
        .into_iter()
        .take(take)
        .map(|p| {
            let s = synth_sweep(&p, &config, &ris).unwrap();
            SweepRecord::new(p, s)
        })
        .collect()
}

fn processed(recs: &[SweepRecord]) -> ProcessedFile {
    let records: Vec<ProcessedRecord> = recs
        .iter()
        .map(|r| {
            let p = process_sweep(&r.sweep, None, HORN_GAIN_DBI, HORN_GAIN_DBI, DetectionParams::default()).unwrap();
            ProcessedRecord::new(r.point.clone(), p)
        })
        .collect();
    ProcessedFile {
        gamma_p: 60.0,
        gamma_n: 15.0,
        gt_dbi: HORN_GAIN_DBI,
        gr_dbi: HORN_GAIN_DBI,
        aggregates: aggregate_rms_ds(&records),
        records,
    }
}

fn text(buf: &[u8]) -> String {
    String::from_utf8(buf.to_vec()).unwrap()
}

#[test]
fn dataset_round_trip_is_exact() {
    let recs = records(Scenario::O2i, PropagationMode::WithoutRis, 18);
    let mut buf = Vec::new();
    save_dataset(&mut buf, &recs).unwrap();
    assert_eq!(load_dataset(buf.as_slice()).unwrap(), recs);
}

#[test]
fn truncated_dataset_names_the_record() {
    let recs = records(Scenario::O2i, PropagationMode::IntelligentRis, 3);
    let mut buf = Vec::new();
    save_dataset(&mut buf, &recs).unwrap();
    let full = text(&buf);
    let lines: Vec<&str> = full.lines().collect();
    let cut = lines[..lines.len() - 50].join("\n");
    match load_dataset(cut.as_bytes()) {
        Err(Error::Parse(e)) => assert_eq!(e.record, Some(2), "{e}"),
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn dataset_rejects_unknown_version_and_kind() {
    let recs = records(Scenario::O2i, PropagationMode::IntelligentRis, 1);
    let mut buf = Vec::new();
    save_dataset(&mut buf, &recs).unwrap();
    let full = text(&buf);
    let bumped = full.replacen("rischan-sweeps 1", "rischan-sweeps 2", 1);
    let err = load_dataset(bumped.as_bytes()).unwrap_err().to_string();
    assert!(err.contains("version 2"), "{err}");
    let wrong = full.replacen("rischan-sweeps", "rischan-fit", 1);
    assert!(load_dataset(wrong.as_bytes()).is_err());
}

#[test]
fn dataset_rejects_invariant_violations() {
    let recs = records(Scenario::O2i, PropagationMode::IntelligentRis, 1);
    let mut buf = Vec::new();
    save_dataset(&mut buf, &recs).unwrap();
    let full = text(&buf);
    let d1 = format!("d1={:.16e}", recs[0].point.d1);
    assert!(full.contains(&d1));
    let negative = full.replacen(&d1, "d1=-1.0", 1);
    assert!(load_dataset(negative.as_bytes()).is_err());
}

#[test]
fn calibration_round_trip_and_zero_rejection() {
    let g: Vec<Complex64> = (0..191).map(|i| Complex64::from_polar(1.0 + i as f64 * 0.01, i as f64 * 0.1)).collect();
    let cal = CalibrationProfile::new(g, "b2b").unwrap();
    let mut buf = Vec::new();
    save_calibration(&mut buf, &cal).unwrap();
    assert_eq!(load_calibration(buf.as_slice()).unwrap(), cal);

    let zero = text(&buf).replacen(&format!("{:.16e} {:.16e}", cal.system_response[4].re, cal.system_response[4].im), "0 0", 1);
    assert!(load_calibration(zero.as_bytes()).is_err());
}

#[test]
fn processed_round_trip_is_exact() {
    let file = processed(&records(Scenario::Indoor, PropagationMode::WithoutRis, 12));
    let mut buf = Vec::new();
    save_processed(&mut buf, &file).unwrap();
    assert_eq!(load_processed(buf.as_slice()).unwrap(), file);
}

#[test]
fn processed_rejects_bad_version() {
    let file = processed(&records(Scenario::Indoor, PropagationMode::WithoutRis, 2));
    let mut buf = Vec::new();
    save_processed(&mut buf, &file).unwrap();
    let bumped = text(&buf).replacen("rischan-processed 1", "rischan-processed 9", 1);
    assert!(load_processed(bumped.as_bytes()).is_err());
}

#[test]
fn fit_round_trip_is_exact() {
    let file = processed(&records(Scenario::Outdoor, PropagationMode::IntelligentRis, 120));
    let data = file.observations();
    let bounds = FitBounds::fi();
    let result = fit_model(&data, ModelFamily::FiRis, VariableMask::ALL, &bounds, &FitOptions::default()).unwrap();
    let fit = FitFile {
        label: "outdoor-fi".into(),
        scenario: Some(Scenario::Outdoor),
        bounds,
        result,
        point_ids: data.iter().map(|o| o.point.point_id.clone()).collect(),
        observed: data.iter().map(|o| o.pl_db).collect(),
    };
    let mut buf = Vec::new();
    save_fit(&mut buf, &fit).unwrap();
    assert_eq!(load_fit(buf.as_slice()).unwrap(), fit);

    let bumped = text(&buf).replacen("rischan-fit 1", "rischan-fit 0", 1);
    assert!(load_fit(bumped.as_bytes()).is_err());
}

#[test]
fn reference_tables_round_trip() {
    let tables = embed_reference_tables();
    assert_eq!(tables.iter().map(|t| t.rows.len()).sum::<usize>(), 12);
    for t in &tables {
        let mut buf = Vec::new();
        save_table(&mut buf, t).unwrap();
        assert_eq!(&load_table(buf.as_slice()).unwrap(), t);
    }
}

#[test]
fn campaign_toml_round_trip_and_version() {
    for spec in builtin::all() {
        let text = campaign_to_toml(&spec).unwrap();
        assert_eq!(campaign_from_toml(&text).unwrap(), spec);
        let bumped = text.replacen("version = 1", "version = 3", 1);
        assert!(campaign_from_toml(&bumped).is_err());
    }
}

#[test]
fn synthesis_toml_round_trip_and_unknown_keys() {
    let mut doc = SynthesisDocument::default();
    doc.synthesis.rng_seed = 99;
    doc.synthesis.shadow_sigma_db = 2.53;
    let text = synthesis_to_toml(&doc).unwrap();
    assert_eq!(synthesis_from_toml(&text).unwrap(), doc);
    assert!(synthesis_from_toml(&format!("{text}\nbogus = 1\n")).is_err());
    assert!(synthesis_from_toml(&text.replacen("version = 1", "version = 2", 1)).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn arbitrary_sweeps_round_trip(
        samples in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 2..64),
        f0 in 1e9f64..3e9,
        span in 1e6f64..5e8,
    ) {
        let recs = records(Scenario::O2i, PropagationMode::SpecularRis, 1);
        let mut rec = recs[0].clone();
        rec.sweep.samples = samples.iter().map(|&(re, im)| Complex64::new(re, im)).collect();
        rec.sweep.f_start = f0;
        rec.sweep.f_stop = f0 + span;
        let mut buf = Vec::new();
        save_dataset(&mut buf, std::slice::from_ref(&rec)).unwrap();
        let back = load_dataset(buf.as_slice()).unwrap();
        prop_assert_eq!(back, vec![rec]);
    }
}

#[test]
fn codebook_round_trip_and_bad_rows() {
    use rischan_core::campaign_io::{load_codebook, save_codebook};
    use rischan_core::geometry::MeasurementPoint;
    use rischan_core::ris_array::design_codebook;

    let ris = RisConfiguration::default();
    let beam = design_codebook(&MeasurementPoint::at(4.0, 6.0, 30.0, -20.0), &ris).unwrap();
    let mut buf = Vec::new();
    save_codebook(&mut buf, &beam.codebook).unwrap();
    let full = text(&buf);
    assert_eq!(full.lines().count(), 2 + 32 + 1);
    assert_eq!(load_codebook(buf.as_slice()).unwrap(), beam.codebook);

    let lines: Vec<&str> = full.lines().collect();
    let mut short = lines.clone();
    short[5] = "0101";
    assert!(load_codebook(short.join("\n").as_bytes()).is_err());
    let mut junk = lines.clone();
    let bad = lines[6].replacen('0', "x", 1).replacen('1', "x", 1);
    junk[6] = &bad;
    assert!(load_codebook(junk.join("\n").as_bytes()).is_err());
    assert!(load_codebook(lines[..20].join("\n").as_bytes()).is_err());
}
