use num_complex::Complex64;
use std::io::{BufRead, Write};

use super::{fmt_f64, key_values, lookup, parse_f64, parse_usize, Lines, ParseError};
use crate::dsp::CalibrationProfile;
use crate::error::{Error, Result};
use crate::geometry::{MeasurementPoint, PropagationMode, Scenario};
use crate::synthesis::FrequencySweep;

/// One acquisition: its geometry and its raw sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub point: MeasurementPoint,
    pub sweep: FrequencySweep,
}

impl SweepRecord {
    pub fn new(point: MeasurementPoint, sweep: FrequencySweep) -> Self {
        SweepRecord { point, sweep }
    }
}

fn check_token(s: &str, what: &str) -> Result<()> {
    if s.is_empty() || s.chars().any(char::is_whitespace) {
        return Err(Error::InvalidInput(format!("{what} `{s}` must be a non-empty token without whitespace")));
    }
    Ok(())
}

/// `point_id=... scenario=... mode=... d1=... ...` fields of a record header.
pub(super) fn point_fields(p: &MeasurementPoint) -> Result<String> {
    check_token(&p.point_id, "point_id")?;
    Ok(format!(
        "point_id={} scenario={} mode={} d1={} d2={} eaoa_t={} aaoa_t={} eaod_r={} aaod_r={}",
        p.point_id,
        p.scenario,
        p.mode,
        fmt_f64(p.d1),
        fmt_f64(p.d2),
        fmt_f64(p.eaoa_t),
        fmt_f64(p.aaoa_t),
        fmt_f64(p.eaod_r),
        fmt_f64(p.aaod_r),
    ))
}

/// Inverse of [`point_fields`]; validates the point.
pub(super) fn parse_point(kv: &[(&str, &str)], lineno: usize) -> std::result::Result<MeasurementPoint, ParseError> {
    let get = |k: &str| lookup(kv, k, lineno);
    let num = |k: &str| parse_f64(get(k)?, lineno, k);
    let scenario: Scenario = get("scenario")?
        .parse()
        .map_err(|e: Error| ParseError::new(lineno, e.to_string()))?;
    let mode: PropagationMode = get("mode")?
        .parse()
        .map_err(|e: Error| ParseError::new(lineno, e.to_string()))?;
    let point = MeasurementPoint {
        point_id: get("point_id")?.to_string(),
        scenario,
        mode,
        d1: num("d1")?,
        d2: num("d2")?,
        eaoa_t: num("eaoa_t")?,
        aaoa_t: num("aaoa_t")?,
        eaod_r: num("eaod_r")?,
        aaod_r: num("aaod_r")?,
    };
    point.validate().map_err(|e| ParseError::new(lineno, e.to_string()))?;
    Ok(point)
}

pub fn save_dataset<W: Write>(mut w: W, records: &[SweepRecord]) -> Result<()> {
    writeln!(w, "rischan-sweeps {}", super::FORMAT_VERSION)?;
    writeln!(w, "records={}", records.len())?;
    for (i, r) in records.iter().enumerate() {
        let p = &r.point;
        r.sweep.validate()?;
        writeln!(
            w,
            "record index={i} {} k={} f_start={} f_stop={}",
            point_fields(p)?,
            r.sweep.k(),
            fmt_f64(r.sweep.f_start),
            fmt_f64(r.sweep.f_stop),
        )?;
        for s in &r.sweep.samples {
            writeln!(w, "{} {}", fmt_f64(s.re), fmt_f64(s.im))?;
        }
    }
    writeln!(w, "end")?;
    w.flush()?;
    Ok(())
}

fn parse_sample(line: &str, lineno: usize) -> std::result::Result<Complex64, ParseError> {
    let mut it = line.split_whitespace();
    let (Some(re), Some(im), None) = (it.next(), it.next(), it.next()) else {
        return Err(ParseError::new(lineno, format!("expected `re im`, found `{line}`")));
    };
    Ok(Complex64::new(parse_f64(re, lineno, "re")?, parse_f64(im, lineno, "im")?))
}

fn read_samples<R: BufRead>(lines: &mut Lines<R>, k: usize) -> std::result::Result<Vec<Complex64>, ParseError> {
    let mut samples = Vec::with_capacity(k);
    for j in 0..k {
        let line = match lines.next_line()? {
            Some(l) if !(l.starts_with("record") || l == "end") => l.to_string(),
            _ => return Err(lines.err(format!("truncated: {j} of {k} samples present"))),
        };
        samples.push(parse_sample(&line, lines.line())?);
    }
    Ok(samples)
}

/// Loads and validates a `.sweeps` file; the first violation is reported
/// with its line and record index.
pub fn load_dataset<R: BufRead>(reader: R) -> Result<Vec<SweepRecord>> {
    let mut lines = Lines::new(reader);
    lines.header("sweeps")?;
    let count_line = lines.expect_line("records=<n>")?.to_string();
    let kv = key_values(&count_line, lines.line())?;
    let n = parse_usize(lookup(&kv, "records", lines.line())?, lines.line(), "records")?;

    let mut out = Vec::with_capacity(n);
    loop {
        let line = lines.expect_line("record or end")?.to_string();
        let lineno = lines.line();
        if line == "end" {
            break;
        }
        let idx = out.len();
        let at = |e: ParseError| e.in_record(idx);
        let Some(rest) = line.strip_prefix("record ") else {
            return Err(at(ParseError::new(lineno, format!("expected `record ...`, found `{line}`"))).into());
        };
        let kv = key_values(rest, lineno).map_err(at)?;
        let get = |k: &str| lookup(&kv, k, lineno).map_err(at);
        let num = |k: &str| -> std::result::Result<f64, ParseError> { parse_f64(get(k)?, lineno, k).map_err(at) };
        let declared = parse_usize(get("index")?, lineno, "index").map_err(at)?;
        if declared != idx {
            return Err(at(ParseError::new(lineno, format!("record index {declared} out of sequence"))).into());
        }
        let point = parse_point(&kv, lineno).map_err(at)?;
        let k = parse_usize(get("k")?, lineno, "k").map_err(at)?;
        let (f_start, f_stop) = (num("f_start")?, num("f_stop")?);
        let samples = read_samples(&mut lines, k).map_err(at)?;
        let sweep = FrequencySweep::new(samples, f_start, f_stop, point.point_id.clone());
        if let Err(e) = sweep.validate() {
            return Err(at(ParseError::new(lineno, e.to_string())).into());
        }
        out.push(SweepRecord { point, sweep });
    }
    if out.len() != n {
        return Err(ParseError::new(lines.line(), format!("declared {n} records, found {}", out.len())).into());
    }
    Ok(out)
}

pub fn save_calibration<W: Write>(mut w: W, cal: &CalibrationProfile) -> Result<()> {
    cal.validate()?;
    if cal.source.contains('\n') {
        return Err(Error::InvalidInput("calibration source must be a single line".into()));
    }
    writeln!(w, "rischan-cal {}", super::FORMAT_VERSION)?;
    writeln!(w, "source {}", cal.source)?;
    writeln!(w, "k={}", cal.len())?;
    for g in &cal.system_response {
        writeln!(w, "{} {}", fmt_f64(g.re), fmt_f64(g.im))?;
    }
    writeln!(w, "end")?;
    w.flush()?;
    Ok(())
}

pub fn load_calibration<R: BufRead>(reader: R) -> Result<CalibrationProfile> {
    let mut lines = Lines::new(reader);
    lines.header("cal")?;
    let src = lines.expect_line("source")?.to_string();
    let source = match src.strip_prefix("source") {
        Some(s) => s.trim().to_string(),
        None => return Err(lines.err(format!("expected `source <label>`, found `{src}`")).into()),
    };
    let kline = lines.expect_line("k=<n>")?.to_string();
    let kv = key_values(&kline, lines.line())?;
    let k = parse_usize(lookup(&kv, "k", lines.line())?, lines.line(), "k")?;
    let samples = read_samples(&mut lines, k)?;
    if lines.expect_line("end")? != "end" {
        return Err(lines.err(format!("more than the declared {k} samples")).into());
    }
    let cal = CalibrationProfile { system_response: samples, source };
    if let Err(e) = cal.validate() {
        return Err(ParseError::new(lines.line(), e.to_string()).into());
    }
    Ok(cal)
}
