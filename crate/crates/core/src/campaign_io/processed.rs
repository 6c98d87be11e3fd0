use std::fmt::Write as _;
use std::io::{BufRead, Write};

use super::sweeps::{parse_point, point_fields};
use super::{fmt_f64, key_values, lookup, parse_f64, parse_usize, Lines, ParseError};
use crate::dsp::{Mpc, PowerDelayProfile, ProcessedSweep};
use crate::error::{Error, Result};
use crate::geometry::{MeasurementPoint, PropagationMode, Scenario};

/// Per-point output of the processing chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessedRecord {
    pub point: MeasurementPoint,
    pub pl_db: f64,
    pub raw_pl_db: f64,
    /// Seconds.
    pub rms_ds: f64,
    pub pdp: PowerDelayProfile,
}

impl ProcessedRecord {
    pub fn new(point: MeasurementPoint, processed: ProcessedSweep) -> Self {
        ProcessedRecord {
            point,
            pl_db: processed.path_loss.pl_db,
            raw_pl_db: processed.path_loss.raw_db,
            rms_ds: processed.rms_ds,
            pdp: processed.pdp,
        }
    }
}

/// RMS delay spread statistics of one scenario/mode group, seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RmsDsAggregate {
    pub scenario: Scenario,
    pub mode: PropagationMode,
    pub count: usize,
    pub mean: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProcessedFile {
    pub gamma_p: f64,
    pub gamma_n: f64,
    pub gt_dbi: f64,
    pub gr_dbi: f64,
    pub records: Vec<ProcessedRecord>,
    pub aggregates: Vec<RmsDsAggregate>,
}

impl ProcessedFile {
    pub fn observations(&self) -> Vec<crate::fitting::Observation> {
        self.records
            .iter()
            .map(|r| crate::fitting::Observation::new(r.point.clone(), r.pl_db))
            .collect()
    }
}

/// Groups by scenario then mode in canonical order; σ is the unbiased estimate.
pub fn aggregate_rms_ds(records: &[ProcessedRecord]) -> Vec<RmsDsAggregate> {
    let mut out = Vec::new();
    for scenario in Scenario::ALL {
        for mode in PropagationMode::ALL {
            let xs: Vec<f64> = records
                .iter()
                .filter(|r| r.point.scenario == scenario && r.point.mode == mode)
                .map(|r| r.rms_ds)
                .collect();
            if xs.is_empty() {
                continue;
            }
            let n = xs.len() as f64;
            let mean = xs.iter().sum::<f64>() / n;
            let sigma = if xs.len() > 1 {
                (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
            } else {
                0.0
            };
            out.push(RmsDsAggregate { scenario, mode, count: xs.len(), mean, sigma });
        }
    }
    out
}

pub fn save_processed<W: Write>(mut w: W, file: &ProcessedFile) -> Result<()> {
    writeln!(w, "rischan-processed {}", super::FORMAT_VERSION)?;
    writeln!(
        w,
        "records={} gamma_p={} gamma_n={} gt={} gr={}",
        file.records.len(),
        fmt_f64(file.gamma_p),
        fmt_f64(file.gamma_n),
        fmt_f64(file.gt_dbi),
        fmt_f64(file.gr_dbi)
    )?;
    for (i, r) in file.records.iter().enumerate() {
        let pdp = &r.pdp;
        if pdp.delays.len() != pdp.powers.len() {
            return Err(Error::LengthMismatch { expected: pdp.powers.len(), got: pdp.delays.len() });
        }
        writeln!(
            w,
            "record index={i} {} pl_db={} raw_pl_db={} rms_ds={} noise_floor={} threshold={} delay_resolution={} bins={} mpcs={}",
            point_fields(&r.point)?,
            fmt_f64(r.pl_db),
            fmt_f64(r.raw_pl_db),
            fmt_f64(r.rms_ds),
            fmt_f64(pdp.noise_floor),
            fmt_f64(pdp.threshold),
            fmt_f64(pdp.delay_resolution),
            pdp.powers.len(),
            pdp.valid_mpcs.len(),
        )?;
        for (d, p) in pdp.delays.iter().zip(&pdp.powers) {
            writeln!(w, "pdp {} {}", fmt_f64(*d), fmt_f64(*p))?;
        }
        for m in &pdp.valid_mpcs {
            writeln!(w, "mpc {} {} {}", m.bin, fmt_f64(m.delay), fmt_f64(m.power))?;
        }
    }
    for a in &file.aggregates {
        writeln!(
            w,
            "aggregate scenario={} mode={} count={} rms_ds_mean={} rms_ds_sigma={}",
            a.scenario,
            a.mode,
            a.count,
            fmt_f64(a.mean),
            fmt_f64(a.sigma)
        )?;
    }
    writeln!(w, "end")?;
    w.flush()?;
    Ok(())
}

fn tagged<'a>(line: &'a str, tag: &str, n: usize, lineno: usize) -> std::result::Result<Vec<&'a str>, ParseError> {
    let mut it = line.split_whitespace();
    if it.next() != Some(tag) {
        return Err(ParseError::new(lineno, format!("expected `{tag} ...`, found `{line}`")));
    }
    let toks: Vec<&str> = it.collect();
    if toks.len() != n {
        return Err(ParseError::new(lineno, format!("`{tag}` line needs {n} values, found {}", toks.len())));
    }
    Ok(toks)
}

pub fn load_processed<R: BufRead>(reader: R) -> Result<ProcessedFile> {
    let mut lines = Lines::new(reader);
    lines.header("processed")?;
    let head = lines.expect_line("records=<n> ...")?.to_string();
    let hl = lines.line();
    let kv = key_values(&head, hl)?;
    let n = parse_usize(lookup(&kv, "records", hl)?, hl, "records")?;
    let num = |k: &str| parse_f64(lookup(&kv, k, hl)?, hl, k);
    let mut file = ProcessedFile {
        gamma_p: num("gamma_p")?,
        gamma_n: num("gamma_n")?,
        gt_dbi: num("gt")?,
        gr_dbi: num("gr")?,
        records: Vec::with_capacity(n),
        aggregates: Vec::new(),
    };

    let mut line = lines.expect_line("record, aggregate or end")?.to_string();
    while let Some(rest) = line.strip_prefix("record ") {
        let idx = file.records.len();
        let at = |e: ParseError| e.in_record(idx);
        let lineno = lines.line();
        let kv = key_values(rest, lineno).map_err(at)?;
        let get = |k: &str| lookup(&kv, k, lineno).map_err(at);
        let num = |k: &str| parse_f64(get(k)?, lineno, k).map_err(at);
        let point = parse_point(&kv, lineno).map_err(at)?;
        let bins = parse_usize(get("bins")?, lineno, "bins").map_err(at)?;
        let n_mpcs = parse_usize(get("mpcs")?, lineno, "mpcs").map_err(at)?;
        let mut pdp = PowerDelayProfile {
            powers: Vec::with_capacity(bins),
            delays: Vec::with_capacity(bins),
            delay_resolution: num("delay_resolution")?,
            noise_floor: num("noise_floor")?,
            threshold: num("threshold")?,
            valid_mpcs: Vec::with_capacity(n_mpcs),
        };
        let (pl_db, raw_pl_db, rms_ds) = (num("pl_db")?, num("raw_pl_db")?, num("rms_ds")?);
        for _ in 0..bins {
            let l = lines.expect_line("pdp line").map_err(at)?.to_string();
            let t = tagged(&l, "pdp", 2, lines.line()).map_err(at)?;
            pdp.delays.push(parse_f64(t[0], lines.line(), "delay").map_err(at)?);
            pdp.powers.push(parse_f64(t[1], lines.line(), "power").map_err(at)?);
        }
        for _ in 0..n_mpcs {
            let l = lines.expect_line("mpc line").map_err(at)?.to_string();
            let t = tagged(&l, "mpc", 3, lines.line()).map_err(at)?;
            let m = Mpc {
                bin: parse_usize(t[0], lines.line(), "bin").map_err(at)?,
                delay: parse_f64(t[1], lines.line(), "delay").map_err(at)?,
                power: parse_f64(t[2], lines.line(), "power").map_err(at)?,
            };
            if !(m.power >= pdp.threshold) {
                return Err(at(ParseError::new(lines.line(), "invariant `valid MPC power >= threshold` violated")).into());
            }
            pdp.valid_mpcs.push(m);
        }
        file.records.push(ProcessedRecord { point, pl_db, raw_pl_db, rms_ds, pdp });
        line = lines.expect_line("record, aggregate or end")?.to_string();
    }
    while let Some(rest) = line.strip_prefix("aggregate ") {
        let lineno = lines.line();
        let kv = key_values(rest, lineno)?;
        let get = |k: &str| lookup(&kv, k, lineno);
        let parse_err = |e: Error| ParseError::new(lineno, e.to_string());
        file.aggregates.push(RmsDsAggregate {
            scenario: get("scenario")?.parse().map_err(parse_err)?,
            mode: get("mode")?.parse().map_err(parse_err)?,
            count: parse_usize(get("count")?, lineno, "count")?,
            mean: parse_f64(get("rms_ds_mean")?, lineno, "rms_ds_mean")?,
            sigma: parse_f64(get("rms_ds_sigma")?, lineno, "rms_ds_sigma")?,
        });
        line = lines.expect_line("aggregate or end")?.to_string();
    }
    if line != "end" {
        return Err(lines.err(format!("expected `end`, found `{line}`")).into());
    }
    if file.records.len() != n {
        return Err(lines.err(format!("declared {n} records, found {}", file.records.len())).into());
    }
    Ok(file)
}

/// Two columns: delay (ns), power (dB).
pub fn pdp_columns(pdp: &PowerDelayProfile) -> String {
    let mut out = String::from("# delay_ns power_db\n");
    for (d, p) in pdp.delays.iter().zip(&pdp.powers) {
        let _ = writeln!(out, "{:.6} {:.6}", d * 1e9, p);
    }
    out
}

/// Three columns: index, delay (ns), power (dB).
pub fn mpcs_columns(mpcs: &[Mpc]) -> String {
    let mut out = String::from("# index delay_ns power_db\n");
    for (i, m) in mpcs.iter().enumerate() {
        let _ = writeln!(out, "{i} {:.6} {:.6}", m.delay * 1e9, m.power);
    }
    out
}
