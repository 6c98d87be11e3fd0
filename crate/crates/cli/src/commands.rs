use anyhow::{anyhow, bail, Context, Result};
use clap::Args;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rischan_core::campaign_io::{
    aggregate_rms_ds, embed_reference_tables, load_calibration, load_campaign_file, load_dataset, load_fit,
    load_processed, load_synthesis_file, residuals_csv, save_dataset, save_fit, save_processed, synthesis_to_toml,
    FitFile, ProcessedFile, ProcessedRecord, SweepRecord, SynthesisDocument,
};
use rischan_core::dsp::{process_sweep, DetectionParams, DEFAULT_GAMMA_N_DB, DEFAULT_GAMMA_P_DB};
use rischan_core::fitting::{fit_model, ks_critical_value, shadow_fading_stats, FitBounds, FitOptions};
use rischan_core::geometry::{build_campaign_grid, builtin, CampaignSpec, PropagationMode, Scenario};
use rischan_core::pl_models::{ModelFamily, ModelParams, VariableMask};
use rischan_core::synthesis::{synth_sweep, HORN_GAIN_DBI};

use crate::manifest::{display, RunManifest};
use crate::output::{open, require_exists, Outputs};

/// A campaign given as a TOML file or as `builtin:<all|scenario|scenario/mode>`.
#[derive(Debug, Clone, PartialEq)]
pub enum CampaignSource {
    Builtin(Vec<CampaignSpec>),
    File(PathBuf),
}

impl CampaignSource {
    pub fn parse(s: &str) -> Result<Self> {
        let Some(name) = s.strip_prefix("builtin:") else {
            return Ok(CampaignSource::File(PathBuf::from(s)));
        };
        if name == "all" {
            return Ok(CampaignSource::Builtin(builtin::all()));
        }
        let (sc, mode) = match name.split_once('/') {
            Some((a, b)) => (a, Some(b)),
            None => (name, None),
        };
        let scenario: Scenario = sc.parse()?;
        Ok(CampaignSource::Builtin(match mode {
            Some(m) => vec![builtin::campaign(scenario, m.parse::<PropagationMode>()?)],
            None => builtin::scenario(scenario),
        }))
    }

    fn load(&self) -> Result<Vec<CampaignSpec>> {
        match self {
            CampaignSource::Builtin(v) => Ok(v.clone()),
            CampaignSource::File(p) => {
                require_exists(&[p])?;
                Ok(vec![load_campaign_file(p).with_context(|| format!("campaign {}", p.display()))?])
            }
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// Campaign config path, or builtin:all, builtin:<scenario>, builtin:<scenario>/<mode>. Repeatable.
    #[arg(long = "campaign", default_value = "builtin:all")]
    pub campaigns: Vec<String>,
    /// Synthesis config document (TOML); defaults reproduce the noise-free free-space data.
    #[arg(long)]
    pub synth: Option<PathBuf>,
    /// RNG seed; overrides the synthesis document.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Shadow-fading standard deviation in dB; overrides the synthesis document.
    #[arg(long)]
    pub shadow_sigma: Option<f64>,
    /// Add diffuse multipath to every sweep.
    #[arg(long)]
    pub multipath: bool,
    /// Output .sweeps file.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn simulate(args: &SimulateArgs) -> Result<Vec<PathBuf>> {
    let mut doc = match &args.synth {
        Some(p) => {
            require_exists(&[p])?;
            load_synthesis_file(p).with_context(|| format!("synthesis config {}", p.display()))?
        }
        None => SynthesisDocument::default(),
    };
    if let Some(seed) = args.seed {
        doc.synthesis.rng_seed = seed;
    }
    if let Some(s) = args.shadow_sigma {
        doc.synthesis.shadow_sigma_db = s;
    }
    if args.multipath {
        doc.synthesis.multipath = true;
    }
    doc.synthesis.validate()?;
    doc.ris.validate()?;

    let mut specs = Vec::new();
    for c in &args.campaigns {
        specs.extend(CampaignSource::parse(c)?.load()?);
    }
    let mut points = Vec::new();
    for spec in &specs {
        spec.validate()?;
        let grid = build_campaign_grid(spec);
        for w in &grid.warnings {
            eprintln!("warning: {w}");
        }
        points.extend(grid.points);
    }
    if points.is_empty() {
        bail!("campaigns generate no points");
    }

    let records: Vec<SweepRecord> = points
        .par_iter()
        .map(|p| {
            synth_sweep(p, &doc.synthesis, &doc.ris)
                .map(|s| SweepRecord::new(p.clone(), s))
                .map_err(|e| anyhow!("point {}: {e}", p.point_id))
        })
        .collect::<Result<_>>()?;

    let mut out = Outputs::new();
    out.write_with(&args.out, |w| Ok(save_dataset(w, &records)?))?;
    let mut m = RunManifest::new("simulate");
    m.inputs = args.campaigns.clone();
    if let Some(p) = &args.synth {
        m.inputs.push(p.display().to_string());
    }
    m.seed = Some(doc.synthesis.rng_seed);
    m.synthesis = Some(synthesis_to_toml(&doc)?);
    m.option("records", records.len());
    m.outputs = display(out.paths());
    let mp = RunManifest::path_for(&args.out);
    out.write_str(&mp, &m.to_toml()?)?;
    println!("simulate: {} records -> {}", records.len(), args.out.display());
    Ok(out.commit())
}

#[derive(Debug, Clone, Args)]
pub struct ProcessArgs {
    /// Input .sweeps file.
    pub input: PathBuf,
    /// Back-to-back calibration (.cal); omitted means an identity response.
    #[arg(long)]
    pub cal: Option<PathBuf>,
    /// Peak-relative detection margin, dB.
    #[arg(long, default_value_t = DEFAULT_GAMMA_P_DB)]
    pub gamma_p: f64,
    /// Noise-relative detection margin, dB.
    #[arg(long, default_value_t = DEFAULT_GAMMA_N_DB)]
    pub gamma_n: f64,
    /// Tx antenna gain, dBi.
    #[arg(long, default_value_t = HORN_GAIN_DBI)]
    pub gt: f64,
    /// Rx antenna gain, dBi.
    #[arg(long, default_value_t = HORN_GAIN_DBI)]
    pub gr: f64,
    /// Output .processed file.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn process(args: &ProcessArgs) -> Result<Vec<PathBuf>> {
    require_exists(&[&args.input])?;
    if let Some(c) = &args.cal {
        require_exists(&[c])?;
    }
    let records = load_dataset(open(&args.input)?).with_context(|| format!("loading {}", args.input.display()))?;
    let cal = match &args.cal {
        Some(p) => Some(load_calibration(open(p)?).with_context(|| format!("loading {}", p.display()))?),
        None => None,
    };
    let params = DetectionParams { gamma_p: args.gamma_p, gamma_n: args.gamma_n };
    let processed: Vec<ProcessedRecord> = records
        .par_iter()
        .map(|r| {
            process_sweep(&r.sweep, cal.as_ref(), args.gt, args.gr, params)
                .map(|p| ProcessedRecord::new(r.point.clone(), p))
                .map_err(|e| anyhow!("point {}: {e}", r.point.point_id))
        })
        .collect::<Result<_>>()?;
    let file = ProcessedFile {
        gamma_p: args.gamma_p,
        gamma_n: args.gamma_n,
        gt_dbi: args.gt,
        gr_dbi: args.gr,
        aggregates: aggregate_rms_ds(&processed),
        records: processed,
    };

    let mut out = Outputs::new();
    out.write_with(&args.out, |w| Ok(save_processed(w, &file)?))?;
    let mut m = RunManifest::new("process");
    m.inputs.push(args.input.display().to_string());
    if let Some(c) = &args.cal {
        m.inputs.push(c.display().to_string());
    }
    m.option("gamma_p", args.gamma_p).option("gamma_n", args.gamma_n).option("gt", args.gt).option("gr", args.gr);
    m.outputs = display(out.paths());
    out.write_str(&RunManifest::path_for(&args.out), &m.to_toml()?)?;
    println!("process: {} records -> {}", file.records.len(), args.out.display());
    for a in &file.aggregates {
        println!(
            "  rms-ds {}/{}: n={} mean={:.2} ns sigma={:.2} ns",
            a.scenario,
            a.mode,
            a.count,
            a.mean * 1e9,
            a.sigma * 1e9
        );
    }
    Ok(out.commit())
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    /// Input .processed file.
    pub input: PathBuf,
    /// Model family: fi, ci, fi-traditional or ci-traditional.
    #[arg(long, default_value = "fi")]
    pub family: String,
    /// Variables used: all, distances, a scenario name, or a list like d1,d2,tt,tr. Defaults per scenario.
    #[arg(long)]
    pub mask: Option<String>,
    /// Box bounds `lo1,..,lo5:hi1,..,hi5`. Defaults: FI (10,1,1,0,0):(50,3,3,2,2); CI freezes the intercept.
    #[arg(long)]
    pub bounds: Option<String>,
    /// Keep only this scenario. Required when the input mixes scenarios.
    #[arg(long)]
    pub scenario: Option<Scenario>,
    /// Keep only this propagation mode.
    #[arg(long)]
    pub mode: Option<PropagationMode>,
    /// Keep only these case indices (comma list), taken from `-c<N>-` in point ids.
    #[arg(long)]
    pub cases: Option<String>,
    /// Frozen CI intercept, dB. Defaults to the scenario's reference constant.
    #[arg(long)]
    pub reference: Option<f64>,
    /// Label stored in the fit file.
    #[arg(long, default_value = "fit")]
    pub label: String,
    /// Output .fit file; residuals go to `<out>.residuals.csv`.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn case_index(point_id: &str) -> Option<usize> {
    point_id
        .split('-')
        .find_map(|tok| tok.strip_prefix('c').and_then(|n| n.parse().ok()))
}

pub fn parse_bounds(s: &str) -> Result<FitBounds> {
    let (lo, hi) = s.split_once(':').ok_or_else(|| anyhow!("bounds must look like lo1,..,lo5:hi1,..,hi5"))?;
    let parse = |part: &str| -> Result<[f64; 5]> {
        let v: Vec<f64> = part.split(',').map(|x| x.trim().parse::<f64>()).collect::<Result<_, _>>()?;
        v.try_into().map_err(|v: Vec<f64>| anyhow!("bounds need 5 values per side, got {}", v.len()))
    };
    Ok(FitBounds::new(parse(lo)?, parse(hi)?)?)
}

fn param_row(p: &ModelParams) -> String {
    let names = p.family.param_names();
    let v = p.vector();
    let active = [true, p.variable_mask.d1, p.variable_mask.d2, p.variable_mask.theta_t, p.variable_mask.theta_r];
    (0..5)
        .filter(|&i| active[i] && names[i] != "-")
        .map(|i| format!("{}={:.2}", names[i], v[i]))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Side-by-side comparison with the published rows of the same family.
pub fn reference_diff(scenario: Scenario, params: &ModelParams) -> Option<String> {
    if params.family.is_traditional() {
        return None;
    }
    let table = embed_reference_tables().into_iter().find(|t| t.scenario == Some(scenario))?;
    let prefix = if params.family.is_ci() { "ci" } else { "fi" };
    let fitted = params.vector();
    let mut out = String::new();
    let _ = writeln!(out, "reference comparison ({}, {}):", scenario, params.family);
    for suffix in ["free-space", "measurement"] {
        let label = format!("{prefix}-{suffix}");
        let Some(row) = table.row(&label) else { continue };
        let want = table.expand(row);
        let cols: Vec<String> = table
            .columns
            .iter()
            .map(|c| {
                let i = ["alpha", "beta1", "beta2", "lambda1", "lambda2"].iter().position(|n| n == c).unwrap_or(0);
                format!("{c}: {:.2} vs {:.2} ({:+.2})", fitted[i], want[i], fitted[i] - want[i])
            })
            .collect();
        let _ = writeln!(out, "  {label:<16} {}", cols.join("  "));
    }
    let _ = writeln!(
        out,
        "  note: synthetic data use one reference calibration and a swept 1-bit codebook; residual gaps reflect generator calibration, not fitting error"
    );
    Some(out)
}

pub fn fit(args: &FitArgs) -> Result<Vec<PathBuf>> {
    require_exists(&[&args.input])?;
    let family: ModelFamily = args.family.parse()?;
    let file = load_processed(open(&args.input)?).with_context(|| format!("loading {}", args.input.display()))?;
    let cases: Option<Vec<usize>> = match &args.cases {
        Some(s) => Some(s.split(',').map(|x| x.trim().parse::<usize>()).collect::<Result<_, _>>()?),
        None => None,
    };
    let records: Vec<&ProcessedRecord> = file
        .records
        .iter()
        .filter(|r| args.scenario.is_none_or(|s| r.point.scenario == s))
        .filter(|r| args.mode.is_none_or(|m| r.point.mode == m))
        .filter(|r| match &cases {
            Some(c) => case_index(&r.point.point_id).is_some_and(|i| c.contains(&i)),
            None => true,
        })
        .collect();
    let scenario = match args.scenario {
        Some(s) => s,
        None => {
            let mut found: Vec<Scenario> = records.iter().map(|r| r.point.scenario).collect();
            found.dedup();
            found.sort_by_key(|s| s.as_str());
            found.dedup();
            match found.as_slice() {
                [s] => *s,
                [] => bail!("no records left after filtering"),
                _ => bail!("input mixes scenarios; pass --scenario"),
            }
        }
    };
    let mask: VariableMask = match &args.mask {
        Some(m) => m.parse()?,
        None => VariableMask::for_scenario(scenario),
    };
    let bounds = match (&args.bounds, args.reference) {
        (Some(b), _) => parse_bounds(b)?,
        (None, Some(r)) if family.is_ci() => FitBounds::ci(r),
        (None, _) if family.is_ci() && family.is_traditional() => bail!("ci-traditional needs --reference or --bounds"),
        (None, _) => FitBounds::for_family(family, scenario),
    };
    let data: Vec<_> = records
        .iter()
        .map(|r| rischan_core::fitting::Observation::new(r.point.clone(), r.pl_db))
        .collect();
    let result = match fit_model(&data, family, mask, &bounds, &FitOptions::default()) {
        Ok(r) => r,
        Err(rischan_core::Error::UnderDetermined { points, params }) => {
            bail!("usage: fit needs at least {params} points for the free parameters, found {points}")
        }
        Err(e) => return Err(e.into()),
    };
    if !result.converged {
        bail!("fit did not converge within {} iterations", result.iterations);
    }
    let fit_file = FitFile {
        label: args.label.clone(),
        scenario: Some(scenario),
        bounds,
        point_ids: records.iter().map(|r| r.point.point_id.clone()).collect(),
        observed: records.iter().map(|r| r.pl_db).collect(),
        result,
    };

    let mut out = Outputs::new();
    out.write_with(&args.out, |w| Ok(save_fit(w, &fit_file)?))?;
    let csv_path = sibling(&args.out, ".residuals.csv");
    out.write_str(&csv_path, &residuals_csv(&fit_file))?;
    let mut m = RunManifest::new("fit");
    m.inputs.push(args.input.display().to_string());
    m.option("family", family).option("mask", mask).option("scenario", scenario);
    m.option("bounds", format!("{:?}:{:?}", bounds.lower, bounds.upper));
    if let Some(mo) = args.mode {
        m.option("mode", mo);
    }
    if let Some(c) = &args.cases {
        m.option("cases", c);
    }
    m.outputs = display(out.paths());
    out.write_str(&RunManifest::path_for(&args.out), &m.to_toml()?)?;

    let r = &fit_file.result;
    println!(
        "fit {} on {} points ({}): {} sigma={:.2} dB iterations={}",
        family,
        data.len(),
        scenario,
        param_row(&r.params),
        r.sf_sigma,
        r.iterations
    );
    if let Some(diff) = reference_diff(scenario, &r.params) {
        print!("{diff}");
    }
    Ok(out.commit())
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(suffix);
    path.with_file_name(name)
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    /// Fit files (.fit). Repeatable.
    #[arg(long = "fit")]
    pub fits: Vec<PathBuf>,
    /// Processed result files (.processed). Repeatable.
    #[arg(long = "processed")]
    pub processed: Vec<PathBuf>,
    /// Raw sweep files (.sweeps) for magnitude-vs-frequency series. Repeatable.
    #[arg(long = "sweeps")]
    pub sweeps: Vec<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

fn fmt_col(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.6}")).unwrap_or_else(|| "nan".into())
}

fn pl_vs_d2(records: &[&ProcessedRecord]) -> String {
    // d2 in micrometres as the grouping key
    let mut table: BTreeMap<i64, [(f64, usize); 3]> = BTreeMap::new();
    for r in records {
        let key = (r.point.d2 * 1e6).round() as i64;
        let m = PropagationMode::ALL.iter().position(|&m| m == r.point.mode).unwrap_or(0);
        let slot = &mut table.entry(key).or_insert([(0.0, 0); 3])[m];
        slot.0 += r.pl_db;
        slot.1 += 1;
    }
    let mut out = String::from("# d2_m");
    for m in PropagationMode::ALL {
        let _ = write!(out, " {m}_db");
    }
    out.push('\n');
    for (key, slots) in &table {
        let _ = write!(out, "{:.6}", *key as f64 * 1e-6);
        for (sum, n) in slots {
            let _ = write!(out, " {}", fmt_col((*n > 0).then(|| sum / *n as f64)));
        }
        out.push('\n');
    }
    out
}

fn pdp_evolution(records: &[&ProcessedRecord]) -> Option<String> {
    let mut by_d1: BTreeMap<i64, &ProcessedRecord> = BTreeMap::new();
    for r in records {
        by_d1.entry((r.point.d1 * 1e6).round() as i64).or_insert(r);
    }
    let first = by_d1.values().next()?;
    let delays = &first.pdp.delays;
    let cols: Vec<(&i64, &&ProcessedRecord)> = by_d1.iter().filter(|(_, r)| r.pdp.delays == *delays).collect();
    let mut out = String::from("# delay_ns");
    for (k, _) in &cols {
        let _ = write!(out, " d1={:.3}m_db", **k as f64 * 1e-6);
    }
    out.push('\n');
    for (i, d) in delays.iter().enumerate() {
        let _ = write!(out, "{:.6}", d * 1e9);
        for (_, r) in &cols {
            let _ = write!(out, " {:.6}", r.pdp.powers[i]);
        }
        out.push('\n');
    }
    Some(out)
}

fn ecdf(values: &mut [f64], scale: f64, header: &str) -> String {
    values.sort_by(|a, b| a.total_cmp(b));
    let n = values.len() as f64;
    let mut out = format!("# {header} cdf\n");
    for (i, v) in values.iter().enumerate() {
        let _ = writeln!(out, "{:.6} {:.6}", v * scale, (i + 1) as f64 / n);
    }
    out
}

pub fn report(args: &ReportArgs) -> Result<Vec<PathBuf>> {
    let inputs: Vec<&Path> = args.fits.iter().chain(&args.processed).chain(&args.sweeps).map(|p| p.as_path()).collect();
    require_exists(&inputs)?;
    if inputs.is_empty() {
        bail!("report needs at least one --fit, --processed or --sweeps input");
    }
    let fits: Vec<(PathBuf, FitFile)> = args
        .fits
        .iter()
        .map(|p| Ok((p.clone(), load_fit(open(p)?).with_context(|| format!("loading {}", p.display()))?)))
        .collect::<Result<_>>()?;
    let processed: Vec<ProcessedFile> = args
        .processed
        .iter()
        .map(|p| load_processed(open(p)?).with_context(|| format!("loading {}", p.display())))
        .collect::<Result<_>>()?;
    let sweeps: Vec<SweepRecord> = args
        .sweeps
        .iter()
        .map(|p| load_dataset(open(p)?).with_context(|| format!("loading {}", p.display())))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();

    let mut out = Outputs::new();
    let mut summary = String::from("# rischan report\n");
    let dir = &args.out;

    if !fits.is_empty() {
        summary.push_str("\n[fits]\n# label family scenario n sigma_db ks ks_crit params\n");
    }
    for (i, (path, f)) in fits.iter().enumerate() {
        let stats = shadow_fading_stats(&f.result.residuals)?;
        let mut text = String::from("# residual_db empirical_cdf gaussian_cdf\n");
        for s in &stats.cdf {
            let _ = writeln!(text, "{:.6} {:.6} {:.6}", s.x, s.empirical, s.gaussian);
        }
        let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| format!("fit{i}"));
        out.write_str(&dir.join(format!("sf_cdf_{stem}.dat")), &text)?;
        let _ = writeln!(
            summary,
            "{} {} {} {} {:.3} {:.4} {:.4} {}",
            f.label,
            f.result.params.family,
            f.scenario.map(|s| s.as_str()).unwrap_or("none"),
            f.result.residuals.len(),
            stats.sigma,
            stats.ks_statistic(),
            ks_critical_value(stats.cdf.len()),
            param_row(&f.result.params)
        );
    }

    let records: Vec<&ProcessedRecord> = processed.iter().flat_map(|p| &p.records).collect();
    if !records.is_empty() {
        summary.push_str("\n[rms-ds]\n# scenario mode count mean_ns sigma_ns\n");
        let owned: Vec<ProcessedRecord> = records.iter().map(|r| (*r).clone()).collect();
        for a in aggregate_rms_ds(&owned) {
            let _ = writeln!(summary, "{} {} {} {:.3} {:.3}", a.scenario, a.mode, a.count, a.mean * 1e9, a.sigma * 1e9);
        }
    }
    for scenario in Scenario::ALL {
        let sc: Vec<&ProcessedRecord> = records.iter().copied().filter(|r| r.point.scenario == scenario).collect();
        if sc.is_empty() {
            continue;
        }
        out.write_str(&dir.join(format!("pl_vs_d2_{scenario}.dat")), &pl_vs_d2(&sc))?;
        for mode in PropagationMode::ALL {
            let group: Vec<&ProcessedRecord> = sc.iter().copied().filter(|r| r.point.mode == mode).collect();
            if group.is_empty() {
                continue;
            }
            if let Some(text) = pdp_evolution(&group) {
                out.write_str(&dir.join(format!("pdp_evolution_{scenario}_{mode}.dat")), &text)?;
            }
            let mut ds: Vec<f64> = group.iter().map(|r| r.rms_ds).collect();
            out.write_str(&dir.join(format!("rms_ds_cdf_{scenario}_{mode}.dat")), &ecdf(&mut ds, 1e9, "rms_ds_ns"))?;
        }
    }

    let mut seen = Vec::new();
    for r in &sweeps {
        let key = (r.point.scenario, r.point.mode);
        if seen.contains(&key) {
            continue;
        }
        seen.push(key);
        let mut text = String::from("# frequency_ghz magnitude_db\n");
        for (i, h) in r.sweep.samples.iter().enumerate() {
            let _ = writeln!(text, "{:.6} {:.6}", r.sweep.frequency(i) * 1e-9, 10.0 * h.norm_sqr().log10());
        }
        out.write_str(&dir.join(format!("sweep_magnitude_{}_{}.dat", key.0, key.1)), &text)?;
    }

    out.write_str(&dir.join("summary.txt"), &summary)?;
    let mut m = RunManifest::new("report");
    m.inputs = inputs.iter().map(|p| p.display().to_string()).collect();
    m.outputs = display(out.paths());
    out.write_str(&dir.join("manifest.toml"), &m.to_toml()?)?;
    println!("report: {} files -> {}", out.paths().len(), dir.display());
    Ok(out.commit())
}
