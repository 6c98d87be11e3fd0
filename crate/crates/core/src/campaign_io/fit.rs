use std::fmt::Write as _;
use std::io::{BufRead, Write};

use super::{assignment, fmt_f64, parse_f64, parse_usize, Lines, ParseError};
use crate::error::{Error, Result};
use crate::fitting::{FitBounds, FitResult};
use crate::geometry::Scenario;
use crate::pl_models::{ModelFamily, ModelParams, ReferencePoint, VariableMask};

/// A fit together with the labels of the points it was fitted on.
#[derive(Debug, Clone, PartialEq)]
pub struct FitFile {
    pub label: String,
    pub scenario: Option<Scenario>,
    pub bounds: FitBounds,
    pub result: FitResult,
    pub point_ids: Vec<String>,
    pub observed: Vec<f64>,
}

fn floats(v: &[f64]) -> String {
    v.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(" ")
}

fn flags(v: &[bool]) -> String {
    v.iter().map(|&b| if b { "1" } else { "0" }).collect::<Vec<_>>().join(" ")
}

pub fn save_fit<W: Write>(mut w: W, fit: &FitFile) -> Result<()> {
    let n = fit.result.residuals.len();
    if fit.point_ids.len() != n || fit.observed.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: fit.point_ids.len().min(fit.observed.len()) });
    }
    if fit.label.contains('\n') {
        return Err(Error::InvalidInput("fit label must be a single line".into()));
    }
    let r = &fit.result;
    writeln!(w, "rischan-fit {}", super::FORMAT_VERSION)?;
    writeln!(w, "label = {}", fit.label)?;
    writeln!(w, "scenario = {}", fit.scenario.map(|s| s.as_str()).unwrap_or("none"))?;
    write!(w, "{}", r.params.to_text_block())?;
    writeln!(w, "lower = {}", floats(&fit.bounds.lower))?;
    writeln!(w, "upper = {}", floats(&fit.bounds.upper))?;
    writeln!(w, "free = {}", flags(&r.free))?;
    writeln!(w, "bounds_active = {}", flags(&r.bounds_active))?;
    writeln!(w, "iterations = {}", r.iterations)?;
    writeln!(w, "converged = {}", r.converged)?;
    writeln!(w, "sf_mu = {}", fmt_f64(r.sf_mu))?;
    writeln!(w, "sf_sigma = {}", fmt_f64(r.sf_sigma))?;
    writeln!(w, "residuals = {n}")?;
    for ((id, obs), res) in fit.point_ids.iter().zip(&fit.observed).zip(&r.residuals) {
        if id.is_empty() || id.chars().any(char::is_whitespace) {
            return Err(Error::InvalidInput(format!("point id `{id}` must be a token without whitespace")));
        }
        writeln!(w, "res {id} {} {}", fmt_f64(*obs), fmt_f64(*res))?;
    }
    writeln!(w, "end")?;
    w.flush()?;
    Ok(())
}

fn parse_array<const N: usize>(v: &str, line: usize, what: &str) -> std::result::Result<[f64; N], ParseError> {
    let xs: Vec<f64> = v.split_whitespace().map(|t| parse_f64(t, line, what)).collect::<std::result::Result<_, _>>()?;
    xs.try_into()
        .map_err(|xs: Vec<f64>| ParseError::new(line, format!("{what} needs {N} values, found {}", xs.len())))
}

fn parse_flags(v: &str, line: usize, what: &str) -> std::result::Result<[bool; 5], ParseError> {
    let xs: Vec<bool> = v
        .split_whitespace()
        .map(|t| match t {
            "0" => Ok(false),
            "1" => Ok(true),
            _ => Err(ParseError::new(line, format!("{what}: expected 0 or 1, found `{t}`"))),
        })
        .collect::<std::result::Result<_, _>>()?;
    xs.try_into()
        .map_err(|xs: Vec<bool>| ParseError::new(line, format!("{what} needs 5 flags, found {}", xs.len())))
}

pub fn load_fit<R: BufRead>(reader: R) -> Result<FitFile> {
    let mut lines = Lines::new(reader);
    lines.header("fit")?;
    let mut fields: Vec<(String, String, usize)> = Vec::new();
    loop {
        let l = lines.expect_line("field")?.to_string();
        let (k, v) = assignment(&l, lines.line())?;
        let done = k == "residuals";
        fields.push((k.to_string(), v.to_string(), lines.line()));
        if done {
            break;
        }
    }
    let get = |k: &str| -> std::result::Result<(&str, usize), ParseError> {
        fields
            .iter()
            .find(|(key, _, _)| key == k)
            .map(|(_, v, l)| (v.as_str(), *l))
            .ok_or_else(|| ParseError::new(lines.line(), format!("missing field `{k}`")))
    };
    let pe = |l: usize| move |e: Error| ParseError::new(l, e.to_string());

    let (fam, fl) = get("family")?;
    let family: ModelFamily = fam.parse().map_err(pe(fl))?;
    let (mask, ml) = get("mask")?;
    let mask: VariableMask = mask.parse().map_err(pe(ml))?;
    let names = family.param_names();
    let mut v = [0.0; 5];
    for i in 0..5 {
        if names[i] == "-" {
            continue;
        }
        if let Ok((s, l)) = get(names[i]) {
            v[i] = parse_f64(s, l, names[i])?;
        } else if i == 0 {
            return Err(ParseError::new(lines.line(), format!("missing field `{}`", names[0])).into());
        }
    }
    let (rs, rl) = get("reference")?;
    let [d1, d2, theta_t, theta_r] = parse_array::<4>(rs, rl, "reference")?;
    let mut params = ModelParams::new(family, 0.0, (0.0, 0.0), (0.0, 0.0));
    if !family.is_traditional() {
        params = params.with_mask(mask);
    }
    params.reference = ReferencePoint { d1, d2, theta_t, theta_r };
    let params = params.with_vector(v);

    let (ls, ll) = get("lower")?;
    let (us, ul) = get("upper")?;
    let bounds = FitBounds { lower: parse_array::<5>(ls, ll, "lower")?, upper: parse_array::<5>(us, ul, "upper")? };
    bounds.validate().map_err(pe(ul))?;
    let (fs, fl) = get("free")?;
    let (bs, bl) = get("bounds_active")?;
    let (is, il) = get("iterations")?;
    let (cs, cl) = get("converged")?;
    let converged = match cs {
        "true" => true,
        "false" => false,
        other => return Err(ParseError::new(cl, format!("converged: expected true/false, found `{other}`")).into()),
    };
    let (mus, mul) = get("sf_mu")?;
    let (ss, sl) = get("sf_sigma")?;
    let (ns, nl) = get("residuals")?;
    let n = parse_usize(ns, nl, "residuals")?;
    let label = get("label").map(|(s, _)| s.to_string()).unwrap_or_default();
    let scenario = match get("scenario") {
        Ok(("none", _)) | Err(_) => None,
        Ok((s, l)) => Some(s.parse::<Scenario>().map_err(pe(l))?),
    };
    let mut result = FitResult {
        params,
        residuals: Vec::with_capacity(n),
        sf_mu: parse_f64(mus, mul, "sf_mu")?,
        sf_sigma: parse_f64(ss, sl, "sf_sigma")?,
        bounds_active: parse_flags(bs, bl, "bounds_active")?,
        free: parse_flags(fs, fl, "free")?,
        iterations: parse_usize(is, il, "iterations")?,
        converged,
    };
    let vec = result.params.vector();
    if (0..5).any(|i| result.free[i] && !(bounds.lower[i] <= vec[i] && vec[i] <= bounds.upper[i])) {
        return Err(ParseError::new(ul, "invariant `fitted parameters within bounds` violated").into());
    }
    let mut point_ids = Vec::with_capacity(n);
    let mut observed = Vec::with_capacity(n);
    for i in 0..n {
        let l = lines
            .expect_line("res line")
            .map_err(|e| e.in_record(i))?
            .to_string();
        let ln = lines.line();
        let t: Vec<&str> = l.split_whitespace().collect();
        if t.len() != 4 || t[0] != "res" {
            return Err(ParseError::new(ln, format!("expected `res <id> <observed> <residual>`, found `{l}`"))
                .in_record(i)
                .into());
        }
        point_ids.push(t[1].to_string());
        observed.push(parse_f64(t[2], ln, "observed").map_err(|e| e.in_record(i))?);
        result.residuals.push(parse_f64(t[3], ln, "residual").map_err(|e| e.in_record(i))?);
    }
    if lines.expect_line("end")? != "end" {
        return Err(lines.err(format!("more than the declared {n} residuals")).into());
    }
    Ok(FitFile { label, scenario, bounds, result, point_ids, observed })
}

/// `point_id,observed_db,predicted_db,residual_db`.
pub fn residuals_csv(fit: &FitFile) -> String {
    let mut out = String::from("point_id,observed_db,predicted_db,residual_db\n");
    for ((id, obs), res) in fit.point_ids.iter().zip(&fit.observed).zip(&fit.result.residuals) {
        let _ = writeln!(out, "{id},{obs:.6},{:.6},{res:.6}", obs - res);
    }
    out
}
