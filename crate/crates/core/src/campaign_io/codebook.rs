use std::io::{BufRead, Write};

use ndarray::Array2;

use super::{fmt_f64, key_values, lookup, parse_f64, parse_usize, Lines, ParseError};
use crate::error::Result;
use crate::ris_array::{BeamTarget, Codebook};

/// Row-major bit strings, one row per line, `1` selecting coding "1".
pub fn save_codebook<W: Write>(mut w: W, codebook: &Codebook) -> Result<()> {
    let (m, n) = codebook.dims();
    let t = &codebook.target;
    writeln!(w, "rischan-codebook {}", super::FORMAT_VERSION)?;
    writeln!(
        w,
        "m={m} n={n} d1={} theta_t={} d2={} theta_r={} threshold={}",
        fmt_f64(t.d1),
        fmt_f64(t.theta_t),
        fmt_f64(t.d2),
        fmt_f64(t.theta_r),
        fmt_f64(codebook.threshold)
    )?;
    for row in codebook.bits.rows() {
        let s: String = row.iter().map(|&b| if b { '1' } else { '0' }).collect();
        writeln!(w, "{s}")?;
    }
    writeln!(w, "end")?;
    w.flush()?;
    Ok(())
}

pub fn load_codebook<R: BufRead>(reader: R) -> Result<Codebook> {
    let mut lines = Lines::new(reader);
    lines.header("codebook")?;
    let head = lines.expect_line("codebook dimensions")?.to_string();
    let ln = lines.line();
    let kv = key_values(&head, ln)?;
    let m = parse_usize(lookup(&kv, "m", ln)?, ln, "m")?;
    let n = parse_usize(lookup(&kv, "n", ln)?, ln, "n")?;
    if m == 0 || n == 0 {
        return Err(ParseError::new(ln, "codebook dimensions must be positive").into());
    }
    let f = |key: &str| -> std::result::Result<f64, ParseError> { parse_f64(lookup(&kv, key, ln)?, ln, key) };
    let target = BeamTarget { d1: f("d1")?, theta_t: f("theta_t")?, d2: f("d2")?, theta_r: f("theta_r")? };
    let threshold = f("threshold")?;

    let mut bits = Vec::with_capacity(m * n);
    for r in 0..m {
        let row = lines.expect_line(&format!("codebook row {r}"))?.to_string();
        if row.len() != n {
            return Err(lines.err(format!("row {r} has {} cells, expected {n}", row.len())).into());
        }
        for c in row.chars() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                other => return Err(lines.err(format!("unexpected `{other}` in codebook row {r}")).into()),
            }
        }
    }
    if lines.expect_line("end")? != "end" {
        return Err(lines.err(format!("more than the declared {m} rows")).into());
    }
    let bits = Array2::from_shape_vec((m, n), bits).expect("row lengths checked");
    Ok(Codebook { bits, target, threshold })
}
