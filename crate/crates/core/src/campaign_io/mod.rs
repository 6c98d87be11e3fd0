//! Line-oriented text formats for sweeps, calibration, codebooks, processed
//! results, fits and result tables, plus TOML campaign and synthesis documents.
//!
//! Every file opens with `rischan-<kind> <version>`; floats are written with
//! 17 significant digits so that round trips are bit-exact.

mod codebook;
mod config;
mod fit;
mod processed;
mod sweeps;
mod tables;

pub use codebook::{load_codebook, save_codebook};
pub use config::{
    campaign_from_toml, campaign_to_toml, load_campaign_file, load_synthesis_file, synthesis_from_toml,
    synthesis_to_toml, SynthesisDocument, CAMPAIGN_VERSION, SYNTHESIS_VERSION,
};
pub use fit::{load_fit, residuals_csv, save_fit, FitFile};
pub use processed::{
    aggregate_rms_ds, load_processed, mpcs_columns, pdp_columns, save_processed, ProcessedFile, ProcessedRecord,
    RmsDsAggregate,
};
pub use sweeps::{load_calibration, load_dataset, save_calibration, save_dataset, SweepRecord};
pub use tables::{embed_reference_tables, load_table, save_table, ResultsTable, TableRow};

use std::fmt;
use std::io::BufRead;
use std::path::Path;

use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    /// 1-based line number; 0 when the error is not tied to a line.
    pub line: usize,
    /// 0-based record index within the file, when known.
    pub record: Option<usize>,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, message: impl Into<String>) -> Self {
        ParseError { line, record: None, message: message.into() }
    }

    pub fn in_record(mut self, record: usize) -> Self {
        self.record = Some(record);
        self
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.record {
            Some(r) => write!(f, "parse error at line {} (record {}): {}", self.line, r, self.message),
            None => write!(f, "parse error at line {}: {}", self.line, self.message),
        }
    }
}

impl std::error::Error for ParseError {}

pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Reads non-blank, non-comment lines while tracking line numbers.
pub(crate) struct Lines<R> {
    inner: R,
    line: usize,
    buf: String,
}

impl<R: BufRead> Lines<R> {
    pub(crate) fn new(inner: R) -> Self {
        Lines { inner, line: 0, buf: String::new() }
    }

    pub(crate) fn line(&self) -> usize {
        self.line
    }

    pub(crate) fn err(&self, msg: impl Into<String>) -> ParseError {
        ParseError::new(self.line, msg)
    }

    pub(crate) fn next_line(&mut self) -> std::result::Result<Option<&str>, ParseError> {
        loop {
            self.buf.clear();
            let n = self
                .inner
                .read_line(&mut self.buf)
                .map_err(|e| ParseError::new(self.line + 1, format!("read failed: {e}")))?;
            if n == 0 {
                return Ok(None);
            }
            self.line += 1;
            let t = self.buf.trim();
            if !t.is_empty() && !t.starts_with('#') {
                return Ok(Some(self.buf.trim()));
            }
        }
    }

    pub(crate) fn expect_line(&mut self, what: &str) -> std::result::Result<&str, ParseError> {
        let line = self.line;
        match self.next_line()? {
            Some(l) => Ok(l),
            None => Err(ParseError::new(line + 1, format!("unexpected end of file, expected {what}"))),
        }
    }

    /// Consumes the `rischan-<kind> <version>` header.
    pub(crate) fn header(&mut self, kind: &str) -> std::result::Result<(), ParseError> {
        let want = format!("rischan-{kind}");
        let l = self.expect_line("format header")?.to_string();
        let mut it = l.split_whitespace();
        if it.next() != Some(want.as_str()) {
            return Err(self.err(format!("expected header `{want} {FORMAT_VERSION}`, found `{l}`")));
        }
        match it.next().map(str::parse::<u32>) {
            Some(Ok(FORMAT_VERSION)) => Ok(()),
            Some(Ok(v)) => Err(self.err(format!("unsupported {want} version {v}"))),
            _ => Err(self.err(format!("missing or malformed version in `{l}`"))),
        }
    }
}

pub(crate) fn parse_f64(tok: &str, line: usize, what: &str) -> std::result::Result<f64, ParseError> {
    tok.parse::<f64>()
        .map_err(|_| ParseError::new(line, format!("malformed number `{tok}` for {what}")))
}

pub(crate) fn parse_usize(tok: &str, line: usize, what: &str) -> std::result::Result<usize, ParseError> {
    tok.parse::<usize>()
        .map_err(|_| ParseError::new(line, format!("malformed count `{tok}` for {what}")))
}

/// Splits `key=value` tokens of a line into an ordered list.
pub(crate) fn key_values(line: &str, lineno: usize) -> std::result::Result<Vec<(&str, &str)>, ParseError> {
    line.split_whitespace()
        .map(|tok| {
            tok.split_once('=')
                .ok_or_else(|| ParseError::new(lineno, format!("expected key=value, found `{tok}`")))
        })
        .collect()
}

pub(crate) fn lookup<'a>(
    kv: &[(&'a str, &'a str)],
    key: &str,
    line: usize,
) -> std::result::Result<&'a str, ParseError> {
    kv.iter()
        .find(|(k, _)| *k == key)
        .map(|(_, v)| *v)
        .ok_or_else(|| ParseError::new(line, format!("missing field `{key}`")))
}

#[allow(dead_code)]
pub(crate) fn open(path: &Path) -> Result<std::io::BufReader<std::fs::File>> {
    let f = std::fs::File::open(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    Ok(std::io::BufReader::new(f))
}

/// Splits `key = value`; keys without spaces.
pub(crate) fn assignment(line: &str, lineno: usize) -> std::result::Result<(&str, &str), ParseError> {
    line.split_once('=')
        .map(|(k, v)| (k.trim(), v.trim()))
        .ok_or_else(|| ParseError::new(lineno, format!("expected `key = value`, found `{line}`")))
}
