//! Configuration, output formats and the plain-text cache file shared by
//! the command-line tool.
//!
//! Cache file layout (one entry per line, keys sorted):
//!
//! ```text
//! chiang-ogw-cache v1
//! C d a b value
//! O beta k l2 l3 value
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::analysis::InvariantTable;
use crate::closed_gw::{ClosedGw, ClosedKey};
use crate::exact_arith::ExactRational;
use crate::open_gw::{OpenGw, OpenKey, DEFAULT_BETA_MAX};

pub const CACHE_HEADER: &str = "chiang-ogw-cache v1";
pub const CACHE_ENV: &str = "CHIANG_OGW_CACHE";
/// Largest `β_max` accepted from the command line.
pub const BETA_HARD_CAP: u32 = DEFAULT_BETA_MAX;

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("cache i/o on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("missing or unknown cache header (expected {CACHE_HEADER:?})")]
    Header,
    #[error("cache line {line}: {reason}")]
    Line { line: usize, reason: String },
}

/// Parsed or to-be-written cache contents.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CacheFile {
    pub open: BTreeMap<OpenKey, ExactRational>,
    pub closed: BTreeMap<ClosedKey, ExactRational>,
}

fn parse_fields<const N: usize>(fields: &[&str], line: usize) -> Result<[u32; N], CacheError> {
    let bad = |reason: String| CacheError::Line { line, reason };
    if fields.len() != N + 1 {
        return Err(bad(format!(
            "expected {} fields, found {}",
            N + 1,
            fields.len()
        )));
    }
    let mut out = [0u32; N];
    for (slot, f) in out.iter_mut().zip(fields) {
        *slot = f.parse().map_err(|_| bad(format!("bad integer {f:?}")))?;
    }
    Ok(out)
}

impl CacheFile {
    pub fn from_engines(open: &OpenGw) -> Self {
        CacheFile {
            open: open.snapshot(),
            closed: open.closed().snapshot(),
        }
    }

    /// Loads every entry into the engines (existing entries win).
    pub fn apply(&self, open: &OpenGw) {
        open.closed().load(self.closed.clone());
        open.load(self.open.clone());
    }

    pub fn len(&self) -> usize {
        self.open.len() + self.closed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn render(&self) -> String {
        let mut out = String::from(CACHE_HEADER);
        out.push('\n');
        for (k, v) in &self.closed {
            writeln!(out, "C {} {} {} {}", k.d, k.a, k.b, v).unwrap();
        }
        for (k, v) in &self.open {
            writeln!(out, "O {} {} {} {} {}", k.beta, k.k, k.l2, k.l3, v).unwrap();
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, CacheError> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim_end() == CACHE_HEADER => {}
            _ => return Err(CacheError::Header),
        }
        let mut out = CacheFile::default();
        for (i, raw) in lines {
            let line = i + 1;
            let bad = |reason: String| CacheError::Line { line, reason };
            let fields: Vec<&str> = raw.split_whitespace().collect();
            let Some((&tag, rest)) = fields.split_first() else {
                continue;
            };
            let value: ExactRational = rest
                .last()
                .ok_or_else(|| bad("missing value".into()))?
                .parse()
                .map_err(|e| bad(format!("{e}")))?;
            if value.to_string() != *rest.last().unwrap() {
                return Err(bad("value is not in canonical form".into()));
            }
            let fresh = match tag {
                "O" => {
                    let [beta, k, l2, l3] = parse_fields::<4>(rest, line)?;
                    let key = OpenKey::new(beta, k, l2, l3)
                        .ok_or_else(|| bad("open key violates the degree axiom".into()))?;
                    out.open.insert(key, value).is_none()
                }
                "C" => {
                    let [d, a, b] = parse_fields::<3>(rest, line)?;
                    let key = ClosedKey::new(d, a, b)
                        .ok_or_else(|| bad("closed key violates the degree axiom".into()))?;
                    out.closed.insert(key, value).is_none()
                }
                other => return Err(bad(format!("unknown record type {other:?}"))),
            };
            if !fresh {
                return Err(bad("duplicate key".into()));
            }
        }
        Ok(out)
    }

    pub fn read(path: &Path) -> Result<Self, CacheError> {
        let text = std::fs::read_to_string(path).map_err(|source| CacheError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Writes through a sibling temporary file so a crash never leaves a
    /// truncated cache behind.
    pub fn write(&self, path: &Path) -> Result<(), CacheError> {
        let io = |source| CacheError::Io {
            path: path.to_owned(),
            source,
        };
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, self.render()).map_err(io)?;
        std::fs::rename(&tmp, path).map_err(io)
    }
}

/// Builds the closed engine from a cache, for callers that only need
/// closed invariants.
pub fn closed_from_cache(cache: &CacheFile) -> ClosedGw {
    let closed = ClosedGw::new();
    closed.load(cache.closed.clone());
    closed
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
    Md,
    #[default]
    Text,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliConfig {
    pub cache: Option<PathBuf>,
    pub beta_max: u32,
    pub format: OutputFormat,
    /// Substitute for `OGW_{1,0}(Γ2)`.
    pub v: Option<ExactRational>,
}

impl CliConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.beta_max == 0 {
            return Err("--max-beta must be at least 1".into());
        }
        if self.beta_max > BETA_HARD_CAP {
            return Err(format!(
                "--max-beta {} exceeds the hard cap {BETA_HARD_CAP}",
                self.beta_max
            ));
        }
        Ok(())
    }

    /// A cache is only used for the standard basic invariants, so an
    /// overridden run never reads or pollutes it.
    pub fn effective_cache(&self) -> Option<&Path> {
        match self.v {
            Some(_) => None,
            None => self.cache.as_deref(),
        }
    }
}

const COLUMNS: [&str; 6] = ["beta", "k", "l2", "l3", "value", "display"];

fn row_cells(table: &InvariantTable) -> Vec<[String; 6]> {
    table
        .rows()
        .iter()
        .map(|r| {
            [
                r.beta.to_string(),
                r.k.to_string(),
                r.l2.to_string(),
                r.l3.to_string(),
                r.value.to_string(),
                r.display(),
            ]
        })
        .collect()
}

pub fn render_table(table: &InvariantTable, format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => {
            let mut s = table.to_json();
            s.push('\n');
            s
        }
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(COLUMNS).expect("write to memory");
            for cells in row_cells(table) {
                w.write_record(&cells).expect("write to memory");
            }
            String::from_utf8(w.into_inner().expect("flush to memory")).expect("utf-8 fields")
        }
        OutputFormat::Md => {
            let mut s = format!(
                "| {} |\n|{}\n",
                COLUMNS.join(" | "),
                "---|".repeat(COLUMNS.len())
            );
            for cells in row_cells(table) {
                writeln!(s, "| {} |", cells.join(" | ")).unwrap();
            }
            s
        }
        OutputFormat::Text => {
            let cells = row_cells(table);
            let mut widths = COLUMNS.map(|c| c.chars().count());
            for row in &cells {
                for (w, c) in widths.iter_mut().zip(row) {
                    *w = (*w).max(c.chars().count());
                }
            }
            let mut s = String::new();
            let mut line = |row: &[String]| {
                let padded: Vec<String> = row
                    .iter()
                    .zip(widths)
                    .map(|(c, w)| format!("{}{c}", " ".repeat(w - c.chars().count())))
                    .collect();
                writeln!(s, "{}", padded.join("  ").trim_end()).unwrap();
            };
            line(&COLUMNS.map(String::from));
            for row in &cells {
                line(row);
            }
            s
        }
    }
}

/// `p/q (decimal)`, or just the integer.
pub fn format_value(v: &ExactRational) -> String {
    if v.is_integer() {
        v.to_string()
    } else {
        format!("{v} ({})", v.to_f64())
    }
}
