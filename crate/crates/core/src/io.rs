//! CSV input and output for series and price files.
//!
//! Dialect: comma separated, UTF-8, decimal point, at most one header row.
//! A header is assumed when the first record does not parse as numbers.

use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::upcross::TimeSeries;

/// A CSV column picked by header name or by 0-based position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnSelector {
    Name(String),
    Index(usize),
}

impl FromStr for ColumnSelector {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.trim().parse::<usize>() {
            Ok(i) => ColumnSelector::Index(i),
            Err(_) => ColumnSelector::Name(s.trim().to_string()),
        })
    }
}

impl fmt::Display for ColumnSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ColumnSelector::Name(n) => f.write_str(n),
            ColumnSelector::Index(i) => write!(f, "#{i}"),
        }
    }
}

struct Table {
    header: Option<Vec<String>>,
    // (1-based line number, fields)
    rows: Vec<(u64, Vec<String>)>,
}

fn read_table(path: &Path) -> Result<Table> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::InvalidSeries(format!("{}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record =
            record.map_err(|e| Error::InvalidSeries(format!("{}: {e}", path.display())))?;
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let line = record.position().map_or(0, |p| p.line());
        rows.push((line, record.iter().map(str::to_string).collect::<Vec<_>>()));
    }
    let header = match rows.first() {
        Some((_, first)) if first.iter().any(|f| f.parse::<f64>().is_err()) => {
            Some(rows.remove(0).1)
        }
        _ => None,
    };
    Ok(Table { header, rows })
}

fn column_index(table: &Table, column: Option<&ColumnSelector>) -> Result<usize> {
    let width = table
        .header
        .as_ref()
        .map(Vec::len)
        .or_else(|| table.rows.first().map(|r| r.1.len()))
        .unwrap_or(0);
    let idx = match column {
        Some(ColumnSelector::Index(i)) => *i,
        Some(ColumnSelector::Name(name)) => table
            .header
            .as_ref()
            .and_then(|h| h.iter().position(|c| c == name))
            .ok_or_else(|| Error::InvalidSeries(format!("no column named {name:?}")))?,
        None => table
            .header
            .as_ref()
            .and_then(|h| h.iter().position(|c| c == "value"))
            .unwrap_or(width.saturating_sub(1)),
    };
    if idx >= width {
        return Err(Error::InvalidSeries(format!(
            "column {idx} out of range, the file has {width} columns"
        )));
    }
    Ok(idx)
}

/// Reads one numeric column: the one selected, else `value`, else the last.
pub fn read_series_csv(path: &Path, column: Option<&ColumnSelector>) -> Result<TimeSeries> {
    let table = read_table(path)?;
    let idx = column_index(&table, column)?;
    let mut values = Vec::with_capacity(table.rows.len());
    for (line, row) in &table.rows {
        let field = row.get(idx).map(String::as_str).unwrap_or("");
        let v: f64 = field
            .parse()
            .map_err(|_| Error::InvalidSeries(format!("line {line}: {field:?} is not a number")))?;
        if !v.is_finite() {
            return Err(Error::InvalidSeries(format!(
                "line {line}: non-finite value {field}"
            )));
        }
        values.push(v);
    }
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned());
    let series = TimeSeries::new(values)?;
    Ok(match name {
        Some(n) => series.with_name(n),
        None => series,
    })
}

/// `t,value` rows with `t` starting at 1. Values use the shortest form that
/// parses back to the same float.
pub fn series_to_csv(values: &[f64]) -> String {
    let mut out = String::from("t,value\n");
    for (i, v) in values.iter().enumerate() {
        writeln!(out, "{},{v}", i + 1).expect("writing to a String cannot fail");
    }
    out
}

pub fn write_series_csv(path: &Path, values: &[f64]) -> Result<()> {
    std::fs::write(path, series_to_csv(values))
        .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReturnsIngestConfig {
    pub path: PathBuf,
    pub column: ColumnSelector,
    pub scale: f64,
    pub drop_nulls: bool,
}

impl ReturnsIngestConfig {
    pub fn new(path: impl Into<PathBuf>, column: ColumnSelector) -> Self {
        Self {
            path: path.into(),
            column,
            scale: 100.0,
            drop_nulls: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RejectedRow {
    pub line: u64,
    pub field: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IngestOutcome {
    /// May hold a single value; see [`IngestOutcome::series`].
    pub returns: Vec<f64>,
    pub prices_used: usize,
    pub nulls_dropped: usize,
    pub rejected: Vec<RejectedRow>,
}

impl IngestOutcome {
    /// The returns as a series for estimation, which needs two values.
    pub fn series(&self) -> Result<TimeSeries> {
        TimeSeries::new(self.returns.clone()).map_err(|e| match e {
            Error::InvalidSeries(msg) => Error::InvalidSeries(format!(
                "returns after removing {} nulls: {msg}",
                self.nulls_dropped
            )),
            other => other,
        })
    }
}

/// `scale * (ln x_t - ln x_{t-1})` over consecutive accepted prices.
///
/// Rows whose price is missing, non-numeric or not strictly positive are
/// skipped and listed in `rejected`.
pub fn ingest_returns(cfg: &ReturnsIngestConfig) -> Result<IngestOutcome> {
    if !(cfg.scale > 0.0 && cfg.scale.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "scale must be > 0, got {}",
            cfg.scale
        )));
    }
    let table = read_table(&cfg.path)?;
    let idx = column_index(&table, Some(&cfg.column))?;
    let mut prices = Vec::with_capacity(table.rows.len());
    let mut rejected = Vec::new();
    for (line, row) in &table.rows {
        let field = row.get(idx).cloned().unwrap_or_default();
        let reason = match field.parse::<f64>() {
            Ok(p) if p.is_finite() && p > 0.0 => {
                prices.push(p);
                continue;
            }
            Ok(p) if p.is_finite() => "nonpositive price".to_string(),
            Ok(_) => "non-finite price".to_string(),
            Err(_) => "not a number".to_string(),
        };
        rejected.push(RejectedRow {
            line: *line,
            field,
            reason,
        });
    }
    if prices.len() < 2 {
        return Err(Error::InvalidSeries(format!(
            "need at least 2 valid prices, found {} ({} rows rejected)",
            prices.len(),
            rejected.len()
        )));
    }
    let mut returns = Vec::with_capacity(prices.len() - 1);
    let mut nulls_dropped = 0;
    for w in prices.windows(2) {
        let r = cfg.scale * (w[1].ln() - w[0].ln());
        if cfg.drop_nulls && r == 0.0 {
            nulls_dropped += 1;
        } else {
            returns.push(r);
        }
    }
    Ok(IngestOutcome {
        returns,
        prices_used: prices.len(),
        nulls_dropped,
        rejected,
    })
}
