use std::io::Read;
use std::path::Path;

use chrono::{NaiveDate, NaiveDateTime, NaiveTime};
use serde::{Deserialize, Serialize};

use super::catalog::normalize_category;
use crate::error::{Error, Result};

/// One 311 complaint event.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ServiceRequestRecord {
    pub created_date: NaiveDate,
    pub created_time: Option<NaiveTime>,
    pub complaint_type: String,
}

/// One legislative bill.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BillRecord {
    pub create_date: NaiveDate,
    pub title: String,
    pub subject: String,
    /// `None` stands for the "N/A" area.
    pub health_area: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RequestSchema {
    pub date_column: String,
    pub date_format: String,
    pub type_column: String,
}

impl Default for RequestSchema {
    fn default() -> Self {
        Self {
            date_column: "Created Date".into(),
            date_format: "%m/%d/%Y %I:%M:%S %p".into(),
            type_column: "Complaint Type".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct BillSchema {
    pub date_column: String,
    pub date_format: String,
    pub title_column: String,
    pub subject_column: Option<String>,
    pub area_column: Option<String>,
}

impl Default for BillSchema {
    fn default() -> Self {
        Self {
            date_column: "Create Date".into(),
            date_format: "%Y-%m-%d".into(),
            title_column: "Bill Title".into(),
            subject_column: Some("Bill Subject".into()),
            area_column: Some("Health Area".into()),
        }
    }
}

/// Column names and date formats for both input files.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct SchemaConfig {
    pub requests: RequestSchema,
    pub bills: BillSchema,
}

impl SchemaConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    /// 1-based line in the source file (the header is line 1).
    pub line: u64,
    pub reason: String,
}

/// Parsed rows plus the rows that were skipped.
#[derive(Debug, Clone, PartialEq)]
pub struct Parsed<T> {
    pub records: Vec<T>,
    pub rejections: Vec<Rejection>,
}

/// Parse a date that may or may not carry a time-of-day under `format`.
pub fn parse_timestamp(raw: &str, format: &str) -> Option<(NaiveDate, Option<NaiveTime>)> {
    let raw = raw.trim();
    if let Ok(dt) = NaiveDateTime::parse_from_str(raw, format) {
        return Some((dt.date(), Some(dt.time())));
    }
    NaiveDate::parse_from_str(raw, format).ok().map(|d| (d, None))
}

fn column_index(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h.trim_start_matches('\u{feff}').trim() == name)
        .ok_or_else(|| Error::Config(format!("missing column {name:?}")))
}

/// Drive a CSV reader, routing per-row failures to rejections (or to an
/// error in strict mode).
fn parse_rows<R, T>(
    reader: R,
    strict: bool,
    resolve: impl FnOnce(&csv::StringRecord) -> Result<Box<dyn Fn(&csv::StringRecord) -> std::result::Result<T, String>>>,
) -> Result<Parsed<T>>
where
    R: Read,
{
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let convert = resolve(&headers)?;
    let mut out = Parsed {
        records: Vec::new(),
        rejections: Vec::new(),
    };
    let width = headers.len();
    for row in rdr.records() {
        let (line, outcome) = match row {
            Ok(rec) => {
                let line = rec.position().map_or(0, |p| p.line());
                let outcome = if rec.len() != width {
                    Err(format!("expected {width} fields, found {}", rec.len()))
                } else {
                    convert(&rec)
                };
                (line, outcome)
            }
            Err(e) => match e.kind() {
                csv::ErrorKind::Io(_) => return Err(e.into()),
                _ => (e.position().map_or(0, |p| p.line()), Err(e.to_string())),
            },
        };
        match outcome {
            Ok(rec) => out.records.push(rec),
            Err(reason) if strict => return Err(Error::Parse { line, reason }),
            Err(reason) => out.rejections.push(Rejection { line, reason }),
        }
    }
    Ok(out)
}

/// Parse a header-bearing service-request CSV.
///
/// Complaint types are normalized (see [`normalize_category`]).
pub fn parse_requests<R: Read>(
    reader: R,
    schema: &RequestSchema,
    strict: bool,
) -> Result<Parsed<ServiceRequestRecord>> {
    let schema = schema.clone();
    parse_rows(reader, strict, move |headers| {
        let date_idx = column_index(headers, &schema.date_column)?;
        let type_idx = column_index(headers, &schema.type_column)?;
        let fmt = schema.date_format;
        Ok(Box::new(move |rec: &csv::StringRecord| {
            let raw_date = &rec[date_idx];
            let (created_date, created_time) =
                parse_timestamp(raw_date, &fmt).ok_or_else(|| format!("unparseable date {raw_date:?}"))?;
            let complaint_type = normalize_category(&rec[type_idx]).ok_or("empty complaint type")?;
            Ok(ServiceRequestRecord {
                created_date,
                created_time,
                complaint_type,
            })
        }))
    })
}

/// Parse a header-bearing bills CSV. An area column, when configured and
/// present, seeds `health_area`; "N/A" and blanks map to `None`.
pub fn parse_bills<R: Read>(reader: R, schema: &BillSchema, strict: bool) -> Result<Parsed<BillRecord>> {
    let schema = schema.clone();
    parse_rows(reader, strict, move |headers| {
        let date_idx = column_index(headers, &schema.date_column)?;
        let title_idx = column_index(headers, &schema.title_column)?;
        let subject_idx = match &schema.subject_column {
            Some(c) => Some(column_index(headers, c)?),
            None => None,
        };
        // An absent area column is tolerated: bills are classified from titles anyway.
        let area_idx = schema
            .area_column
            .as_deref()
            .and_then(|c| column_index(headers, c).ok());
        let fmt = schema.date_format;
        Ok(Box::new(move |rec: &csv::StringRecord| {
            let raw_date = &rec[date_idx];
            let (create_date, _) =
                parse_timestamp(raw_date, &fmt).ok_or_else(|| format!("unparseable date {raw_date:?}"))?;
            let health_area = area_idx.and_then(|i| {
                let v = rec[i].trim();
                if v.eq_ignore_ascii_case("n/a") {
                    None
                } else {
                    normalize_category(v)
                }
            });
            Ok(BillRecord {
                create_date,
                title: rec[title_idx].trim().to_string(),
                subject: subject_idx.map(|i| rec[i].trim().to_string()).unwrap_or_default(),
                health_area,
            })
        }))
    })
}

pub fn parse_requests_file(path: &Path, schema: &RequestSchema, strict: bool) -> Result<Parsed<ServiceRequestRecord>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_requests(std::io::BufReader::new(file), schema, strict)
}

pub fn parse_bills_file(path: &Path, schema: &BillSchema, strict: bool) -> Result<Parsed<BillRecord>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_bills(std::io::BufReader::new(file), schema, strict)
}
