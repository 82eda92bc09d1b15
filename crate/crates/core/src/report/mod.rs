//! Machine-readable results: the JSON report, per-series CSV files and SVG
//! charts.
//!
//! Every emitter is a pure function of its input. The only run-specific
//! content is whatever the caller places in [`RunMetadata`].

mod json;
mod series_csv;
mod svg;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{CategoryCatalog, CategoryMatrix, MonthSpan, YearMonth};
use crate::segmentation::Direction;
use crate::stats::{AssociationResult, CategoryGroup, ChiSquareResult, CorrelationMatrix};

pub use json::format_float;
pub(crate) use json::to_stable_json;
pub use series_csv::{read_series_csv, write_series_csv};
pub(crate) use svg::file_names;
pub use svg::{render_svg_chart, slug, svg_chart};

pub const REPORT_SCHEMA: &str = "polichange-report/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    /// Always [`REPORT_SCHEMA`] for reports written by this version.
    pub schema: String,
    pub metadata: RunMetadata,
    /// Record counts entering and leaving each stage, in execution order.
    pub stages: Vec<StageCount>,
    pub spans: ReportSpans,
    pub catalog: CategoryCatalog,
    /// Over the ungrouped catalog categories.
    pub correlation: CorrelationMatrix,
    pub groups: Vec<CategoryGroup>,
    /// Bills per assigned area over the whole bill file; unmatched titles
    /// are counted under "N/A".
    pub bill_classification: BTreeMap<String, usize>,
    /// Goodness-of-fit of all bills per calendar year against equal counts.
    pub bills_per_year: Option<YearlyTest>,
    /// One entry per group, in group order.
    pub categories: Vec<CategoryReport>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    /// Crate name and version that produced the report.
    pub tool: String,
    pub seed: u64,
    /// Effective configuration after merging flags, file and defaults.
    pub config: serde_json::Value,
    /// Hex SHA-256 of the compact JSON form of `config`.
    pub config_digest: String,
    pub inputs: Vec<InputDigest>,
    /// Caller-supplied timestamp; never read from the clock.
    pub timestamp: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub role: String,
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageCount {
    pub stage: String,
    pub records_in: usize,
    pub records_out: usize,
    /// Where the difference went, when there is one.
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportSpans {
    pub complaints: MonthSpan,
    pub bills: Option<MonthSpan>,
    /// Months used for the permutation test.
    pub association: Option<MonthSpan>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryReport {
    pub label: String,
    pub members: Vec<String>,
    /// Monthly counts over `spans.complaints`.
    pub monthly_counts: Vec<f64>,
    /// Additive offsets indexed by calendar month, January first.
    pub seasonal_profile: Vec<f64>,
    pub deseasonalized: Vec<f64>,
    pub detection: DetectionReport,
    pub bills: BillActivity,
    pub association: Option<AssociationResult>,
    pub yearly_chi_square: Option<YearlyTest>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    /// "penalized" or "fixed_k".
    pub method: String,
    pub penalty: Option<f64>,
    pub k: Option<usize>,
    pub min_segment_length: usize,
    pub total_cost: f64,
    /// Full divider list, 0 and T included.
    pub dividers: Vec<usize>,
    pub change_points: Vec<ChangePoint>,
}

/// Bills coinciding with a falling complaint rate count as positive
/// legislation, and with a rising one as negative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Legislation {
    Positive,
    Negative,
}

impl From<Direction> for Legislation {
    fn from(d: Direction) -> Self {
        match d {
            Direction::Negative => Legislation::Positive,
            Direction::Positive => Legislation::Negative,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangePoint {
    /// Divider index into `spans.complaints`; the new regime starts here.
    pub index: usize,
    pub month: YearMonth,
    pub direction: Direction,
    pub legislation: Legislation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BillActivity {
    pub total: f64,
    /// Monthly counts and percentage shares over `spans.bills`.
    pub monthly_counts: Vec<f64>,
    pub monthly_share: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YearlyTest {
    pub years: Vec<i32>,
    pub counts: Vec<f64>,
    pub result: ChiSquareResult,
}

impl AnalysisReport {
    /// Checks the structural invariants a parsed report must satisfy.
    pub fn validate(&self) -> Result<()> {
        if self.schema != REPORT_SCHEMA {
            return Err(Error::Config(format!("unsupported report schema {:?}", self.schema)));
        }
        let t = self.spans.complaints.len();
        for c in &self.categories {
            let d = &c.detection.dividers;
            if d.first() != Some(&0) || d.last() != Some(&t) || d.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Config(format!("{}: malformed divider list", c.label)));
            }
            let interior = &d[1..d.len() - 1];
            if interior.len() != c.detection.change_points.len()
                || interior
                    .iter()
                    .zip(&c.detection.change_points)
                    .any(|(&i, cp)| cp.index != i || cp.month != self.spans.complaints.start.add_months(i as i64))
            {
                return Err(Error::Config(format!(
                    "{}: change points disagree with dividers",
                    c.label
                )));
            }
        }
        Ok(())
    }

    pub fn to_json_bytes(&self) -> Result<Vec<u8>> {
        Ok(json::to_stable_json(self)?)
    }

    pub fn from_json_slice(bytes: &[u8]) -> Result<Self> {
        Ok(serde_json::from_slice(bytes)?)
    }
}

/// Write `report` as pretty JSON with stable float formatting.
pub fn emit_report_json(report: &AnalysisReport, path: &Path) -> Result<()> {
    let bytes = report.to_json_bytes()?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn read_report_json(path: &Path) -> Result<AnalysisReport> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    AnalysisReport::from_json_slice(&bytes)
}

pub fn emit_series_csv(matrix: &CategoryMatrix, path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_series_csv(matrix, std::io::BufWriter::new(file))
}
