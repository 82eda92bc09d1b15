//! End-to-end run: files in, report and charts out.
//!
//! [`run`] computes everything in memory and [`write_outputs`] emits it, so a
//! failing analysis never leaves half a report behind. If emission itself
//! fails, files written so far are removed.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::ingest::{
    self, classify_bill, BillRecord, CategoryMatrix, KeywordDictionary, MonthSpan, SchemaConfig, YearMonth,
};
use crate::parallel::{self, Execution};
use crate::report::{
    self, AnalysisReport, BillActivity, CategoryReport, ChangePoint, DetectionReport, InputDigest, Legislation,
    ReportSpans, RunMetadata, StageCount, YearlyTest, REPORT_SCHEMA,
};
use crate::seasonal::{self, MONTHS_PER_YEAR};
use crate::segmentation::{self, Segmentation};
use crate::stats::{self, AssociationResult, CategoryGroup};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectionMode {
    /// Number of change points chosen by a per-divider penalty.
    #[default]
    Penalized,
    /// Exactly `k` change points.
    FixedK,
}

/// Months over which bills and change points are compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssociationSpan {
    /// Months covered by both the complaint and the bill data.
    #[default]
    Intersect,
    /// The full complaint span; months without bill data count as zero bills.
    Complaints,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub requests: Option<PathBuf>,
    pub bills: Option<PathBuf>,
    /// Keyword dictionary JSON; the built-in dictionary when absent.
    pub dictionary: Option<PathBuf>,
    /// Column-name and date-format overrides.
    pub schema: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub subsample_n: usize,
    pub seed: u64,
    pub max_categories: usize,
    pub min_fraction: f64,
    pub group_threshold: f64,
    pub detection: DetectionMode,
    pub k: Option<usize>,
    /// Penalty per change point; `None` selects the data-driven default.
    pub beta: Option<f64>,
    pub min_segment_length: usize,
    pub window_months: usize,
    pub n_perm: usize,
    pub deseasonalize_bills: bool,
    pub association_span: AssociationSpan,
    /// Fail on the first malformed input row instead of skipping it.
    pub strict: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            requests: None,
            bills: None,
            dictionary: None,
            schema: None,
            out: None,
            subsample_n: 30_000,
            seed: 0,
            max_categories: ingest::DEFAULT_MAX_CATEGORIES,
            min_fraction: ingest::DEFAULT_MIN_FRACTION,
            group_threshold: stats::DEFAULT_GROUP_THRESHOLD,
            detection: DetectionMode::Penalized,
            k: None,
            beta: None,
            min_segment_length: segmentation::DEFAULT_MIN_SEGMENT_LENGTH,
            window_months: stats::DEFAULT_WINDOW_MONTHS,
            n_perm: stats::DEFAULT_PERMUTATIONS,
            deseasonalize_bills: false,
            association_span: AssociationSpan::Intersect,
            strict: false,
        }
    }
}

impl PipelineConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Reject parameter values outside their operations' preconditions.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.requests.is_none() {
            return bad("missing required path: requests".into());
        }
        if self.bills.is_none() {
            return bad("missing required path: bills".into());
        }
        if self.subsample_n == 0 {
            return bad("subsample-n must be at least 1".into());
        }
        if self.max_categories == 0 {
            return bad("max-categories must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.min_fraction) {
            return bad(format!("min-fraction {} outside [0, 1]", self.min_fraction));
        }
        if !(self.group_threshold > 0.0 && self.group_threshold <= 1.0) {
            return bad(format!("group-threshold {} outside (0, 1]", self.group_threshold));
        }
        match (self.detection, self.k) {
            (DetectionMode::FixedK, None) => return bad("fixed-k detection needs --k".into()),
            (DetectionMode::FixedK, Some(0)) => return bad("k must be at least 1".into()),
            (DetectionMode::Penalized, Some(_)) => return bad("k only applies to fixed-k detection".into()),
            _ => {}
        }
        if let Some(beta) = self.beta {
            if beta.is_nan() || beta < 0.0 {
                return bad(format!("beta {beta} must be non-negative"));
            }
            if self.detection == DetectionMode::FixedK {
                return bad("beta only applies to penalized detection".into());
            }
        }
        if self.min_segment_length == 0 {
            return bad("min-segment-length must be at least 1".into());
        }
        if self.n_perm < stats::MIN_PERMUTATIONS {
            return bad(format!("n-perm must be at least {}", stats::MIN_PERMUTATIONS));
        }
        Ok(())
    }

    /// The configuration as echoed into the report. The output directory is
    /// left out so that reports do not depend on where they were written.
    pub fn effective(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("config serializes");
        if let Some(map) = v.as_object_mut() {
            map.remove("out");
        }
        v
    }
}

/// Everything a run produces, before anything touches the disk.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    pub report: AnalysisReport,
    /// Monthly counts per catalog category.
    pub complaints: CategoryMatrix,
    /// Monthly counts per group.
    pub grouped: CategoryMatrix,
    pub deseasonalized: CategoryMatrix,
    /// Per group, over the bill span.
    pub bill_counts: CategoryMatrix,
    pub bill_shares: CategoryMatrix,
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn read_input(role: &str, path: &Path) -> Result<(Vec<u8>, InputDigest)> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let digest = InputDigest {
        role: role.into(),
        path: path.to_string_lossy().into_owned(),
        bytes: bytes.len() as u64,
        sha256: hex(&Sha256::digest(&bytes)),
    };
    Ok((bytes, digest))
}

/// Independent stream seed for the `i`th category (splitmix64 finalizer).
fn stream_seed(seed: u64, i: usize) -> u64 {
    let mut z = seed.wrapping_add((i as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn stage(name: &str, records_in: usize, records_out: usize, detail: impl Into<String>) -> StageCount {
    StageCount {
        stage: name.into(),
        records_in,
        records_out,
        detail: detail.into(),
    }
}

fn yearly_test(span: MonthSpan, monthly: &[f64]) -> std::result::Result<YearlyTest, String> {
    let mut by_year: BTreeMap<i32, f64> = span.months().map(|m| (m.year(), 0.0)).collect();
    for (m, v) in span.months().zip(monthly) {
        *by_year.get_mut(&m.year()).expect("year present") += v;
    }
    let (years, counts): (Vec<i32>, Vec<f64>) = by_year.into_iter().unzip();
    if counts.iter().sum::<f64>() <= 0.0 {
        return Err("no bills; yearly chi-squared test skipped".into());
    }
    match stats::chi_square_gof(&counts, None) {
        Ok(result) => Ok(YearlyTest { years, counts, result }),
        Err(e) => Err(format!("yearly chi-squared test skipped: {e}")),
    }
}

struct Detected {
    label: String,
    members: Vec<String>,
    counts: Vec<f64>,
    profile: Vec<f64>,
    residual: Vec<f64>,
    segmentation: Segmentation,
    penalty: Option<f64>,
}

fn detect_group(cfg: &PipelineConfig, group: &CategoryGroup, counts: &[f64], start: YearMonth) -> Result<Detected> {
    let (profile, residual) = seasonal::deseasonalize(counts, MONTHS_PER_YEAR, start.phase())?;
    let (segmentation, penalty) = match cfg.detection {
        DetectionMode::Penalized => {
            let beta = cfg.beta.unwrap_or_else(|| segmentation::default_penalty(&residual));
            (
                segmentation::detect_penalized(&residual, beta, cfg.min_segment_length)?,
                Some(beta),
            )
        }
        DetectionMode::FixedK => {
            let k = cfg.k.expect("validated");
            (
                segmentation::detect_fixed_k(&residual, k, cfg.min_segment_length)?,
                None,
            )
        }
    };
    Ok(Detected {
        label: group.label.clone(),
        members: group.members.clone(),
        counts: counts.to_vec(),
        profile: profile.offsets().to_vec(),
        residual,
        segmentation,
        penalty,
    })
}

/// Execute every analysis stage. Nothing is written to disk.
pub fn run(cfg: &PipelineConfig, timestamp: Option<String>) -> Result<PipelineOutput> {
    run_with(cfg, timestamp, Execution::default())
}

pub fn run_with(cfg: &PipelineConfig, timestamp: Option<String>, exec: Execution) -> Result<PipelineOutput> {
    cfg.validate()?;
    let requests_path = cfg.requests.as_deref().expect("validated");
    let bills_path = cfg.bills.as_deref().expect("validated");

    let schema = match &cfg.schema {
        Some(p) => SchemaConfig::from_json_file(p).map_err(Error::at("load schema"))?,
        None => SchemaConfig::default(),
    };
    let dictionary = match &cfg.dictionary {
        Some(p) => KeywordDictionary::from_json_file(p).map_err(Error::at("load dictionary"))?,
        None => KeywordDictionary::builtin(),
    };

    let mut stages = Vec::new();
    let mut notes = Vec::new();
    let mut inputs = Vec::new();

    // complaints
    let (bytes, digest) = read_input("requests", requests_path).map_err(Error::at("parse_requests"))?;
    inputs.push(digest);
    let parsed =
        ingest::parse_requests(&bytes[..], &schema.requests, cfg.strict).map_err(Error::at("parse_requests"))?;
    drop(bytes);
    let rows = parsed.records.len() + parsed.rejections.len();
    stages.push(stage(
        "parse_requests",
        rows,
        parsed.records.len(),
        format!("{} malformed rows rejected", parsed.rejections.len()),
    ));
    if parsed.records.is_empty() {
        return Err(Error::at("parse_requests")(Error::invalid(
            "no valid service requests in input",
        )));
    }

    let sample = ingest::subsample(&parsed.records, cfg.subsample_n, cfg.seed).map_err(Error::at("subsample"))?;
    stages.push(stage(
        "subsample",
        parsed.records.len(),
        sample.len(),
        format!(
            "uniform draw of at most {} records without replacement",
            cfg.subsample_n
        ),
    ));
    drop(parsed);

    let catalog = ingest::select_top_categories(&sample, cfg.max_categories, cfg.min_fraction)
        .map_err(Error::at("select_categories"))?;
    if catalog.is_empty() {
        return Err(Error::at("select_categories")(Error::degenerate(format!(
            "no complaint type reaches min-fraction {}",
            cfg.min_fraction
        ))));
    }
    let in_catalog = catalog.entries.iter().map(|e| e.count).sum::<usize>();
    stages.push(stage(
        "select_categories",
        sample.len(),
        in_catalog,
        format!(
            "{} records outside the {}-category catalog dropped",
            sample.len() - in_catalog,
            catalog.len()
        ),
    ));

    let complaints = ingest::bin_monthly(&sample, &catalog, None).map_err(Error::at("bin_monthly"))?;
    let binned = complaints.column_sums().iter().sum::<f64>() as usize;
    stages.push(stage(
        "bin_monthly",
        in_catalog,
        binned,
        "one cell per category and calendar month",
    ));
    let span = complaints.span();

    // correlation and grouping
    let correlation = stats::correlation_matrix(&complaints);
    let undefined = correlation.undefined_rows();
    if !undefined.is_empty() {
        notes.push(format!(
            "correlations undefined for constant series: {}",
            undefined.join(", ")
        ));
    }
    let groups = stats::collapse_groups(&correlation, cfg.group_threshold).map_err(Error::at("group_categories"))?;
    let grouped = stats::group_matrix(&complaints, &groups).map_err(Error::at("group_categories"))?;

    // bills
    let (bytes, digest) = read_input("bills", bills_path).map_err(Error::at("parse_bills"))?;
    inputs.push(digest);
    let parsed_bills = ingest::parse_bills(&bytes[..], &schema.bills, cfg.strict).map_err(Error::at("parse_bills"))?;
    drop(bytes);
    stages.push(stage(
        "parse_bills",
        parsed_bills.records.len() + parsed_bills.rejections.len(),
        parsed_bills.records.len(),
        format!("{} malformed rows rejected", parsed_bills.rejections.len()),
    ));
    if parsed_bills.records.is_empty() {
        return Err(Error::at("parse_bills")(Error::invalid("no valid bills in input")));
    }
    let mut prelabelled = 0;
    let bills: Vec<BillRecord> = parsed_bills
        .records
        .into_iter()
        .map(|mut b| {
            if b.health_area.is_some() {
                prelabelled += 1;
            } else {
                b.health_area = classify_bill(&b, &dictionary).map(str::to_string);
            }
            b
        })
        .collect();
    let mut bill_classification = BTreeMap::new();
    for b in &bills {
        *bill_classification
            .entry(b.health_area.clone().unwrap_or_else(|| "N/A".into()))
            .or_insert(0) += 1;
    }
    let classified = bills.iter().filter(|b| b.health_area.is_some()).count();
    stages.push(stage(
        "classify_bills",
        bills.len(),
        classified,
        format!(
            "{} titles matched no keyword (N/A); {prelabelled} bills kept their input area",
            bills.len() - classified
        ),
    ));
    let bill_span = ingest::month_span_of(bills.iter().map(|b| YearMonth::of(b.create_date))).expect("non-empty");
    let labels = catalog.labels();
    let in_areas = bills
        .iter()
        .filter(|b| b.health_area.as_deref().is_some_and(|a| catalog.contains(a)))
        .count();
    stages.push(stage(
        "bill_series",
        classified,
        in_areas,
        format!(
            "{} classified bills fall in areas outside the catalog",
            classified - in_areas
        ),
    ));

    let bill_counts = ingest::bill_monthly_counts(&bills, &labels, bill_span)
        .and_then(|m| stats::group_matrix(&m, &groups))
        .map_err(Error::at("bill_series"))?;
    let bill_shares = ingest::bill_monthly_share(&bills, &labels, bill_span)
        .and_then(|m| stats::group_matrix(&m, &groups))
        .map_err(Error::at("bill_series"))?;
    let mut all_bills = vec![0.0; bill_span.len()];
    for b in &bills {
        if let Some(t) = bill_span.index_of(YearMonth::of(b.create_date)) {
            all_bills[t] += 1.0;
        }
    }
    let empty_months = all_bills.iter().filter(|&&v| v == 0.0).count();
    if empty_months > 0 {
        notes.push(format!(
            "{empty_months} months without any bills hold a 0% share for every area"
        ));
    }
    let bills_per_year = match yearly_test(bill_span, &all_bills) {
        Ok(t) => Some(t),
        Err(msg) => {
            notes.push(format!("all bills: {msg}"));
            None
        }
    };
    notes.push("yearly chi-squared tests expect equal bill counts in every calendar year".into());
    if bill_span.start.month() != 1 || bill_span.end.month() != 12 {
        notes.push("the bill span covers partial calendar years at its edges".into());
    }

    let assoc_span = match cfg.association_span {
        AssociationSpan::Intersect => span.intersect(&bill_span),
        AssociationSpan::Complaints => Some(span),
    };
    match assoc_span {
        None => notes.push("complaint and bill spans do not overlap; association tests skipped".into()),
        Some(_) if cfg.association_span == AssociationSpan::Intersect => {
            notes.push("association tests use the months covered by both complaints and bills".into())
        }
        Some(_) => {
            notes.push("association tests use the full complaint span; months without bill data count as zero".into())
        }
    }
    notes.push("p-values are per category and not corrected for multiple comparisons".into());
    let assoc_bills = match assoc_span {
        Some(s) => Some(
            ingest::bill_monthly_counts(&bills, &labels, s)
                .and_then(|m| stats::group_matrix(&m, &groups))
                .map_err(Error::at("bill_series"))?,
        ),
        None => None,
    };

    // per-group detection, in parallel
    let detected: Vec<Detected> = parallel::map_range(groups.len(), exec, |i| {
        detect_group(cfg, &groups[i], &grouped.rows()[i], span.start)
    })
    .into_iter()
    .collect::<Result<_>>()
    .map_err(Error::at("detect_change_points"))?;

    let mut categories = Vec::with_capacity(detected.len());
    for (i, d) in detected.into_iter().enumerate() {
        let mut cat_notes = Vec::new();
        let change_points = segmentation::inflections(&d.residual, &d.segmentation)
            .map_err(Error::at("classify_inflections"))?
            .into_iter()
            .map(|(index, direction)| ChangePoint {
                index,
                month: span.start.add_months(index as i64),
                direction,
                legislation: Legislation::from(direction),
            })
            .collect();

        let association = match (assoc_span, &assoc_bills) {
            (Some(s), Some(m)) => association_for(cfg, i, &d.segmentation, span, s, &m.rows()[i], &mut cat_notes)
                .map_err(Error::at("association_test"))?,
            _ => None,
        };
        let yearly_chi_square = match yearly_test(bill_span, &bill_counts.rows()[i]) {
            Ok(t) => Some(t),
            Err(msg) => {
                cat_notes.push(msg);
                None
            }
        };

        categories.push(CategoryReport {
            label: d.label,
            members: d.members,
            monthly_counts: d.counts,
            seasonal_profile: d.profile,
            deseasonalized: d.residual,
            detection: DetectionReport {
                method: match cfg.detection {
                    DetectionMode::Penalized => "penalized",
                    DetectionMode::FixedK => "fixed_k",
                }
                .into(),
                penalty: d.penalty,
                k: cfg.k,
                min_segment_length: cfg.min_segment_length,
                total_cost: d.segmentation.total_cost(),
                dividers: d.segmentation.dividers().to_vec(),
                change_points,
            },
            bills: BillActivity {
                total: bill_counts.rows()[i].iter().sum(),
                monthly_counts: bill_counts.rows()[i].clone(),
                monthly_share: bill_shares.rows()[i].clone(),
            },
            association,
            yearly_chi_square,
            notes: cat_notes,
        });
    }

    let deseasonalized = CategoryMatrix::new(
        span.start,
        grouped.categories().to_vec(),
        categories.iter().map(|c| c.deseasonalized.clone()).collect(),
    )?;

    let config = cfg.effective();
    let config_digest = hex(&Sha256::digest(serde_json::to_vec(&config)?));
    let report = AnalysisReport {
        schema: REPORT_SCHEMA.into(),
        metadata: RunMetadata {
            tool: format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")),
            seed: cfg.seed,
            config,
            config_digest,
            inputs,
            timestamp,
        },
        stages,
        spans: ReportSpans {
            complaints: span,
            bills: Some(bill_span),
            association: assoc_span,
        },
        catalog,
        correlation,
        groups,
        bill_classification,
        bills_per_year,
        categories,
        notes,
    };
    Ok(PipelineOutput {
        report,
        complaints,
        grouped,
        deseasonalized,
        bill_counts,
        bill_shares,
    })
}

/// Permutation test of one group's change points against its bills over
/// `assoc`. Undefined cases become a note, not an error.
fn association_for(
    cfg: &PipelineConfig,
    index: usize,
    seg: &Segmentation,
    span: MonthSpan,
    assoc: MonthSpan,
    bills: &[f64],
    notes: &mut Vec<String>,
) -> Result<Option<AssociationResult>> {
    if seg.interior().is_empty() {
        notes.push("no change points detected; association undefined".into());
        return Ok(None);
    }
    let offset = span.start.months_until(assoc.start) as usize;
    let len = assoc.len();
    let dividers: Vec<usize> = seg
        .interior()
        .iter()
        .filter(|&&d| d > offset && d - offset < len)
        .map(|&d| d - offset)
        .collect();
    if dividers.is_empty() {
        notes.push("no change points inside the association span; association undefined".into());
        return Ok(None);
    }
    let series = if cfg.deseasonalize_bills {
        match seasonal::deseasonalize(bills, MONTHS_PER_YEAR, assoc.start.phase()) {
            Ok((_, r)) => r,
            Err(e) => {
                notes.push(format!("bill series not deseasonalized: {e}"));
                bills.to_vec()
            }
        }
    } else {
        bills.to_vec()
    };
    let r = stats::permutation_association(
        &dividers,
        &series,
        cfg.window_months,
        cfg.n_perm,
        stream_seed(cfg.seed, index),
    )?;
    Ok(Some(r))
}

/// File names under the output directory, relative to it.
pub const REPORT_FILE: &str = "report.json";
pub const SERIES_DIR: &str = "series";
pub const CHARTS_DIR: &str = "charts";

/// Write report.json, series/*.csv and charts/*.svg under `dir`. On failure,
/// every file this call created is removed again.
pub fn write_outputs(output: &PipelineOutput, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let result = write_all(output, dir, &mut written);
    if result.is_err() {
        for p in written.iter().rev() {
            let _ = fs::remove_file(p);
        }
    }
    result.map(|()| written)
}

fn write_all(output: &PipelineOutput, dir: &Path, written: &mut Vec<PathBuf>) -> Result<()> {
    let series_dir = dir.join(SERIES_DIR);
    let charts_dir = dir.join(CHARTS_DIR);
    for d in [dir, &series_dir, &charts_dir] {
        fs::create_dir_all(d).map_err(|e| Error::io(d, e))?;
    }
    let series = [
        ("complaints.csv", &output.complaints),
        ("groups.csv", &output.grouped),
        ("deseasonalized.csv", &output.deseasonalized),
        ("bill_counts.csv", &output.bill_counts),
        ("bill_shares.csv", &output.bill_shares),
    ];
    for (name, m) in series {
        let p = series_dir.join(name);
        written.push(p.clone());
        report::emit_series_csv(m, &p)?;
    }

    let names = report::file_names(output.deseasonalized.categories(), "svg");
    let cats = &output.report.categories;
    let charts: Vec<String> = parallel::map_range(cats.len(), Execution::default(), |i| {
        let c = &cats[i];
        let interior = &c.detection.dividers[1..c.detection.dividers.len() - 1];
        report::svg_chart(
            &format!("{} (deseasonalized)", c.label),
            output.report.spans.complaints.start,
            &c.deseasonalized,
            interior,
        )
    })
    .into_iter()
    .collect::<Result<_>>()?;
    for (name, chart) in names.iter().zip(charts) {
        let p = charts_dir.join(name);
        written.push(p.clone());
        fs::write(&p, chart).map_err(|e| Error::io(&p, e))?;
    }

    let p = dir.join(REPORT_FILE);
    written.push(p.clone());
    report::emit_report_json(&output.report, &p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_documented_values() {
        let c = PipelineConfig::default();
        assert_eq!(c.subsample_n, 30_000);
        assert_eq!(c.seed, 0);
        assert_eq!(c.max_categories, 13);
        assert_eq!(c.min_fraction, 0.005);
        assert_eq!(c.group_threshold, 0.7);
        assert_eq!(c.detection, DetectionMode::Penalized);
        assert_eq!(c.min_segment_length, 2);
        assert_eq!(c.window_months, 3);
        assert_eq!(c.n_perm, 9_999);
        assert!(!c.deseasonalize_bills);
    }

    fn with_paths() -> PipelineConfig {
        PipelineConfig {
            requests: Some("r.csv".into()),
            bills: Some("b.csv".into()),
            ..PipelineConfig::default()
        }
    }

    #[test]
    fn validation() {
        assert!(PipelineConfig::default().validate().is_err());
        assert!(with_paths().validate().is_ok());
        let cases: Vec<fn(&mut PipelineConfig)> = vec![
            |c| c.min_fraction = 1.5,
            |c| c.group_threshold = 0.0,
            |c| c.subsample_n = 0,
            |c| c.n_perm = 10,
            |c| c.min_segment_length = 0,
            |c| c.detection = DetectionMode::FixedK,
            |c| c.k = Some(2),
            |c| c.beta = Some(-1.0),
        ];
        for f in cases {
            let mut c = with_paths();
            f(&mut c);
            assert!(matches!(c.validate(), Err(Error::InvalidArgument(_))), "{c:?}");
        }
    }

    #[test]
    fn config_json_round_trip_and_unknown_keys() {
        let c = with_paths();
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(PipelineConfig::from_json(&text).unwrap(), c);
        assert!(PipelineConfig::from_json(r#"{"sead": 3}"#).is_err());
        let partial = PipelineConfig::from_json(r#"{"seed": 9, "detection": "fixed_k", "k": 2}"#).unwrap();
        assert_eq!(partial.seed, 9);
        assert_eq!(partial.k, Some(2));
        assert_eq!(partial.n_perm, 9_999);
    }

    #[test]
    fn effective_config_omits_output_dir() {
        let mut c = with_paths();
        c.out = Some("/tmp/x".into());
        assert!(c.effective().get("out").is_none());
        assert_eq!(c.effective()["seed"], 0);
    }

    #[test]
    fn stream_seeds_differ() {
        let s: Vec<u64> = (0..5).map(|i| stream_seed(0, i)).collect();
        for i in 0..5 {
            for j in i + 1..5 {
                assert_ne!(s[i], s[j]);
            }
        }
    }

    #[test]
    fn yearly_counts_by_calendar_year() {
        let span = MonthSpan::new(YearMonth::new(2011, 11).unwrap(), YearMonth::new(2012, 2).unwrap()).unwrap();
        let t = yearly_test(span, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(t.years, vec![2011, 2012]);
        assert_eq!(t.counts, vec![3.0, 7.0]);
        assert!(yearly_test(span, &[0.0; 4]).is_err());
    }
}
