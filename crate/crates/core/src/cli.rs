//! Command-line front end.
//!
//! Configuration precedence is flags, then the `--config` file, then
//! defaults. Relative paths inside a config file are resolved against the
//! file's directory; relative paths given as flags against the working
//! directory.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::Error;
use crate::ingest::{self, classify_bill, KeywordDictionary, SchemaConfig};
use crate::pipeline::{self, PipelineConfig};
use crate::report::{self, ChangePoint, Legislation};
use crate::seasonal::{self, MONTHS_PER_YEAR};
use crate::segmentation;

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_DATA: u8 = 3;
pub const EXIT_DEGENERATE: u8 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "polichange",
    version,
    about = "Change points in monthly complaint series and their link to legislation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

// Parsed once per process, so the size of `RunArgs` does not matter.
#[allow(clippy::large_enum_variant)]
#[derive(Debug, Subcommand)]
pub enum Command {
    /// Full pipeline: ingest, detect, test, and write report.json, series/ and charts/.
    Run(RunArgs),
    /// Change points for each column of a series CSV; JSON on stdout.
    Detect(DetectArgs),
    /// Assign a health area to every bill by title keywords.
    Classify(ClassifyArgs),
    /// Print the p-values recorded in a report.
    Stats(StatsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectionArg {
    Penalized,
    FixedK,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpanArg {
    Intersect,
    Complaints,
}

/// `auto` or a non-negative number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaArg {
    Auto,
    Value(f64),
}

fn parse_beta(s: &str) -> std::result::Result<BetaArg, String> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(BetaArg::Auto);
    }
    let v: f64 = s
        .parse()
        .map_err(|_| format!("expected `auto` or a number, got {s:?}"))?;
    if v.is_nan() || v < 0.0 {
        return Err(format!("beta must be non-negative, got {s}"));
    }
    Ok(BetaArg::Value(v))
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// JSON file with any subset of the options below.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub requests: Option<PathBuf>,
    #[arg(long)]
    pub bills: Option<PathBuf>,
    #[arg(long)]
    pub dictionary: Option<PathBuf>,
    #[arg(long)]
    pub schema: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub subsample_n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub max_categories: Option<usize>,
    #[arg(long)]
    pub min_fraction: Option<f64>,
    #[arg(long)]
    pub group_threshold: Option<f64>,
    #[arg(long, value_enum)]
    pub detection: Option<DetectionArg>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, value_parser = parse_beta)]
    pub beta: Option<BetaArg>,
    #[arg(long)]
    pub min_segment_length: Option<usize>,
    #[arg(long)]
    pub window_months: Option<usize>,
    #[arg(long)]
    pub n_perm: Option<usize>,
    #[arg(long)]
    pub deseasonalize_bills: bool,
    #[arg(long, value_enum)]
    pub association_span: Option<SpanArg>,
    #[arg(long)]
    pub strict: bool,
    /// Free-form timestamp recorded in the report metadata.
    #[arg(long)]
    pub timestamp: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct DetectArgs {
    /// Series CSV: a `month` column followed by one column per series.
    #[arg(long)]
    pub input: PathBuf,
    /// Restrict to these columns.
    #[arg(long)]
    pub column: Vec<String>,
    #[arg(long, value_enum, default_value = "penalized")]
    pub detection: DetectionArg,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, value_parser = parse_beta, default_value = "auto")]
    pub beta: BetaArg,
    #[arg(long, default_value_t = segmentation::DEFAULT_MIN_SEGMENT_LENGTH)]
    pub min_segment_length: usize,
    /// Remove the month-of-year profile before detection.
    #[arg(long)]
    pub deseasonalize: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub bills: PathBuf,
    #[arg(long)]
    pub dictionary: Option<PathBuf>,
    #[arg(long)]
    pub schema: Option<PathBuf>,
    /// Output CSV; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Clone, Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub report: PathBuf,
}

/// Either a usage problem (exit 2) or a failure while working (exit 3/4).
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Run(e) => match e.root() {
                Error::Degenerate(_) => EXIT_DEGENERATE,
                _ => EXIT_DATA,
            },
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage error: {m}"),
            Failure::Run(e) => write!(f, "{e}"),
        }
    }
}

fn resolve(base: &Path, v: &mut Value) {
    if let Value::String(s) = v {
        let p = Path::new(s.as_str());
        if p.is_relative() {
            *s = base.join(p).to_string_lossy().into_owned();
        }
    }
}

const PATH_KEYS: [&str; 5] = ["requests", "bills", "dictionary", "schema", "out"];

/// Merge flags over the config file over defaults and validate the result.
pub fn parse_config(args: &RunArgs) -> std::result::Result<PipelineConfig, Failure> {
    let mut merged = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
            let mut v: Value =
                serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("config {}: {e}", path.display())))?;
            let Value::Object(map) = &mut v else {
                return Err(Failure::Usage(format!(
                    "config {} must hold a JSON object",
                    path.display()
                )));
            };
            let base = path.parent().unwrap_or(Path::new(""));
            for key in PATH_KEYS {
                if let Some(val) = map.get_mut(key) {
                    resolve(base, val);
                }
            }
            map.clone()
        }
        None => Map::new(),
    };

    let mut set = |key: &str, v: Value| {
        merged.insert(key.to_string(), v);
    };
    let path = |p: &PathBuf| Value::String(p.to_string_lossy().into_owned());
    if let Some(p) = &args.requests {
        set("requests", path(p));
    }
    if let Some(p) = &args.bills {
        set("bills", path(p));
    }
    if let Some(p) = &args.dictionary {
        set("dictionary", path(p));
    }
    if let Some(p) = &args.schema {
        set("schema", path(p));
    }
    if let Some(p) = &args.out {
        set("out", path(p));
    }
    if let Some(v) = args.subsample_n {
        set("subsample_n", v.into());
    }
    if let Some(v) = args.seed {
        set("seed", v.into());
    }
    if let Some(v) = args.max_categories {
        set("max_categories", v.into());
    }
    if let Some(v) = args.min_fraction {
        set("min_fraction", v.into());
    }
    if let Some(v) = args.group_threshold {
        set("group_threshold", v.into());
    }
    if let Some(v) = args.detection {
        set("detection", enum_value(v));
    }
    if let Some(v) = args.k {
        set("k", v.into());
    }
    match args.beta {
        Some(BetaArg::Auto) => set("beta", Value::Null),
        Some(BetaArg::Value(b)) => set("beta", b.into()),
        None => {}
    }
    if let Some(v) = args.min_segment_length {
        set("min_segment_length", v.into());
    }
    if let Some(v) = args.window_months {
        set("window_months", v.into());
    }
    if let Some(v) = args.n_perm {
        set("n_perm", v.into());
    }
    if args.deseasonalize_bills {
        set("deseasonalize_bills", true.into());
    }
    if let Some(v) = args.association_span {
        set("association_span", enum_value(v));
    }
    if args.strict {
        set("strict", true.into());
    }

    let cfg: PipelineConfig =
        serde_json::from_value(Value::Object(merged)).map_err(|e| Failure::Usage(e.to_string()))?;
    cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    if cfg.out.is_none() {
        return Err(Failure::Usage("missing required path: out".into()));
    }
    Ok(cfg)
}

fn enum_value<T: Serialize>(v: T) -> Value {
    serde_json::to_value(v).expect("enum serializes")
}

fn cmd_run(args: &RunArgs) -> std::result::Result<(), Failure> {
    let cfg = parse_config(args)?;
    let out_dir = cfg.out.clone().expect("validated");
    let output = pipeline::run(&cfg, args.timestamp.clone())?;
    let written = pipeline::write_outputs(&output, &out_dir)?;
    eprintln!(
        "wrote {} files to {} ({} categories, {} change points)",
        written.len(),
        out_dir.display(),
        output.report.categories.len(),
        output
            .report
            .categories
            .iter()
            .map(|c| c.detection.change_points.len())
            .sum::<usize>()
    );
    Ok(())
}

#[derive(Serialize)]
struct DetectedSeries {
    label: String,
    method: &'static str,
    penalty: Option<f64>,
    total_cost: f64,
    dividers: Vec<usize>,
    change_points: Vec<ChangePoint>,
}

fn cmd_detect(args: &DetectArgs) -> std::result::Result<(), Failure> {
    match (args.detection, args.k) {
        (DetectionArg::FixedK, None) => return Err(Failure::Usage("fixed-k detection needs --k".into())),
        (DetectionArg::Penalized, Some(_)) => {
            return Err(Failure::Usage("--k only applies to fixed-k detection".into()))
        }
        _ => {}
    }
    if args.min_segment_length == 0 {
        return Err(Failure::Usage("min-segment-length must be at least 1".into()));
    }
    let file = std::fs::File::open(&args.input).map_err(|e| Error::io(&args.input, e))?;
    let matrix = report::read_series_csv(std::io::BufReader::new(file))?;
    for c in &args.column {
        if matrix.row(c).is_none() {
            return Err(Failure::Usage(format!("no column {c:?} in {}", args.input.display())));
        }
    }
    let mut out = Vec::new();
    for (label, row) in matrix.categories().iter().zip(matrix.rows()) {
        if !args.column.is_empty() && !args.column.contains(label) {
            continue;
        }
        let series = if args.deseasonalize {
            seasonal::deseasonalize(row, MONTHS_PER_YEAR, matrix.start().phase())?.1
        } else {
            row.clone()
        };
        let (seg, penalty, method) = match args.detection {
            DetectionArg::Penalized => {
                let beta = match args.beta {
                    BetaArg::Auto => segmentation::default_penalty(&series),
                    BetaArg::Value(b) => b,
                };
                (
                    segmentation::detect_penalized(&series, beta, args.min_segment_length)?,
                    Some(beta),
                    "penalized",
                )
            }
            DetectionArg::FixedK => (
                segmentation::detect_fixed_k(&series, args.k.expect("checked"), args.min_segment_length)?,
                None,
                "fixed_k",
            ),
        };
        let change_points = segmentation::inflections(&series, &seg)?
            .into_iter()
            .map(|(index, direction)| ChangePoint {
                index,
                month: matrix.start().add_months(index as i64),
                direction,
                legislation: Legislation::from(direction),
            })
            .collect();
        out.push(DetectedSeries {
            label: label.clone(),
            method,
            penalty,
            total_cost: seg.total_cost(),
            dividers: seg.dividers().to_vec(),
            change_points,
        });
    }
    let bytes = report::to_stable_json(&out).map_err(Error::from)?;
    std::io::stdout().write_all(&bytes).map_err(Error::from)?;
    Ok(())
}

fn cmd_classify(args: &ClassifyArgs) -> std::result::Result<(), Failure> {
    let schema = match &args.schema {
        Some(p) => SchemaConfig::from_json_file(p)?,
        None => SchemaConfig::default(),
    };
    let dict = match &args.dictionary {
        Some(p) => KeywordDictionary::from_json_file(p)?,
        None => KeywordDictionary::builtin(),
    };
    let parsed = ingest::parse_bills_file(&args.bills, &schema.bills, args.strict)?;
    let sink: Box<dyn Write> = match &args.out {
        Some(p) => Box::new(std::fs::File::create(p).map_err(|e| Error::io(p, e))?),
        None => Box::new(std::io::stdout().lock()),
    };
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(sink);
    w.write_record(["Create Date", "Bill Title", "Health Area"])
        .map_err(Error::from)?;
    let mut matched = 0usize;
    for b in &parsed.records {
        let area = classify_bill(b, &dict);
        matched += usize::from(area.is_some());
        let date = b.create_date.format("%Y-%m-%d").to_string();
        w.write_record([date.as_str(), b.title.as_str(), area.unwrap_or("N/A")])
            .map_err(Error::from)?;
    }
    w.flush().map_err(Error::from)?;
    eprintln!(
        "{} bills classified, {} N/A, {} rows rejected",
        matched,
        parsed.records.len() - matched,
        parsed.rejections.len()
    );
    Ok(())
}

fn p_or_na(p: Option<f64>) -> String {
    p.map_or_else(|| "NA".into(), report::format_float)
}

fn cmd_stats(args: &StatsArgs) -> std::result::Result<(), Failure> {
    let report = report::read_report_json(&args.report)?;
    report.validate()?;
    let mut out = std::io::stdout().lock();
    let mut lines = String::from("category\tassociation_p\tyearly_chi2_p\n");
    for c in &report.categories {
        lines.push_str(&format!(
            "{}\t{}\t{}\n",
            c.label,
            p_or_na(c.association.as_ref().map(|a| a.p_value)),
            p_or_na(c.yearly_chi_square.as_ref().map(|y| y.result.p_value))
        ));
    }
    lines.push_str(&format!(
        "all bills\tNA\t{}\n",
        p_or_na(report.bills_per_year.as_ref().map(|y| y.result.p_value))
    ));
    out.write_all(lines.as_bytes()).map_err(Error::from)?;
    Ok(())
}

pub fn execute(cli: &Cli) -> std::result::Result<(), Failure> {
    match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Detect(a) => cmd_detect(a),
        Command::Classify(a) => cmd_classify(a),
        Command::Stats(a) => cmd_stats(a),
    }
}

/// Parse `args`, run, report any error on stderr, and map it to an exit code.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK });
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::from(EXIT_OK),
        Err(f) => {
            eprintln!("polichange: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}
