//! Loading complaint and bill files and turning them into monthly series.

mod catalog;
mod dictionary;
mod matrix;
mod month;
mod records;

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use catalog::{
    normalize_category, select_top_categories, CatalogEntry, CategoryCatalog, DEFAULT_MAX_CATEGORIES,
    DEFAULT_MIN_FRACTION, HEALTH_AREAS,
};
pub use dictionary::{classify_bill, KeywordDictionary, KeywordRule};
pub use matrix::CategoryMatrix;
pub use month::{MonthSpan, YearMonth};
pub use records::{
    parse_bills, parse_bills_file, parse_requests, parse_requests_file, parse_timestamp, BillRecord, BillSchema,
    Parsed, Rejection, RequestSchema, SchemaConfig, ServiceRequestRecord,
};

use crate::error::{Error, Result};

/// Draw `n` records uniformly without replacement, keeping their original
/// relative order. Returns everything when `n >= records.len()`.
pub fn subsample<T: Clone>(records: &[T], n: usize, seed: u64) -> Result<Vec<T>> {
    if n == 0 {
        return Err(Error::invalid("subsample size must be positive"));
    }
    if n >= records.len() {
        return Ok(records.to_vec());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = rand::seq::index::sample(&mut rng, records.len(), n).into_vec();
    picked.sort_unstable();
    Ok(picked.into_iter().map(|i| records[i].clone()).collect())
}

/// Month range covered by `dates`, or `None` when empty.
pub fn month_span_of(dates: impl IntoIterator<Item = YearMonth>) -> Option<MonthSpan> {
    let mut it = dates.into_iter();
    let first = it.next()?;
    let (lo, hi) = it.fold((first, first), |(lo, hi), m| (lo.min(m), hi.max(m)));
    Some(MonthSpan { start: lo, end: hi })
}

/// Count records per (category, month). Records outside the catalog or the
/// span are dropped.
pub fn bin_monthly(
    records: &[ServiceRequestRecord],
    catalog: &CategoryCatalog,
    span: Option<MonthSpan>,
) -> Result<CategoryMatrix> {
    if catalog.is_empty() {
        return Err(Error::invalid("empty category catalog"));
    }
    let labels = catalog.labels();
    let row_of: HashMap<&str, usize> = labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    let span = match span {
        Some(s) => MonthSpan::new(s.start, s.end)?,
        None => month_span_of(
            records
                .iter()
                .filter(|r| row_of.contains_key(r.complaint_type.as_str()))
                .map(|r| YearMonth::of(r.created_date)),
        )
        .ok_or_else(|| Error::invalid("no records fall in the catalog and no span was given"))?,
    };
    let mut values = vec![vec![0.0; span.len()]; labels.len()];
    for r in records {
        let Some(&row) = row_of.get(r.complaint_type.as_str()) else {
            continue;
        };
        if let Some(t) = span.index_of(YearMonth::of(r.created_date)) {
            values[row][t] += 1.0;
        }
    }
    CategoryMatrix::new(span.start, labels, values)
}

/// Monthly bill counts per area over `span`, plus the monthly total of all
/// bills (classified or not) in the second slot.
fn tally_bills(bills: &[BillRecord], labels: &[String], span: MonthSpan) -> (Vec<Vec<f64>>, Vec<f64>) {
    let row_of: HashMap<&str, usize> = labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    let mut counts = vec![vec![0.0; span.len()]; labels.len()];
    let mut totals = vec![0.0; span.len()];
    for b in bills {
        let Some(t) = span.index_of(YearMonth::of(b.create_date)) else {
            continue;
        };
        totals[t] += 1.0;
        if let Some(&row) = b.health_area.as_deref().and_then(|a| row_of.get(a)) {
            counts[row][t] += 1.0;
        }
    }
    (counts, totals)
}

/// Bills per area per month over `span`. Bills whose area is absent or not
/// among `labels` are ignored.
pub fn bill_monthly_counts(bills: &[BillRecord], labels: &[String], span: MonthSpan) -> Result<CategoryMatrix> {
    let span = MonthSpan::new(span.start, span.end)?;
    let (counts, _) = tally_bills(bills, labels, span);
    CategoryMatrix::new(span.start, labels.to_vec(), counts)
}

/// Percentage of each month's bills assigned to each area. Months without
/// any bills hold 0 for every area.
pub fn bill_monthly_share(bills: &[BillRecord], labels: &[String], span: MonthSpan) -> Result<CategoryMatrix> {
    let span = MonthSpan::new(span.start, span.end)?;
    let (counts, totals) = tally_bills(bills, labels, span);
    let shares = counts
        .into_iter()
        .map(|row| {
            row.into_iter()
                .zip(&totals)
                .map(|(c, &tot)| if tot > 0.0 { 100.0 * c / tot } else { 0.0 })
                .collect()
        })
        .collect();
    CategoryMatrix::new(span.start, labels.to_vec(), shares)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn req(y: i32, m: u32, d: u32, kind: &str) -> ServiceRequestRecord {
        ServiceRequestRecord {
            created_date: NaiveDate::from_ymd_opt(y, m, d).unwrap(),
            created_time: None,
            complaint_type: kind.into(),
        }
    }

    fn bill(y: i32, m: u32, area: Option<&str>) -> BillRecord {
        BillRecord {
            create_date: NaiveDate::from_ymd_opt(y, m, 10).unwrap(),
            title: String::new(),
            subject: String::new(),
            health_area: area.map(str::to_string),
        }
    }

    fn catalog(labels: &[&str]) -> CategoryCatalog {
        CategoryCatalog {
            entries: labels
                .iter()
                .map(|l| CatalogEntry {
                    label: l.to_string(),
                    count: 1,
                    frequency: 0.1,
                })
                .collect(),
        }
    }

    #[test]
    fn subsample_full_population() {
        let recs: Vec<u32> = (0..10).collect();
        assert_eq!(subsample(&recs, 10, 99).unwrap(), recs);
        assert_eq!(subsample(&recs, 50, 1).unwrap(), recs);
    }

    #[test]
    fn subsample_deterministic_and_ordered() {
        let recs: Vec<u32> = (0..100).collect();
        let a = subsample(&recs, 30, 0).unwrap();
        assert_eq!(a, subsample(&recs, 30, 0).unwrap());
        assert_eq!(a.len(), 30);
        assert!(a.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn subsample_seed_changes_draw() {
        let recs: Vec<u32> = (0..1000).collect();
        assert_ne!(subsample(&recs, 300, 0).unwrap(), subsample(&recs, 300, 1).unwrap());
    }

    #[test]
    fn subsample_zero_rejected() {
        assert!(subsample(&[1, 2, 3], 0, 0).is_err());
    }

    #[test]
    fn bins_direct_counts() {
        let mut recs = vec![req(2010, 1, 3, "Rodent"); 3];
        recs.extend(vec![req(2010, 2, 20, "Rodent"); 2]);
        let m = bin_monthly(&recs, &catalog(&["Rodent"]), None).unwrap();
        assert_eq!(m.row("Rodent").unwrap(), &[3.0, 2.0]);
        assert_eq!(m.start().to_string(), "2010-01");
    }

    #[test]
    fn fills_gap_months_and_drops_foreign_types() {
        let recs = vec![
            req(2010, 1, 3, "Rodent"),
            req(2010, 3, 1, "Rodent"),
            req(2009, 6, 1, "Heating"),
        ];
        let m = bin_monthly(&recs, &catalog(&["Rodent"]), None).unwrap();
        assert_eq!(m.row("Rodent").unwrap(), &[1.0, 0.0, 1.0]);
    }

    #[test]
    fn bin_errors() {
        let recs = vec![req(2010, 1, 3, "Heating")];
        assert!(bin_monthly(&recs, &catalog(&["Rodent"]), None).is_err());
        let bad = MonthSpan {
            start: YearMonth::new(2010, 5).unwrap(),
            end: YearMonth::new(2010, 1).unwrap(),
        };
        assert!(bin_monthly(&recs, &catalog(&["Rodent"]), Some(bad)).is_err());
        // explicit span with no in-catalog records is fine: all zeros
        let ok = MonthSpan {
            start: YearMonth::new(2010, 1).unwrap(),
            end: YearMonth::new(2010, 2).unwrap(),
        };
        let m = bin_monthly(&recs, &catalog(&["Rodent"]), Some(ok)).unwrap();
        assert_eq!(m.row("Rodent").unwrap(), &[0.0, 0.0]);
    }

    #[test]
    fn bill_shares() {
        let bills = vec![
            bill(2012, 1, Some("Smoking")),
            bill(2012, 1, None),
            bill(2012, 1, Some("Rodent")),
            bill(2012, 1, Some("Asbestos")),
            bill(2012, 3, Some("Smoking")),
        ];
        let span = MonthSpan::new(YearMonth::new(2012, 1).unwrap(), YearMonth::new(2012, 3).unwrap()).unwrap();
        let labels = vec!["Smoking".to_string(), "Rodent".to_string()];
        let share = bill_monthly_share(&bills, &labels, span).unwrap();
        assert_eq!(share.row("Smoking").unwrap(), &[25.0, 0.0, 100.0]);
        assert_eq!(share.row("Rodent").unwrap(), &[25.0, 0.0, 0.0]);
        let counts = bill_monthly_counts(&bills, &labels, span).unwrap();
        assert_eq!(counts.row("Smoking").unwrap(), &[1.0, 0.0, 1.0]);
    }
}
