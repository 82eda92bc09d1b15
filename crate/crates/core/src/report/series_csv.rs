use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::ingest::{CategoryMatrix, YearMonth};

/// Header `month,<category>...`, then one `YYYY-MM,<values>...` row per month.
/// Values use the shortest representation that parses back to the same f64.
pub fn write_series_csv<W: Write>(matrix: &CategoryMatrix, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let mut header = vec!["month".to_string()];
    header.extend(matrix.categories().iter().cloned());
    w.write_record(&header)?;
    for t in 0..matrix.len() {
        let mut row = vec![matrix.month(t).to_string()];
        row.extend(matrix.rows().iter().map(|r| r[t].to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Inverse of [`write_series_csv`]. Months must be contiguous.
pub fn read_series_csv<R: Read>(input: R) -> Result<CategoryMatrix> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = rdr.headers()?.clone();
    if header.len() < 2 {
        return Err(Error::Config(
            "series CSV needs a month column and at least one category".into(),
        ));
    }
    let categories: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let mut start: Option<YearMonth> = None;
    let mut values = vec![Vec::new(); categories.len()];
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let parse_err = |reason: String| Error::Parse { line, reason };
        let month: YearMonth = rec[0].parse().map_err(|e: Error| parse_err(e.to_string()))?;
        let first = *start.get_or_insert(month);
        if first.add_months(i as i64) != month {
            return Err(parse_err(format!("month {month} breaks the contiguous sequence")));
        }
        for (c, cell) in rec.iter().skip(1).enumerate() {
            let v: f64 = cell
                .trim()
                .parse()
                .map_err(|_| parse_err(format!("bad value {cell:?}")))?;
            values[c].push(v);
        }
    }
    let start = start.ok_or_else(|| Error::invalid("series CSV has no rows"))?;
    CategoryMatrix::new(start, categories, values)
}
