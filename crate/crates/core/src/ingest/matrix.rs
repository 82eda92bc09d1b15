use serde::{Deserialize, Serialize};

use super::month::{MonthSpan, YearMonth};
use crate::error::{Error, Result};

/// Per-category monthly values over a contiguous span of `len()` months.
///
/// Row `i` belongs to `categories[i]`; column `t` is `start + t` months.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryMatrix {
    start: YearMonth,
    categories: Vec<String>,
    values: Vec<Vec<f64>>,
}

impl CategoryMatrix {
    pub fn new(start: YearMonth, categories: Vec<String>, values: Vec<Vec<f64>>) -> Result<Self> {
        if categories.len() != values.len() {
            return Err(Error::invalid(format!(
                "{} category labels for {} rows",
                categories.len(),
                values.len()
            )));
        }
        let len = values.first().map_or(0, Vec::len);
        if len == 0 {
            return Err(Error::invalid("matrix needs at least one month"));
        }
        if values.iter().any(|row| row.len() != len) {
            return Err(Error::invalid("matrix rows differ in length"));
        }
        Ok(Self {
            start,
            categories,
            values,
        })
    }

    pub fn start(&self) -> YearMonth {
        self.start
    }

    pub fn len(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn span(&self) -> MonthSpan {
        MonthSpan {
            start: self.start,
            end: self.start.add_months(self.len() as i64 - 1),
        }
    }

    pub fn month(&self, t: usize) -> YearMonth {
        self.start.add_months(t as i64)
    }

    pub fn categories(&self) -> &[String] {
        &self.categories
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn row(&self, label: &str) -> Option<&[f64]> {
        self.categories
            .iter()
            .position(|c| c == label)
            .map(|i| self.values[i].as_slice())
    }

    /// Per-month totals across categories.
    pub fn column_sums(&self) -> Vec<f64> {
        (0..self.len())
            .map(|t| self.values.iter().map(|row| row[t]).sum())
            .collect()
    }

    /// Restrict to a sub-span. Errors if `span` is not inside the matrix span.
    pub fn slice(&self, span: MonthSpan) -> Result<CategoryMatrix> {
        let own = self.span();
        let (Some(a), Some(b)) = (own.index_of(span.start), own.index_of(span.end)) else {
            return Err(Error::invalid(format!(
                "span {}..{} outside matrix span {}..{}",
                span.start, span.end, own.start, own.end
            )));
        };
        let values = self.values.iter().map(|r| r[a..=b].to_vec()).collect();
        CategoryMatrix::new(span.start, self.categories.clone(), values)
    }

    /// Apply `f` to every row, keeping labels and span.
    pub fn map_rows(&self, mut f: impl FnMut(&[f64]) -> Vec<f64>) -> Result<CategoryMatrix> {
        let values = self.values.iter().map(|r| f(r)).collect();
        CategoryMatrix::new(self.start, self.categories.clone(), values)
    }
}
