use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A calendar month. Orders chronologically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct YearMonth {
    year: i32,
    month: u32,
}

impl YearMonth {
    pub fn new(year: i32, month: u32) -> Result<Self> {
        if !(1..=12).contains(&month) {
            return Err(Error::invalid(format!("month {month} out of range 1..=12")));
        }
        Ok(Self { year, month })
    }

    pub fn of(date: NaiveDate) -> Self {
        Self {
            year: date.year(),
            month: date.month(),
        }
    }

    pub fn year(self) -> i32 {
        self.year
    }

    /// 1-based calendar month.
    pub fn month(self) -> u32 {
        self.month
    }

    /// Month-of-year phase with January = 0.
    pub fn phase(self) -> usize {
        (self.month - 1) as usize
    }

    fn ordinal(self) -> i64 {
        self.year as i64 * 12 + (self.month as i64 - 1)
    }

    fn from_ordinal(ord: i64) -> Self {
        Self {
            year: ord.div_euclid(12) as i32,
            month: ord.rem_euclid(12) as u32 + 1,
        }
    }

    pub fn add_months(self, n: i64) -> Self {
        Self::from_ordinal(self.ordinal() + n)
    }

    /// Signed number of months from `self` to `later`.
    pub fn months_until(self, later: YearMonth) -> i64 {
        later.ordinal() - self.ordinal()
    }
}

impl fmt::Display for YearMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl FromStr for YearMonth {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (y, m) = s
            .rsplit_once('-')
            .ok_or_else(|| Error::invalid(format!("expected YYYY-MM, got {s:?}")))?;
        let year = y.parse().map_err(|_| Error::invalid(format!("bad year in {s:?}")))?;
        let month = m.parse().map_err(|_| Error::invalid(format!("bad month in {s:?}")))?;
        YearMonth::new(year, month)
    }
}

impl Serialize for YearMonth {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for YearMonth {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Inclusive range of months.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonthSpan {
    pub start: YearMonth,
    pub end: YearMonth,
}

impl MonthSpan {
    pub fn new(start: YearMonth, end: YearMonth) -> Result<Self> {
        if end < start {
            return Err(Error::invalid(format!("span end {end} precedes start {start}")));
        }
        Ok(Self { start, end })
    }

    pub fn len(&self) -> usize {
        (self.start.months_until(self.end) + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Index of `month` within the span, if it falls inside.
    pub fn index_of(&self, month: YearMonth) -> Option<usize> {
        let off = self.start.months_until(month);
        (off >= 0 && month <= self.end).then_some(off as usize)
    }

    pub fn contains(&self, month: YearMonth) -> bool {
        self.index_of(month).is_some()
    }

    pub fn intersect(&self, other: &MonthSpan) -> Option<MonthSpan> {
        let start = self.start.max(other.start);
        let end = self.end.min(other.end);
        (start <= end).then_some(MonthSpan { start, end })
    }

    pub fn months(&self) -> impl Iterator<Item = YearMonth> + '_ {
        (0..self.len() as i64).map(|i| self.start.add_months(i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_crosses_year_boundaries() {
        let m = YearMonth::new(2010, 11).unwrap();
        assert_eq!(m.add_months(3).to_string(), "2011-02");
        assert_eq!(m.add_months(-11).to_string(), "2009-12");
        assert_eq!(m.months_until(YearMonth::new(2012, 1).unwrap()), 14);
    }

    #[test]
    fn parse_and_phase() {
        let m: YearMonth = "2014-01".parse().unwrap();
        assert_eq!(m.phase(), 0);
        assert!("2014-13".parse::<YearMonth>().is_err());
        assert!("201401".parse::<YearMonth>().is_err());
    }

    #[test]
    fn span_rejects_reversed_bounds() {
        let a = YearMonth::new(2012, 5).unwrap();
        let b = YearMonth::new(2012, 4).unwrap();
        assert!(MonthSpan::new(a, b).is_err());
        let s = MonthSpan::new(b, a).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.index_of(a), Some(1));
        assert_eq!(s.index_of(a.add_months(1)), None);
    }
}
