use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::parallel::{self, Execution};

/// Median with the two middle values averaged on even lengths.
pub fn component_median(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::invalid("median of an empty sequence"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(median_of_sorted(&sorted))
}

pub(crate) fn median_of_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

fn check_segment(len: usize, a: usize, b: usize) -> Result<()> {
    if a >= b || b > len {
        return Err(Error::invalid(format!(
            "segment [{a}, {b}) is empty or outside a series of length {len}"
        )));
    }
    Ok(())
}

/// Sum of absolute deviations of `series[a..b]` from its median.
pub fn segment_cost_l1(series: &[f64], a: usize, b: usize) -> Result<f64> {
    check_segment(series.len(), a, b)?;
    let seg = &series[a..b];
    let med = component_median(seg)?;
    Ok(seg.iter().map(|y| (y - med).abs()).sum())
}

/// Multivariate form: per-component L1 deviations from per-component medians,
/// summed over components. All components must share one length.
pub fn segment_cost_l1_multi(components: &[&[f64]], a: usize, b: usize) -> Result<f64> {
    let len = common_length(components)?;
    check_segment(len, a, b)?;
    components.iter().map(|c| segment_cost_l1(c, a, b)).sum()
}

fn common_length(components: &[&[f64]]) -> Result<usize> {
    let Some(first) = components.first() else {
        return Err(Error::invalid("no components"));
    };
    if components.iter().any(|c| c.len() != first.len()) {
        return Err(Error::invalid("components differ in length"));
    }
    Ok(first.len())
}

#[derive(Clone, Copy, PartialEq)]
struct Key(f64);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Streaming L1-about-the-median cost: a max-heap holds the lower half
/// (including the median on odd counts), a min-heap the upper half.
///
/// With sorted values s and n = |s|, the cost is
/// sum(upper) - sum(lower) + (n odd ? median : 0).
#[derive(Default)]
struct RunningL1 {
    lower: BinaryHeap<Key>,
    upper: BinaryHeap<Reverse<Key>>,
    sum_lower: f64,
    sum_upper: f64,
}

impl RunningL1 {
    fn push(&mut self, x: f64) {
        match self.lower.peek() {
            Some(top) if x > top.0 => {
                self.upper.push(Reverse(Key(x)));
                self.sum_upper += x;
            }
            _ => {
                self.lower.push(Key(x));
                self.sum_lower += x;
            }
        }
        if self.lower.len() > self.upper.len() + 1 {
            let Key(v) = self.lower.pop().expect("non-empty");
            self.sum_lower -= v;
            self.upper.push(Reverse(Key(v)));
            self.sum_upper += v;
        } else if self.upper.len() > self.lower.len() {
            let Reverse(Key(v)) = self.upper.pop().expect("non-empty");
            self.sum_upper -= v;
            self.lower.push(Key(v));
            self.sum_lower += v;
        }
    }

    fn cost(&self) -> f64 {
        let odd = (self.lower.len() + self.upper.len()) % 2 == 1;
        let mid = if odd {
            self.lower.peek().map_or(0.0, |k| k.0)
        } else {
            0.0
        };
        (self.sum_upper - self.sum_lower + mid).max(0.0)
    }
}

/// All segment costs c(a, b), 0 ≤ a < b ≤ T, with O(1) lookup.
///
/// Built in O(T² log T). Entries are exact for integer-valued series; on
/// general real data they agree with [`segment_cost_l1`] up to summation
/// rounding.
#[derive(Debug, Clone, PartialEq)]
pub struct CostCache {
    len: usize,
    costs: Vec<f64>,
}

impl CostCache {
    pub fn build(series: &[f64]) -> Self {
        Self::build_with(series, Execution::default())
    }

    pub fn build_with(series: &[f64], exec: Execution) -> Self {
        let len = series.len();
        let rows = parallel::map_range(len, exec, |a| {
            let mut acc = RunningL1::default();
            series[a..]
                .iter()
                .map(|&x| {
                    acc.push(x);
                    acc.cost()
                })
                .collect::<Vec<f64>>()
        });
        Self {
            len,
            costs: rows.concat(),
        }
    }

    /// Sum of per-component caches.
    pub fn build_multi(components: &[&[f64]], exec: Execution) -> Result<Self> {
        let len = common_length(components)?;
        let mut total = Self {
            len,
            costs: vec![0.0; len * (len + 1) / 2],
        };
        for c in components {
            let part = Self::build_with(c, exec);
            for (t, p) in total.costs.iter_mut().zip(part.costs) {
                *t += p;
            }
        }
        Ok(total)
    }

    /// Series length T.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Number of cached segments, T(T+1)/2.
    pub fn entry_count(&self) -> usize {
        self.costs.len()
    }

    fn index(&self, a: usize, b: usize) -> usize {
        a * self.len - a * (a.saturating_sub(1)) / 2 + (b - a - 1)
    }

    /// Cost of `[a, b)`. Panics outside 0 ≤ a < b ≤ T.
    pub fn cost(&self, a: usize, b: usize) -> f64 {
        assert!(a < b && b <= self.len, "segment [{a}, {b}) out of range");
        self.costs[self.index(a, b)]
    }
}
