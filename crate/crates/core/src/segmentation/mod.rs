//! Offline change-point detection under the least-absolute-deviation cost.
//!
//! A segmentation of `y[0..T)` is a divider list `0 = t_0 < t_1 < .. < t_K = T`;
//! segment `k` is the half-open range `[t_k, t_{k+1})` and costs the sum of
//! absolute deviations from its median. Detection minimizes the total cost,
//! either for a fixed number of interior dividers or with a per-divider penalty.
//! Exact ties resolve to the lexicographically smallest divider list.

mod cost;
mod dp;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use cost::{component_median, segment_cost_l1, segment_cost_l1_multi, CostCache};

use crate::error::{Error, Result};
use crate::parallel::Execution;

pub const DEFAULT_MIN_SEGMENT_LENGTH: usize = 2;

/// Largest series length and change-point count accepted by [`brute_force_segment`].
pub const BRUTE_FORCE_MAX_LEN: usize = 30;
pub const BRUTE_FORCE_MAX_K: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segmentation {
    dividers: Vec<usize>,
    total_cost: f64,
}

impl Segmentation {
    /// Score `dividers` against `series`, summing [`segment_cost_l1`] left to right.
    pub fn evaluate(series: &[f64], dividers: Vec<usize>) -> Result<Self> {
        Self::evaluate_with(series.len(), dividers, |a, b| segment_cost_l1(series, a, b))
    }

    pub fn evaluate_multi(components: &[&[f64]], dividers: Vec<usize>) -> Result<Self> {
        let len = components.first().map_or(0, |c| c.len());
        Self::evaluate_with(len, dividers, |a, b| segment_cost_l1_multi(components, a, b))
    }

    fn evaluate_with(len: usize, dividers: Vec<usize>, cost: impl Fn(usize, usize) -> Result<f64>) -> Result<Self> {
        if dividers.first() != Some(&0) || dividers.last() != Some(&len) || dividers.len() < 2 {
            return Err(Error::invalid(format!(
                "dividers must run from 0 to {len}, got {dividers:?}"
            )));
        }
        if dividers.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid(format!(
                "dividers not strictly increasing: {dividers:?}"
            )));
        }
        let mut total_cost = 0.0;
        for w in dividers.windows(2) {
            total_cost += cost(w[0], w[1])?;
        }
        Ok(Self { dividers, total_cost })
    }

    /// Full divider list including 0 and T.
    pub fn dividers(&self) -> &[usize] {
        &self.dividers
    }

    /// Change points only (dividers strictly inside `(0, T)`).
    pub fn interior(&self) -> &[usize] {
        &self.dividers[1..self.dividers.len() - 1]
    }

    pub fn change_point_count(&self) -> usize {
        self.dividers.len() - 2
    }

    pub fn total_cost(&self) -> f64 {
        self.total_cost
    }

    pub fn series_length(&self) -> usize {
        *self.dividers.last().expect("non-empty")
    }

    /// Half-open `(start, end)` ranges of each segment.
    pub fn segments(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.dividers.windows(2).map(|w| (w[0], w[1]))
    }
}

fn check_series(series: &[f64]) -> Result<()> {
    if series.is_empty() {
        return Err(Error::invalid("empty series"));
    }
    if let Some(t) = series.iter().position(|v| !v.is_finite()) {
        return Err(Error::invalid(format!("non-finite value at index {t}")));
    }
    Ok(())
}

/// Precompute every segment cost of `series`.
pub fn precompute_costs(series: &[f64]) -> CostCache {
    CostCache::build(series)
}

/// Optimal segmentation with exactly `k` change points, each segment at least
/// `min_len` long.
pub fn detect_fixed_k(series: &[f64], k: usize, min_len: usize) -> Result<Segmentation> {
    check_series(series)?;
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    dp::check_feasible(series.len(), k, min_len)?;
    let cache = CostCache::build(series);
    detect_fixed_k_cached(&cache, series, k, min_len)
}

/// [`detect_fixed_k`] reusing a prebuilt cache of `series`.
pub fn detect_fixed_k_cached(cache: &CostCache, series: &[f64], k: usize, min_len: usize) -> Result<Segmentation> {
    if cache.len() != series.len() {
        return Err(Error::invalid("cache was built for a different series"));
    }
    let dividers = dp::fixed_k(cache, k, min_len)?;
    Segmentation::evaluate(series, dividers)
}

/// Optimal segmentation of `series` under cost + `beta` per change point.
pub fn detect_penalized(series: &[f64], beta: f64, min_len: usize) -> Result<Segmentation> {
    detect_penalized_with(series, beta, min_len, Execution::default())
}

pub fn detect_penalized_with(series: &[f64], beta: f64, min_len: usize, exec: Execution) -> Result<Segmentation> {
    check_series(series)?;
    let cache = CostCache::build_with(series, exec);
    let dividers = dp::penalized(&cache, beta, min_len)?;
    Segmentation::evaluate(series, dividers)
}

/// Fixed-K detection on a multivariate series (one slice per component).
pub fn detect_fixed_k_multi(components: &[&[f64]], k: usize, min_len: usize) -> Result<Segmentation> {
    for c in components {
        check_series(c)?;
    }
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    let cache = CostCache::build_multi(components, Execution::default())?;
    let dividers = dp::fixed_k(&cache, k, min_len)?;
    Segmentation::evaluate_multi(components, dividers)
}

/// Default penalty `2·σ̂·ln T`, with σ̂ = 1.4826 × MAD of first differences.
///
/// When the differences have zero MAD the scale falls back to 1.2533 × their
/// mean absolute deviation about the median, and when that is also zero to a
/// tiny positive value so that splits which save nothing are never taken.
pub fn default_penalty(series: &[f64]) -> f64 {
    let n = series.len();
    let floor = 1e-9 * series.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    if n < 2 {
        return floor;
    }
    let diffs: Vec<f64> = series.windows(2).map(|w| w[1] - w[0]).collect();
    let med = component_median(&diffs).expect("non-empty");
    let abs_dev: Vec<f64> = diffs.iter().map(|d| (d - med).abs()).collect();
    let mut sigma = 1.4826 * component_median(&abs_dev).expect("non-empty");
    if sigma == 0.0 {
        sigma = 1.2533 * abs_dev.iter().sum::<f64>() / abs_dev.len() as f64;
    }
    (2.0 * sigma * (n as f64).ln()).max(floor)
}

/// Exhaustive search over all divider placements; the verification oracle
/// for [`detect_fixed_k`]. Limited to `T ≤ 30` and `k ≤ 4`.
pub fn brute_force_segment(series: &[f64], k: usize, min_len: usize) -> Result<Segmentation> {
    check_series(series)?;
    let n = series.len();
    if n > BRUTE_FORCE_MAX_LEN || k > BRUTE_FORCE_MAX_K {
        return Err(Error::invalid(format!(
            "brute force limited to T ≤ {BRUTE_FORCE_MAX_LEN} and K ≤ {BRUTE_FORCE_MAX_K} (got T={n}, K={k})"
        )));
    }
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    dp::check_feasible(n, k, min_len)?;

    let mut best: Option<Segmentation> = None;
    let mut current = Vec::with_capacity(k);
    enumerate(1, n, k, &mut current, &mut |interior| {
        let mut dividers = Vec::with_capacity(k + 2);
        dividers.push(0);
        dividers.extend_from_slice(interior);
        dividers.push(n);
        if dividers.windows(2).any(|w| w[1] - w[0] < min_len) {
            return;
        }
        let seg = Segmentation::evaluate(series, dividers).expect("valid dividers");
        // lexicographic enumeration order: keep the first strict minimum
        if best.as_ref().is_none_or(|b| seg.total_cost < b.total_cost) {
            best = Some(seg);
        }
    });
    best.ok_or_else(|| Error::invalid("no admissible segmentation"))
}

/// Visit every strictly increasing `remaining`-subset of `[from, n)` in
/// lexicographic order.
fn enumerate(from: usize, n: usize, remaining: usize, current: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
    if remaining == 0 {
        visit(current);
        return;
    }
    for t in from..n {
        if n - t < remaining {
            break;
        }
        current.push(t);
        enumerate(t + 1, n, remaining - 1, current, visit);
        current.pop();
    }
}

/// Direction of the level change at a change point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Level rose (or stayed equal) across the divider.
    Positive,
    /// Level fell across the divider.
    Negative,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Positive => "positive",
            Direction::Negative => "negative",
        })
    }
}

/// Sign of median(after) − median(before) around an interior divider of `seg`.
/// A zero difference counts as positive.
pub fn classify_inflection(series: &[f64], seg: &Segmentation, divider: usize) -> Result<Direction> {
    if seg.series_length() != series.len() {
        return Err(Error::invalid("segmentation does not match series length"));
    }
    let d = seg.dividers();
    let i = d[1..d.len() - 1]
        .iter()
        .position(|&t| t == divider)
        .map(|i| i + 1)
        .ok_or_else(|| Error::invalid(format!("{divider} is not an interior divider")))?;
    let before = component_median(&series[d[i - 1]..d[i]])?;
    let after = component_median(&series[d[i]..d[i + 1]])?;
    Ok(if after - before >= 0.0 {
        Direction::Positive
    } else {
        Direction::Negative
    })
}

/// Every change point of `seg` with its direction.
pub fn inflections(series: &[f64], seg: &Segmentation) -> Result<Vec<(usize, Direction)>> {
    seg.interior()
        .iter()
        .map(|&t| classify_inflection(series, seg, t).map(|dir| (t, dir)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn step(lo: f64, hi: f64, n_lo: usize, n_hi: usize) -> Vec<f64> {
        std::iter::repeat_n(lo, n_lo)
            .chain(std::iter::repeat_n(hi, n_hi))
            .collect()
    }

    #[test]
    fn single_step_found_exactly() {
        let s = step(0.0, 10.0, 5, 5);
        let seg = detect_fixed_k(&s, 1, 2).unwrap();
        assert_eq!(seg.dividers(), &[0, 5, 10]);
        assert_eq!(seg.total_cost(), 0.0);
        // oracle: all nine single-divider splits
        let best = (1..10)
            .map(|t| segment_cost_l1(&s, 0, t).unwrap() + segment_cost_l1(&s, t, 10).unwrap())
            .fold(f64::INFINITY, f64::min);
        assert_eq!(best, 0.0);
    }

    #[test]
    fn constant_series_ties_to_smallest_split() {
        let s = [4.0; 9];
        let seg = detect_fixed_k(&s, 1, 2).unwrap();
        assert_eq!(seg.dividers(), &[0, 2, 9]);
        assert_eq!(seg.total_cost(), 0.0);
        let seg = detect_fixed_k(&s, 2, 3).unwrap();
        assert_eq!(seg.dividers(), &[0, 3, 6, 9]);
    }

    #[test]
    fn infeasible_k_rejected() {
        assert!(detect_fixed_k(&[1.0; 5], 2, 2).is_err());
        assert!(detect_fixed_k(&[1.0; 5], 0, 1).is_err());
        assert!(detect_fixed_k(&[1.0; 5], 1, 0).is_err());
        assert!(detect_fixed_k(&[1.0, f64::NAN, 2.0], 1, 1).is_err());
    }

    #[test]
    fn brute_force_examples() {
        let seg = brute_force_segment(&[1.0, 9.0, 1.0], 2, 1).unwrap();
        assert_eq!(seg.dividers(), &[0, 1, 2, 3]);
        assert_eq!(seg.total_cost(), 0.0);
        let mut count = 0;
        enumerate(1, 3, 1, &mut Vec::new(), &mut |_| count += 1);
        assert_eq!(count, 2);
        assert!(brute_force_segment(&[0.0; 31], 1, 1).is_err());
        assert!(brute_force_segment(&[0.0; 20], 5, 1).is_err());
    }

    #[test]
    fn penalized_examples() {
        let flat = [3.0; 20];
        for beta in [0.1, 1.0, 100.0, f64::INFINITY] {
            assert_eq!(detect_penalized(&flat, beta, 2).unwrap().change_point_count(), 0);
        }
        let s = step(0.0, 10.0, 10, 10);
        let seg = detect_penalized(&s, 1.0, 2).unwrap();
        assert_eq!(seg.dividers(), &[0, 10, 20]);
        // enumeration: no split costs 100, the single split at 10 costs 0 + beta
        assert_eq!(segment_cost_l1(&s, 0, 20).unwrap(), 100.0);
        let seg = detect_penalized(&s, f64::INFINITY, 2).unwrap();
        assert_eq!(seg.change_point_count(), 0);
        assert!(detect_penalized(&s, -1.0, 2).is_err());
        assert!(detect_penalized(&s, f64::NAN, 2).is_err());
        assert!(detect_penalized(&[1.0], 0.5, 2).is_err());
    }

    #[test]
    fn default_penalty_is_positive() {
        assert!(default_penalty(&[1.0; 10]) > 0.0);
        assert!(default_penalty(&step(0.0, 10.0, 10, 10)) > 0.0);
        let s = step(0.0, 10.0, 10, 10);
        let seg = detect_penalized(&s, default_penalty(&s), 2).unwrap();
        assert_eq!(seg.dividers(), &[0, 10, 20]);
    }

    #[test]
    fn inflection_directions() {
        let down = step(10.0, 0.0, 6, 6);
        let seg = detect_fixed_k(&down, 1, 2).unwrap();
        assert_eq!(classify_inflection(&down, &seg, 6).unwrap(), Direction::Negative);
        let up = step(0.0, 10.0, 6, 6);
        let seg = detect_fixed_k(&up, 1, 2).unwrap();
        assert_eq!(classify_inflection(&up, &seg, 6).unwrap(), Direction::Positive);
        assert!(classify_inflection(&up, &seg, 0).is_err());
        assert!(classify_inflection(&up, &seg, 12).is_err());
        assert!(classify_inflection(&up, &seg, 3).is_err());
        let flat = [1.0; 8];
        let seg = detect_fixed_k(&flat, 1, 2).unwrap();
        assert_eq!(classify_inflection(&flat, &seg, 2).unwrap(), Direction::Positive);
    }

    #[test]
    fn multivariate_detection() {
        let a = step(0.0, 5.0, 6, 6);
        let b = step(2.0, -3.0, 6, 6);
        let seg = detect_fixed_k_multi(&[&a, &b], 1, 2).unwrap();
        assert_eq!(seg.dividers(), &[0, 6, 12]);
        assert_eq!(seg.total_cost(), 0.0);
    }

    #[test]
    fn longer_minimum_segments_break_k_monotonicity() {
        let s = [0.0, 8.0, 8.0, 0.0, 0.0, 0.0];
        assert_eq!(detect_fixed_k(&s, 1, 2).unwrap().total_cost(), 8.0);
        assert_eq!(detect_fixed_k(&s, 2, 2).unwrap().total_cost(), 16.0);
        assert_eq!(detect_fixed_k(&s, 2, 1).unwrap().total_cost(), 0.0);
    }

    #[test]
    fn evaluate_rejects_bad_dividers() {
        let s = [1.0, 2.0, 3.0];
        assert!(Segmentation::evaluate(&s, vec![0, 2]).is_err());
        assert!(Segmentation::evaluate(&s, vec![1, 3]).is_err());
        assert!(Segmentation::evaluate(&s, vec![0, 2, 2, 3]).is_err());
        assert!(Segmentation::evaluate(&s, vec![0, 3]).is_ok());
    }

    fn int_series(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0i32..=20, 4..=max_len).prop_map(|v| v.into_iter().map(f64::from).collect())
    }

    proptest! {
        #[test]
        fn dp_agrees_with_brute_force(s in int_series(24), k in 1usize..=3, m in 1usize..=3) {
            prop_assume!((k + 1) * m <= s.len());
            let dp = detect_fixed_k(&s, k, m).unwrap();
            let bf = brute_force_segment(&s, k, m).unwrap();
            prop_assert_eq!(dp.total_cost(), bf.total_cost());
            prop_assert_eq!(dp.dividers(), bf.dividers());
        }

        #[test]
        fn returned_cost_is_recomputable(s in int_series(30), k in 1usize..=4) {
            prop_assume!((k + 1) * 2 <= s.len());
            let seg = detect_fixed_k(&s, k, 2).unwrap();
            let mut recomputed = 0.0;
            for (a, b) in seg.segments() {
                recomputed += segment_cost_l1(&s, a, b).unwrap();
            }
            prop_assert_eq!(seg.total_cost(), recomputed);
            let cache = CostCache::build(&s);
            let via_cache: f64 = seg.segments().map(|(a, b)| cache.cost(a, b)).sum();
            prop_assert_eq!(via_cache, recomputed);
        }

        // Holds for m = 1 only; see `longer_minimum_segments_break_k_monotonicity`.
        #[test]
        fn cost_non_increasing_in_k(s in int_series(30)) {
            let mut prev = f64::INFINITY;
            for k in 1..=(s.len() - 1).min(6) {
                let c = detect_fixed_k(&s, k, 1).unwrap().total_cost();
                prop_assert!(c <= prev);
                prev = c;
            }
        }

        #[test]
        fn dividers_invariant_under_translation_and_scaling(
            s in int_series(24), k in 1usize..=3, shift in -500i32..500, scale in prop::sample::select(vec![-3.0, -1.0, 0.5, 2.0, 4.0]),
        ) {
            prop_assume!((k + 1) * 2 <= s.len());
            let base = detect_fixed_k(&s, k, 2).unwrap();
            let moved: Vec<f64> = s.iter().map(|v| v + f64::from(shift)).collect();
            let scaled: Vec<f64> = s.iter().map(|v| v * scale).collect();
            let m = detect_fixed_k(&moved, k, 2).unwrap();
            prop_assert_eq!(m.dividers(), base.dividers());
            prop_assert_eq!(m.total_cost(), base.total_cost());
            let sc = detect_fixed_k(&scaled, k, 2).unwrap();
            prop_assert_eq!(sc.dividers(), base.dividers());
            prop_assert_eq!(sc.total_cost(), f64::abs(scale) * base.total_cost());
        }

        #[test]
        fn change_points_non_increasing_in_beta(s in int_series(40)) {
            let mut prev = usize::MAX;
            for i in 0..=40 {
                let beta = f64::from(i) * 0.75;
                let n = detect_penalized(&s, beta, 2).unwrap().change_point_count();
                prop_assert!(n <= prev, "beta {} gave {} after {}", beta, n, prev);
                prev = n;
            }
        }

        #[test]
        fn penalized_matches_best_fixed_k(s in int_series(20), beta in 0.5f64..30.0) {
            let seg = detect_penalized(&s, beta, 2).unwrap();
            let zero = segment_cost_l1(&s, 0, s.len()).unwrap();
            let mut best = zero;
            for k in 1..=(s.len() / 2 - 1).min(4) {
                let c = brute_force_segment(&s, k, 2).unwrap().total_cost() + beta * k as f64;
                best = best.min(c);
            }
            let got = seg.total_cost() + beta * seg.change_point_count() as f64;
            if seg.change_point_count() <= 4 {
                prop_assert!((got - best).abs() < 1e-9);
            } else {
                prop_assert!(got <= best + 1e-9);
            }
        }
    }
}
