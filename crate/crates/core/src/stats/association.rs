//! Circular-shift permutation test linking bill activity to change points.
//!
//! The statistic is the number of bills falling within `window` months of any
//! change point (each month counted once). The null rotates the bill series by
//! a uniform random offset, which keeps its seasonality and autocorrelation but
//! breaks its alignment with the change points.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::parallel::{self, Execution};

pub const DEFAULT_WINDOW_MONTHS: usize = 3;
pub const DEFAULT_PERMUTATIONS: usize = 9_999;
pub const MIN_PERMUTATIONS: usize = 99;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssociationResult {
    pub observed_statistic: f64,
    pub permutation_count: usize,
    /// Permutations whose statistic reached the observed one.
    pub exceedances: usize,
    /// (1 + exceedances) / (1 + permutation_count).
    pub p_value: f64,
    pub window_months: usize,
}

/// Months within `window` of any divider.
pub fn window_mask(len: usize, dividers: &[usize], window: usize) -> Vec<bool> {
    let mut mask = vec![false; len];
    for &d in dividers {
        let lo = d.saturating_sub(window);
        let hi = (d + window).min(len.saturating_sub(1));
        for m in mask.iter_mut().take(hi + 1).skip(lo) {
            *m = true;
        }
    }
    mask
}

fn masked_sum(mask: &[bool], bills: &[f64], shift: usize) -> f64 {
    let n = bills.len();
    mask.iter()
        .enumerate()
        .filter(|(_, &m)| m)
        .map(|(t, _)| bills[(t + n - shift) % n])
        .sum()
}

pub fn permutation_association(
    dividers: &[usize],
    bill_series: &[f64],
    window_months: usize,
    n_perm: usize,
    seed: u64,
) -> Result<AssociationResult> {
    permutation_association_with(dividers, bill_series, window_months, n_perm, seed, Execution::default())
}

/// As [`permutation_association`], with an explicit execution strategy. The
/// result does not depend on `exec`.
pub fn permutation_association_with(
    dividers: &[usize],
    bill_series: &[f64],
    window_months: usize,
    n_perm: usize,
    seed: u64,
    exec: Execution,
) -> Result<AssociationResult> {
    let n = bill_series.len();
    if n < 2 {
        return Err(Error::invalid("bill series needs at least two months"));
    }
    if n_perm < MIN_PERMUTATIONS {
        return Err(Error::invalid(format!(
            "need at least {MIN_PERMUTATIONS} permutations, got {n_perm}"
        )));
    }
    if bill_series.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("bill series contains non-finite values"));
    }
    if dividers.is_empty() {
        return Err(Error::degenerate("no change points: association undefined"));
    }
    if let Some(d) = dividers.iter().find(|&&d| d == 0 || d >= n) {
        return Err(Error::invalid(format!(
            "divider {d} is not interior to a series of length {n}"
        )));
    }

    let mask = window_mask(n, dividers, window_months);
    // A rotation only matters modulo n, so score each of the n offsets once.
    let by_shift = parallel::map_range(n, exec, |s| masked_sum(&mask, bill_series, s));
    let observed = by_shift[0];

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let exceedances = (0..n_perm)
        .filter(|_| by_shift[rng.random_range(0..n)] >= observed)
        .count();
    Ok(AssociationResult {
        observed_statistic: observed,
        permutation_count: n_perm,
        exceedances,
        p_value: (1 + exceedances) as f64 / (1 + n_perm) as f64,
        window_months,
    })
}
