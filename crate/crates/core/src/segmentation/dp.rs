//! Exact search over segmentations.
//!
//! Both solvers run the recursion backwards (best cost of the suffix starting
//! at `s`) so that the forward reconstruction can take the smallest feasible
//! next divider among exact ties, which yields the lexicographically smallest
//! optimal divider list.

use super::cost::CostCache;
use crate::error::{Error, Result};

/// Minimum-cost dividers `[0, t_1, .., t_K, T]` with exactly `k` interior
/// dividers and every segment at least `min_len` long.
#[allow(clippy::needless_range_loop)] // s and t index several tables at once
pub(crate) fn fixed_k(cache: &CostCache, k: usize, min_len: usize) -> Result<Vec<usize>> {
    let n = cache.len();
    check_feasible(n, k, min_len)?;
    let segments = k + 1;
    // best[j][s]: optimal cost of cutting [s, n) into j segments.
    let mut best = vec![vec![f64::INFINITY; n + 1]; segments + 1];
    for s in 0..n {
        if n - s >= min_len {
            best[1][s] = cache.cost(s, n);
        }
    }
    for j in 2..=segments {
        let tail = (j - 1) * min_len;
        for s in 0..n {
            if n - s < j * min_len {
                continue;
            }
            let mut acc = f64::INFINITY;
            for t in s + min_len..=n - tail {
                let v = cache.cost(s, t) + best[j - 1][t];
                if v < acc {
                    acc = v;
                }
            }
            best[j][s] = acc;
        }
    }

    let mut dividers = Vec::with_capacity(segments + 1);
    dividers.push(0);
    let mut s = 0;
    for j in (2..=segments).rev() {
        let target = best[j][s];
        let tail = (j - 1) * min_len;
        let t = (s + min_len..=n - tail)
            .find(|&t| cache.cost(s, t) + best[j - 1][t] == target)
            .expect("optimum is attained");
        dividers.push(t);
        s = t;
    }
    dividers.push(n);
    Ok(dividers)
}

/// Minimum of cost + `beta` × (interior dividers) over every admissible
/// segmentation. `beta` may be `+inf`.
pub(crate) fn penalized(cache: &CostCache, beta: f64, min_len: usize) -> Result<Vec<usize>> {
    let n = cache.len();
    if beta.is_nan() || beta < 0.0 {
        return Err(Error::invalid(format!("penalty must be non-negative, got {beta}")));
    }
    check_min_len(min_len)?;
    if n < min_len {
        return Err(Error::invalid(format!(
            "series of length {n} is shorter than the minimum segment length {min_len}"
        )));
    }
    // best[s]: optimal penalized cost of [s, n); a cut at t < n costs beta.
    let mut best = vec![f64::INFINITY; n + 1];
    let step = |s: usize, t: usize, best: &[f64]| {
        if t == n {
            cache.cost(s, n)
        } else {
            cache.cost(s, t) + beta + best[t]
        }
    };
    let candidates = |s: usize| {
        let last_cut = n.saturating_sub(min_len);
        (s + min_len..=last_cut).chain(std::iter::once(n))
    };
    for s in (0..=n - min_len).rev() {
        let mut acc = f64::INFINITY;
        for t in candidates(s) {
            let v = step(s, t, &best);
            if v < acc {
                acc = v;
            }
        }
        best[s] = acc;
    }

    let mut dividers = vec![0];
    let mut s = 0;
    while s < n {
        let target = best[s];
        let t = candidates(s)
            .find(|&t| step(s, t, &best) == target)
            .expect("optimum is attained");
        dividers.push(t);
        s = t;
    }
    Ok(dividers)
}

pub(crate) fn check_min_len(min_len: usize) -> Result<()> {
    if min_len == 0 {
        return Err(Error::invalid("minimum segment length must be at least 1"));
    }
    Ok(())
}

pub(crate) fn check_feasible(n: usize, k: usize, min_len: usize) -> Result<()> {
    check_min_len(min_len)?;
    if (k + 1).saturating_mul(min_len) > n {
        return Err(Error::invalid(format!(
            "{k} change points with minimum segment length {min_len} do not fit in {n} points"
        )));
    }
    Ok(())
}
