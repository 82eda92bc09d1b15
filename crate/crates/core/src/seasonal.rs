//! Additive month-of-year seasonal profiles.
//!
//! A profile holds one offset per phase of the cycle. Offsets are the per-phase
//! means of the series minus the mean of those per-phase means, so they sum to
//! zero. Phase `p` covers every observation whose cycle position is `p`; for
//! calendar data the aligned variants put January at phase 0 regardless of
//! where the series starts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MONTHS_PER_YEAR: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeasonalProfile {
    period: usize,
    offsets: Vec<f64>,
}

impl SeasonalProfile {
    pub fn zero(period: usize) -> Self {
        Self {
            period,
            offsets: vec![0.0; period],
        }
    }

    pub fn period(&self) -> usize {
        self.period
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }
}

/// Estimate the profile with position 0 at phase 0.
pub fn estimate_seasonal_profile(series: &[f64], period: usize) -> Result<SeasonalProfile> {
    estimate_seasonal_profile_aligned(series, period, 0)
}

/// Estimate the profile when `series[0]` sits at phase `first_phase`.
pub fn estimate_seasonal_profile_aligned(series: &[f64], period: usize, first_phase: usize) -> Result<SeasonalProfile> {
    if period == 0 {
        return Err(Error::invalid("seasonal period must be positive"));
    }
    if series.len() < period {
        return Err(Error::invalid(format!(
            "series of length {} is shorter than the period {period}",
            series.len()
        )));
    }
    let mut sums = vec![0.0; period];
    let mut counts = vec![0usize; period];
    for (t, &y) in series.iter().enumerate() {
        let p = (first_phase + t) % period;
        sums[p] += y;
        counts[p] += 1;
    }
    let means: Vec<f64> = sums.iter().zip(&counts).map(|(s, &n)| s / n as f64).collect();
    let grand = means.iter().sum::<f64>() / period as f64;
    Ok(SeasonalProfile {
        period,
        offsets: means.iter().map(|m| m - grand).collect(),
    })
}

/// `series[t] - offsets[t mod period]`.
pub fn remove_seasonal(series: &[f64], profile: &SeasonalProfile) -> Vec<f64> {
    remove_seasonal_aligned(series, profile, 0)
}

pub fn remove_seasonal_aligned(series: &[f64], profile: &SeasonalProfile, first_phase: usize) -> Vec<f64> {
    series
        .iter()
        .enumerate()
        .map(|(t, y)| y - profile.offsets[(first_phase + t) % profile.period])
        .collect()
}

/// Estimate and remove in one step; returns the profile and the residual.
pub fn deseasonalize(series: &[f64], period: usize, first_phase: usize) -> Result<(SeasonalProfile, Vec<f64>)> {
    let profile = estimate_seasonal_profile_aligned(series, period, first_phase)?;
    let residual = remove_seasonal_aligned(series, &profile, first_phase);
    Ok((profile, residual))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn variance(xs: &[f64]) -> f64 {
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64
    }

    #[test]
    fn constant_series_has_flat_profile() {
        let p = estimate_seasonal_profile(&[5.0; 24], 12).unwrap();
        assert!(p.offsets().iter().all(|&o| o == 0.0));
    }

    #[test]
    fn exact_recovery_of_periodic_pattern() {
        let pattern = [3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0, 5.0, 3.0, 5.0, 8.0];
        let mean = pattern.iter().sum::<f64>() / 12.0;
        let series: Vec<f64> = pattern.iter().chain(pattern.iter()).copied().collect();
        let p = estimate_seasonal_profile(&series, 12).unwrap();
        for (o, x) in p.offsets().iter().zip(pattern) {
            assert!((o - (x - mean)).abs() < 1e-12);
        }
        let resid = remove_seasonal(&series, &p);
        assert!(variance(&resid) <= 1e-18);
    }

    #[test]
    fn step_survives_up_to_a_shift() {
        let season = [2.0, -1.0, 0.5, 3.0, -2.0, 1.0, 0.0, -0.5, 1.5, -3.0, 0.25, -1.75];
        let step: Vec<f64> = (0..48).map(|t| if t < 24 { 0.0 } else { 7.0 }).collect();
        let series: Vec<f64> = step.iter().enumerate().map(|(t, s)| s + season[t % 12]).collect();
        let (_, resid) = deseasonalize(&series, 12, 0).unwrap();
        let rm = resid.iter().sum::<f64>() / 48.0;
        let sm = step.iter().sum::<f64>() / 48.0;
        for (r, s) in resid.iter().zip(&step) {
            assert!(((r - rm) - (s - sm)).abs() < 1e-9);
        }
    }

    #[test]
    fn alignment_puts_january_at_phase_zero() {
        // series starts in April (phase 3); spike every January
        let series: Vec<f64> = (0..36).map(|t| if (3 + t) % 12 == 0 { 12.0 } else { 0.0 }).collect();
        let p = estimate_seasonal_profile_aligned(&series, 12, 3).unwrap();
        assert!((p.offsets()[0] - 11.0).abs() < 1e-12);
        assert!(p.offsets()[1..].iter().all(|o| (o + 1.0).abs() < 1e-12));
    }

    #[test]
    fn partial_final_cycle_allowed() {
        let series: Vec<f64> = (0..18).map(|t| (t % 12) as f64).collect();
        let p = estimate_seasonal_profile(&series, 12).unwrap();
        assert_eq!(p.offsets().len(), 12);
        assert!(p.offsets().iter().sum::<f64>().abs() < 1e-9);
    }

    #[test]
    fn too_short_rejected() {
        assert!(estimate_seasonal_profile(&[1.0; 11], 12).is_err());
        assert!(estimate_seasonal_profile(&[1.0; 11], 0).is_err());
    }

    #[test]
    fn zero_profile_is_identity() {
        let s = [1.5, -2.0, 3.25];
        assert_eq!(remove_seasonal(&s, &SeasonalProfile::zero(12)), s.to_vec());
    }

    proptest! {
        #[test]
        fn residual_phase_means_equal_grand_mean(
            cycles in 1usize..6,
            values in prop::collection::vec(-100.0f64..100.0, 72),
            phase in 0usize..12,
        ) {
            let series = &values[..cycles * 12];
            let (profile, resid) = deseasonalize(series, 12, phase).unwrap();
            prop_assert!(profile.offsets().iter().sum::<f64>().abs() < 1e-9);
            let grand = resid.iter().sum::<f64>() / resid.len() as f64;
            for p in 0..12 {
                let at: Vec<f64> = resid.iter().enumerate()
                    .filter(|(t, _)| (phase + t) % 12 == p).map(|(_, v)| *v).collect();
                let m = at.iter().sum::<f64>() / at.len() as f64;
                prop_assert!((m - grand).abs() < 1e-9);
            }
        }

        #[test]
        fn linear_in_constant_shift(
            values in prop::collection::vec(-50.0f64..50.0, 12..60),
            c in -1e3f64..1e3,
        ) {
            let shifted: Vec<f64> = values.iter().map(|v| v + c).collect();
            let (_, a) = deseasonalize(&values, 12, 0).unwrap();
            let (_, b) = deseasonalize(&shifted, 12, 0).unwrap();
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x + c - y).abs() < 1e-9);
            }
        }
    }
}
