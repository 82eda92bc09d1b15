use std::time::{Duration, Instant};

use polichange::parallel::Execution;
use polichange::seasonal::deseasonalize;
use polichange::segmentation::{
    brute_force_segment, classify_inflection, default_penalty, detect_fixed_k, detect_penalized, inflections,
    precompute_costs, segment_cost_l1, CostCache, Direction,
};
use polichange::synth::step_series;
use proptest::prelude::*;

#[test]
fn noisy_steps_report_generator_direction() {
    for seed in 0..30u64 {
        let sign = if seed % 2 == 0 { 1.0 } else { -1.0 };
        let s = step_series(seed, 96, 48, sign * 4.0, 0.0, 1.0);
        let seg = detect_fixed_k(&s, 1, 2).unwrap();
        let d = seg.interior()[0];
        assert!(d.abs_diff(48) <= 2, "seed {seed}: divider {d}");
        let expected = if sign > 0.0 {
            Direction::Positive
        } else {
            Direction::Negative
        };
        assert_eq!(classify_inflection(&s, &seg, d).unwrap(), expected, "seed {seed}");
    }
}

#[test]
fn seasonal_step_recovered_after_deseasonalizing() {
    let s = step_series(5, 96, 48, -3.0, 2.0, 1.0);
    let (_, r) = deseasonalize(&s, 12, 0).unwrap();
    let seg = detect_penalized(&r, default_penalty(&r), 2).unwrap();
    let found = inflections(&r, &seg).unwrap();
    assert!(
        found
            .iter()
            .any(|&(d, dir)| d.abs_diff(48) <= 1 && dir == Direction::Negative),
        "{found:?}"
    );
}

#[test]
fn cache_for_96_months_is_quick_and_exact() {
    let s: Vec<f64> = step_series(1, 96, 48, 3.0, 2.0, 1.0)
        .iter()
        .map(|v| (v * 10.0).round())
        .collect();
    let started = Instant::now();
    let cache = CostCache::build_with(&s, Execution::Sequential);
    assert!(started.elapsed() < Duration::from_secs(1));
    assert_eq!(cache.entry_count(), 96 * 97 / 2);
    for a in 0..96 {
        for b in a + 1..=96 {
            assert_eq!(cache.cost(a, b), segment_cost_l1(&s, a, b).unwrap(), "({a},{b})");
        }
    }
    assert_eq!(
        CostCache::build_with(&s, Execution::Parallel).entry_count(),
        cache.entry_count()
    );
}

#[test]
fn single_point_cache() {
    let c = precompute_costs(&[4.0]);
    assert_eq!(c.entry_count(), 1);
    assert_eq!(c.cost(0, 1), 0.0);
}

fn l1_about(values: &[f64], center: f64) -> f64 {
    values.iter().map(|v| (v - center).abs()).sum()
}

proptest! {
    #[test]
    fn even_segment_cost_ignores_median_choice(mut v in prop::collection::vec(-1000i32..1000, 1..20)) {
        if v.len() % 2 == 1 {
            v.push(0);
        }
        let s: Vec<f64> = v.iter().map(|&x| f64::from(x)).collect();
        let mut sorted = s.clone();
        sorted.sort_by(f64::total_cmp);
        let h = s.len() / 2;
        let cost = segment_cost_l1(&s, 0, s.len()).unwrap();
        prop_assert_eq!(cost, l1_about(&s, sorted[h - 1]));
        prop_assert_eq!(cost, l1_about(&s, sorted[h]));
    }

    #[test]
    fn fixed_k_agrees_with_exhaustive_search(v in prop::collection::vec(0u8..=20, 4..=24), k in 1usize..=3) {
        let s: Vec<f64> = v.iter().map(|&x| f64::from(x)).collect();
        prop_assume!(k + 1 < s.len());
        let dp = detect_fixed_k(&s, k, 1).unwrap();
        let bf = brute_force_segment(&s, k, 1).unwrap();
        prop_assert_eq!(dp.dividers(), bf.dividers());
        prop_assert_eq!(dp.total_cost(), bf.total_cost());
    }

    #[test]
    fn cost_is_translation_invariant(v in prop::collection::vec(-100i32..100, 1..30), c in -1000i32..1000) {
        let s: Vec<f64> = v.iter().map(|&x| f64::from(x)).collect();
        let t: Vec<f64> = s.iter().map(|x| x + f64::from(c)).collect();
        prop_assert_eq!(segment_cost_l1(&s, 0, s.len()).unwrap(), segment_cost_l1(&t, 0, t.len()).unwrap());
    }
}
