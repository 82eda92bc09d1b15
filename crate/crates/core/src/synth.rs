//! Seeded synthetic data with known ground truth, used by tests, benches and
//! the bundled fixture.
//!
//! Every generator is a pure function of its arguments.

use std::f64::consts::PI;
use std::fmt::Write as _;

use chrono::{Datelike, NaiveDate, NaiveTime};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson, StandardNormal};

use crate::error::Result;
use crate::ingest::{CategoryMatrix, MonthSpan, ServiceRequestRecord, YearMonth};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn poisson(rng: &mut ChaCha8Rng, lambda: f64) -> usize {
    if lambda <= 0.0 {
        return 0;
    }
    Poisson::new(lambda).expect("positive rate").sample(rng) as usize
}

/// `step · [t ≥ step_at] + amplitude · sin(2πt/12) + N(0, sigma²)`.
pub fn step_series(seed: u64, len: usize, step_at: usize, step: f64, amplitude: f64, sigma: f64) -> Vec<f64> {
    let mut r = rng(seed);
    let noise = Normal::new(0.0, sigma).expect("finite sigma");
    (0..len)
        .map(|t| {
            let level = if t >= step_at { step } else { 0.0 };
            level + amplitude * (2.0 * PI * t as f64 / 12.0).sin() + noise.sample(&mut r)
        })
        .collect()
}

/// `n_correlated` rows equal to `loading · f + sqrt(1 − loading²) · e` for a
/// shared standard-normal factor `f`, followed by `n_independent` rows of pure
/// noise. Correlated pairs have population correlation `loading²`.
pub fn latent_factor_matrix(
    seed: u64,
    len: usize,
    n_correlated: usize,
    n_independent: usize,
    loading: f64,
) -> Result<CategoryMatrix> {
    let mut r = rng(seed);
    let factor: Vec<f64> = (0..len).map(|_| r.sample(StandardNormal)).collect();
    let idio = (1.0 - loading * loading).max(0.0).sqrt();
    let mut rows = Vec::with_capacity(n_correlated + n_independent);
    let mut labels = Vec::with_capacity(rows.capacity());
    for c in 0..n_correlated {
        rows.push(
            factor
                .iter()
                .map(|f| loading * f + idio * r.sample::<f64, _>(StandardNormal))
                .collect(),
        );
        labels.push(format!("Correlated {}", c + 1));
    }
    for c in 0..n_independent {
        rows.push((0..len).map(|_| r.sample(StandardNormal)).collect());
        labels.push(format!("Independent {}", c + 1));
    }
    CategoryMatrix::new(YearMonth::new(2010, 1)?, labels, rows)
}

/// Requests with Poisson(rate) events per category per month, together with
/// the generator's own tally.
pub struct PoissonRequests {
    pub records: Vec<ServiceRequestRecord>,
    pub tally: CategoryMatrix,
}

fn random_day(r: &mut ChaCha8Rng, month: YearMonth) -> NaiveDate {
    let first = NaiveDate::from_ymd_opt(month.year(), month.month(), 1).expect("valid month");
    let next = month.add_months(1);
    let last = NaiveDate::from_ymd_opt(next.year(), next.month(), 1).expect("valid month") - chrono::Days::new(1);
    first + chrono::Days::new(r.random_range(0..last.day() as u64))
}

fn random_time(r: &mut ChaCha8Rng) -> NaiveTime {
    NaiveTime::from_num_seconds_from_midnight_opt(r.random_range(0..86_400), 0).expect("in range")
}

pub fn poisson_requests(seed: u64, span: MonthSpan, rates: &[(&str, f64)]) -> Result<PoissonRequests> {
    let mut r = rng(seed);
    let mut records = Vec::new();
    let mut tally = vec![vec![0.0; span.len()]; rates.len()];
    for (t, month) in span.months().enumerate() {
        for (c, (label, rate)) in rates.iter().enumerate() {
            let n = poisson(&mut r, *rate);
            tally[c][t] = n as f64;
            for _ in 0..n {
                records.push(ServiceRequestRecord {
                    created_date: random_day(&mut r, month),
                    created_time: Some(random_time(&mut r)),
                    complaint_type: label.to_string(),
                });
            }
        }
    }
    let labels = rates.iter().map(|(l, _)| l.to_string()).collect();
    Ok(PoissonRequests {
        records,
        tally: CategoryMatrix::new(span.start, labels, tally)?,
    })
}

/// Counts per cell when `n` items each land in one of `cells` cells uniformly.
pub fn uniform_cell_counts(seed: u64, n: usize, cells: usize) -> Vec<f64> {
    let mut r = rng(seed);
    let mut counts = vec![0.0; cells];
    for _ in 0..n {
        counts[r.random_range(0..cells)] += 1.0;
    }
    counts
}

/// Independent Poisson(rate) counts.
pub fn poisson_series(seed: u64, len: usize, rate: f64) -> Vec<f64> {
    let mut r = rng(seed);
    (0..len).map(|_| poisson(&mut r, rate) as f64).collect()
}

/// Smooth zero-mean unit-variance AR(1) path.
fn ar1(r: &mut ChaCha8Rng, len: usize, phi: f64) -> Vec<f64> {
    let innov = (1.0 - phi * phi).sqrt();
    let mut x: f64 = r.sample(StandardNormal);
    (0..len)
        .map(|_| {
            let out = x;
            x = phi * x + innov * r.sample::<f64, _>(StandardNormal);
            out
        })
        .collect()
}

/// Layout of the bundled end-to-end fixture.
#[derive(Debug, Clone)]
pub struct FixtureSpec {
    pub seed: u64,
    pub start: YearMonth,
    pub months: usize,
    /// (category, mean monthly count).
    pub rates: Vec<(&'static str, f64)>,
    /// Categories whose rates share one latent factor.
    pub correlated: Vec<&'static str>,
    pub factor_loading: f64,
    /// Category whose rate drops at `step_month`.
    pub step_category: &'static str,
    pub step_month: usize,
    pub rate_after_step: f64,
    /// Relative amplitude of each category's yearly cycle.
    pub seasonal_amplitude: f64,
    /// Complaint types below the selection threshold.
    pub rare: Vec<(&'static str, f64)>,
    pub bill_start: YearMonth,
    pub bill_months: usize,
    pub bills_per_month: f64,
    /// Extra bills for `step_category` at these complaint-month indices.
    pub bill_cluster: Vec<usize>,
    pub bills_per_cluster_month: usize,
    pub malformed_rows: usize,
}

impl Default for FixtureSpec {
    fn default() -> Self {
        Self {
            seed: 20_240_601,
            start: YearMonth::new(2010, 1).expect("valid"),
            months: 96,
            rates: vec![
                ("Water System", 60.0),
                ("Dirty Conditions", 30.0),
                ("Sanitation Condition", 25.0),
                ("Rodent", 22.0),
                ("Food Establishment", 20.0),
                ("Air Quality", 10.0),
                ("Indoor Air Quality", 8.0),
                ("Food Poisoning", 6.0),
                ("Hazardous Materials", 24.0),
                ("Asbestos", 6.0),
                ("Smoking", 5.0),
                ("Drinking", 4.0),
                ("Water Quality", 4.0),
            ],
            correlated: vec!["Food Establishment", "Sanitation Condition", "Rodent"],
            factor_loading: 0.6,
            step_category: "Hazardous Materials",
            step_month: 48,
            rate_after_step: 6.0,
            seasonal_amplitude: 0.1,
            rare: vec![("Graffiti", 0.4), ("Noise - Residential", 0.3), ("Lead", 0.2)],
            bill_start: YearMonth::new(2011, 1).expect("valid"),
            bill_months: 72,
            bills_per_month: 35.0,
            bill_cluster: vec![47, 48, 49],
            bills_per_cluster_month: 8,
            malformed_rows: 12,
        }
    }
}

/// CSV text of a generated fixture.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub requests_csv: String,
    pub bills_csv: String,
}

fn titles(area: &str) -> &'static [&'static str] {
    match area {
        "Water System" => &[
            "Authorizes funding for water main replacement in older neighborhoods",
            "Requires annual inspection of fire hydrant pressure",
        ],
        "Dirty Conditions" => &[
            "Increases penalties for illegal dumping on vacant lots",
            "Establishes a graffiti removal program for small businesses",
        ],
        "Sanitation Condition" => &[
            "Expands curbside recycling to multiple dwellings",
            "Relates to garbage collection schedules in commercial districts",
        ],
        "Rodent" => &[
            "Requires landlords to remediate rat infestation within thirty days",
            "Establishes a rodent mitigation pilot near transit hubs",
        ],
        "Food Establishment" => &[
            "Prohibits the sale of sugary drinks in containers larger than sixteen ounces",
            "Requires calorie labeling on chain restaurant menus",
        ],
        "Air Quality" => &[
            "Limits vehicle idling near school buildings",
            "Sets emission standards for heating oil",
        ],
        "Indoor Air Quality" => &[
            "Requires mold assessment in public housing",
            "Mandates radon testing in day care centers",
        ],
        "Food Poisoning" => &["Strengthens food safety training for street vendors"],
        "Hazardous Materials" => &[
            "Regulates storage of hazardous substances near schools",
            "Restricts pesticide application in public parks",
            "Requires disclosure of toxic chemicals in children's products",
        ],
        "Asbestos" => &["Requires asbestos abatement notice to tenants"],
        "Smoking" => &[
            "Prohibits smoking in public parks and beaches",
            "Raises the minimum age to purchase tobacco",
        ],
        "Drinking" => &["Relates to underage drinking enforcement at sporting venues"],
        "Water Quality" => &[
            "Concentration of fluoride in water supplied to residents",
            "Requires testing for lead in water at public schools",
        ],
        _ => &[
            "Textbook Transparency Act",
            "Establishes a commission on municipal parking",
            "Relates to the terms of office of town justices",
            "Amends the election law regarding absentee ballots",
            "Provides for the designation of a state song",
            "Relates to tuition assistance for part-time students",
        ],
    }
}

fn subject(area: Option<&str>) -> &'static str {
    match area {
        Some(_) => "Health",
        None => "Government Operations",
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn noisy_case(r: &mut ChaCha8Rng, label: &str) -> String {
    match r.random_range(0..40) {
        0 => label.to_lowercase(),
        1 => label.to_uppercase(),
        2 => format!("  {label} "),
        _ => label.to_string(),
    }
}

/// Generate request and bill CSVs per `spec`.
pub fn generate_fixture(spec: &FixtureSpec) -> Result<Fixture> {
    let mut r = rng(spec.seed);
    let span = MonthSpan::new(spec.start, spec.start.add_months(spec.months as i64 - 1))?;
    let factor = ar1(&mut r, spec.months, 0.6);
    let phases: Vec<f64> = (0..spec.rates.len())
        .map(|i| 2.0 * PI * i as f64 / spec.rates.len() as f64)
        .collect();
    let shared_phase = phases[0];

    let mut events: Vec<(NaiveDate, NaiveTime, String)> = Vec::new();
    for (t, month) in span.months().enumerate() {
        let season = 2.0 * PI * f64::from(month.month() - 1) / 12.0;
        for (c, &(label, base)) in spec.rates.iter().enumerate() {
            let correlated = spec.correlated.contains(&label);
            let mut rate = if label == spec.step_category && t >= spec.step_month {
                spec.rate_after_step
            } else {
                base
            };
            let phase = if correlated { shared_phase } else { phases[c] };
            rate *= 1.0 + spec.seasonal_amplitude * (season + phase).sin();
            if correlated {
                rate *= (1.0 + spec.factor_loading * factor[t]).max(0.05);
            }
            for _ in 0..poisson(&mut r, rate) {
                events.push((
                    random_day(&mut r, month),
                    random_time(&mut r),
                    noisy_case(&mut r, label),
                ));
            }
        }
        for &(label, rate) in &spec.rare {
            for _ in 0..poisson(&mut r, rate) {
                events.push((random_day(&mut r, month), random_time(&mut r), label.to_string()));
            }
        }
    }
    events.sort();

    let mut requests = String::from("Unique Key,Created Date,Complaint Type,Borough\n");
    let boroughs = ["BRONX", "BROOKLYN", "MANHATTAN", "QUEENS", "STATEN ISLAND"];
    let mut malformed_at: Vec<usize> = (0..spec.malformed_rows)
        .map(|_| r.random_range(0..events.len().max(1)))
        .collect();
    malformed_at.sort_unstable();
    let mut key = 10_000_000u64;
    let mut bad = malformed_at.iter().peekable();
    for (i, (date, time, label)) in events.iter().enumerate() {
        while bad.next_if(|&&j| j == i).is_some() {
            key += 1;
            let row = match key % 3 {
                0 => format!("{key},13/45/2012 10:00:00 AM,Rodent,QUEENS"),
                1 => format!("{key},{},,BRONX", date.format("%m/%d/%Y")),
                _ => format!("{key},{}", date.and_time(*time).format("%m/%d/%Y %I:%M:%S %p")),
            };
            requests.push_str(&row);
            requests.push('\n');
        }
        key += 1;
        let stamp = date.and_time(*time).format("%m/%d/%Y %I:%M:%S %p");
        let borough = boroughs[r.random_range(0..boroughs.len())];
        let _ = writeln!(requests, "{key},{stamp},{},{borough}", csv_field(label));
    }

    // Bills: a background mix across areas plus a cluster for the step category.
    let bill_span = MonthSpan::new(spec.bill_start, spec.bill_start.add_months(spec.bill_months as i64 - 1))?;
    let areas: Vec<(Option<&str>, f64)> = std::iter::once((None, 0.6))
        .chain(spec.rates.iter().map(|&(l, _)| {
            let w = if l == spec.step_category {
                0.005
            } else {
                0.4 / (spec.rates.len() - 1) as f64
            };
            (Some(l), w)
        }))
        .collect();
    let total_w: f64 = areas.iter().map(|a| a.1).sum();
    let mut bills: Vec<(NaiveDate, String, Option<&str>)> = Vec::new();
    for month in bill_span.months() {
        for _ in 0..poisson(&mut r, spec.bills_per_month) {
            let mut u = r.random::<f64>() * total_w;
            let mut area = None;
            for &(a, w) in &areas {
                if u < w {
                    area = a;
                    break;
                }
                u -= w;
            }
            let pool = titles(area.unwrap_or(""));
            bills.push((
                random_day(&mut r, month),
                pool[r.random_range(0..pool.len())].to_string(),
                area,
            ));
        }
        let idx = spec.start.months_until(month);
        if idx >= 0 && spec.bill_cluster.contains(&(idx as usize)) {
            let pool = titles(spec.step_category);
            for _ in 0..spec.bills_per_cluster_month {
                bills.push((
                    random_day(&mut r, month),
                    pool[r.random_range(0..pool.len())].to_string(),
                    Some(spec.step_category),
                ));
            }
        }
    }
    bills.sort();
    let mut bills_csv = String::from("Bill Number,Create Date,Bill Title,Bill Subject\n");
    for (i, (date, title, area)) in bills.iter().enumerate() {
        let _ = writeln!(
            bills_csv,
            "S{:05},{},{},{}",
            i + 1,
            date.format("%Y-%m-%d"),
            csv_field(title),
            subject(*area)
        );
    }
    Ok(Fixture {
        requests_csv: requests,
        bills_csv,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{classify_bill, BillRecord, KeywordDictionary};

    #[test]
    fn generators_are_deterministic() {
        assert_eq!(
            step_series(3, 50, 20, 3.0, 2.0, 1.0),
            step_series(3, 50, 20, 3.0, 2.0, 1.0)
        );
        assert_ne!(
            step_series(3, 50, 20, 3.0, 2.0, 1.0),
            step_series(4, 50, 20, 3.0, 2.0, 1.0)
        );
        let a = generate_fixture(&FixtureSpec::default()).unwrap();
        let b = generate_fixture(&FixtureSpec::default()).unwrap();
        assert_eq!(a.requests_csv, b.requests_csv);
        assert_eq!(a.bills_csv, b.bills_csv);
    }

    #[test]
    fn fixture_titles_classify_to_their_area() {
        let dict = KeywordDictionary::builtin();
        let spec = FixtureSpec::default();
        let date = NaiveDate::from_ymd_opt(2012, 1, 1).unwrap();
        for area in spec.rates.iter().map(|r| Some(r.0)).chain([None]) {
            for title in titles(area.unwrap_or("")) {
                let bill = BillRecord {
                    create_date: date,
                    title: title.to_string(),
                    subject: String::new(),
                    health_area: None,
                };
                assert_eq!(classify_bill(&bill, &dict), area, "{title}");
            }
        }
    }

    #[test]
    fn uniform_counts_sum_to_n() {
        let c = uniform_cell_counts(1, 600, 6);
        assert_eq!(c.iter().sum::<f64>(), 600.0);
    }
}
