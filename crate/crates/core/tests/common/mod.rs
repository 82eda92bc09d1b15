#![allow(dead_code)]

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use polichange::pipeline::{self, PipelineConfig, PipelineOutput};

/// The shipped fixture config with paths relative to the package root, which
/// is the working directory of integration tests.
pub fn fixture_config() -> PipelineConfig {
    let mut cfg = PipelineConfig::from_json_file(Path::new("fixtures/config.json")).unwrap();
    cfg.requests = Some("fixtures/requests.csv".into());
    cfg.bills = Some("fixtures/bills.csv".into());
    cfg
}

pub fn run_fixture() -> PipelineOutput {
    pipeline::run(&fixture_config(), None).unwrap()
}

pub fn golden_dir() -> PathBuf {
    PathBuf::from("tests/golden")
}

/// Compare `actual` with the golden file, or rewrite it when
/// POLICHANGE_BLESS=1.
pub fn check_golden(name: &str, actual: &[u8]) {
    let path = golden_dir().join(name);
    if std::env::var("POLICHANGE_BLESS").as_deref() == Ok("1") {
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        fs::write(&path, actual).unwrap();
        return;
    }
    let expected =
        fs::read(&path).unwrap_or_else(|e| panic!("{}: {e} (set POLICHANGE_BLESS=1 to create)", path.display()));
    assert!(
        expected == actual,
        "{} differs from the current output (set POLICHANGE_BLESS=1 to regenerate)",
        path.display()
    );
}

/// Rows of the committed (df, x, upper tail) reference table.
pub fn reference_rows() -> Vec<(u32, f64, f64)> {
    include_str!("../data/chi2_reference.csv")
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[1].parse().unwrap(), f[2].parse().unwrap())
        })
        .collect()
}

/// Γ(df/2) from factorials, exact for the integer and half-integer arguments
/// that occur here.
fn gamma_half(df: u32) -> f64 {
    let factorial = |n: u32| (1..=n).map(f64::from).product::<f64>();
    if df.is_multiple_of(2) {
        factorial(df / 2 - 1)
    } else {
        let n = (df - 1) / 2;
        PI.sqrt() * factorial(2 * n) / (4f64.powi(n as i32) * factorial(n))
    }
}

/// Upper tail of the chi-square density by composite Simpson after the
/// substitution t = s², which leaves the smooth integrand s^(df−1)·e^(−s²/2).
pub fn sf_by_quadrature(x: f64, df: u32) -> f64 {
    let k = f64::from(df);
    let norm = 2.0 / (2f64.powf(k / 2.0) * gamma_half(df));
    let f = |s: f64| norm * s.powf(k - 1.0) * (-s * s / 2.0).exp();
    let (a, b) = (x.sqrt(), (x + 400.0).sqrt());
    let n = 20_000;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        acc += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}
