//! Regenerate the bundled fixture: `cargo run --example generate_fixture [dir]`.

use std::fs;
use std::path::PathBuf;

use polichange::synth::{generate_fixture, FixtureSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures"));
    fs::create_dir_all(&dir)?;
    let fixture = generate_fixture(&FixtureSpec::default())?;
    fs::write(dir.join("requests.csv"), &fixture.requests_csv)?;
    fs::write(dir.join("bills.csv"), &fixture.bills_csv)?;
    println!(
        "wrote {} request rows and {} bill rows to {}",
        fixture.requests_csv.lines().count() - 1,
        fixture.bills_csv.lines().count() - 1,
        dir.display()
    );
    Ok(())
}
