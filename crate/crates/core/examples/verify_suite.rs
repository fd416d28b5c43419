//! Runs the acceptance suite at the default resolution and prints one line per criterion.
//!
//! `cargo run --release --example verify_suite [criterion ...]`

use beltrami_lab::verify::{run_verify_with, VerifyConfig};
use std::time::Instant;

fn main() -> beltrami_lab::Result<()> {
    let cfg = VerifyConfig {
        only: std::env::args().skip(1).collect(),
        ..VerifyConfig::default()
    };
    let start = Instant::now();
    let report = run_verify_with(&cfg, |c| {
        println!("{}  [{:.1}s]", c.summary_line(), start.elapsed().as_secs_f64())
    })?;
    println!(
        "{}",
        if report.all_passed {
            "all criteria pass"
        } else {
            "some criteria fail"
        }
    );
    Ok(())
}
