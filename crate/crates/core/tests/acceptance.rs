//! Acceptance suite at the default grid: one PASS/FAIL line per criterion, each
//! at its own tolerance. Exits nonzero if any criterion fails.

use beltrami_lab::verify::{run_verify_with, VerifyConfig, CRITERIA};
use std::time::Instant;

fn main() {
    // Arguments act like test-name filters: criterion ids select, anything else matches nothing.
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let only: Vec<String> = filters
        .iter()
        .filter(|f| CRITERIA.iter().any(|(id, _)| id == f))
        .cloned()
        .collect();
    if !filters.is_empty() && only.is_empty() {
        println!("acceptance: no criteria match {filters:?}");
        return;
    }
    let cfg = VerifyConfig {
        only,
        ..VerifyConfig::default()
    };
    let start = Instant::now();
    let report = run_verify_with(&cfg, |c| {
        println!("{}", c.summary_line());
        for check in c.checks.iter().filter(|k| !k.passed) {
            println!("    {} = {:.3e} > {:.1e}", check.name, check.value, check.tolerance);
        }
    })
    .unwrap_or_else(|e| {
        eprintln!("acceptance suite could not run: {e}");
        std::process::exit(2);
    });
    let failed = report.criteria.iter().filter(|c| !c.passed).count();
    println!(
        "acceptance: {} of {} criteria passed in {:.1}s",
        report.criteria.len() - failed,
        report.criteria.len(),
        start.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
