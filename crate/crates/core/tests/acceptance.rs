//! Acceptance run: every criterion of the verification harness at full size,
//! one line per criterion. Exits non-zero if any asserted check fails.

use std::process::ExitCode;
use std::time::Instant;

use ckls_core::verify::{run_suite, CheckStatus, VerifyOptions, CHECKS};

fn main() -> ExitCode {
    let opts = VerifyOptions { workers: 0, ..VerifyOptions::default() };
    let mut failed = Vec::new();
    for (i, (name, _)) in CHECKS.iter().enumerate() {
        let start = Instant::now();
        let report = run_suite(name, &opts).expect("known suite");
        let verdict = if report.passed { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {name:<20} {verdict} ({:.1}s)", i + 1, start.elapsed().as_secs_f64());
        for c in &report.checks {
            let tag = match c.status {
                CheckStatus::Pass => "pass",
                CheckStatus::Fail => "FAIL",
                CheckStatus::ReportOnly => "report-only",
            };
            println!("    {tag:<11} {:<45} statistic {:.6} threshold {:.6} seed {}", c.name, c.statistic, c.threshold, c.seed);
            if c.status != CheckStatus::Pass {
                println!("                {}", c.details);
            }
        }
        if !report.passed {
            failed.push(i + 1);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failing criteria {failed:?}");
        ExitCode::FAILURE
    }
}
