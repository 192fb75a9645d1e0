//! Acceptance suite: prints one PASS/FAIL line per criterion and fails the
//! test run if any criterion fails.

use std::process::ExitCode;

fn main() -> ExitCode {
    let seed = std::env::var("SRGEO_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(0);
    let results = srgeo::checks::run_all(seed);
    for r in &results {
        println!("{r}");
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
